#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sdyn/integrators.hpp"
#include "sdyn/kernels.hpp"

namespace sdyn {

enum class Origin { generator, data };

// Where a fragment's coordinates came from: trajectory index within its
// batch's trajectory list, the reference slice t_k, and the slices in
// fragment order. Coordinate c maps to slices[c / dim], component c % dim.
struct SliceMap {
  std::size_t trajectory = 0;
  std::size_t start = 0;
  std::vector<std::size_t> slices;
};

// Flattened (time-major, then dimension) trajectory fragments.
struct FragmentBatch {
  Origin origin = Origin::data;
  std::size_t dim = 0;
  std::vector<std::vector<double>> fragments;
  std::vector<SliceMap> slice_maps;  // empty for raw sample batches

  std::size_t size() const { return fragments.size(); }
  std::size_t fragment_length() const { return fragments.empty() ? 0 : fragments.front().size(); }
  void validate() const;
};

// Throws InvalidArgument unless both batches compare the same relative slice
// pattern (slices - start) in every fragment.
void check_aligned(const FragmentBatch& a, const FragmentBatch& b);

// Unbiased MMD^2:
//   1/(N(N-1)) sum_{i!=j} k(X_i,X_j) - 2/(NM) sum_{i,j} k(X_i,Y_j) + 1/(M(M-1)) sum_{i!=j} k(Y_i,Y_j)
// Needs N, M >= 2. Rows are summed in index order, so the value does not
// depend on the worker count.
double mmd2_unbiased(const FragmentBatch& gen, const FragmentBatch& data, const KernelConfig& cfg,
                     std::size_t workers = 1);

// d(mmd2)/dX_i for each generated fragment: the XX partials in both
// arguments plus the XY partial. The YY term carries no parameter dependence.
std::vector<std::vector<double>> mmd2_cotangents(const FragmentBatch& gen, const FragmentBatch& data,
                                                 const KernelConfig& cfg, std::size_t workers = 1);

struct MmdValueGrad {
  double loss = 0.0;
  std::vector<double> grad;  // packed parameter layout
};

// Scatters the cotangents onto the generated trajectories, runs one adjoint
// solve per trajectory and sums the per-sample gradients in index order.
MmdValueGrad mmd2_value_and_grad(const FragmentBatch& gen, std::span<const Trajectory> gen_trajs,
                                 const FragmentBatch& data, const StepScheme& scheme, const KernelConfig& cfg,
                                 std::size_t workers = 1);

std::vector<double> mmd2_grad(const FragmentBatch& gen, std::span<const Trajectory> gen_trajs,
                              const FragmentBatch& data, const GenModelParams& p, const KernelConfig& cfg,
                              std::size_t workers = 1);

}  // namespace sdyn
