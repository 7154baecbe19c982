#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sdyn/integrators.hpp"

namespace sdyn {

// Solution r of J^T r = g_x^T for one sample, where J is the Jacobian of the
// residuals f_j = X_j - Psi_{j-1}(...) (and f_j = X_j - x_j for start-up
// slices). One d-vector per trajectory slice.
struct AdjointState {
  std::size_t sample_id = 0;
  std::size_t dim = 0;
  std::vector<double> r;

  std::size_t n_slices() const { return dim == 0 ? 0 : r.size() / dim; }
  std::span<const double> slice(std::size_t k) const { return {r.data() + k * dim, dim}; }
};

// Backward m-th order recurrence, k = N, N-1, ..., 0:
//   r_k = g_k + sum_{l=1..m} (dPsi_{k+l-1} / dX_k)^T r_{k+l}
// over the steps that exist. g_x holds dphi/dX for every slice (zeros where
// the loss does not read a slice). Memory is O(N d); no Jacobian is formed.
AdjointState solve_adjoint(const Trajectory& traj, const StepScheme& scheme, std::span<const double> g_x);
AdjointState solve_adjoint(const Trajectory& traj, const GenModelParams& p, std::span<const double> g_x);

// grad_p = g_p - r^T f_p = g_p + sum_{k>=m} (dPsi_{k-1}/dp)^T r_k. Start-up
// slices carry no parameter dependence and contribute nothing.
std::vector<double> assemble_gradient(const Trajectory& traj, const StepScheme& scheme,
                                      const AdjointState& adj, std::span<const double> g_p_explicit);
std::vector<double> assemble_gradient(const Trajectory& traj, const GenModelParams& p,
                                      const AdjointState& adj, std::span<const double> g_p_explicit);

// out += grad_p for one sample; skips the intermediate gradient vector.
void accumulate_gradient(const Trajectory& traj, const StepScheme& scheme, const AdjointState& adj,
                         std::span<double> out);

}  // namespace sdyn
