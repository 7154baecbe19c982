#include "sdyn/mmd_loss.hpp"

#include <string>

#include "sdyn/adjoint.hpp"
#include "sdyn/errors.hpp"
#include "sdyn/parallel.hpp"

namespace sdyn {

void FragmentBatch::validate() const {
  const std::size_t len = fragment_length();
  for (const auto& f : fragments)
    if (f.size() != len) throw InvalidArgument("fragments in a batch must have equal length");
  if (slice_maps.empty()) return;
  if (slice_maps.size() != fragments.size()) throw InvalidArgument("one slice map per fragment required");
  if (dim == 0) throw InvalidArgument("batch with slice maps needs dim > 0");
  for (const auto& m : slice_maps)
    if (m.slices.size() * dim != len) throw InvalidArgument("slice map length inconsistent with fragment length");
}

void check_aligned(const FragmentBatch& a, const FragmentBatch& b) {
  if (a.slice_maps.empty() || b.slice_maps.empty()) return;
  const SliceMap& ref = a.slice_maps.front();
  auto same_pattern = [&](const SliceMap& m) {
    if (m.slices.size() != ref.slices.size()) return false;
    for (std::size_t i = 0; i < m.slices.size(); ++i)
      if (m.slices[i] - m.start != ref.slices[i] - ref.start) return false;
    return true;
  };
  for (const auto& m : a.slice_maps)
    if (!same_pattern(m)) throw InvalidArgument("fragments compare different slice patterns");
  for (const auto& m : b.slice_maps)
    if (!same_pattern(m)) throw InvalidArgument("generated and data fragments compare different slice patterns");
}

namespace {

void check_batches(const FragmentBatch& gen, const FragmentBatch& data, const KernelConfig& cfg) {
  cfg.validate();
  if (gen.size() < 2 || data.size() < 2)
    throw InvalidBatch("unbiased MMD needs at least two samples per batch (got " + std::to_string(gen.size()) +
                       " and " + std::to_string(data.size()) + ")");
  gen.validate();
  data.validate();
  if (gen.fragment_length() != data.fragment_length())
    throw InvalidArgument("generated and data fragments differ in length");
  check_aligned(gen, data);
}

// sum_{j != skip} k(a[i], b[j]) for every i; skip == true drops j == i.
std::vector<double> row_sums(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
                             bool skip_diagonal, const KernelConfig& cfg, std::size_t workers) {
  std::vector<double> rows(a.size(), 0.0);
  parallel_for(a.size(), workers, [&](std::size_t i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (skip_diagonal && j == i) continue;
      acc += rqk_eval(a[i], b[j], cfg);
    }
    rows[i] = acc;
  });
  return rows;
}

double ordered_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

double mmd2_unbiased(const FragmentBatch& gen, const FragmentBatch& data, const KernelConfig& cfg,
                     std::size_t workers) {
  check_batches(gen, data, cfg);
  const double n = static_cast<double>(gen.size());
  const double m = static_cast<double>(data.size());
  const double xx = ordered_sum(row_sums(gen.fragments, gen.fragments, true, cfg, workers));
  const double xy = ordered_sum(row_sums(gen.fragments, data.fragments, false, cfg, workers));
  const double yy = ordered_sum(row_sums(data.fragments, data.fragments, true, cfg, workers));
  return xx / (n * (n - 1.0)) - 2.0 * xy / (n * m) + yy / (m * (m - 1.0));
}

std::vector<std::vector<double>> mmd2_cotangents(const FragmentBatch& gen, const FragmentBatch& data,
                                                 const KernelConfig& cfg, std::size_t workers) {
  check_batches(gen, data, cfg);
  const double n = static_cast<double>(gen.size());
  const double m = static_cast<double>(data.size());
  // d1k(x, y) = -s (x - y) and d2k(X_i, X_i0) = d1k(X_i0, X_i), so the
  // c1 and c2 sums coincide.
  const double w_xx = 2.0 / (n * (n - 1.0));
  const double w_xy = -2.0 / (n * m);
  const std::size_t len = gen.fragment_length();
  std::vector<std::vector<double>> cot(gen.size(), std::vector<double>(len, 0.0));
  parallel_for(gen.size(), workers, [&](std::size_t i) {
    const auto& xi = gen.fragments[i];
    auto& out = cot[i];
    for (std::size_t j = 0; j < gen.size(); ++j) {
      if (j == i) continue;
      const auto& xj = gen.fragments[j];
      const double s = rqk_terms(xi, xj, cfg).grad_scale;
      for (std::size_t c = 0; c < len; ++c) out[c] -= w_xx * s * (xi[c] - xj[c]);
    }
    for (std::size_t j = 0; j < data.size(); ++j) {
      const auto& yj = data.fragments[j];
      const double s = rqk_terms(xi, yj, cfg).grad_scale;
      for (std::size_t c = 0; c < len; ++c) out[c] -= w_xy * s * (xi[c] - yj[c]);
    }
  });
  return cot;
}

MmdValueGrad mmd2_value_and_grad(const FragmentBatch& gen, std::span<const Trajectory> gen_trajs,
                                 const FragmentBatch& data, const StepScheme& scheme, const KernelConfig& cfg,
                                 std::size_t workers) {
  if (gen.origin != Origin::generator) throw InvalidArgument("gradient batch must come from the generator");
  if (gen.slice_maps.size() != gen.size()) throw InvalidArgument("generated fragments need slice maps");
  const std::size_t d = gen.dim;
  for (std::size_t i = 0; i < gen.size(); ++i) {
    const SliceMap& map = gen.slice_maps[i];
    if (map.trajectory >= gen_trajs.size())
      throw InvalidArgument("provenance mismatch: fragment " + std::to_string(i) + " names a missing trajectory");
    const Trajectory& traj = gen_trajs[map.trajectory];
    if (traj.dim != d) throw InvalidArgument("provenance mismatch: trajectory dimension differs");
    for (std::size_t s = 0; s < map.slices.size(); ++s) {
      if (map.slices[s] > traj.n_steps())
        throw InvalidArgument("provenance mismatch: slice beyond trajectory horizon");
      const auto slice = traj.slice(map.slices[s]);
      for (std::size_t c = 0; c < d; ++c)
        if (gen.fragments[i][s * d + c] != slice[c])
          throw InvalidArgument("provenance mismatch: fragment " + std::to_string(i) +
                                " does not match its trajectory");
    }
  }

  MmdValueGrad result;
  result.loss = mmd2_unbiased(gen, data, cfg, workers);
  const auto cot = mmd2_cotangents(gen, data, cfg, workers);

  // Group fragments by trajectory so each sample gets a single adjoint solve.
  std::vector<std::vector<std::size_t>> by_traj(gen_trajs.size());
  for (std::size_t i = 0; i < gen.size(); ++i) by_traj[gen.slice_maps[i].trajectory].push_back(i);

  const std::size_t np = scheme.num_params();
  std::vector<std::vector<double>> per_sample(gen_trajs.size());
  parallel_for(gen_trajs.size(), workers, [&](std::size_t t) {
    if (by_traj[t].empty()) return;
    const Trajectory& traj = gen_trajs[t];
    std::vector<double> g_x((traj.n_steps() + 1) * d, 0.0);
    for (std::size_t i : by_traj[t]) {
      const SliceMap& map = gen.slice_maps[i];
      for (std::size_t s = 0; s < map.slices.size(); ++s)
        for (std::size_t c = 0; c < d; ++c) g_x[map.slices[s] * d + c] += cot[i][s * d + c];
    }
    const AdjointState adj = solve_adjoint(traj, scheme, g_x);
    per_sample[t].assign(np, 0.0);
    accumulate_gradient(traj, scheme, adj, per_sample[t]);
  });

  result.grad.assign(np, 0.0);
  for (const auto& g : per_sample) {
    if (g.empty()) continue;
    for (std::size_t k = 0; k < np; ++k) result.grad[k] += g[k];
  }
  return result;
}

std::vector<double> mmd2_grad(const FragmentBatch& gen, std::span<const Trajectory> gen_trajs,
                              const FragmentBatch& data, const GenModelParams& p, const KernelConfig& cfg,
                              std::size_t workers) {
  return mmd2_value_and_grad(gen, gen_trajs, data, FaragoScheme(p), cfg, workers).grad;
}

}  // namespace sdyn
