#include "sdyn/adjoint.hpp"

#include <cmath>
#include <string>

#include "sdyn/errors.hpp"

namespace sdyn {

AdjointState solve_adjoint(const Trajectory& traj, const StepScheme& scheme, std::span<const double> g_x) {
  const std::size_t d = traj.dim;
  const std::size_t n = traj.n_steps();
  const std::size_t m = scheme.order();
  if (scheme.dim() != d) throw InvalidArgument("scheme and trajectory dimensions differ");
  if (g_x.size() != (n + 1) * d)
    throw InvalidArgument("cotangent has " + std::to_string(g_x.size()) + " entries, expected " +
                          std::to_string((n + 1) * d));
  if (n < m) throw InvalidArgument("trajectory shorter than the scheme order");

  AdjointState adj;
  adj.sample_id = traj.sample_id;
  adj.dim = d;
  adj.r.assign((n + 1) * d, 0.0);

  // pending[k % m] collects contributions for slice k from already-solved
  // slices k+1..k+m.
  std::vector<std::vector<double>> pending(m, std::vector<double>(d, 0.0));
  for (std::size_t k = n + 1; k-- > 0;) {
    auto& acc = pending[k % m];
    double* rk = adj.r.data() + k * d;
    for (std::size_t i = 0; i < d; ++i) {
      rk[i] = g_x[k * d + i] + acc[i];
      if (!std::isfinite(rk[i])) throw AdjointBlowup(k);
      acc[i] = 0.0;
    }
    if (k < m) continue;
    // X_k = Psi_{k-1}(X_{k-1}, ..., X_{k-m}); push r_k to its arguments.
    const std::span<const double> rk_span(rk, d);
    for (std::size_t lag = 0; lag < m; ++lag) {
      const std::size_t target = k - 1 - lag;
      scheme.state_vjp(traj, k - 1, lag, rk_span, pending[target % m]);
    }
  }
  return adj;
}

AdjointState solve_adjoint(const Trajectory& traj, const GenModelParams& p, std::span<const double> g_x) {
  return solve_adjoint(traj, FaragoScheme(p), g_x);
}

void accumulate_gradient(const Trajectory& traj, const StepScheme& scheme, const AdjointState& adj,
                         std::span<double> out) {
  const std::size_t n = traj.n_steps();
  const std::size_t m = scheme.order();
  if (adj.dim != traj.dim || adj.n_slices() != n + 1)
    throw InvalidArgument("adjoint state does not match the trajectory shape");
  if (out.size() != scheme.num_params())
    throw InvalidArgument("gradient buffer has " + std::to_string(out.size()) + " entries, expected " +
                          std::to_string(scheme.num_params()));
  for (std::size_t k = m; k <= n; ++k) scheme.param_vjp(traj, k - 1, adj.slice(k), out);
}

std::vector<double> assemble_gradient(const Trajectory& traj, const StepScheme& scheme,
                                      const AdjointState& adj, std::span<const double> g_p_explicit) {
  if (g_p_explicit.size() != scheme.num_params())
    throw InvalidArgument("explicit parameter gradient has the wrong length");
  std::vector<double> grad(g_p_explicit.begin(), g_p_explicit.end());
  accumulate_gradient(traj, scheme, adj, grad);
  return grad;
}

std::vector<double> assemble_gradient(const Trajectory& traj, const GenModelParams& p,
                                      const AdjointState& adj, std::span<const double> g_p_explicit) {
  return assemble_gradient(traj, FaragoScheme(p), adj, g_p_explicit);
}

}  // namespace sdyn
