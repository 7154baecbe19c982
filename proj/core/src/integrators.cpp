#include "sdyn/integrators.hpp"

#include <cmath>
#include <stdexcept>

#include "sdyn/errors.hpp"
#include "sdyn/random.hpp"

namespace sdyn {

std::string to_string(ForceModel m) {
  switch (m) {
    case ForceModel::linear: return "linear";
    case ForceModel::neural: return "neural";
    case ForceModel::double_well: return "double_well";
  }
  return "unknown";
}

ForceModel force_model_from_string(const std::string& s) {
  if (s == "linear") return ForceModel::linear;
  if (s == "neural") return ForceModel::neural;
  if (s == "double_well") return ForceModel::double_well;
  throw InvalidArgument("unknown force model '" + s + "'");
}

double GenModelParams::sigma() const { return std::sqrt(2.0 * kbt * gamma); }

void GenModelParams::validate() const {
  if (!(mass > 0.0)) throw InvalidArgument("mass must be positive");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (!(gamma >= 0.0)) throw InvalidArgument("gamma must be non-negative");
  if (!(kbt >= 0.0)) throw InvalidArgument("kbt must be non-negative");
  if (!std::isfinite(stiffness)) throw InvalidArgument("stiffness must be finite");
  if (dim == 0) throw InvalidArgument("dim must be positive");
  if (n_steps < 2) throw InvalidArgument("n_steps must be at least the scheme order (2)");
  if (!const_force.empty() && const_force.size() != dim)
    throw InvalidArgument("const_force must have dim entries");
  if (force_model == ForceModel::neural) {
    mlp.validate();
    if (neural_weights.size() != mlp.num_params())
      throw InvalidArgument("neural_weights length " + std::to_string(neural_weights.size()) +
                            " does not match the mlp parameter count " +
                            std::to_string(mlp.num_params()));
  }
}

std::size_t neural_offset(const GenModelParams& p) { return param_index::const_force + p.dim; }

std::size_t num_params(const GenModelParams& p) {
  return neural_offset(p) + (p.force_model == ForceModel::neural ? p.neural_weights.size() : 0);
}

std::vector<double> pack_params(const GenModelParams& p) {
  std::vector<double> v(num_params(p), 0.0);
  v[param_index::stiffness] = p.stiffness;
  v[param_index::gamma] = p.gamma;
  v[param_index::kbt] = p.kbt;
  for (std::size_t d = 0; d < p.const_force.size(); ++d) v[param_index::const_force + d] = p.const_force[d];
  if (p.force_model == ForceModel::neural)
    std::copy(p.neural_weights.begin(), p.neural_weights.end(), v.begin() + neural_offset(p));
  return v;
}

void unpack_params(GenModelParams& p, std::span<const double> v) {
  if (v.size() != num_params(p)) throw InvalidArgument("parameter vector has the wrong length");
  p.stiffness = v[param_index::stiffness];
  p.gamma = v[param_index::gamma];
  p.kbt = v[param_index::kbt];
  p.const_force.assign(v.begin() + param_index::const_force, v.begin() + neural_offset(p));
  if (p.force_model == ForceModel::neural)
    p.neural_weights.assign(v.begin() + neural_offset(p), v.end());
}

std::vector<std::string> param_names(const GenModelParams& p) {
  std::vector<std::string> names{"stiffness", "gamma", "kbt"};
  for (std::size_t d = 0; d < p.dim; ++d) names.push_back("const_force" + std::to_string(d));
  if (p.force_model == ForceModel::neural)
    for (std::size_t i = 0; i < p.neural_weights.size(); ++i) names.push_back("theta" + std::to_string(i));
  return names;
}

std::size_t param_index_of(const GenModelParams& p, const std::string& name) {
  const auto names = param_names(p);
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw InvalidArgument("unknown parameter '" + name + "'");
}

FaragoCoeffs farago_coeffs(const GenModelParams& p) {
  if (!(p.mass > 0.0) || !(p.dt > 0.0) || !(p.gamma >= 0.0))
    throw InvalidArgument("farago coefficients need mass > 0, dt > 0, gamma >= 0");
  const double c = p.gamma * p.dt / (2.0 * p.mass);
  if (c >= 1.0)
    throw StabilityError("gamma*dt/(2m) = " + std::to_string(c) + " >= 1; Farago scheme is outside its stable regime");
  return {(1.0 - c) / (1.0 + c), 1.0 / (1.0 + c)};
}

namespace {

void add_const_force(const GenModelParams& p, std::span<double> f) {
  for (std::size_t d = 0; d < p.const_force.size(); ++d) f[d] += p.const_force[d];
}

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double check_radius(std::span<const double> x) {
  const double r = norm(x);
  if (r < 1e-12) throw DegenerateRadius("radial force evaluated at |x| < 1e-12");
  return r;
}

void eval_force(const GenModelParams& p, std::span<const double> x, std::span<double> f) {
  switch (p.force_model) {
    case ForceModel::linear:
      for (std::size_t d = 0; d < p.dim; ++d) f[d] = -p.stiffness * x[d];
      break;
    case ForceModel::double_well: {
      double r2 = 0.0;
      for (double v : x) r2 += v * v;
      const double s = -4.0 * p.well_kappa * (r2 - p.well_radius * p.well_radius);
      for (std::size_t d = 0; d < p.dim; ++d) f[d] = s * x[d];
      break;
    }
    case ForceModel::neural: {
      const double r = check_radius(x);
      const double fr = mlp_forward(p.mlp, p.neural_weights, r);
      for (std::size_t d = 0; d < p.dim; ++d) f[d] = fr * x[d] / r;
      break;
    }
  }
  add_const_force(p, f);
}

// out += (dF/dx)^T w. Every shipped force is a gradient field, so the
// Jacobian is symmetric, but the product is written out in transposed form.
void force_vjp(const GenModelParams& p, std::span<const double> x, std::span<const double> w, double scale,
               std::span<double> out) {
  switch (p.force_model) {
    case ForceModel::linear:
      for (std::size_t d = 0; d < p.dim; ++d) out[d] -= scale * p.stiffness * w[d];
      break;
    case ForceModel::double_well: {
      double r2 = 0.0, xw = 0.0;
      for (std::size_t d = 0; d < p.dim; ++d) {
        r2 += x[d] * x[d];
        xw += x[d] * w[d];
      }
      const double k = -4.0 * p.well_kappa;
      const double s = r2 - p.well_radius * p.well_radius;
      for (std::size_t d = 0; d < p.dim; ++d) out[d] += scale * k * (s * w[d] + 2.0 * x[d] * xw);
      break;
    }
    case ForceModel::neural: {
      const double r = check_radius(x);
      const auto [fr, dfr] = mlp_value_and_slope(p.mlp, p.neural_weights, r);
      double ew = 0.0;
      for (std::size_t d = 0; d < p.dim; ++d) ew += x[d] * w[d];
      ew /= r;
      for (std::size_t d = 0; d < p.dim; ++d) {
        const double e = x[d] / r;
        out[d] += scale * (dfr * ew * e + fr / r * (w[d] - ew * e));
      }
      break;
    }
  }
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void check_state(const GenModelParams& p, std::span<const double> x0, std::span<const double> x1) {
  p.validate();
  if (x0.size() != p.dim || x1.size() != p.dim)
    throw InvalidArgument("start-up states must have dim = " + std::to_string(p.dim) + " entries");
}

}  // namespace

std::vector<double> force_eval(const GenModelParams& p, std::span<const double> x) {
  if (x.size() != p.dim) throw InvalidArgument("force_eval: state has the wrong dimension");
  std::vector<double> f(p.dim, 0.0);
  eval_force(p, x, f);
  return f;
}

Matrix force_grad(const GenModelParams& p, std::span<const double> x) {
  if (x.size() != p.dim) throw InvalidArgument("force_grad: state has the wrong dimension");
  Matrix jac(p.dim, p.dim);
  std::vector<double> e(p.dim, 0.0), col(p.dim, 0.0);
  // Row i of J is J^T e_i.
  for (std::size_t i = 0; i < p.dim; ++i) {
    std::fill(e.begin(), e.end(), 0.0);
    std::fill(col.begin(), col.end(), 0.0);
    e[i] = 1.0;
    force_vjp(p, x, e, 1.0, col);
    for (std::size_t j = 0; j < p.dim; ++j) jac(i, j) = col[j];
  }
  return jac;
}

FaragoScheme::FaragoScheme(GenModelParams p) : p_(std::move(p)) {
  p_.validate();
  coeffs_ = farago_coeffs(p_);
  n_params_ = sdyn::num_params(p_);
  const double b = coeffs_.b;
  const double sigma = p_.sigma();
  force_coef_ = b * p_.dt * p_.dt / p_.mass;
  noise_coef_ = b * p_.dt / (2.0 * p_.mass) * sigma * std::sqrt(p_.dt);
  db_dgamma_ = -b * b * p_.dt / (2.0 * p_.mass);
  // The noise channels are differentiable only inside kbt, gamma > 0; on the
  // boundary the partial is reported as zero.
  dsigma_dgamma_ = p_.gamma > 0.0 ? sigma / (2.0 * p_.gamma) : 0.0;
  dsigma_dkbt_ = p_.kbt > 0.0 ? sigma / (2.0 * p_.kbt) : 0.0;
}

void FaragoScheme::advance(const Trajectory& traj, std::size_t j, std::span<double> next) const {
  const auto xj = traj.slice(j);
  const auto xp = traj.slice(j - 1);
  const auto xi_next = traj.xi(j + 1);
  const auto xi_cur = traj.xi(j);
  eval_force(p_, xj, next);
  if (!all_finite(next)) throw DivergedSimulation(j + 1);
  for (std::size_t d = 0; d < p_.dim; ++d) {
    next[d] = 2.0 * coeffs_.b * xj[d] - coeffs_.a * xp[d] + force_coef_ * next[d] +
              noise_coef_ * (xi_next[d] + xi_cur[d]);
  }
}

void FaragoScheme::state_vjp(const Trajectory& traj, std::size_t j, std::size_t lag, std::span<const double> w,
                             std::span<double> out) const {
  if (lag == 0) {
    for (std::size_t d = 0; d < p_.dim; ++d) out[d] += 2.0 * coeffs_.b * w[d];
    force_vjp(p_, traj.slice(j), w, force_coef_, out);
  } else if (lag == 1) {
    for (std::size_t d = 0; d < p_.dim; ++d) out[d] -= coeffs_.a * w[d];
  }
}

void FaragoScheme::param_vjp(const Trajectory& traj, std::size_t j, std::span<const double> w,
                             std::span<double> out) const {
  const auto xj = traj.slice(j);
  const auto xp = traj.slice(j - 1);
  const auto xi_next = traj.xi(j + 1);
  const auto xi_cur = traj.xi(j);
  const double dt = p_.dt;
  const double m = p_.mass;
  const double b = coeffs_.b;
  const double sqdt = std::sqrt(dt);

  std::vector<double> f(p_.dim, 0.0);
  eval_force(p_, xj, f);

  double w_x = 0.0, w_drift_gamma = 0.0, w_noise = 0.0;
  for (std::size_t d = 0; d < p_.dim; ++d) {
    const double zeta = xi_next[d] + xi_cur[d];
    w_x += w[d] * xj[d];
    // d/dgamma of 2b X_j - (2b - 1) X_{j-1} + (b dt^2/m) F + (b dt/2m) sigma sqrt(dt) zeta, b-part only
    w_drift_gamma += w[d] * (2.0 * xj[d] - 2.0 * xp[d] + dt * dt / m * f[d] + dt / (2.0 * m) * p_.sigma() * sqdt * zeta);
    w_noise += w[d] * zeta;
  }
  const double noise_scale = b * dt / (2.0 * m) * sqdt;

  if (p_.force_model == ForceModel::linear) out[param_index::stiffness] += -force_coef_ * w_x;
  out[param_index::gamma] += db_dgamma_ * w_drift_gamma + noise_scale * dsigma_dgamma_ * w_noise;
  out[param_index::kbt] += noise_scale * dsigma_dkbt_ * w_noise;
  for (std::size_t d = 0; d < p_.dim; ++d) out[param_index::const_force + d] += force_coef_ * w[d];

  if (p_.force_model == ForceModel::neural) {
    const double r = check_radius(xj);
    double ew = 0.0;
    for (std::size_t d = 0; d < p_.dim; ++d) ew += w[d] * xj[d];
    ew /= r;
    const std::size_t off = neural_offset(p_);
    mlp_accumulate_param_grad(p_.mlp, p_.neural_weights, r, force_coef_ * ew,
                              out.subspan(off, p_.neural_weights.size()));
  }
}

Trajectory simulate_with_noise(const GenModelParams& p, std::span<const double> x0, std::span<const double> x1,
                               std::span<const double> noise) {
  check_state(p, x0, x1);
  const std::size_t n = noise.size() / p.dim;
  if (noise.size() != n * p.dim || n < 2) throw InvalidArgument("noise record must hold N >= 2 slices of dim values");
  Trajectory traj;
  traj.dim = p.dim;
  traj.dt = p.dt;
  traj.values.assign((n + 1) * p.dim, 0.0);
  traj.noise.assign(noise.begin(), noise.end());
  std::copy(x0.begin(), x0.end(), traj.slice(0).begin());
  std::copy(x1.begin(), x1.end(), traj.slice(1).begin());
  FaragoScheme scheme(p);
  for (std::size_t j = 1; j < n; ++j) {
    auto next = traj.slice(j + 1);
    scheme.advance(traj, j, next);
    if (!all_finite(next)) throw DivergedSimulation(j + 1);
  }
  return traj;
}

Trajectory simulate(const GenModelParams& p, std::span<const double> x0, std::span<const double> x1,
                    std::uint64_t seed, std::size_t n_steps) {
  check_state(p, x0, x1);
  if (n_steps < 2) throw InvalidArgument("n_steps must be at least the scheme order (2)");
  std::vector<double> noise(n_steps * p.dim);
  NormalStream stream(seed);
  stream.fill(noise);
  Trajectory traj = simulate_with_noise(p, x0, x1, noise);
  traj.seed = seed;
  return traj;
}

Trajectory simulate(const GenModelParams& p, std::span<const double> x0, std::span<const double> x1,
                    std::uint64_t seed) {
  return simulate(p, x0, x1, seed, p.n_steps);
}

Trajectory replay(const GenModelParams& p, const Trajectory& traj) {
  Trajectory out = simulate_with_noise(p, traj.slice(0), traj.slice(1), traj.noise);
  out.seed = traj.seed;
  out.sample_id = traj.sample_id;
  out.start_step = traj.start_step;
  return out;
}

std::vector<double> simulate_velocity_form(const GenModelParams& p, std::span<const double> x0,
                                           std::span<const double> v0, std::span<const double> noise) {
  check_state(p, x0, v0);
  const std::size_t n = noise.size() / p.dim;
  if (noise.size() != n * p.dim) throw InvalidArgument("noise record must hold whole slices");
  const auto [a, b] = farago_coeffs(p);
  const double dt = p.dt;
  const double m = p.mass;
  const double eta_scale = p.sigma() * std::sqrt(dt);
  const std::size_t d = p.dim;

  std::vector<double> xs((n + 1) * d);
  std::vector<double> x(x0.begin(), x0.end()), v(v0.begin(), v0.end());
  std::vector<double> f(d), f_next(d);
  std::copy(x.begin(), x.end(), xs.begin());
  eval_force(p, x, f);
  for (std::size_t step = 0; step < n; ++step) {
    const double* xi = noise.data() + step * d;  // xi_{step+1}
    for (std::size_t k = 0; k < d; ++k) {
      const double eta = eta_scale * xi[k];
      x[k] += b * dt * v[k] + b * dt * dt / (2.0 * m) * f[k] + b * dt / (2.0 * m) * eta;
    }
    std::fill(f_next.begin(), f_next.end(), 0.0);
    eval_force(p, x, f_next);
    for (std::size_t k = 0; k < d; ++k) {
      const double eta = eta_scale * xi[k];
      v[k] = a * v[k] + dt / (2.0 * m) * (a * f[k] + f_next[k]) + b / m * eta;
    }
    f.swap(f_next);
    if (!all_finite(x)) throw DivergedSimulation(step + 1);
    std::copy(x.begin(), x.end(), xs.begin() + (step + 1) * d);
  }
  return xs;
}

StepJacobians step_jacobians(const GenModelParams& p, const Trajectory& traj, std::size_t j) {
  if (j < 1 || j + 1 > traj.n_steps())
    throw std::out_of_range("step_jacobians: step " + std::to_string(j) + " outside [1, N-1]");
  FaragoScheme scheme(p);
  const std::size_t d = p.dim;
  const std::size_t np = scheme.num_params();
  StepJacobians jac{Matrix(d, d), Matrix(d, d), Matrix(d, np)};
  std::vector<double> e(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    std::fill(e.begin(), e.end(), 0.0);
    e[i] = 1.0;
    scheme.state_vjp(traj, j, 0, e, jac.d_current.row(i));
    scheme.state_vjp(traj, j, 1, e, jac.d_previous.row(i));
    scheme.param_vjp(traj, j, e, jac.d_params.row(i));
  }
  return jac;
}

}  // namespace sdyn
