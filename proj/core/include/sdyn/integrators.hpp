#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sdyn/matrix.hpp"
#include "sdyn/mlp.hpp"

namespace sdyn {

enum class ForceModel {
  linear,       // F(x) = -K0 x + F0
  neural,       // F(x) = F(|x|; theta_F) x/|x| + F0, F an MlpSpec network
  double_well,  // F(x) = -4 kappa (|x|^2 - r0^2) x + F0 (data targets only)
};

std::string to_string(ForceModel m);
ForceModel force_model_from_string(const std::string& s);

struct GenModelParams {
  double mass = 0.1;
  double gamma = 3.2;
  double kbt = 0.1;
  double stiffness = 1.5;
  std::vector<double> const_force;  // empty means zero
  ForceModel force_model = ForceModel::linear;
  MlpSpec mlp;
  std::vector<double> neural_weights;
  double well_kappa = 1.0;
  double well_radius = 1.0;
  double dt = 1e-3;
  std::size_t n_steps = 18;
  std::size_t dim = 3;

  // sigma = sqrt(2 kbt gamma)
  double sigma() const;
  void validate() const;
};

// Flat parameter vector p: (stiffness, gamma, kbt, const_force[0..dim), theta_F...).
// Gradients are always reported in this layout.
namespace param_index {
inline constexpr std::size_t stiffness = 0;
inline constexpr std::size_t gamma = 1;
inline constexpr std::size_t kbt = 2;
inline constexpr std::size_t const_force = 3;
}  // namespace param_index

std::size_t num_params(const GenModelParams& p);
std::size_t neural_offset(const GenModelParams& p);
std::vector<double> pack_params(const GenModelParams& p);
void unpack_params(GenModelParams& p, std::span<const double> values);
std::vector<std::string> param_names(const GenModelParams& p);
std::size_t param_index_of(const GenModelParams& p, const std::string& name);

struct FaragoCoeffs {
  double a = 1.0;
  double b = 1.0;
};

// a = (1 - c)/(1 + c), b = 1/(1 + c) with c = gamma dt / (2m).
FaragoCoeffs farago_coeffs(const GenModelParams& p);

// A sampled path X_0..X_N with the unit normals xi_1..xi_N that drove it.
struct Trajectory {
  std::size_t dim = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::size_t sample_id = 0;
  std::size_t start_step = 0;  // absolute step of slice 0
  std::vector<double> values;
  std::vector<double> noise;

  std::size_t n_steps() const { return dim == 0 ? 0 : values.size() / dim - 1; }
  std::span<const double> slice(std::size_t j) const { return {values.data() + j * dim, dim}; }
  std::span<double> slice(std::size_t j) { return {values.data() + j * dim, dim}; }
  // Unit normal xi_j, 1 <= j <= N.
  std::span<const double> xi(std::size_t j) const { return {noise.data() + (j - 1) * dim, dim}; }
};

std::vector<double> force_eval(const GenModelParams& p, std::span<const double> x);
// dF_i/dx_j
Matrix force_grad(const GenModelParams& p, std::span<const double> x);

// An explicit m-step update X_{j+1} = Psi_j(X_j, ..., X_{j-m+1}, xi; p), defined for
// m-1 <= j <= N-1. The adjoint solver only needs transposed Jacobian products.
class StepScheme {
 public:
  virtual ~StepScheme() = default;

  virtual std::size_t order() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::size_t num_params() const = 0;

  // Writes X_{j+1}; reads slices j-m+1..j and the noise record of traj.
  virtual void advance(const Trajectory& traj, std::size_t j, std::span<double> next) const = 0;
  // out += (dPsi_j / dX_{j-lag})^T w
  virtual void state_vjp(const Trajectory& traj, std::size_t j, std::size_t lag,
                         std::span<const double> w, std::span<double> out) const = 0;
  // out += (dPsi_j / dp)^T w
  virtual void param_vjp(const Trajectory& traj, std::size_t j, std::span<const double> w,
                         std::span<double> out) const = 0;
};

// Psi_j = 2b X_j - a X_{j-1} + (b dt^2/m) F(X_j) + (b dt/2m) sigma sqrt(dt) (xi_{j+1} + xi_j).
// Noise is kept as unit normals so sigma(kbt, gamma) stays an explicit factor.
class FaragoScheme final : public StepScheme {
 public:
  explicit FaragoScheme(GenModelParams p);

  std::size_t order() const override { return 2; }
  std::size_t dim() const override { return p_.dim; }
  std::size_t num_params() const override { return n_params_; }

  void advance(const Trajectory& traj, std::size_t j, std::span<double> next) const override;
  void state_vjp(const Trajectory& traj, std::size_t j, std::size_t lag, std::span<const double> w,
                 std::span<double> out) const override;
  void param_vjp(const Trajectory& traj, std::size_t j, std::span<const double> w,
                 std::span<double> out) const override;

  const GenModelParams& params() const { return p_; }
  const FaragoCoeffs& coeffs() const { return coeffs_; }

 private:
  GenModelParams p_;
  FaragoCoeffs coeffs_;
  std::size_t n_params_;
  double force_coef_;   // b dt^2 / m
  double noise_coef_;   // b dt / (2m) * sigma * sqrt(dt)
  double db_dgamma_;
  double dsigma_dgamma_;
  double dsigma_dkbt_;
};

// Simulates N = p.n_steps steps (or n_steps when given) from the start-up
// states X_0, X_1, drawing xi_1..xi_N from a normal stream seeded with `seed`.
Trajectory simulate(const GenModelParams& p, std::span<const double> x0, std::span<const double> x1,
                    std::uint64_t seed);
Trajectory simulate(const GenModelParams& p, std::span<const double> x0, std::span<const double> x1,
                    std::uint64_t seed, std::size_t n_steps);

// Replays the scheme with a given noise record (N x dim unit normals).
Trajectory simulate_with_noise(const GenModelParams& p, std::span<const double> x0,
                               std::span<const double> x1, std::span<const double> noise);

// Re-runs `traj` under (possibly different) parameters with its own noise and
// start-up states. Used for frozen-noise sensitivity checks.
Trajectory replay(const GenModelParams& p, const Trajectory& traj);

// Position/velocity form of the same scheme started from (X_0, V_0). Returns
// positions only, using the same noise layout as simulate_with_noise.
std::vector<double> simulate_velocity_form(const GenModelParams& p, std::span<const double> x0,
                                           std::span<const double> v0, std::span<const double> noise);

struct StepJacobians {
  Matrix d_current;   // dPsi_j/dX_j
  Matrix d_previous;  // dPsi_j/dX_{j-1}
  Matrix d_params;    // dPsi_j/dp, dim x num_params
};

// Dense per-step Jacobians for 1 <= j <= N-1.
StepJacobians step_jacobians(const GenModelParams& p, const Trajectory& traj, std::size_t j);

}  // namespace sdyn
