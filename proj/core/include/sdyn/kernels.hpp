#pragma once

#include <span>
#include <vector>

namespace sdyn {

// Rational-quadratic kernel k(x, y) = (1 + |x - y|^2 / (2 alpha l^2))^(-alpha).
// Hyperparameters are fixed during training, so the kernel has no parameter
// dependence and only its two state partials are exposed.
struct KernelConfig {
  double alpha = 2.0;
  double length_scale = 0.01;

  void validate() const;
};

// Value and the scalar s with grad_x k(x, y) = -s * (x - y).
struct RqkTerms {
  double value = 1.0;
  double grad_scale = 0.0;
};

RqkTerms rqk_terms(std::span<const double> x, std::span<const double> y, const KernelConfig& cfg);

double rqk_eval(std::span<const double> x, std::span<const double> y, const KernelConfig& cfg);

// Partial in the first argument.
std::vector<double> rqk_grad1(std::span<const double> x, std::span<const double> y,
                              const KernelConfig& cfg);
// Partial in the second argument; equals -rqk_grad1(x, y).
std::vector<double> rqk_grad2(std::span<const double> x, std::span<const double> y,
                              const KernelConfig& cfg);

}  // namespace sdyn
