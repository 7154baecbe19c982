#include "sdyn/kernels.hpp"

#include <cmath>
#include <string>

#include "sdyn/errors.hpp"

namespace sdyn {

void KernelConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw InvalidArgument("kernel alpha must be positive, got " + std::to_string(alpha));
  if (!(length_scale > 0.0) || !std::isfinite(length_scale))
    throw InvalidArgument("kernel length_scale must be positive, got " + std::to_string(length_scale));
}

namespace {

void check_dims(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw InvalidArgument("kernel arguments differ in length: " + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()));
}

}  // namespace

RqkTerms rqk_terms(std::span<const double> x, std::span<const double> y, const KernelConfig& cfg) {
  check_dims(x, y);
  double dist2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - y[i];
    dist2 += diff * diff;
  }
  const double l2 = cfg.length_scale * cfg.length_scale;
  const double base = 1.0 + dist2 / (2.0 * cfg.alpha * l2);
  const double value = std::pow(base, -cfg.alpha);
  return {value, value / base / l2};
}

double rqk_eval(std::span<const double> x, std::span<const double> y, const KernelConfig& cfg) {
  return rqk_terms(x, y, cfg).value;
}

std::vector<double> rqk_grad1(std::span<const double> x, std::span<const double> y,
                              const KernelConfig& cfg) {
  const double s = rqk_terms(x, y, cfg).grad_scale;
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = -s * (x[i] - y[i]);
  return g;
}

std::vector<double> rqk_grad2(std::span<const double> x, std::span<const double> y,
                              const KernelConfig& cfg) {
  const double s = rqk_terms(x, y, cfg).grad_scale;
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = s * (x[i] - y[i]);
  return g;
}

}  // namespace sdyn
