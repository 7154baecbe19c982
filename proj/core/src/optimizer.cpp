#include "sdyn/optimizer.hpp"

#include <cmath>

#include "sdyn/errors.hpp"

namespace sdyn {

void AdamConfig::validate() const {
  if (!(lr > 0.0)) throw InvalidArgument("optimizer lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw InvalidArgument("optimizer betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw InvalidArgument("optimizer eps must be positive");
}

double AdamConfig::rate_at(std::size_t epoch, std::size_t epochs) const {
  if (lr_final < 0.0 || epochs <= 1) return lr;
  const double frac = static_cast<double>(epoch) / static_cast<double>(epochs - 1);
  return lr + (lr_final - lr) * frac;
}

AdamState AdamState::fresh(std::size_t n, const AdamConfig& cfg) {
  cfg.validate();
  AdamState s;
  s.first_moment.assign(n, 0.0);
  s.second_moment.assign(n, 0.0);
  s.lr = cfg.lr;
  s.beta1 = cfg.beta1;
  s.beta2 = cfg.beta2;
  s.eps = cfg.eps;
  return s;
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad,
               std::span<const std::string> names) {
  const std::size_t n = params.size();
  if (grad.size() != n || state.first_moment.size() != n || state.second_moment.size() != n)
    throw InvalidArgument("adam_step: parameter, gradient and moment lengths differ");
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(grad[i])) throw OptimizerHalt(i, i < names.size() ? names[i] : std::string());

  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < n; ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * grad[i];
    v = state.beta2 * v + (1.0 - state.beta2) * grad[i] * grad[i];
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

ChannelMap::ChannelMap(std::vector<Channel> channels) : channels_(std::move(channels)) {}

std::vector<std::string> ChannelMap::names() const {
  std::vector<std::string> out;
  for (const auto& c : channels_) out.push_back(c.log_scale ? "log_" + c.name : c.name);
  return out;
}

std::vector<double> ChannelMap::to_learnable(std::span<const double> packed) const {
  std::vector<double> u;
  u.reserve(channels_.size());
  for (const auto& c : channels_) {
    const double v = packed[c.index];
    if (c.log_scale && !(v > 0.0))
      throw InvalidArgument("log-scale channel '" + c.name + "' needs a positive value");
    u.push_back(c.log_scale ? std::log(v) : v);
  }
  return u;
}

void ChannelMap::apply(std::span<const double> learnable, std::span<double> packed) const {
  if (learnable.size() != channels_.size()) throw InvalidArgument("learnable vector has the wrong length");
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    const auto& c = channels_[i];
    packed[c.index] = c.log_scale ? std::exp(learnable[i]) : learnable[i];
  }
}

std::vector<double> ChannelMap::chain(std::span<const double> packed_grad, std::span<const double> packed) const {
  std::vector<double> g;
  g.reserve(channels_.size());
  for (const auto& c : channels_)
    g.push_back(c.log_scale ? packed_grad[c.index] * packed[c.index] : packed_grad[c.index]);
  return g;
}

}  // namespace sdyn
