#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sdyn {

struct AdamConfig {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Linear decay from lr to lr_final over the run; negative keeps lr constant.
  double lr_final = -1.0;

  void validate() const;
  double rate_at(std::size_t epoch, std::size_t epochs) const;
};

struct AdamState {
  std::size_t step_count = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState fresh(std::size_t n, const AdamConfig& cfg = {});
};

// Bias-corrected ADAM update in place. Throws OptimizerHalt naming the first
// non-finite gradient channel; state and params are untouched in that case.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad,
               std::span<const std::string> names = {});

// A learnable channel: an entry of the packed parameter vector, optionally
// optimised through its logarithm (keeps positive quantities positive).
struct Channel {
  std::size_t index = 0;
  bool log_scale = false;
  std::string name;
};

class ChannelMap {
 public:
  ChannelMap() = default;
  explicit ChannelMap(std::vector<Channel> channels);

  std::size_t size() const { return channels_.size(); }
  const std::vector<Channel>& channels() const { return channels_; }
  std::vector<std::string> names() const;

  // Optimiser coordinates u from packed parameters p.
  std::vector<double> to_learnable(std::span<const double> packed) const;
  // Writes u back into p; fixed entries are left untouched.
  void apply(std::span<const double> learnable, std::span<double> packed) const;
  // du from dp: log channels pick up the factor p.
  std::vector<double> chain(std::span<const double> packed_grad, std::span<const double> packed) const;

 private:
  std::vector<Channel> channels_;
};

}  // namespace sdyn
