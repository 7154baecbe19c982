#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sdyn {

// Raised for malformed arguments: dimension mismatches, bad lengths, invalid
// configuration values.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// gamma*dt/(2m) >= 1: the Farago coefficients leave their well-behaved regime.
class StabilityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Radial force requested at (numerically) zero radius.
class DegenerateRadius : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Errors tied to a time-step index carry it for diagnostics.
class StepError : public std::runtime_error {
 public:
  StepError(const std::string& what, std::size_t step);
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class DivergedSimulation : public StepError {
 public:
  explicit DivergedSimulation(std::size_t step);
};

class AdjointBlowup : public StepError {
 public:
  explicit AdjointBlowup(std::size_t step);
};

class InvalidBatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class FragmentBounds : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Non-finite gradient handed to the optimizer. Names the offending channel.
class OptimizerHalt : public std::runtime_error {
 public:
  OptimizerHalt(std::size_t channel, const std::string& name);
  std::size_t channel() const noexcept { return channel_; }

 private:
  std::size_t channel_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sdyn
