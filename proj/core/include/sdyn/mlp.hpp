#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sdyn {

// Scalar-to-scalar multi-layer perceptron with LeakyReLU hidden units and a
// linear output. Parameters are one flat vector, layer-major; within a layer
// the weight matrix (out x in, row-major) comes first, then the bias if the
// layer has one.
struct MlpSpec {
  std::vector<std::size_t> layer_sizes{1, 100, 100, 100, 1};
  // Slope applied to negative pre-activations.
  double leaky_slope = 0.01;
  // One entry per weight layer. Empty means "all layers except the last".
  std::vector<bool> bias_mask;

  std::size_t num_layers() const { return layer_sizes.size() - 1; }
  bool has_bias(std::size_t layer) const;
  std::size_t num_params() const;
  void validate() const;

  static MlpSpec with_hidden(std::vector<std::size_t> hidden, double leaky_slope = 0.01);
};

double mlp_forward(const MlpSpec& spec, std::span<const double> theta, double r);

// F(r) and dF/dr from one forward pass carrying the input tangent.
struct MlpSlope {
  double value = 0.0;
  double d_input = 0.0;
};
MlpSlope mlp_value_and_slope(const MlpSpec& spec, std::span<const double> theta, double r);

struct MlpGrads {
  double value = 0.0;
  double d_input = 0.0;
  std::vector<double> d_params;
};

// Both gradients from a single reverse pass. A pre-activation exactly at zero
// takes the positive-side derivative.
MlpGrads mlp_grads(const MlpSpec& spec, std::span<const double> theta, double r);

// out += weight * dF/dtheta, without materialising a separate gradient
// vector. Returns F(r).
double mlp_accumulate_param_grad(const MlpSpec& spec, std::span<const double> theta, double r,
                                 double weight, std::span<double> out);

// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases.
std::vector<double> mlp_init(const MlpSpec& spec, std::uint64_t seed);

}  // namespace sdyn
