#include "sdyn/mlp.hpp"

#include <cmath>
#include <random>
#include <string>

#include "sdyn/errors.hpp"

namespace sdyn {

bool MlpSpec::has_bias(std::size_t layer) const {
  if (bias_mask.empty()) return layer + 1 < num_layers();
  return bias_mask.at(layer);
}

std::size_t MlpSpec::num_params() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    n += layer_sizes[l] * layer_sizes[l + 1];
    if (has_bias(l)) n += layer_sizes[l + 1];
  }
  return n;
}

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) throw InvalidArgument("mlp needs at least an input and an output layer");
  if (layer_sizes.front() != 1 || layer_sizes.back() != 1)
    throw InvalidArgument("mlp input and output widths must be 1");
  for (std::size_t s : layer_sizes)
    if (s == 0) throw InvalidArgument("mlp layer width must be positive");
  if (!bias_mask.empty() && bias_mask.size() != num_layers())
    throw InvalidArgument("mlp bias_mask must have one entry per weight layer");
  if (!std::isfinite(leaky_slope)) throw InvalidArgument("mlp leaky_slope must be finite");
}

MlpSpec MlpSpec::with_hidden(std::vector<std::size_t> hidden, double leaky_slope) {
  MlpSpec spec;
  spec.layer_sizes.clear();
  spec.layer_sizes.push_back(1);
  spec.layer_sizes.insert(spec.layer_sizes.end(), hidden.begin(), hidden.end());
  spec.layer_sizes.push_back(1);
  spec.leaky_slope = leaky_slope;
  return spec;
}

namespace {

void check_theta(const MlpSpec& spec, std::span<const double> theta) {
  if (theta.size() != spec.num_params())
    throw InvalidArgument("mlp parameter vector has length " + std::to_string(theta.size()) +
                          ", expected " + std::to_string(spec.num_params()));
}

// Forward pass keeping pre-activations of every layer (layer 0 holds the input).
struct Tape {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> act;
  std::vector<std::size_t> offsets;  // start of each layer's weights in theta
};

void forward(const MlpSpec& spec, std::span<const double> theta, double r, Tape& tape) {
  const std::size_t layers = spec.num_layers();
  tape.pre.resize(layers + 1);
  tape.act.resize(layers + 1);
  tape.offsets.resize(layers);
  tape.pre[0].assign(1, r);
  tape.act[0].assign(1, r);
  std::size_t off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = spec.layer_sizes[l];
    const std::size_t out = spec.layer_sizes[l + 1];
    tape.offsets[l] = off;
    const double* w = theta.data() + off;
    const double* b = spec.has_bias(l) ? w + in * out : nullptr;
    auto& z = tape.pre[l + 1];
    auto& h = tape.act[l + 1];
    z.assign(out, 0.0);
    h.resize(out);
    const auto& x = tape.act[l];
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b ? b[o] : 0.0;
      const double* wr = w + o * in;
      for (std::size_t i = 0; i < in; ++i) acc += wr[i] * x[i];
      z[o] = acc;
    }
    const bool hidden = l + 1 < layers;
    for (std::size_t o = 0; o < out; ++o)
      h[o] = (hidden && z[o] < 0.0) ? spec.leaky_slope * z[o] : z[o];
    off += in * out + (b ? out : 0);
  }
}

// Reverse pass seeded with `weight` at the output. Accumulates weight*dF/dtheta
// into d_params (when non-empty) and returns weight*dF/dr.
double backward(const MlpSpec& spec, std::span<const double> theta, const Tape& tape, double weight,
                std::span<double> d_params) {
  const std::size_t layers = spec.num_layers();
  std::vector<double> delta{weight};
  std::vector<double> next;
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = spec.layer_sizes[l];
    const std::size_t out = spec.layer_sizes[l + 1];
    const bool hidden = l + 1 < layers;
    if (hidden) {
      const auto& z = tape.pre[l + 1];
      for (std::size_t o = 0; o < out; ++o)
        if (z[o] < 0.0) delta[o] *= spec.leaky_slope;
    }
    const std::size_t off = tape.offsets[l];
    const double* w = theta.data() + off;
    const auto& x = tape.act[l];
    if (!d_params.empty()) {
      double* gw = d_params.data() + off;
      for (std::size_t o = 0; o < out; ++o) {
        const double d = delta[o];
        double* gr = gw + o * in;
        for (std::size_t i = 0; i < in; ++i) gr[i] += d * x[i];
      }
      if (spec.has_bias(l)) {
        double* gb = gw + in * out;
        for (std::size_t o = 0; o < out; ++o) gb[o] += delta[o];
      }
    }
    next.assign(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      const double* wr = w + o * in;
      for (std::size_t i = 0; i < in; ++i) next[i] += wr[i] * d;
    }
    delta.swap(next);
  }
  return delta[0];
}

}  // namespace

double mlp_forward(const MlpSpec& spec, std::span<const double> theta, double r) {
  check_theta(spec, theta);
  Tape tape;
  forward(spec, theta, r, tape);
  return tape.act.back()[0];
}

MlpSlope mlp_value_and_slope(const MlpSpec& spec, std::span<const double> theta, double r) {
  check_theta(spec, theta);
  const std::size_t layers = spec.num_layers();
  std::vector<double> x{r}, dx{1.0}, z, dz;
  std::size_t off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = spec.layer_sizes[l];
    const std::size_t out = spec.layer_sizes[l + 1];
    const double* w = theta.data() + off;
    const double* b = spec.has_bias(l) ? w + in * out : nullptr;
    z.assign(out, 0.0);
    dz.assign(out, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b ? b[o] : 0.0;
      double dacc = 0.0;
      const double* wr = w + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        acc += wr[i] * x[i];
        dacc += wr[i] * dx[i];
      }
      z[o] = acc;
      dz[o] = dacc;
    }
    if (l + 1 < layers) {
      for (std::size_t o = 0; o < out; ++o) {
        if (z[o] < 0.0) {
          z[o] *= spec.leaky_slope;
          dz[o] *= spec.leaky_slope;
        }
      }
    }
    x.swap(z);
    dx.swap(dz);
    off += in * out + (b ? out : 0);
  }
  return {x[0], dx[0]};
}

MlpGrads mlp_grads(const MlpSpec& spec, std::span<const double> theta, double r) {
  check_theta(spec, theta);
  Tape tape;
  forward(spec, theta, r, tape);
  MlpGrads g;
  g.value = tape.act.back()[0];
  g.d_params.assign(theta.size(), 0.0);
  g.d_input = backward(spec, theta, tape, 1.0, g.d_params);
  return g;
}

double mlp_accumulate_param_grad(const MlpSpec& spec, std::span<const double> theta, double r,
                                 double weight, std::span<double> out) {
  check_theta(spec, theta);
  if (out.size() != theta.size()) throw InvalidArgument("mlp gradient buffer has the wrong length");
  Tape tape;
  forward(spec, theta, r, tape);
  backward(spec, theta, tape, weight, out);
  return tape.act.back()[0];
}

std::vector<double> mlp_init(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::vector<double> theta(spec.num_params(), 0.0);
  std::mt19937_64 engine(seed);
  std::size_t off = 0;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t in = spec.layer_sizes[l];
    const std::size_t out = spec.layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < in * out; ++i) theta[off + i] = dist(engine);
    off += in * out + (spec.has_bias(l) ? out : 0);
  }
  return theta;
}

}  // namespace sdyn
