#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sdyn/errors.hpp"
#include "sdyn/mlp.hpp"

using namespace sdyn;

namespace {

std::vector<double> random_theta(const MlpSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.5);
  std::vector<double> t(spec.num_params());
  for (double& v : t) v = n(rng);
  return t;
}

// Index range of the last layer's weights (the last layer has no bias).
std::size_t last_layer_offset(const MlpSpec& spec) {
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < spec.num_layers(); ++l) {
    off += spec.layer_sizes[l] * spec.layer_sizes[l + 1];
    if (spec.has_bias(l)) off += spec.layer_sizes[l + 1];
  }
  return off;
}

}  // namespace

TEST(Mlp, DefaultArchitectureParameterCount) {
  const MlpSpec spec;
  ASSERT_EQ(spec.layer_sizes, (std::vector<std::size_t>{1, 100, 100, 100, 1}));
  EXPECT_FALSE(spec.has_bias(3));
  EXPECT_TRUE(spec.has_bias(0));
  std::size_t expected = 0;
  for (std::size_t l = 0; l < 4; ++l) expected += spec.layer_sizes[l] * spec.layer_sizes[l + 1];
  expected += 100 + 100 + 100;
  EXPECT_EQ(spec.num_params(), expected);
  EXPECT_EQ(spec.num_params(), 20500u);
}

TEST(Mlp, ZeroWeightsGiveZero) {
  const MlpSpec spec = MlpSpec::with_hidden({5, 4});
  const std::vector<double> theta(spec.num_params(), 0.0);
  for (double r : {-3.0, 0.0, 0.5, 10.0}) EXPECT_EQ(mlp_forward(spec, theta, r), 0.0);
  const MlpGrads g = mlp_grads(spec, theta, 1.3);
  EXPECT_EQ(g.d_input, 0.0);
  for (std::size_t i = 0; i < last_layer_offset(spec); ++i) EXPECT_EQ(g.d_params[i], 0.0);
}

TEST(Mlp, BiasPathFeedsOnlyLastLayer) {
  MlpSpec spec = MlpSpec::with_hidden({3});
  std::vector<double> theta(spec.num_params(), 0.0);
  // layer 0: W (3x1) then bias (3); set the biases to one
  theta[3] = theta[4] = theta[5] = 1.0;
  const MlpGrads g = mlp_grads(spec, theta, 0.7);
  EXPECT_EQ(g.d_input, 0.0);
  for (std::size_t i = 0; i < last_layer_offset(spec); ++i) EXPECT_EQ(g.d_params[i], 0.0);
  for (std::size_t i = last_layer_offset(spec); i < theta.size(); ++i) EXPECT_EQ(g.d_params[i], 1.0);
}

TEST(Mlp, NegativeSideSlopeExample) {
  const MlpSpec spec = MlpSpec::with_hidden({1});
  ASSERT_EQ(spec.num_params(), 3u);
  const std::vector<double> theta{1.0, 0.0, 1.0};
  EXPECT_NEAR(mlp_forward(spec, theta, -2.0), -0.02, 1e-15);
  EXPECT_EQ(mlp_forward(spec, theta, 2.0), 2.0);
}

TEST(Mlp, KinkUsesPositiveSide) {
  const MlpSpec spec = MlpSpec::with_hidden({1});
  const std::vector<double> theta{1.0, 0.0, 1.0};
  EXPECT_EQ(mlp_grads(spec, theta, 0.0).d_input, 1.0);
  EXPECT_EQ(mlp_value_and_slope(spec, theta, 0.0).d_input, 1.0);
}

TEST(Mlp, GradientsMatchFiniteDifferences) {
  const MlpSpec spec = MlpSpec::with_hidden({7, 6, 5});
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto theta = random_theta(spec, seed);
    const double r = 0.3 + 0.4 * static_cast<double>(seed);
    const MlpGrads g = mlp_grads(spec, theta, r);
    EXPECT_EQ(g.value, mlp_forward(spec, theta, r));
    const double h = 1e-6;
    const double fd_r = (mlp_forward(spec, theta, r + h) - mlp_forward(spec, theta, r - h)) / (2 * h);
    EXPECT_NEAR(g.d_input, fd_r, 1e-6 * std::max(1.0, std::abs(fd_r)));
    EXPECT_NEAR(mlp_value_and_slope(spec, theta, r).d_input, g.d_input, 1e-12 * std::max(1.0, std::abs(g.d_input)));
    for (std::size_t i = 0; i < theta.size(); ++i) {
      auto tp = theta, tm = theta;
      tp[i] += h;
      tm[i] -= h;
      const double fd = (mlp_forward(spec, tp, r) - mlp_forward(spec, tm, r)) / (2 * h);
      EXPECT_NEAR(g.d_params[i], fd, 1e-6 * std::max(1.0, std::abs(fd))) << "theta " << i;
    }
  }
}

TEST(Mlp, AccumulateMatchesFullGradient) {
  const MlpSpec spec = MlpSpec::with_hidden({6, 6});
  const auto theta = random_theta(spec, 8);
  const MlpGrads g = mlp_grads(spec, theta, 1.1);
  std::vector<double> acc(theta.size(), 1.0);
  const double f = mlp_accumulate_param_grad(spec, theta, 1.1, -2.0, acc);
  EXPECT_EQ(f, g.value);
  for (std::size_t i = 0; i < theta.size(); ++i) EXPECT_NEAR(acc[i], 1.0 - 2.0 * g.d_params[i], 1e-14);
}

TEST(Mlp, InitIsGlorotUniformWithZeroBiases) {
  const MlpSpec spec;
  const auto theta = mlp_init(spec, 42);
  ASSERT_EQ(theta.size(), spec.num_params());
  std::size_t off = 0;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t in = spec.layer_sizes[l], out = spec.layer_sizes[l + 1];
    const double lim = std::sqrt(6.0 / static_cast<double>(in + out));
    for (std::size_t i = 0; i < in * out; ++i) EXPECT_LE(std::abs(theta[off + i]), lim);
    off += in * out;
    if (spec.has_bias(l)) {
      for (std::size_t i = 0; i < out; ++i) EXPECT_EQ(theta[off + i], 0.0);
      off += out;
    }
  }
  EXPECT_EQ(mlp_init(spec, 42), theta);
}

TEST(Mlp, RejectsLengthMismatch) {
  const MlpSpec spec = MlpSpec::with_hidden({4});
  const std::vector<double> theta(spec.num_params() + 1, 0.0);
  EXPECT_THROW(mlp_forward(spec, theta, 1.0), InvalidArgument);
  EXPECT_THROW(mlp_grads(spec, theta, 1.0), InvalidArgument);
}
