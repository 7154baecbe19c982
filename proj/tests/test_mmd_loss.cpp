#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sdyn/errors.hpp"
#include "sdyn/mmd_loss.hpp"
#include "sdyn/protocols.hpp"
#include "support.hpp"

using namespace sdyn;
using sdyn::test::ou_params;

namespace {

FragmentBatch raw_batch(Origin o, std::vector<std::vector<double>> pts) {
  FragmentBatch b;
  b.origin = o;
  b.dim = pts.empty() ? 0 : pts.front().size();
  b.fragments = std::move(pts);
  return b;
}

FragmentBatch gaussian_batch(Origin o, std::size_t n, std::size_t len, std::mt19937_64& rng, double mean = 0.0,
                             double sd = 0.01) {
  std::normal_distribution<double> nd(mean, sd);
  std::vector<std::vector<double>> pts(n, std::vector<double>(len));
  for (auto& p : pts)
    for (auto& v : p) v = nd(rng);
  return raw_batch(o, std::move(pts));
}

// Brute-force estimator straight from the definition.
double naive_mmd2(const FragmentBatch& x, const FragmentBatch& y, const KernelConfig& cfg) {
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  double xx = 0.0, xy = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j)
      if (i != j) xx += rqk_eval(x.fragments[i], x.fragments[j], cfg);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) xy += rqk_eval(x.fragments[i], y.fragments[j], cfg);
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j)
      if (i != j) yy += rqk_eval(y.fragments[i], y.fragments[j], cfg);
  return xx / (n * (n - 1)) - 2.0 * xy / (n * m) + yy / (m * (m - 1));
}

struct OuSetup {
  GenModelParams target = ou_params();
  GenModelParams trainee = ou_params();
  std::vector<Trajectory> data;
  std::vector<Trajectory> gen;
  FragmentBatch data_batch;
  FragmentLayout layout;
};

// N = M = n fragments of 18-step OU paths under a full_traj protocol with tau = 2 dt.
OuSetup ou_setup(std::size_t n) {
  OuSetup s;
  s.trainee.stiffness = 1.65;
  s.trainee.gamma = 3.0;
  s.trainee.kbt = 0.12;
  ProtocolSpec spec;
  spec.kind = ProtocolKind::full_traj;
  spec.tau = 2e-3;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x0{0.1, -0.05, 0.02}, x1{0.101, -0.049, 0.02};
    s.data.push_back(simulate(s.target, x0, x1, 100 + i));
  }
  const ProtocolOutput out = extract_fragments(s.data, spec);
  s.data_batch = out.fragments;
  s.layout = out.layout;
  const auto seeds = seed_generator_from(out, spec);
  for (std::size_t i = 0; i < seeds.size(); ++i)
    s.gen.push_back(simulate(s.trainee, seeds[i].state(0), seeds[i].state(1), 500 + i));
  return s;
}

double loss_of(const GenModelParams& p, const OuSetup& s, const KernelConfig& cfg) {
  std::vector<Trajectory> gen;
  for (const auto& t : s.gen) gen.push_back(replay(p, t));
  return mmd2_unbiased(generator_fragments(gen, s.layout), s.data_batch, cfg);
}

}  // namespace

TEST(Mmd, HandExample) {
  const KernelConfig cfg{2.0, 1.0};
  const auto x = raw_batch(Origin::generator, {{0.0}, {1.0}});
  const auto y = raw_batch(Origin::data, {{0.0}, {1.0}});
  EXPECT_NEAR(mmd2_unbiased(x, y, cfg), -0.36, 1e-12);
}

TEST(Mmd, ConstantBatchesGiveZero) {
  const KernelConfig cfg;
  const auto x = raw_batch(Origin::generator, {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}});
  const auto y = raw_batch(Origin::data, {{0.5, 0.5}, {0.5, 0.5}});
  EXPECT_EQ(mmd2_unbiased(x, y, cfg), 0.0);
}

TEST(Mmd, MatchesDoubleLoopOracle) {
  std::mt19937_64 rng(3);
  const KernelConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = gaussian_batch(Origin::generator, 16, 6, rng);
    const auto y = gaussian_batch(Origin::data, 16, 6, rng, 0.004);
    EXPECT_NEAR(mmd2_unbiased(x, y, cfg), naive_mmd2(x, y, cfg), 1e-12);
  }
}

TEST(Mmd, SymmetricInBatchLabels) {
  std::mt19937_64 rng(4);
  const KernelConfig cfg;
  const auto x = gaussian_batch(Origin::generator, 10, 3, rng);
  const auto y = gaussian_batch(Origin::data, 13, 3, rng, 0.01);
  EXPECT_NEAR(mmd2_unbiased(x, y, cfg), mmd2_unbiased(y, x, cfg), 1e-15);
}

TEST(Mmd, WorkerCountDoesNotChangeBits) {
  std::mt19937_64 rng(5);
  const KernelConfig cfg;
  const auto x = gaussian_batch(Origin::generator, 37, 9, rng);
  const auto y = gaussian_batch(Origin::data, 41, 9, rng);
  const double one = mmd2_unbiased(x, y, cfg, 1);
  EXPECT_EQ(one, mmd2_unbiased(x, y, cfg, 3));
  EXPECT_EQ(one, mmd2_unbiased(x, y, cfg, 8));
  EXPECT_EQ(mmd2_cotangents(x, y, cfg, 1), mmd2_cotangents(x, y, cfg, 4));
}

TEST(Mmd, RejectsTinyBatches) {
  const KernelConfig cfg;
  const auto x = raw_batch(Origin::generator, {{0.0}});
  const auto y = raw_batch(Origin::data, {{0.0}, {1.0}});
  EXPECT_THROW(mmd2_unbiased(x, y, cfg), InvalidBatch);
  EXPECT_THROW(mmd2_unbiased(y, x, cfg), InvalidBatch);
}

TEST(Mmd, CotangentsMatchFiniteDifferences) {
  std::mt19937_64 rng(6);
  const KernelConfig cfg;
  auto x = gaussian_batch(Origin::generator, 6, 4, rng);
  const auto y = gaussian_batch(Origin::data, 7, 4, rng, 0.005);
  const auto cot = mmd2_cotangents(x, y, cfg);
  const double h = 1e-7;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t c = 0; c < 4; ++c) {
      auto xp = x, xm = x;
      xp.fragments[i][c] += h;
      xm.fragments[i][c] -= h;
      const double fd = (mmd2_unbiased(xp, y, cfg) - mmd2_unbiased(xm, y, cfg)) / (2 * h);
      EXPECT_NEAR(cot[i][c], fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
}

TEST(Mmd, CoincidentPointsGiveNoCrossCotangent) {
  const KernelConfig cfg;
  // One generated point and every data point at the same location: every
  // kernel partial vanishes.
  const auto x = raw_batch(Origin::generator, {{0.3}, {0.3}});
  const auto y = raw_batch(Origin::data, {{0.3}, {0.3}, {0.3}});
  for (const auto& c : mmd2_cotangents(x, y, cfg)) EXPECT_EQ(c[0], 0.0);
}

TEST(Mmd, UnbiasedOnEqualDistributions) {
  std::mt19937_64 rng(7);
  const KernelConfig cfg{2.0, 1.0};
  const int reps = 1000;
  double s = 0.0, ss = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto x = gaussian_batch(Origin::generator, 16, 1, rng, 0.0, 1.0);
    const auto y = gaussian_batch(Origin::data, 16, 1, rng, 0.0, 1.0);
    const double v = mmd2_unbiased(x, y, cfg);
    s += v;
    ss += v * v;
  }
  const double mean = s / reps;
  const double se = std::sqrt((ss / reps - mean * mean) / (reps - 1));
  EXPECT_LE(std::abs(mean), 4.0 * se);
}

TEST(MmdGrad, MatchesFiniteDifferencesThroughSimulation) {
  const OuSetup s = ou_setup(8);
  const KernelConfig cfg;
  const FragmentBatch gen = generator_fragments(s.gen, s.layout);
  const auto grad = mmd2_grad(gen, s.gen, s.data_batch, s.trainee, cfg);
  const auto base = pack_params(s.trainee);
  for (std::size_t k = 0; k < base.size(); ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(base[k]));
    auto vp = base, vm = base;
    vp[k] += h;
    vm[k] -= h;
    GenModelParams pp = s.trainee, pm = s.trainee;
    unpack_params(pp, vp);
    unpack_params(pm, vm);
    const double fd = (loss_of(pp, s, cfg) - loss_of(pm, s, cfg)) / (2 * h);
    EXPECT_LE(sdyn::test::rel_err(grad[k], fd), 1e-4) << param_names(s.trainee)[k] << " " << grad[k] << " " << fd;
  }
}

TEST(MmdGrad, SeedOnlyFragmentsHaveNoParameterDependence) {
  const OuSetup s = ou_setup(4);
  FragmentLayout seeds_only;
  seeds_only.seed_offsets = {0, 1};
  const FragmentBatch gen = generator_fragments(s.gen, seeds_only);
  FragmentBatch data = gen;
  data.origin = Origin::data;
  for (auto& f : data.fragments)
    for (double& v : f) v += 1e-3;
  for (double g : mmd2_grad(gen, s.gen, data, s.trainee, KernelConfig{})) EXPECT_EQ(g, 0.0);
}

TEST(MmdGrad, DetectsProvenanceMismatch) {
  OuSetup s = ou_setup(4);
  FragmentBatch gen = generator_fragments(s.gen, s.layout);
  gen.fragments[2][5] += 1.0;
  EXPECT_THROW(mmd2_grad(gen, s.gen, s.data_batch, s.trainee, KernelConfig{}), InvalidArgument);
  FragmentBatch wrong = generator_fragments(s.gen, s.layout);
  wrong.slice_maps[1].trajectory = 99;
  EXPECT_THROW(mmd2_grad(wrong, s.gen, s.data_batch, s.trainee, KernelConfig{}), InvalidArgument);
}

TEST(MmdGrad, RejectsMisalignedBatches) {
  const OuSetup s = ou_setup(4);
  FragmentLayout other = s.layout;
  other.evolving_offsets.back() -= 1;
  const FragmentBatch gen = generator_fragments(s.gen, other);
  EXPECT_THROW(mmd2_grad(gen, s.gen, s.data_batch, s.trainee, KernelConfig{}), InvalidArgument);
}

TEST(MmdGrad, WorkerCountDoesNotChangeBits) {
  const OuSetup s = ou_setup(8);
  const FragmentBatch gen = generator_fragments(s.gen, s.layout);
  const auto a = mmd2_grad(gen, s.gen, s.data_batch, s.trainee, KernelConfig{}, 1);
  const auto b = mmd2_grad(gen, s.gen, s.data_batch, s.trainee, KernelConfig{}, 3);
  EXPECT_EQ(a, b);
}
