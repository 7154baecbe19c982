#include <gtest/gtest.h>

#include "sdyn/errors.hpp"
#include "sdyn/protocols.hpp"
#include "support.hpp"

using namespace sdyn;
using sdyn::test::ou_params;

namespace {

std::vector<Trajectory> paths(std::size_t n, std::size_t steps = 18) {
  GenModelParams p = ou_params();
  p.n_steps = steps;
  std::vector<Trajectory> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x0{0.1 * i, 0.2, -0.1}, x1{0.1 * i + 0.001, 0.2, -0.1};
    out.push_back(simulate(p, x0, x1, 40 + i));
    out.back().sample_id = i;
  }
  return out;
}

}  // namespace

TEST(Protocols, MarginalIndexExample) {
  ProtocolSpec spec;
  spec.kind = ProtocolKind::marginals;
  spec.tau = 2e-3;
  spec.frag_len = 3;
  spec.starts = {0};
  const auto data = paths(2);
  const ProtocolOutput out = extract_fragments(data, spec);
  ASSERT_EQ(out.fragments.size(), 2u);
  EXPECT_EQ(out.fragments.slice_maps[0].slices, (std::vector<std::size_t>{0, 1, 2, 4, 6}));
  EXPECT_EQ(out.layout.seed_offsets, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(out.layout.evolving_offsets, (std::vector<std::size_t>{2, 4, 6}));
}

TEST(Protocols, FullTrajectoryCoversHorizonAtTau) {
  ProtocolSpec spec;
  spec.kind = ProtocolKind::full_traj;
  spec.tau = 2e-3;
  const FragmentLayout layout = fragment_layout(spec, 1e-3, 18);
  EXPECT_EQ(layout.offsets(), (std::vector<std::size_t>{0, 1, 2, 4, 6, 8, 10, 12, 14, 16, 18}));
  spec.tau = 1.7e-2;
  EXPECT_EQ(fragment_layout(spec, 1e-3, 18).offsets(), (std::vector<std::size_t>{0, 1, 17}));
}

TEST(Protocols, DegenerateMarginalsEqualFullTrajectory) {
  const auto data = paths(3);
  ProtocolSpec full;
  full.kind = ProtocolKind::full_traj;
  full.tau = 1e-3;
  ProtocolSpec marg = full;
  marg.kind = ProtocolKind::marginals;
  marg.frag_len = 18;
  marg.n_fragments = 1;
  const auto a = extract_fragments(data, full);
  const auto b = extract_fragments(data, marg);
  ASSERT_EQ(a.fragments.size(), b.fragments.size());
  for (std::size_t i = 0; i < a.fragments.size(); ++i) {
    EXPECT_EQ(a.fragments.fragments[i], b.fragments.fragments[i]);
    EXPECT_EQ(a.fragments.slice_maps[i].slices, b.fragments.slice_maps[i].slices);
  }
}

TEST(Protocols, SliceMapRoundTrips) {
  const auto data = paths(4);
  ProtocolSpec spec;
  spec.kind = ProtocolKind::marginals;
  spec.tau = 3e-3;
  spec.frag_len = 2;
  spec.n_fragments = 5;
  const auto out = extract_fragments(data, spec);
  const std::size_t d = out.fragments.dim;
  for (std::size_t i = 0; i < out.fragments.size(); ++i) {
    const SliceMap& m = out.fragments.slice_maps[i];
    ASSERT_EQ(out.fragments.fragments[i].size(), m.slices.size() * d);
    for (std::size_t c = 0; c < out.fragments.fragments[i].size(); ++c)
      EXPECT_EQ(out.fragments.fragments[i][c], data[m.trajectory].slice(m.slices[c / d])[c % d]);
  }
}

TEST(Protocols, UniformStrideStarts) {
  ProtocolSpec spec;
  spec.kind = ProtocolKind::marginals;
  spec.tau = 2e-3;
  spec.frag_len = 3;
  spec.n_fragments = 4;
  // span 6 on an 18-step path: valid starts 0..12
  EXPECT_EQ(fragment_starts(spec, 1e-3, 18), (std::vector<std::size_t>{0, 4, 8, 12}));
  spec.n_fragments = 50;
  EXPECT_EQ(fragment_starts(spec, 1e-3, 18).size(), 13u);
}

TEST(Protocols, ConditionalsReplicateSeeds) {
  const auto data = paths(16);
  ProtocolSpec spec;
  spec.kind = ProtocolKind::conditionals;
  spec.tau = 2e-3;
  spec.frag_len = 3;
  spec.n_fragments = 1;
  spec.noise_per_seed = 4;
  const auto out = extract_fragments(data, spec);
  ASSERT_EQ(out.seeds.size(), 16u);
  EXPECT_FALSE(out.layout.compare_seeds);
  EXPECT_EQ(out.fragments.slice_maps[0].slices, (std::vector<std::size_t>{2, 4, 6}));
  const auto seeds = seed_generator_from(out, spec);
  ASSERT_EQ(seeds.size(), 64u);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const SeedStates& s = seeds[i];
    ASSERT_EQ(s.order(), 2u);
    const Trajectory& src = data[s.source];
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_EQ(s.state(0)[c], src.slice(s.start)[c]);
      EXPECT_EQ(s.state(1)[c], src.slice(s.start + 1)[c]);
    }
    EXPECT_EQ(s.source, i / 4);
  }
}

TEST(Protocols, GeneratorFragmentsAlignWithData) {
  const auto data = paths(3);
  ProtocolSpec spec;
  spec.kind = ProtocolKind::marginals;
  spec.tau = 2e-3;
  spec.frag_len = 2;
  spec.starts = {5};
  const auto out = extract_fragments(data, spec);
  const auto seeds = seed_generator_from(out, spec);
  std::vector<Trajectory> gen;
  for (const auto& s : seeds) gen.push_back(simulate(ou_params(), s.state(0), s.state(1), 1, out.layout.span()));
  const FragmentBatch g = generator_fragments(gen, out.layout);
  EXPECT_NO_THROW(check_aligned(g, out.fragments));
  // Seed slices are copied verbatim.
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t c = 0; c < 6; ++c) EXPECT_EQ(g.fragments[i][c], out.fragments.fragments[i][c]);
}

TEST(Protocols, BoundsErrors) {
  const auto data = paths(2);
  ProtocolSpec spec;
  spec.kind = ProtocolKind::marginals;
  spec.tau = 2e-3;
  spec.frag_len = 3;
  spec.starts = {13};
  EXPECT_THROW(extract_fragments(data, spec), FragmentBounds);
  spec.starts.clear();
  spec.frag_len = 10;
  EXPECT_THROW(extract_fragments(data, spec), FragmentBounds);
  ProtocolSpec full;
  full.tau = 2e-2;
  EXPECT_THROW(extract_fragments(data, full), FragmentBounds);
}

TEST(Protocols, TauMapsToWholeSteps) {
  ProtocolSpec spec;
  for (auto [tau, a] : std::vector<std::pair<double, std::size_t>>{
           {1.7e-2, 17}, {1.19e-2, 12}, {5.83e-3, 6}, {4.08e-3, 4}, {2.86e-3, 3}, {2e-3, 2}}) {
    spec.tau = tau;
    EXPECT_EQ(spec.delay_steps(1e-3), a) << tau;
  }
  spec.tau = 4e-4;
  EXPECT_THROW(spec.validate(1e-3), InvalidArgument);
  spec.tau = 2e-3;
  spec.delta_t = 2e-3;
  EXPECT_THROW(spec.validate(1e-3), InvalidArgument);
}

TEST(Protocols, MissingSeedSlices) {
  ProtocolSpec spec;
  std::vector<SeedStates> seeds{SeedStates{0, 0, 3, {1.0, 2.0, 3.0}}};
  EXPECT_THROW(seed_generator_from(std::span<const SeedStates>(seeds), spec), InvalidArgument);
}

TEST(Protocols, KindNames) {
  EXPECT_EQ(protocol_kind_from_string("full-traj"), ProtocolKind::full_traj);
  EXPECT_EQ(protocol_kind_from_string(to_string(ProtocolKind::conditionals)), ProtocolKind::conditionals);
  EXPECT_THROW(protocol_kind_from_string("bogus"), InvalidArgument);
}
