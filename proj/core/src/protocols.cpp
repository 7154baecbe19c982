#include "sdyn/protocols.hpp"

#include <algorithm>
#include <cmath>

#include "sdyn/errors.hpp"

namespace sdyn {

std::string to_string(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::full_traj: return "full_traj";
    case ProtocolKind::marginals: return "marginals";
    case ProtocolKind::conditionals: return "conditionals";
  }
  return "unknown";
}

ProtocolKind protocol_kind_from_string(const std::string& s) {
  if (s == "full_traj" || s == "full-traj") return ProtocolKind::full_traj;
  if (s == "marginals") return ProtocolKind::marginals;
  if (s == "conditionals") return ProtocolKind::conditionals;
  throw InvalidArgument("unknown protocol '" + s + "'");
}

std::size_t ProtocolSpec::delay_steps(double dt) const {
  if (!(tau > 0.0) || !(dt > 0.0)) throw InvalidArgument("tau and dt must be positive");
  const double a = std::round(tau / dt);
  if (a < 1.0) throw InvalidArgument("tau must be at least one integrator step");
  return static_cast<std::size_t>(a);
}

void ProtocolSpec::validate(double dt) const {
  delay_steps(dt);
  if (delta_t != 0.0 && std::abs(delta_t - dt) > 1e-9 * dt)
    throw InvalidArgument("seed spacing delta_t must equal the integrator step");
  if (kind != ProtocolKind::full_traj && frag_len == 0) throw InvalidArgument("frag_len must be positive");
  if (n_fragments == 0) throw InvalidArgument("n_fragments must be positive");
  if (noise_per_seed == 0) throw InvalidArgument("noise_per_seed must be positive");
}

std::vector<std::size_t> FragmentLayout::offsets() const {
  std::vector<std::size_t> out;
  if (compare_seeds) out = seed_offsets;
  out.insert(out.end(), evolving_offsets.begin(), evolving_offsets.end());
  return out;
}

std::size_t FragmentLayout::span() const {
  std::size_t s = 0;
  for (std::size_t o : seed_offsets) s = std::max(s, o);
  for (std::size_t o : evolving_offsets) s = std::max(s, o);
  return s;
}

FragmentLayout fragment_layout(const ProtocolSpec& spec, double dt, std::size_t n_steps, std::size_t order) {
  spec.validate(dt);
  const std::size_t a = spec.delay_steps(dt);
  FragmentLayout layout;
  for (std::size_t i = 0; i < order; ++i) layout.seed_offsets.push_back(i);
  layout.compare_seeds = spec.kind != ProtocolKind::conditionals;
  // s_k = t_k + tau
  std::size_t count = spec.frag_len;
  if (spec.kind == ProtocolKind::full_traj) {
    if (a > n_steps)
      throw FragmentBounds("tau spans " + std::to_string(a) + " steps but the trajectory has " +
                           std::to_string(n_steps));
    count = n_steps / a;
  }
  for (std::size_t i = 0; i < count; ++i) layout.evolving_offsets.push_back(a + i * a);
  if (layout.span() > n_steps)
    throw FragmentBounds("fragment reaches step " + std::to_string(layout.span()) + " beyond horizon " +
                         std::to_string(n_steps));
  return layout;
}

std::vector<std::size_t> fragment_starts(const ProtocolSpec& spec, double dt, std::size_t n_steps,
                                         std::size_t order) {
  const FragmentLayout layout = fragment_layout(spec, dt, n_steps, order);
  const std::size_t last = n_steps - layout.span();
  if (!spec.starts.empty()) {
    for (std::size_t t : spec.starts)
      if (t > last)
        throw FragmentBounds("fragment start " + std::to_string(t) + " runs past the horizon (last valid " +
                             std::to_string(last) + ")");
    return spec.starts;
  }
  if (spec.kind == ProtocolKind::full_traj) return {0};
  const std::size_t count = std::min(spec.n_fragments, last + 1);
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t t = count == 1 ? 0
                                     : static_cast<std::size_t>(std::llround(static_cast<double>(i) *
                                                                             static_cast<double>(last) /
                                                                             static_cast<double>(count - 1)));
    starts.push_back(t);
  }
  return starts;
}

namespace {

std::vector<double> gather(const Trajectory& traj, std::span<const std::size_t> slices) {
  std::vector<double> out;
  out.reserve(slices.size() * traj.dim);
  for (std::size_t s : slices) {
    const auto v = traj.slice(s);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

}  // namespace

ProtocolOutput extract_fragments(std::span<const Trajectory> trajs, const ProtocolSpec& spec, std::size_t order) {
  if (trajs.empty()) throw InvalidArgument("no trajectories to extract fragments from");
  const Trajectory& first = trajs.front();
  const std::size_t n_steps = first.n_steps();
  for (const auto& t : trajs)
    if (t.n_steps() != n_steps || t.dim != first.dim)
      throw InvalidArgument("trajectories in a data set must share horizon and dimension");

  ProtocolOutput out;
  out.layout = fragment_layout(spec, first.dt, n_steps, order);
  const auto starts = fragment_starts(spec, first.dt, n_steps, order);
  const auto offsets = out.layout.offsets();
  out.fragments.origin = Origin::data;
  out.fragments.dim = first.dim;
  for (std::size_t ti = 0; ti < trajs.size(); ++ti) {
    const Trajectory& traj = trajs[ti];
    for (std::size_t t0 : starts) {
      SliceMap map{ti, t0, {}};
      for (std::size_t o : offsets) map.slices.push_back(t0 + o);
      out.fragments.fragments.push_back(gather(traj, map.slices));
      out.fragments.slice_maps.push_back(std::move(map));

      std::vector<std::size_t> seed_slices;
      for (std::size_t o : out.layout.seed_offsets) seed_slices.push_back(t0 + o);
      out.seeds.push_back(SeedStates{ti, t0, traj.dim, gather(traj, seed_slices)});
    }
  }
  return out;
}

std::vector<SeedStates> seed_generator_from(std::span<const SeedStates> seeds, const ProtocolSpec& spec) {
  const std::size_t copies = spec.kind == ProtocolKind::conditionals ? spec.noise_per_seed : 1;
  std::vector<SeedStates> out;
  out.reserve(seeds.size() * copies);
  for (const auto& s : seeds) {
    if (s.dim == 0 || s.order() < 2 || s.states.size() != s.order() * s.dim)
      throw InvalidArgument("fragment is missing its seed slices");
    for (std::size_t c = 0; c < copies; ++c) out.push_back(s);
  }
  return out;
}

std::vector<SeedStates> seed_generator_from(const ProtocolOutput& out, const ProtocolSpec& spec) {
  if (out.seeds.size() != out.fragments.size()) throw InvalidArgument("fragment is missing its seed slices");
  return seed_generator_from(std::span<const SeedStates>(out.seeds), spec);
}

FragmentBatch generator_fragments(std::span<const Trajectory> gen_trajs, const FragmentLayout& layout) {
  FragmentBatch batch;
  batch.origin = Origin::generator;
  const auto offsets = layout.offsets();
  for (std::size_t ti = 0; ti < gen_trajs.size(); ++ti) {
    const Trajectory& traj = gen_trajs[ti];
    if (traj.n_steps() < layout.span())
      throw FragmentBounds("generator trajectory shorter than the fragment span");
    batch.dim = traj.dim;
    SliceMap map{ti, 0, offsets};
    batch.fragments.push_back(gather(traj, map.slices));
    batch.slice_maps.push_back(std::move(map));
  }
  return batch;
}

}  // namespace sdyn
