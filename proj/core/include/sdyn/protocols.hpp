#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sdyn/integrators.hpp"
#include "sdyn/mmd_loss.hpp"

namespace sdyn {

enum class ProtocolKind { full_traj, marginals, conditionals };

std::string to_string(ProtocolKind k);
ProtocolKind protocol_kind_from_string(const std::string& s);

// Fragment-extraction rule. Times are in physical units; they are mapped to
// whole integrator steps (tau = a dt with a rounded to the nearest integer >= 1).
struct ProtocolSpec {
  ProtocolKind kind = ProtocolKind::full_traj;
  double tau = 2e-3;
  double delta_t = 0.0;            // seed-state spacing; 0 means dt
  std::size_t frag_len = 3;        // evolving slices (marginals, conditionals)
  std::size_t n_fragments = 1;     // fragment starts t_k per trajectory
  std::size_t noise_per_seed = 1;  // generator realisations per seed (conditionals)
  std::vector<std::size_t> starts; // explicit t_k in steps; empty = uniform stride

  std::size_t delay_steps(double dt) const;
  void validate(double dt) const;
};

// Slice offsets relative to t_k. full_traj and marginals compare seeds plus
// evolving slices; conditionals compare evolving slices only.
struct FragmentLayout {
  std::vector<std::size_t> seed_offsets;
  std::vector<std::size_t> evolving_offsets;
  bool compare_seeds = true;

  std::vector<std::size_t> offsets() const;
  std::size_t span() const;
};

FragmentLayout fragment_layout(const ProtocolSpec& spec, double dt, std::size_t n_steps, std::size_t order = 2);

// Start slices t_k. Default: N_m starts on a uniform stride over every valid
// start, capped at the number of distinct valid starts.
std::vector<std::size_t> fragment_starts(const ProtocolSpec& spec, double dt, std::size_t n_steps,
                                         std::size_t order = 2);

// The m start-up states X(t_k), ..., X(t_k + (m-1) dt) of a data fragment.
struct SeedStates {
  std::size_t source = 0;  // data trajectory
  std::size_t start = 0;   // t_k
  std::size_t dim = 0;
  std::vector<double> states;

  std::size_t order() const { return dim == 0 ? 0 : states.size() / dim; }
  std::span<const double> state(std::size_t i) const { return {states.data() + i * dim, dim}; }
};

struct ProtocolOutput {
  FragmentBatch fragments;
  std::vector<SeedStates> seeds;  // seeds[i] belongs to fragments[i]
  FragmentLayout layout;
};

ProtocolOutput extract_fragments(std::span<const Trajectory> trajs, const ProtocolSpec& spec,
                                 std::size_t order = 2);

// Generator start-up states: one per fragment for full_traj and marginals,
// noise_per_seed copies of each Q_k for conditionals. Seeds are taken
// verbatim from the data.
std::vector<SeedStates> seed_generator_from(const ProtocolOutput& out, const ProtocolSpec& spec);
std::vector<SeedStates> seed_generator_from(std::span<const SeedStates> seeds, const ProtocolSpec& spec);

// Fragments of generator trajectories whose slice 0 sits at t_k.
FragmentBatch generator_fragments(std::span<const Trajectory> gen_trajs, const FragmentLayout& layout);

}  // namespace sdyn
