#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sdyn/adjoint.hpp"
#include "sdyn/experiments.hpp"
#include "sdyn/integrators.hpp"

namespace sdyn {

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// Columns sample_id, step, t, x1..xd; t = (start_step + step) dt.
void write_trajectories_csv(const std::filesystem::path& path, std::span<const Trajectory> trajs);
// Positions only; noise records come from the sidecar.
std::vector<Trajectory> read_trajectories_csv(const std::filesystem::path& path);

// Binary noise sidecar, little-endian:
//   "SDYNNOIS", u32 version, u64 n_samples, u64 n_steps, u64 dim,
//   then per sample: u64 sample_id, u64 seed, n_steps * dim doubles.
void write_noise_sidecar(const std::filesystem::path& path, std::span<const Trajectory> trajs);
// Attaches noise records and seeds to trajectories matched by sample_id.
void read_noise_sidecar(const std::filesystem::path& path, std::vector<Trajectory>& trajs);

// epoch, loss, one column per tracked parameter (stiffness, gamma, kbt, plus
// theta_norm for neural trainees).
void write_metrics_csv(const std::filesystem::path& path, const MetricsRecord& rec);

// JSON: experiment, seed, epoch, param_names, params, optimizer state.
void write_checkpoint(const std::filesystem::path& path, const MetricsRecord& rec);
// Restores the trainee parameters saved by write_checkpoint on top of `base`.
GenModelParams read_checkpoint_params(const std::filesystem::path& path, const GenModelParams& base);

// Per-slice adjoint vectors for debugging: sample_id, step, r1..rd.
void write_adjoint_csv(const std::filesystem::path& path, const AdjointState& adj);

// Aggregate table: method, tau, runs, mean_<metric>, std_<metric>...
void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result);
// One row per run with raw metric values.
void write_sweep_runs_csv(const std::filesystem::path& path, const SweepResult& result);

// metric, value rows for `evaluate`.
void write_evaluation_csv(const std::filesystem::path& path, const MetricsRecord& rec);

}  // namespace sdyn
