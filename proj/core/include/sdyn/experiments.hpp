#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sdyn/config.hpp"
#include "sdyn/integrators.hpp"
#include "sdyn/kernels.hpp"
#include "sdyn/optimizer.hpp"
#include "sdyn/protocols.hpp"
#include "sdyn/random.hpp"

namespace sdyn {

enum class Experiment { ou_recovery, force_law };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);

// How the start-up pair (X_0, X_1) of each data trajectory is drawn.
//  fixed: X_0 = x0, X_1 = x0 + v0 dt for every trajectory.
//  shell: |X_0| uniform in [r_min, r_max] with a uniform direction; V_0 drawn
//         from the Maxwell distribution N(0, kbt/m) when thermal_velocity.
struct InitialConditions {
  enum class Kind { fixed, shell };
  Kind kind = Kind::fixed;
  std::vector<double> x0;
  std::vector<double> v0;
  double r_min = 0.25;
  double r_max = 2.25;
  bool thermal_velocity = true;

  void validate(std::size_t dim) const;
};

struct EvalConfig {
  std::vector<std::size_t> steps{50, 100, 200};
  double range = 2.5;
  double bin_width = 0.05;
  std::size_t samples = 20000;
};

struct SweepConfig {
  std::vector<ProtocolKind> protocols{ProtocolKind::full_traj, ProtocolKind::conditionals,
                                      ProtocolKind::marginals};
  std::vector<double> taus{1.7e-2, 1.19e-2, 5.83e-3, 4.08e-3, 2.86e-3, 2.0e-3};
};

struct RunConfig {
  Experiment experiment = Experiment::ou_recovery;
  GenModelParams target;
  GenModelParams init;
  InitialConditions data_init;
  ProtocolSpec protocol;
  KernelConfig kernel;
  AdamConfig optim;
  std::vector<std::string> learn{"stiffness", "gamma", "kbt"};  // "theta" selects every network weight
  std::size_t n_data_trajs = 256;
  std::size_t batch_size = 64;  // fragments per mini-batch, data and generator alike
  std::size_t epochs = 3000;
  std::size_t runs = 1;
  std::uint64_t master_seed = 1;
  std::uint64_t init_seed = 0;  // network initialisation; 0 derives it from master_seed
  EvalConfig eval;
  SweepConfig sweep;

  void validate() const;
};

// Builds a RunConfig from parsed keys. Unknown keys and bad values raise ConfigError.
RunConfig run_config_from(const Config& cfg);
RunConfig load_run_config(const std::string& path);

// Start-up states for one trajectory from its own stream.
std::pair<std::vector<double>, std::vector<double>> draw_initial_states(const InitialConditions& ic,
                                                                        const GenModelParams& p,
                                                                        NormalStream& rng);

// n_data_trajs samples of the target; trajectory i is seeded from (master_seed, i).
std::vector<Trajectory> generate_training_data(const RunConfig& cfg, std::size_t workers = 1);

// Channels optimised for cfg.learn; positive physical constants go through logs.
ChannelMap learnable_channels(const RunConfig& cfg, const GenModelParams& p);

// Trainee starting point: init params, with network weights drawn when the
// force model is neural and none are given.
GenModelParams initial_trainee(const RunConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  std::vector<double> params;  // packed layout, before this epoch's update
};

struct MetricsRecord {
  Experiment experiment = Experiment::ou_recovery;
  std::uint64_t seed = 0;
  std::vector<EpochRecord> epochs;
  GenModelParams final_params;
  AdamState optimizer;
  ChannelMap channels;
  std::vector<std::string> rel_error_names;
  std::vector<double> rel_errors;  // stiffness, gamma, kbt
  std::vector<std::size_t> l1_steps;
  std::vector<double> l1_errors;
};

// One mini-batch gradient step per epoch on the given data set.
using EpochCallback = std::function<void(const EpochRecord&)>;
MetricsRecord run_training(const RunConfig& cfg, std::span<const Trajectory> data, std::size_t workers = 1,
                           const EpochCallback& on_epoch = {});
MetricsRecord run_training(const RunConfig& cfg, std::size_t workers = 1);

// |phi_learned - phi| / |phi|
double relative_error(double learned, double target);

// Normalised histogram of |X| with bins of width bin_width over [0, range]
// followed by one overflow bin; sums to one.
std::vector<double> radial_histogram(std::span<const double> radii, double range, double bin_width);

// sum |h_gen - h_data| / sum h_data over the radial histograms of slice at_step.
double l1_radial_error(std::span<const Trajectory> gen, std::span<const Trajectory> data, std::size_t at_step,
                       double range = 2.5, double bin_width = 0.05);

// Fills rel_errors (against cfg.target) and, for force-law runs, l1_errors
// from eval.samples fresh trajectories of the learned and target models.
void evaluate(const RunConfig& cfg, const GenModelParams& learned, MetricsRecord& out, std::size_t workers = 1);

struct SweepRun {
  ProtocolKind protocol;
  double tau = 0.0;
  std::size_t run = 0;
  std::vector<double> metrics;
};

struct SweepRow {
  ProtocolKind protocol;
  double tau = 0.0;
  std::size_t runs = 0;
  std::vector<double> mean;
  std::vector<double> std;  // sample standard deviation (n - 1)
};

struct SweepResult {
  std::vector<std::string> metric_names;
  std::vector<SweepRun> runs;
  std::vector<SweepRow> rows;
};

// Groups runs by (protocol, tau) in first-seen order.
std::vector<SweepRow> aggregate_sweep(std::span<const SweepRun> runs, std::size_t n_metrics);

// Largest evolving-slice count not above cfg.protocol.frag_len that fits the horizon.
ProtocolSpec fit_protocol(const ProtocolSpec& spec, double dt, std::size_t n_steps);

// Cartesian sweep over cfg.sweep.protocols x cfg.sweep.taus with cfg.runs
// repeats; run r uses seed master_seed + r.
SweepResult run_sweep(const RunConfig& cfg, std::size_t workers = 1);

}  // namespace sdyn
