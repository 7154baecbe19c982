#include "sdyn/cli.hpp"

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "sdyn/errors.hpp"
#include "sdyn/experiments.hpp"
#include "sdyn/io.hpp"
#include "sdyn/parallel.hpp"

namespace sdyn {

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 0;
  std::string out = "out";
  std::string checkpoint;
};

RunConfig load(const Options& o) {
  Config c = Config::load(o.config);
  if (o.seed) c.set("seed", static_cast<double>(*o.seed));
  return run_config_from(c);
}

std::size_t workers_of(const Options& o) { return o.workers == 0 ? default_workers() : o.workers; }

void print_params(std::ostream& out, const GenModelParams& p) {
  out << "stiffness = " << format_double(p.stiffness) << "\ngamma = " << format_double(p.gamma)
      << "\nkbt = " << format_double(p.kbt) << '\n';
}

void print_evaluation(std::ostream& out, const MetricsRecord& rec) {
  for (std::size_t k = 0; k < rec.rel_errors.size(); ++k)
    out << "eps_rel(" << rec.rel_error_names[k] << ") = " << format_double(rec.rel_errors[k]) << '\n';
  for (std::size_t k = 0; k < rec.l1_errors.size(); ++k)
    out << "L1 at step " << rec.l1_steps[k] << " = " << format_double(rec.l1_errors[k]) << '\n';
}

int cmd_generate(const Options& o, std::ostream& out) {
  const RunConfig cfg = load(o);
  const auto data = generate_training_data(cfg, workers_of(o));
  const std::filesystem::path dir(o.out);
  write_trajectories_csv(dir / "data.csv", data);
  write_noise_sidecar(dir / "data.noise", data);
  out << "wrote " << data.size() << " trajectories to " << (dir / "data.csv").string() << '\n';
  return 0;
}

int cmd_train(const Options& o, std::ostream& out) {
  const RunConfig cfg = load(o);
  MetricsRecord rec = run_training(cfg, workers_of(o));
  if (cfg.experiment == Experiment::ou_recovery) evaluate(cfg, rec.final_params, rec, workers_of(o));
  const std::filesystem::path dir(o.out);
  write_metrics_csv(dir / "metrics.csv", rec);
  write_checkpoint(dir / "checkpoint.json", rec);
  out << "trained " << rec.epochs.size() << " epochs, final loss "
      << (rec.epochs.empty() ? 0.0 : rec.epochs.back().loss) << '\n';
  print_params(out, rec.final_params);
  print_evaluation(out, rec);
  return 0;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const RunConfig cfg = load(o);
  const std::filesystem::path dir(o.out);
  const std::filesystem::path ckpt = o.checkpoint.empty() ? dir / "checkpoint.json" : std::filesystem::path(o.checkpoint);
  const GenModelParams learned = read_checkpoint_params(ckpt, initial_trainee(cfg));
  MetricsRecord rec;
  rec.experiment = cfg.experiment;
  rec.final_params = learned;
  evaluate(cfg, learned, rec, workers_of(o));
  write_evaluation_csv(dir / "evaluation.csv", rec);
  print_evaluation(out, rec);
  return 0;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const RunConfig cfg = load(o);
  const SweepResult res = run_sweep(cfg, workers_of(o));
  const std::filesystem::path dir(o.out);
  write_sweep_csv(dir / "sweep.csv", res);
  write_sweep_runs_csv(dir / "sweep_runs.csv", res);
  out << std::left << std::setw(14) << "method" << std::setw(10) << "tau";
  for (const auto& m : res.metric_names) out << std::setw(26) << m;
  out << '\n';
  for (const auto& row : res.rows) {
    out << std::setw(14) << to_string(row.protocol) << std::setw(10) << row.tau;
    for (std::size_t k = 0; k < row.mean.size(); ++k) {
      std::ostringstream cell;
      cell << std::scientific << std::setprecision(2) << row.mean[k] << " +- " << row.std[k];
      out << std::setw(26) << cell.str();
    }
    out << '\n';
  }
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generative modelling of stochastic dynamics with MMD training"};
  app.require_subcommand(1);
  Options o;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "run configuration (TOML)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed, overrides the config");
    sub->add_option("--workers", o.workers, "worker threads (0 = hardware concurrency)");
    sub->add_option("--out", o.out, "output directory");
  };
  auto* gen = app.add_subcommand("generate", "write training trajectories and their noise records");
  auto* train = app.add_subcommand("train", "train a generator, write metrics and a checkpoint");
  auto* eval = app.add_subcommand("evaluate", "relative errors and L1 radial-histogram errors of a checkpoint");
  auto* sweep = app.add_subcommand("sweep", "protocol x tau sweep with repeated runs");
  for (auto* s : {gen, train, eval, sweep}) add_common(s);
  eval->add_option("--checkpoint", o.checkpoint, "checkpoint JSON (default OUT/checkpoint.json)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_generate(o, out);
    if (train->parsed()) return cmd_train(o, out);
    if (eval->parsed()) return cmd_evaluate(o, out);
    return cmd_sweep(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace sdyn
