#include "sdyn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "sdyn/errors.hpp"
#include "sdyn/mmd_loss.hpp"
#include "sdyn/parallel.hpp"

namespace sdyn {

namespace {

// Stream tags for derive_seed.
enum Tag : std::uint64_t {
  tag_data_init = 0,
  tag_data_noise = 1,
  tag_batch = 2,
  tag_gen_noise = 3,
  tag_net_init = 4,
  tag_eval_data = 10,
  tag_eval_gen = 11,
};

}  // namespace

std::string to_string(Experiment e) {
  return e == Experiment::ou_recovery ? "ou_recovery" : "force_law";
}

Experiment experiment_from_string(const std::string& s) {
  if (s == "ou_recovery") return Experiment::ou_recovery;
  if (s == "force_law") return Experiment::force_law;
  throw InvalidArgument("unknown experiment '" + s + "'");
}

void InitialConditions::validate(std::size_t dim) const {
  if (kind == Kind::fixed) {
    if (!x0.empty() && x0.size() != dim) throw InvalidArgument("data.x0 must have dim entries");
    if (!v0.empty() && v0.size() != dim) throw InvalidArgument("data.v0 must have dim entries");
  } else if (!(r_min >= 0.0 && r_max >= r_min)) {
    throw InvalidArgument("data.r_min/r_max must satisfy 0 <= r_min <= r_max");
  }
}

void RunConfig::validate() const {
  target.validate();
  init.validate();
  if (target.dt != init.dt || target.n_steps != init.n_steps || target.dim != init.dim || target.mass != init.mass)
    throw InvalidArgument("target and trainee must share dt, n_steps, dim and mass");
  data_init.validate(target.dim);
  protocol.validate(target.dt);
  fragment_layout(protocol, target.dt, target.n_steps);
  kernel.validate();
  optim.validate();
  if (n_data_trajs < 2) throw InvalidArgument("n_data_trajs must be at least 2");
  if (batch_size < 2) throw InvalidArgument("batch_size must be at least 2");
  if (protocol.kind == ProtocolKind::conditionals && batch_size / protocol.noise_per_seed < 1)
    throw InvalidArgument("batch_size must be at least noise_per_seed for conditionals");
  if (runs == 0) throw InvalidArgument("runs must be positive");
  if (eval.steps.empty() || !(eval.range > 0.0) || !(eval.bin_width > 0.0) || eval.samples < 1)
    throw InvalidArgument("eval settings are invalid");
  for (const auto& name : learn)
    if (name != "stiffness" && name != "gamma" && name != "kbt" && name != "const_force" && name != "theta")
      throw InvalidArgument("unknown learnable channel '" + name + "'");
  if (std::find(learn.begin(), learn.end(), "theta") != learn.end() && init.force_model != ForceModel::neural)
    throw InvalidArgument("learning theta needs a neural trainee force model");
}

namespace {

MlpSpec mlp_from(const Config& c, const std::string& prefix) {
  MlpSpec spec;
  std::vector<std::size_t> hidden{100, 100, 100};
  if (c.has(prefix + ".hidden")) {
    hidden.clear();
    for (double h : c.numbers(prefix + ".hidden", {})) {
      if (!(h >= 1.0) || h != std::floor(h)) throw ConfigError(prefix + ".hidden must hold positive integers");
      hidden.push_back(static_cast<std::size_t>(h));
    }
  }
  spec = MlpSpec::with_hidden(hidden, c.number(prefix + ".leaky_slope", 0.01));
  return spec;
}

void read_model(const Config& c, const std::string& prefix, GenModelParams& p) {
  p.gamma = c.number(prefix + ".gamma", p.gamma);
  p.kbt = c.number(prefix + ".kbt", p.kbt);
  p.stiffness = c.number(prefix + ".stiffness", p.stiffness);
  p.const_force = c.numbers(prefix + ".const_force", p.const_force);
  if (c.has(prefix + ".force_model")) p.force_model = force_model_from_string(c.text(prefix + ".force_model", ""));
  p.well_kappa = c.number(prefix + ".well_kappa", p.well_kappa);
  p.well_radius = c.number(prefix + ".well_radius", p.well_radius);
}

}  // namespace

RunConfig run_config_from(const Config& c) {
  std::vector<std::string> known{"experiment", "seed", "runs"};
  for (const char* k : {"gamma", "kbt", "stiffness", "const_force", "force_model", "well_kappa", "well_radius"}) {
    known.push_back(std::string("model.") + k);
    known.push_back(std::string("init.") + k);
  }
  for (const char* k : {"model.mass", "model.dt", "model.n_steps", "model.dim", "init.scale", "init.seed",
                        "init.mlp.hidden", "init.mlp.leaky_slope", "data.init", "data.x0", "data.v0", "data.r_min",
                        "data.r_max", "data.thermal_velocity", "data.n_trajs", "protocol.kind", "protocol.tau",
                        "protocol.delta_t", "protocol.frag_len", "protocol.n_fragments", "protocol.noise_per_seed",
                        "protocol.starts", "kernel.alpha", "kernel.length_scale", "optim.lr", "optim.beta1",
                        "optim.beta2", "optim.eps", "optim.lr_final", "optim.epochs", "train.learn",
                        "train.batch_size", "eval.steps", "eval.range", "eval.bin_width", "eval.samples",
                        "sweep.protocols", "sweep.taus"})
    known.emplace_back(k);
  c.require_known(known);
  RunConfig cfg;
  try {
    cfg.experiment = experiment_from_string(c.text("experiment", "ou_recovery"));
    const bool force_law = cfg.experiment == Experiment::force_law;
    cfg.master_seed = c.seed("seed", cfg.master_seed);
    cfg.runs = c.count("runs", cfg.runs);

    GenModelParams& t = cfg.target;
    t.dt = c.number("model.dt", t.dt);
    t.n_steps = c.count("model.n_steps", force_law ? 20 : t.n_steps);
    t.dim = c.count("model.dim", t.dim);
    t.mass = c.number("model.mass", t.mass);
    if (force_law) t.force_model = ForceModel::double_well;
    read_model(c, "model", t);
    if (t.force_model == ForceModel::neural) throw ConfigError("the data target cannot be a neural force model");
    t.mlp = mlp_from(c, "init.mlp");

    // Trainee: same integrator settings; physical constants start at init.scale
    // times the target unless given explicitly.
    GenModelParams& s = cfg.init;
    s = t;
    const double scale = c.number("init.scale", force_law ? 1.0 : 2.0);
    s.stiffness = t.stiffness * scale;
    s.gamma = t.gamma * scale;
    s.kbt = t.kbt * scale;
    s.force_model = force_law ? ForceModel::neural : ForceModel::linear;
    read_model(c, "init", s);
    s.const_force = c.numbers("init.const_force", {});
    if (s.force_model == ForceModel::double_well) throw ConfigError("the trainee cannot use the double_well force");
    s.mass = t.mass;
    s.mlp = t.mlp;
    cfg.init_seed = c.seed("init.seed", 0);
    if (s.force_model == ForceModel::neural) {
      const std::uint64_t seed = cfg.init_seed ? cfg.init_seed : derive_seed(cfg.master_seed, {tag_net_init});
      s.neural_weights = mlp_init(s.mlp, seed);
    }

    InitialConditions& ic = cfg.data_init;
    const std::string kind = c.text("data.init", force_law ? "shell" : "fixed");
    if (kind == "fixed")
      ic.kind = InitialConditions::Kind::fixed;
    else if (kind == "shell")
      ic.kind = InitialConditions::Kind::shell;
    else
      throw ConfigError("data.init must be \"fixed\" or \"shell\"");
    ic.x0 = c.numbers("data.x0", {});
    ic.v0 = c.numbers("data.v0", {});
    if (!force_law && ic.kind == InitialConditions::Kind::fixed && !c.has("data.x0") && !c.has("data.v0")) {
      // Displacement along one axis and a kick along another, so the drift
      // (stiffness) and damping signatures land in different components.
      ic.x0.assign(t.dim, 0.0);
      ic.v0.assign(t.dim, 0.0);
      ic.x0[0] = 30.0;
      ic.v0[t.dim > 1 ? 1 : 0] = 30.0;
    }
    ic.r_min = c.number("data.r_min", ic.r_min);
    ic.r_max = c.number("data.r_max", ic.r_max);
    ic.thermal_velocity = c.flag("data.thermal_velocity", ic.thermal_velocity);
    cfg.n_data_trajs = c.count("data.n_trajs", cfg.n_data_trajs);

    ProtocolSpec& pr = cfg.protocol;
    pr.kind = protocol_kind_from_string(c.text("protocol.kind", "full_traj"));
    pr.tau = c.number("protocol.tau", force_law ? 1.9e-2 : 1.7e-2);
    pr.delta_t = c.number("protocol.delta_t", 0.0);
    pr.frag_len = c.count("protocol.frag_len", pr.frag_len);
    pr.n_fragments = c.count("protocol.n_fragments", pr.n_fragments);
    pr.noise_per_seed = c.count("protocol.noise_per_seed", pr.noise_per_seed);
    for (double v : c.numbers("protocol.starts", {})) {
      if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError("protocol.starts must hold step indices");
      pr.starts.push_back(static_cast<std::size_t>(v));
    }

    cfg.kernel.alpha = c.number("kernel.alpha", cfg.kernel.alpha);
    cfg.kernel.length_scale = c.number("kernel.length_scale", cfg.kernel.length_scale);

    cfg.optim.lr = c.number("optim.lr", force_law ? 1e-3 : cfg.optim.lr);
    cfg.optim.beta1 = c.number("optim.beta1", cfg.optim.beta1);
    cfg.optim.beta2 = c.number("optim.beta2", cfg.optim.beta2);
    cfg.optim.eps = c.number("optim.eps", cfg.optim.eps);
    cfg.optim.lr_final = c.number("optim.lr_final", cfg.optim.lr_final);
    cfg.epochs = c.count("optim.epochs", force_law ? 5000 : cfg.epochs);

    cfg.learn = c.strings("train.learn", force_law ? std::vector<std::string>{"theta"} : cfg.learn);
    cfg.batch_size = c.count("train.batch_size", cfg.batch_size);

    std::vector<std::size_t> steps;
    for (double v : c.numbers("eval.steps", {})) {
      if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("eval.steps must hold positive step indices");
      steps.push_back(static_cast<std::size_t>(v));
    }
    if (!steps.empty()) cfg.eval.steps = steps;
    cfg.eval.range = c.number("eval.range", cfg.eval.range);
    cfg.eval.bin_width = c.number("eval.bin_width", cfg.eval.bin_width);
    cfg.eval.samples = c.count("eval.samples", cfg.eval.samples);

    if (c.has("sweep.protocols")) {
      cfg.sweep.protocols.clear();
      for (const auto& name : c.strings("sweep.protocols", {}))
        cfg.sweep.protocols.push_back(protocol_kind_from_string(name));
    }
    cfg.sweep.taus = c.numbers("sweep.taus", cfg.sweep.taus);

    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  } catch (const FragmentBounds& e) {
    throw ConfigError(e.what());
  } catch (const StabilityError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) { return run_config_from(Config::load(path)); }

std::pair<std::vector<double>, std::vector<double>> draw_initial_states(const InitialConditions& ic,
                                                                        const GenModelParams& p,
                                                                        NormalStream& rng) {
  const std::size_t d = p.dim;
  std::vector<double> x0(d, 0.0), v0(d, 0.0);
  if (ic.kind == InitialConditions::Kind::fixed) {
    if (!ic.x0.empty()) x0 = ic.x0;
    if (!ic.v0.empty()) v0 = ic.v0;
  } else {
    std::vector<double> dir(d);
    double norm = 0.0;
    do {
      rng.fill(dir);
      norm = std::sqrt(std::inner_product(dir.begin(), dir.end(), dir.begin(), 0.0));
    } while (norm < 1e-12);
    const double r = rng.uniform(ic.r_min, ic.r_max);
    for (std::size_t k = 0; k < d; ++k) x0[k] = r * dir[k] / norm;
    if (ic.thermal_velocity) {
      const double v_scale = std::sqrt(p.kbt / p.mass);
      for (double& v : v0) v = v_scale * rng();
    }
  }
  std::vector<double> x1(d);
  for (std::size_t k = 0; k < d; ++k) x1[k] = x0[k] + v0[k] * p.dt;
  return {std::move(x0), std::move(x1)};
}

namespace {

std::vector<Trajectory> sample_model(const GenModelParams& p, const InitialConditions& ic, std::uint64_t master,
                                     std::uint64_t tag, std::size_t count, std::size_t n_steps,
                                     std::size_t workers) {
  std::vector<Trajectory> out(count);
  parallel_for(count, workers, [&](std::size_t i) {
    NormalStream init_rng(derive_seed(master, {tag, i, 0}));
    const auto [x0, x1] = draw_initial_states(ic, p, init_rng);
    out[i] = simulate(p, x0, x1, derive_seed(master, {tag, i, 1}), n_steps);
    out[i].sample_id = i;
  });
  return out;
}

}  // namespace

std::vector<Trajectory> generate_training_data(const RunConfig& cfg, std::size_t workers) {
  cfg.target.validate();
  std::vector<Trajectory> out(cfg.n_data_trajs);
  parallel_for(out.size(), workers, [&](std::size_t i) {
    NormalStream init_rng(derive_seed(cfg.master_seed, {tag_data_init, i}));
    const auto [x0, x1] = draw_initial_states(cfg.data_init, cfg.target, init_rng);
    out[i] = simulate(cfg.target, x0, x1, derive_seed(cfg.master_seed, {tag_data_noise, i}));
    out[i].sample_id = i;
  });
  return out;
}

ChannelMap learnable_channels(const RunConfig& cfg, const GenModelParams& p) {
  std::vector<Channel> channels;
  const auto wants = [&](const char* name) {
    return std::find(cfg.learn.begin(), cfg.learn.end(), name) != cfg.learn.end();
  };
  if (wants("stiffness")) channels.push_back({param_index::stiffness, true, "stiffness"});
  if (wants("gamma")) channels.push_back({param_index::gamma, true, "gamma"});
  if (wants("kbt")) channels.push_back({param_index::kbt, true, "kbt"});
  const auto names = param_names(p);
  if (wants("const_force"))
    for (std::size_t d = 0; d < p.dim; ++d)
      channels.push_back({param_index::const_force + d, false, names[param_index::const_force + d]});
  if (wants("theta") && p.force_model == ForceModel::neural)
    for (std::size_t i = neural_offset(p); i < num_params(p); ++i) channels.push_back({i, false, names[i]});
  return ChannelMap(std::move(channels));
}

GenModelParams initial_trainee(const RunConfig& cfg) {
  GenModelParams p = cfg.init;
  if (p.const_force.empty()) p.const_force.assign(p.dim, 0.0);
  return p;
}

MetricsRecord run_training(const RunConfig& cfg, std::span<const Trajectory> data, std::size_t workers,
                           const EpochCallback& on_epoch) {
  cfg.validate();
  const std::uint64_t seed = cfg.master_seed;
  GenModelParams params = initial_trainee(cfg);

  const ProtocolOutput pool = extract_fragments(data, cfg.protocol);
  const std::size_t total = pool.fragments.size();
  const std::size_t batch = std::min(cfg.batch_size, total);
  if (batch < 2) throw InvalidBatch("fewer than two data fragments available");
  const std::size_t span = std::max<std::size_t>(pool.layout.span(), 2);
  const bool conditionals = cfg.protocol.kind == ProtocolKind::conditionals;
  const std::size_t n_seeds = conditionals ? std::max<std::size_t>(1, batch / cfg.protocol.noise_per_seed) : batch;

  MetricsRecord rec;
  rec.experiment = cfg.experiment;
  rec.seed = seed;
  rec.channels = learnable_channels(cfg, params);
  const auto channel_names = rec.channels.names();
  std::vector<double> packed = pack_params(params);
  std::vector<double> learnable = rec.channels.to_learnable(packed);
  AdamState adam = AdamState::fresh(learnable.size(), cfg.optim);

  std::vector<std::size_t> order(total);
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    // Mini-batch without replacement: partial Fisher-Yates on a fresh index list.
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 batch_rng(derive_seed(seed, {tag_batch, e}));
    for (std::size_t i = 0; i < batch; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, total - 1);
      std::swap(order[i], order[pick(batch_rng)]);
    }
    FragmentBatch data_batch;
    data_batch.origin = Origin::data;
    data_batch.dim = pool.fragments.dim;
    std::vector<SeedStates> chosen_seeds;
    for (std::size_t i = 0; i < batch; ++i) {
      data_batch.fragments.push_back(pool.fragments.fragments[order[i]]);
      data_batch.slice_maps.push_back(pool.fragments.slice_maps[order[i]]);
      if (i < n_seeds) chosen_seeds.push_back(pool.seeds[order[i]]);
    }
    const auto gen_seeds = seed_generator_from(std::span<const SeedStates>(chosen_seeds), cfg.protocol);

    std::vector<Trajectory> gen_trajs(gen_seeds.size());
    parallel_for(gen_seeds.size(), workers, [&](std::size_t i) {
      const SeedStates& s = gen_seeds[i];
      gen_trajs[i] = simulate(params, s.state(0), s.state(1), derive_seed(seed, {tag_gen_noise, e, i}), span);
      gen_trajs[i].sample_id = i;
      gen_trajs[i].start_step = s.start;
    });
    const FragmentBatch gen_batch = generator_fragments(gen_trajs, pool.layout);
    const MmdValueGrad vg =
        mmd2_value_and_grad(gen_batch, gen_trajs, data_batch, FaragoScheme(params), cfg.kernel, workers);

    EpochRecord row{e, vg.loss, packed};
    if (on_epoch) on_epoch(row);
    rec.epochs.push_back(std::move(row));

    const auto grad_u = rec.channels.chain(vg.grad, packed);
    adam.lr = cfg.optim.rate_at(e, cfg.epochs);
    try {
      adam_step(adam, learnable, grad_u, channel_names);
    } catch (const OptimizerHalt& h) {
      throw OptimizerHalt(h.channel(), channel_names[h.channel()] + ", epoch " + std::to_string(e));
    }
    rec.channels.apply(learnable, packed);
    unpack_params(params, packed);
  }

  rec.final_params = params;
  rec.optimizer = adam;
  return rec;
}

MetricsRecord run_training(const RunConfig& cfg, std::size_t workers) {
  const auto data = generate_training_data(cfg, workers);
  return run_training(cfg, data, workers);
}

double relative_error(double learned, double target) {
  if (target == 0.0) throw InvalidArgument("relative error is undefined for a zero target");
  return std::abs(learned - target) / std::abs(target);
}

std::vector<double> radial_histogram(std::span<const double> radii, double range, double bin_width) {
  if (radii.empty()) throw InvalidArgument("radial histogram of an empty sample");
  if (!(range > 0.0) || !(bin_width > 0.0)) throw InvalidArgument("histogram range and bin width must be positive");
  const auto bins = static_cast<std::size_t>(std::llround(range / bin_width));
  if (bins == 0) throw InvalidArgument("bin width exceeds the histogram range");
  std::vector<double> h(bins + 1, 0.0);
  for (double r : radii) {
    std::size_t idx = bins;
    if (r < range) idx = std::min(bins - 1, static_cast<std::size_t>(std::floor(r / bin_width)));
    h[idx] += 1.0;
  }
  const double n = static_cast<double>(radii.size());
  for (double& v : h) v /= n;
  return h;
}

namespace {

std::vector<double> radii_at(std::span<const Trajectory> trajs, std::size_t step) {
  std::vector<double> out;
  out.reserve(trajs.size());
  for (const auto& t : trajs) {
    if (step > t.n_steps()) throw InvalidArgument("trajectory has no slice " + std::to_string(step));
    const auto x = t.slice(step);
    out.push_back(std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0)));
  }
  return out;
}

double l1_between(std::span<const double> gen_r, std::span<const double> data_r, double range, double bin_width) {
  const auto hg = radial_histogram(gen_r, range, bin_width);
  const auto hd = radial_histogram(data_r, range, bin_width);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < hg.size(); ++i) {
    num += std::abs(hg[i] - hd[i]);
    den += hd[i];
  }
  return num / den;
}

}  // namespace

double l1_radial_error(std::span<const Trajectory> gen, std::span<const Trajectory> data, std::size_t at_step,
                       double range, double bin_width) {
  if (gen.empty() || data.empty()) throw InvalidArgument("l1_radial_error needs non-empty sample sets");
  return l1_between(radii_at(gen, at_step), radii_at(data, at_step), range, bin_width);
}

void evaluate(const RunConfig& cfg, const GenModelParams& learned, MetricsRecord& out, std::size_t workers) {
  out.rel_error_names.clear();
  out.rel_errors.clear();
  out.l1_steps.clear();
  out.l1_errors.clear();
  if (cfg.experiment == Experiment::ou_recovery) {
    out.rel_error_names = {"stiffness", "gamma", "kbt"};
    out.rel_errors = {relative_error(learned.stiffness, cfg.target.stiffness),
                      relative_error(learned.gamma, cfg.target.gamma), relative_error(learned.kbt, cfg.target.kbt)};
    return;
  }
  const std::size_t horizon = std::max<std::size_t>(2, *std::max_element(cfg.eval.steps.begin(), cfg.eval.steps.end()));
  const auto data = sample_model(cfg.target, cfg.data_init, cfg.master_seed, tag_eval_data, cfg.eval.samples, horizon,
                                 workers);
  const auto gen =
      sample_model(learned, cfg.data_init, cfg.master_seed, tag_eval_gen, cfg.eval.samples, horizon, workers);
  for (std::size_t s : cfg.eval.steps) {
    out.l1_steps.push_back(s);
    out.l1_errors.push_back(l1_radial_error(gen, data, s, cfg.eval.range, cfg.eval.bin_width));
  }
}

std::vector<SweepRow> aggregate_sweep(std::span<const SweepRun> runs, std::size_t n_metrics) {
  std::vector<SweepRow> rows;
  std::vector<std::vector<const SweepRun*>> members;
  for (const auto& r : runs) {
    if (r.metrics.size() != n_metrics) throw InvalidArgument("sweep run has the wrong number of metrics");
    std::size_t g = 0;
    while (g < rows.size() && !(rows[g].protocol == r.protocol && rows[g].tau == r.tau)) ++g;
    if (g == rows.size()) {
      rows.push_back(SweepRow{r.protocol, r.tau, 0, {}, {}});
      members.emplace_back();
    }
    members[g].push_back(&r);
  }
  for (std::size_t g = 0; g < rows.size(); ++g) {
    SweepRow& row = rows[g];
    const auto& m = members[g];
    row.runs = m.size();
    row.mean.assign(n_metrics, 0.0);
    row.std.assign(n_metrics, 0.0);
    for (std::size_t k = 0; k < n_metrics; ++k) {
      double sum = 0.0;
      for (const SweepRun* r : m) sum += r->metrics[k];
      const double mean = sum / static_cast<double>(m.size());
      double ss = 0.0;
      for (const SweepRun* r : m) ss += (r->metrics[k] - mean) * (r->metrics[k] - mean);
      row.mean[k] = mean;
      row.std[k] = m.size() > 1 ? std::sqrt(ss / static_cast<double>(m.size() - 1)) : 0.0;
    }
  }
  return rows;
}

ProtocolSpec fit_protocol(const ProtocolSpec& spec, double dt, std::size_t n_steps) {
  ProtocolSpec out = spec;
  if (spec.kind != ProtocolKind::full_traj) {
    const std::size_t fits = n_steps / spec.delay_steps(dt);
    if (fits >= 1) out.frag_len = std::min(spec.frag_len, fits);
  }
  return out;
}

SweepResult run_sweep(const RunConfig& cfg, std::size_t workers) {
  SweepResult result;
  if (cfg.experiment == Experiment::ou_recovery) {
    result.metric_names = {"eps_stiffness", "eps_gamma", "eps_kbt"};
  } else {
    for (std::size_t s : cfg.eval.steps) result.metric_names.push_back("l1_step" + std::to_string(s));
  }
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    RunConfig base = cfg;
    base.master_seed = cfg.master_seed + r;
    if (base.init.force_model == ForceModel::neural && cfg.init_seed == 0)
      base.init.neural_weights = mlp_init(base.init.mlp, derive_seed(base.master_seed, {tag_net_init}));
    const auto data = generate_training_data(base, workers);
    for (ProtocolKind kind : cfg.sweep.protocols) {
      for (double tau : cfg.sweep.taus) {
        RunConfig run = base;
        run.protocol.kind = kind;
        run.protocol.tau = tau;
        run.protocol = fit_protocol(run.protocol, run.target.dt, run.target.n_steps);
        MetricsRecord rec = run_training(run, data, workers);
        evaluate(run, rec.final_params, rec, workers);
        SweepRun out{kind, tau, r, rec.experiment == Experiment::ou_recovery ? rec.rel_errors : rec.l1_errors};
        result.runs.push_back(std::move(out));
      }
    }
  }
  // Order rows protocol-major, tau as listed, regardless of run order.
  std::vector<SweepRun> ordered;
  for (ProtocolKind kind : cfg.sweep.protocols)
    for (double tau : cfg.sweep.taus)
      for (const auto& run : result.runs)
        if (run.protocol == kind && run.tau == tau) ordered.push_back(run);
  result.rows = aggregate_sweep(ordered, result.metric_names.size());
  return result;
}

}  // namespace sdyn
