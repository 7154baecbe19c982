#include "sdyn/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "sdyn/errors.hpp"

namespace sdyn {

namespace {

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return in;
}

static_assert(std::endian::native == std::endian::little, "noise sidecar assumes a little-endian host");

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("noise sidecar is truncated");
  return v;
}

constexpr char noise_magic[8] = {'S', 'D', 'Y', 'N', 'N', 'O', 'I', 'S'};
constexpr std::uint32_t noise_version = 1;

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw std::runtime_error("malformed number '" + s + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_trajectories_csv(const std::filesystem::path& path, std::span<const Trajectory> trajs) {
  auto out = open_out(path);
  const std::size_t d = trajs.empty() ? 0 : trajs.front().dim;
  out << "sample_id,step,t";
  for (std::size_t k = 0; k < d; ++k) out << ",x" << (k + 1);
  out << '\n';
  for (const auto& t : trajs) {
    if (t.dim != d) throw InvalidArgument("trajectories in one file must share a dimension");
    for (std::size_t j = 0; j <= t.n_steps(); ++j) {
      out << t.sample_id << ',' << j << ',' << format_double(static_cast<double>(t.start_step + j) * t.dt);
      for (double x : t.slice(j)) out << ',' << format_double(x);
      out << '\n';
    }
  }
}

std::vector<Trajectory> read_trajectories_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + " is empty");
  const auto header = split_csv(line);
  if (header.size() < 4 || header[0] != "sample_id" || header[1] != "step" || header[2] != "t")
    throw std::runtime_error(path.string() + ": unexpected trajectory header");
  const std::size_t d = header.size() - 3;
  std::vector<Trajectory> out;
  double first_t = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != d + 3) throw std::runtime_error(path.string() + ": ragged row");
    const auto id = static_cast<std::size_t>(std::stoull(cells[0]));
    const auto step = static_cast<std::size_t>(std::stoull(cells[1]));
    const double t = parse_double(cells[2]);
    if (step == 0) {
      Trajectory traj;
      traj.dim = d;
      traj.sample_id = id;
      out.push_back(std::move(traj));
      first_t = t;
    } else if (out.empty() || out.back().sample_id != id || out.back().n_steps() + 1 != step) {
      throw std::runtime_error(path.string() + ": rows must be grouped by sample in step order");
    } else if (step == 1) {
      out.back().dt = t - first_t;
      if (out.back().dt > 0.0) out.back().start_step = static_cast<std::size_t>(std::llround(first_t / out.back().dt));
    }
    for (std::size_t k = 0; k < d; ++k) out.back().values.push_back(parse_double(cells[3 + k]));
  }
  return out;
}

void write_noise_sidecar(const std::filesystem::path& path, std::span<const Trajectory> trajs) {
  auto out = open_out(path, std::ios::binary);
  const std::size_t n_steps = trajs.empty() ? 0 : trajs.front().n_steps();
  const std::size_t d = trajs.empty() ? 0 : trajs.front().dim;
  out.write(noise_magic, sizeof noise_magic);
  put<std::uint32_t>(out, noise_version);
  put<std::uint64_t>(out, trajs.size());
  put<std::uint64_t>(out, n_steps);
  put<std::uint64_t>(out, d);
  for (const auto& t : trajs) {
    if (t.n_steps() != n_steps || t.dim != d || t.noise.size() != n_steps * d)
      throw InvalidArgument("noise sidecar needs uniform trajectories with full noise records");
    put<std::uint64_t>(out, t.sample_id);
    put<std::uint64_t>(out, t.seed);
    out.write(reinterpret_cast<const char*>(t.noise.data()), static_cast<std::streamsize>(t.noise.size() * sizeof(double)));
  }
}

void read_noise_sidecar(const std::filesystem::path& path, std::vector<Trajectory>& trajs) {
  auto in = open_in(path, std::ios::binary);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, noise_magic, sizeof magic) != 0)
    throw std::runtime_error(path.string() + " is not a noise sidecar");
  if (get<std::uint32_t>(in) != noise_version) throw std::runtime_error(path.string() + ": unsupported version");
  const auto n = get<std::uint64_t>(in);
  const auto n_steps = get<std::uint64_t>(in);
  const auto d = get<std::uint64_t>(in);
  std::map<std::size_t, Trajectory*> by_id;
  for (auto& t : trajs) by_id[t.sample_id] = &t;
  for (std::uint64_t s = 0; s < n; ++s) {
    const auto id = get<std::uint64_t>(in);
    const auto seed = get<std::uint64_t>(in);
    std::vector<double> noise(n_steps * d);
    in.read(reinterpret_cast<char*>(noise.data()), static_cast<std::streamsize>(noise.size() * sizeof(double)));
    if (!in) throw std::runtime_error("noise sidecar is truncated");
    const auto it = by_id.find(id);
    if (it == by_id.end()) continue;
    if (it->second->dim != d || it->second->n_steps() != n_steps)
      throw std::runtime_error("noise record for sample " + std::to_string(id) + " does not match its trajectory");
    it->second->seed = seed;
    it->second->noise = std::move(noise);
  }
}

void write_metrics_csv(const std::filesystem::path& path, const MetricsRecord& rec) {
  auto out = open_out(path);
  const bool neural = rec.final_params.force_model == ForceModel::neural;
  out << "epoch,loss,stiffness,gamma,kbt" << (neural ? ",theta_norm" : "") << '\n';
  for (const auto& e : rec.epochs) {
    out << e.epoch << ',' << format_double(e.loss) << ',' << format_double(e.params[param_index::stiffness]) << ','
        << format_double(e.params[param_index::gamma]) << ',' << format_double(e.params[param_index::kbt]);
    if (neural) {
      double ss = 0.0;
      for (std::size_t i = neural_offset(rec.final_params); i < e.params.size(); ++i) ss += e.params[i] * e.params[i];
      out << ',' << format_double(std::sqrt(ss));
    }
    out << '\n';
  }
}

void write_checkpoint(const std::filesystem::path& path, const MetricsRecord& rec) {
  nlohmann::json j;
  j["experiment"] = to_string(rec.experiment);
  j["seed"] = rec.seed;
  j["epoch"] = rec.epochs.size();
  j["force_model"] = to_string(rec.final_params.force_model);
  j["param_names"] = param_names(rec.final_params);
  j["params"] = pack_params(rec.final_params);
  nlohmann::json opt;
  opt["step_count"] = rec.optimizer.step_count;
  opt["lr"] = rec.optimizer.lr;
  opt["beta1"] = rec.optimizer.beta1;
  opt["beta2"] = rec.optimizer.beta2;
  opt["eps"] = rec.optimizer.eps;
  opt["channels"] = rec.channels.names();
  opt["first_moment"] = rec.optimizer.first_moment;
  opt["second_moment"] = rec.optimizer.second_moment;
  j["optimizer"] = opt;
  auto out = open_out(path);
  out << j.dump(1) << '\n';
}

GenModelParams read_checkpoint_params(const std::filesystem::path& path, const GenModelParams& base) {
  auto in = open_in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  GenModelParams p = base;
  p.force_model = force_model_from_string(j.at("force_model").get<std::string>());
  const auto values = j.at("params").get<std::vector<double>>();
  if (p.force_model == ForceModel::neural) p.neural_weights.assign(values.size() - neural_offset(p), 0.0);
  unpack_params(p, values);
  p.validate();
  return p;
}

void write_adjoint_csv(const std::filesystem::path& path, const AdjointState& adj) {
  auto out = open_out(path);
  out << "sample_id,step";
  for (std::size_t k = 0; k < adj.dim; ++k) out << ",r" << (k + 1);
  out << '\n';
  for (std::size_t j = 0; j < adj.n_slices(); ++j) {
    out << adj.sample_id << ',' << j;
    for (double v : adj.slice(j)) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result) {
  auto out = open_out(path);
  out << "method,tau,runs";
  for (const auto& m : result.metric_names) out << ",mean_" << m << ",std_" << m;
  out << '\n';
  for (const auto& row : result.rows) {
    out << to_string(row.protocol) << ',' << format_double(row.tau) << ',' << row.runs;
    for (std::size_t k = 0; k < row.mean.size(); ++k)
      out << ',' << format_double(row.mean[k]) << ',' << format_double(row.std[k]);
    out << '\n';
  }
}

void write_sweep_runs_csv(const std::filesystem::path& path, const SweepResult& result) {
  auto out = open_out(path);
  out << "method,tau,run";
  for (const auto& m : result.metric_names) out << ',' << m;
  out << '\n';
  for (const auto& run : result.runs) {
    out << to_string(run.protocol) << ',' << format_double(run.tau) << ',' << run.run;
    for (double v : run.metrics) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_evaluation_csv(const std::filesystem::path& path, const MetricsRecord& rec) {
  auto out = open_out(path);
  out << "metric,value\n";
  for (std::size_t k = 0; k < rec.rel_errors.size(); ++k)
    out << "eps_rel_" << rec.rel_error_names[k] << ',' << format_double(rec.rel_errors[k]) << '\n';
  for (std::size_t k = 0; k < rec.l1_errors.size(); ++k)
    out << "l1_step" << rec.l1_steps[k] << ',' << format_double(rec.l1_errors[k]) << '\n';
}

}  // namespace sdyn
