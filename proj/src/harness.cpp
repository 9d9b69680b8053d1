#include "genprior/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "genprior/conditions.hpp"
#include "genprior/landscape.hpp"
#include "genprior/measure.hpp"
#include "genprior/netgen.hpp"
#include "genprior/rng.hpp"
#include "genprior/solver.hpp"

namespace genprior::harness {

namespace fs = std::filesystem;

int ExperimentSpec::get_int(const std::string& key, int def) const {
  auto it = params.find(key);
  return it == params.end() ? def : std::stoi(it->second);
}

double ExperimentSpec::get_double(const std::string& key, double def) const {
  auto it = params.find(key);
  return it == params.end() ? def : std::stod(it->second);
}

std::vector<int> ExperimentSpec::get_int_list(
    const std::string& key, const std::vector<int>& def) const {
  auto it = params.find(key);
  if (it == params.end()) return def;
  std::vector<int> out;
  std::stringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stoi(tok));
  }
  if (out.empty()) throw InvalidSpec("empty list for " + key);
  return out;
}

std::string ExperimentSpec::get_str(const std::string& key,
                                    const std::string& def) const {
  auto it = params.find(key);
  return it == params.end() ? def : it->second;
}

ExperimentSpec parse_spec_lines(const std::vector<std::string>& lines) {
  ExperimentSpec spec;
  for (std::string line : lines) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r\n");
      const auto e = s.find_last_not_of(" \t\r\n");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    if (key == "kind")
      spec.kind = val;
    else if (key == "out_dir")
      spec.out_dir = val;
    else if (key == "master_seed")
      spec.master_seed = std::stoull(val);
    else if (key == "trials")
      spec.trials = std::stoi(val);
    else if (key == "workers")
      spec.workers = std::stoi(val);
    else
      spec.params[key] = val;
  }
  return spec;
}

ExperimentSpec parse_spec_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoFailure("cannot open spec file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  return parse_spec_lines(lines);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t cell,
                          std::uint64_t trial) {
  return mix_seed(mix_seed(master_seed, 0x9d5f ^ cell), 0x51e3 ^ trial);
}

namespace {

int resolve_workers(const ExperimentSpec& spec) {
  if (spec.workers > 0) return spec.workers;
  if (const char* env = std::getenv("GENPRIOR_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
      fn(i);
  };
  std::vector<std::thread> pool;
  const int count = std::min<std::size_t>(workers, n);
  pool.reserve(count);
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_lines(const std::string& path, const std::string& header,
                 const std::vector<std::string>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoFailure("cannot open output: " + path);
  os << header << "\n";
  for (const auto& r : rows) os << r << "\n";
  if (!os) throw IoFailure("write failed: " + path);
}

void write_manifest(const ExperimentSpec& spec,
                    const std::vector<std::string>& files) {
  nlohmann::json m;
  m["schema_version"] = 1;
  m["kind"] = spec.kind;
  m["master_seed"] = spec.master_seed;
  m["trials"] = spec.trials;
  m["params"] = spec.params;
  m["files"] = files;
  const std::string path = (fs::path(spec.out_dir) / "manifest.json").string();
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot open manifest: " + path);
  os << m.dump(2) << "\n";
}

Eigen::MatrixXd sample_layer(int n, int k, std::uint64_t seed) {
  netgen::NetworkShape shape{{k, n}};
  return netgen::sample_gaussian_network(shape, seed).weights[0];
}

// ---- g_table ----------------------------------------------------------

RunResult run_g_table(const ExperimentSpec& spec) {
  const int grid = spec.get_int("grid", 1025);
  const int d_max = spec.get_int("d_max", 500);
  if (grid < 2) throw InvalidSpec("g_table: grid must be >= 2");

  std::vector<std::string> g_rows;
  g_rows.reserve(grid);
  for (int i = 0; i < grid; ++i) {
    const double theta = M_PI * i / (grid - 1);
    g_rows.push_back(fmt(theta) + "," + fmt(landscape::g(theta)));
  }
  std::vector<std::string> rho_rows;
  rho_rows.reserve(d_max);
  for (int d = 1; d <= d_max; ++d)
    rho_rows.push_back(std::to_string(d) + "," + fmt(landscape::rho(d)));

  const fs::path out(spec.out_dir);
  RunResult res;
  res.files.push_back((out / "g_table.csv").string());
  write_lines(res.files.back(), "theta,g_theta", g_rows);
  res.files.push_back((out / "rho_table.csv").string());
  write_lines(res.files.back(), "d,rho_d", rho_rows);
  return res;
}

// ---- wdc_sweep --------------------------------------------------------

RunResult run_wdc_sweep(const ExperimentSpec& spec) {
  const int k = spec.get_int("k", 5);
  const std::vector<int> n_list = spec.get_int_list("n_list", {50, 200, 800});
  const int probes = spec.get_int("probes", 500);

  struct Row {
    int n, trial;
    std::uint64_t seed;
    double wdc_eps, angle_eps;
  };
  std::vector<Row> rows(n_list.size() * spec.trials);
  parallel_for(rows.size(), resolve_workers(spec), [&](std::size_t idx) {
    const std::size_t cell = idx / spec.trials;
    const int trial = static_cast<int>(idx % spec.trials);
    const std::uint64_t seed = derive_seed(spec.master_seed, cell, trial);
    const int n = n_list[cell];
    const Eigen::MatrixXd W = sample_layer(n, k, seed);
    const auto probe_pairs = conditions::sample_probe_pairs(k, probes, seed);
    const auto wdc = conditions::wdc_deviation(W, probe_pairs, seed);
    const auto angle =
        conditions::angle_contraction_check(W, probe_pairs, 0.0, seed);
    rows[idx] = {n, trial, seed, wdc.epsilon_hat, angle.epsilon_hat};
  });

  std::vector<std::string> lines;
  lines.reserve(rows.size());
  for (const Row& r : rows)
    lines.push_back(std::to_string(k) + "," + std::to_string(r.n) + "," +
                    std::to_string(r.trial) + "," + std::to_string(r.seed) +
                    "," + fmt(r.wdc_eps) + "," + fmt(r.angle_eps));
  RunResult res;
  res.files.push_back((fs::path(spec.out_dir) / "wdc_sweep.csv").string());
  write_lines(res.files.back(), "k,n,trial,seed,wdc_eps,angle_eps", lines);
  return res;
}

// ---- rric_sweep -------------------------------------------------------

RunResult run_rric_sweep(const ExperimentSpec& spec) {
  const std::vector<int> dims = spec.get_int_list("dims", {6, 60, 300});
  const std::vector<int> m_list = spec.get_int_list("m_list", {50, 200, 800});
  const int probes = spec.get_int("probes", 200);

  const netgen::NetworkShape shape{dims};
  const netgen::GeneratorNetwork net = netgen::sample_gaussian_network(
      shape, derive_seed(spec.master_seed, 0, 0));

  struct Row {
    int m, trial;
    std::uint64_t seed;
    double eps;
  };
  std::vector<Row> rows(m_list.size() * spec.trials);
  parallel_for(rows.size(), resolve_workers(spec), [&](std::size_t idx) {
    const std::size_t cell = idx / spec.trials;
    const int trial = static_cast<int>(idx % spec.trials);
    const std::uint64_t seed = derive_seed(spec.master_seed, cell + 1, trial);
    const int m = m_list[cell];
    const auto A = measure::sample_ensemble(measure::EnsembleKind::Gaussian, m,
                                            net.output_dim(), seed);
    const auto rep = conditions::rric_deviation(A, net, probes, seed);
    rows[idx] = {m, trial, seed, rep.epsilon_hat};
  });

  std::vector<std::string> lines;
  for (const Row& r : rows)
    lines.push_back(std::to_string(r.m) + "," + std::to_string(r.trial) + "," +
                    std::to_string(r.seed) + "," + fmt(r.eps));
  RunResult res;
  res.files.push_back((fs::path(spec.out_dir) / "rric_sweep.csv").string());
  write_lines(res.files.back(), "m,trial,seed,epsilon_hat", lines);
  return res;
}

// ---- concentration_sweep ---------------------------------------------

RunResult run_concentration_sweep(const ExperimentSpec& spec) {
  const int k = spec.get_int("k", 6);
  const std::vector<int> n1_list = spec.get_int_list("n1_list", {60, 240, 960});
  const int ratio = spec.get_int("ratio", 5);
  const int points = spec.trials;  // random x per cell

  struct Row {
    int n1, point;
    std::uint64_t seed;
    double deviation;
  };
  std::vector<Row> rows(n1_list.size() * points);
  parallel_for(n1_list.size(), resolve_workers(spec), [&](std::size_t cell) {
    const int n1 = n1_list[cell];
    const int n2 = ratio * n1;
    const std::uint64_t net_seed = derive_seed(spec.master_seed, cell, 0);
    const netgen::NetworkShape shape{{k, n1, n2}};
    const auto net = netgen::sample_gaussian_network(shape, net_seed);
    const auto ident =
        measure::sample_ensemble(measure::EnsembleKind::Identity, n2, n2, 0);
    Rng rng(net_seed, 0xc0);
    const Eigen::VectorXd x0 = rng.unit_vector(k);
    const auto inst = measure::make_instance(net, ident, x0);
    const int d = net.depth();
    const double two_d = std::ldexp(1.0, d);
    for (int p = 0; p < points; ++p) {
      const std::uint64_t pseed = derive_seed(spec.master_seed, cell, p + 1);
      Rng prng(pseed, 0xc1);
      const Eigen::VectorXd x =
          prng.unit_vector(k) * prng.uniform(0.25, 4.0);
      const Eigen::VectorXd v = measure::subgradient(inst, x);
      const Eigen::VectorXd h = landscape::h_field(x, x0, d);
      const double dev =
          (v - h).norm() * two_d / std::max(x.norm(), x0.norm());
      rows[cell * points + p] = {n1, p, pseed, dev};
    }
  });

  std::vector<std::string> lines;
  for (const Row& r : rows)
    lines.push_back(std::to_string(r.n1) + "," + std::to_string(r.point) +
                    "," + std::to_string(r.seed) + "," + fmt(r.deviation));
  RunResult res;
  res.files.push_back(
      (fs::path(spec.out_dir) / "concentration_sweep.csv").string());
  write_lines(res.files.back(), "n1,point,seed,deviation", lines);
  return res;
}

// ---- landscape_grid ---------------------------------------------------

RunResult run_landscape_grid(const ExperimentSpec& spec) {
  const std::vector<int> dims = spec.get_int_list("dims", {6, 60, 300});
  const int grid = spec.get_int("grid", 201);
  const double range = spec.get_double("range", 2.0);
  const double eps = spec.get_double("eps", 1e-3);

  const std::uint64_t seed = derive_seed(spec.master_seed, 0, 0);
  const netgen::NetworkShape shape{dims};
  const auto net = netgen::sample_gaussian_network(shape, seed);
  const int n = net.output_dim();
  const int k = net.latent_dim();
  const auto ident =
      measure::sample_ensemble(measure::EnsembleKind::Identity, n, n, 0);
  Rng rng(seed, 0x9d);
  const Eigen::VectorXd x0 = rng.unit_vector(k);
  Eigen::VectorXd perp = rng.unit_vector(k);
  perp -= perp.dot(x0) * x0;
  perp.normalize();
  const auto inst = measure::make_instance(net, ident, x0);
  const int d = net.depth();
  const auto basins = landscape::predicted_basins(x0, d, eps);

  std::vector<std::string> lines;
  lines.reserve(static_cast<std::size_t>(grid) * grid);
  std::vector<std::vector<std::string>> per_row(grid);
  parallel_for(grid, resolve_workers(spec), [&](std::size_t i) {
    per_row[i].reserve(grid);
    for (int j = 0; j < grid; ++j) {
      const double a = -range + 2.0 * range * i / (grid - 1);
      const double b = -range + 2.0 * range * j / (grid - 1);
      const Eigen::VectorXd x = a * x0 + b * perp;
      if (x.norm() == 0.0) continue;
      const double fx = measure::risk(inst, x);
      const double hn = landscape::h_field(x, x0, d).norm();
      const auto chk = solver::verify_descent(inst, x, basins);
      per_row[i].push_back(fmt(a) + "," + fmt(b) + "," + fmt(fx) + "," +
                           fmt(hn) + "," + fmt(chk.directional_value) + "," +
                           (chk.outside_basins ? "1" : "0"));
    }
  });
  for (auto& pr : per_row)
    for (auto& l : pr) lines.push_back(std::move(l));

  RunResult res;
  res.files.push_back(
      (fs::path(spec.out_dir) / "landscape_grid.csv").string());
  write_lines(res.files.back(), "a,b,risk,h_norm,ddir,outside_basins", lines);
  return res;
}

// ---- recovery_phase ---------------------------------------------------

struct RecoveryRow {
  int k, m, d, trial;
  std::uint64_t seed;
  double rel_err;
  int iters;
  bool success;
};

std::vector<RecoveryRow> run_recovery_rows(const ExperimentSpec& spec) {
  const std::vector<int> dims = spec.get_int_list("dims", {8, 160, 800});
  const std::vector<int> m_list =
      spec.get_int_list("m_list", {16, 32, 64, 128, 256});
  const double success_tol = spec.get_double("success_tol", 1e-3);
  const int max_iters = spec.get_int("max_iters", 4000);

  const netgen::NetworkShape shape{dims};
  const int k = shape.latent_dim();
  const int n = shape.output_dim();
  const int d = shape.depth();

  std::vector<RecoveryRow> rows(m_list.size() * spec.trials);
  parallel_for(rows.size(), resolve_workers(spec), [&](std::size_t idx) {
    const std::size_t cell = idx / spec.trials;
    const int trial = static_cast<int>(idx % spec.trials);
    const int m = m_list[cell];
    // net / x0 / A seeds shared across m cells (common random numbers);
    // Gaussian A rows nest across m by construction
    const std::uint64_t seed = derive_seed(spec.master_seed, 0, trial);
    const auto net = netgen::sample_gaussian_network(shape, seed);
    const auto A =
        measure::sample_ensemble(measure::EnsembleKind::Gaussian, m, n,
                                 derive_seed(spec.master_seed, 1, trial));
    Rng rng(seed, 0xa5);
    const Eigen::VectorXd x0 = rng.unit_vector(k);
    const auto inst = measure::make_instance(net, A, x0);

    solver::DescentConfig cfg;
    cfg.max_iters = max_iters;
    cfg.restart_policy = solver::RestartPolicy::NegateOnStall;
    cfg.tie_break_seed = seed;
    const Eigen::VectorXd x_init = rng.unit_vector(k);
    const auto traj = solver::descend(inst, x_init, cfg);
    const double rel_err = (traj.final_x - x0).norm() / x0.norm();
    rows[idx] = {k,    m,        d, trial, seed, rel_err, traj.iterations,
                 rel_err <= success_tol};
  });
  return rows;
}

RunResult run_recovery_phase(const ExperimentSpec& spec) {
  const auto rows = run_recovery_rows(spec);
  std::vector<std::string> lines;
  for (const RecoveryRow& r : rows)
    lines.push_back(std::to_string(r.k) + "," + std::to_string(r.m) + "," +
                    std::to_string(r.d) + "," + std::to_string(r.trial) + "," +
                    std::to_string(r.seed) + "," + fmt(r.rel_err) + "," +
                    std::to_string(r.iters) + "," + (r.success ? "1" : "0"));
  RunResult res;
  res.files.push_back(
      (fs::path(spec.out_dir) / "recovery_phase.csv").string());
  write_lines(res.files.back(), "k,m,d,trial,seed,rel_err,iters,success",
              lines);
  return res;
}

// ---- region_count -----------------------------------------------------

RunResult run_region_count(const ExperimentSpec& spec) {
  const int l = spec.get_int("l", 2);
  std::vector<int> def(10);
  for (int i = 0; i < 10; ++i) def[i] = i + 3;
  const std::vector<int> n_list = spec.get_int_list("n_list", def);

  struct Row {
    int n, trial;
    std::uint64_t seed;
    conditions::RegionCount counts;
  };
  std::vector<Row> rows(n_list.size() * spec.trials);
  parallel_for(rows.size(), resolve_workers(spec), [&](std::size_t idx) {
    const std::size_t cell = idx / spec.trials;
    const int trial = static_cast<int>(idx % spec.trials);
    const std::uint64_t seed = derive_seed(spec.master_seed, cell, trial);
    const int n = n_list[cell];
    const Eigen::MatrixXd W = sample_layer(n, l, seed);
    rows[idx] = {n, trial, seed,
                 conditions::count_activation_patterns(W, l, seed)};
  });

  std::vector<std::string> lines;
  for (const Row& r : rows)
    lines.push_back(std::to_string(r.n) + "," + std::to_string(r.trial) + "," +
                    std::to_string(r.seed) + "," +
                    std::to_string(r.counts.exact_count) + "," +
                    std::to_string(r.counts.wendel_count) + "," +
                    std::to_string(r.counts.paper_bound));
  RunResult res;
  res.files.push_back((fs::path(spec.out_dir) / "region_count.csv").string());
  write_lines(res.files.back(), "n,trial,seed,exact,wendel,paper_bound",
              lines);
  return res;
}

}  // namespace

RunResult run(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw InvalidSpec("trials must be >= 1");
  std::error_code ec;
  fs::create_directories(spec.out_dir, ec);
  if (ec) throw IoFailure("cannot create output dir: " + spec.out_dir);

  RunResult res;
  if (spec.kind == "g_table")
    res = run_g_table(spec);
  else if (spec.kind == "wdc_sweep")
    res = run_wdc_sweep(spec);
  else if (spec.kind == "rric_sweep")
    res = run_rric_sweep(spec);
  else if (spec.kind == "concentration_sweep")
    res = run_concentration_sweep(spec);
  else if (spec.kind == "landscape_grid")
    res = run_landscape_grid(spec);
  else if (spec.kind == "recovery_phase")
    res = run_recovery_phase(spec);
  else if (spec.kind == "region_count")
    res = run_region_count(spec);
  else
    throw InvalidSpec("unknown experiment kind: " + spec.kind);

  write_manifest(spec, res.files);
  return res;
}

RunResult phase_table(const ExperimentSpec& spec) {
  if (spec.kind != "recovery_phase")
    throw InvalidSpec("phase_table: kind must be recovery_phase");
  std::error_code ec;
  fs::create_directories(spec.out_dir, ec);
  if (ec) throw IoFailure("cannot create output dir: " + spec.out_dir);

  auto rows = run_recovery_rows(spec);
  std::map<int, std::vector<const RecoveryRow*>> by_m;
  for (const auto& r : rows) by_m[r.m].push_back(&r);

  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };

  std::vector<std::string> lines;
  for (const auto& [m, cell] : by_m) {
    std::vector<double> errs, iters;
    int successes = 0;
    for (const RecoveryRow* r : cell) {
      errs.push_back(r->rel_err);
      iters.push_back(r->iters);
      successes += r->success ? 1 : 0;
    }
    const auto& first = *cell.front();
    lines.push_back(std::to_string(first.k) + "," + std::to_string(m) + "," +
                    std::to_string(first.d) + "," +
                    fmt(static_cast<double>(successes) / cell.size()) + "," +
                    fmt(median(errs)) + "," + fmt(median(iters)));
  }

  RunResult res;
  res.files.push_back((fs::path(spec.out_dir) / "phase_table.csv").string());
  write_lines(res.files.back(),
              "k,m,d,success_rate,median_rel_err,median_iters", lines);
  write_manifest(spec, res.files);
  return res;
}

}  // namespace genprior::harness
