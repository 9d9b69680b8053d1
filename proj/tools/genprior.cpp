// Command-line front end: run experiment specs, certify sampled networks,
// run recovery on a saved instance, and dump the landscape lookup tables.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "genprior/conditions.hpp"
#include "genprior/harness.hpp"
#include "genprior/landscape.hpp"
#include "genprior/measure.hpp"
#include "genprior/netgen.hpp"
#include "genprior/rng.hpp"
#include "genprior/solver.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidSpec = 2;
constexpr int kExitRuntime = 3;

int cmd_run(const std::string& spec_path, const std::string& out_dir,
            int workers, bool table) {
  auto spec = genprior::harness::parse_spec_file(spec_path);
  if (!out_dir.empty()) spec.out_dir = out_dir;
  if (spec.out_dir.empty()) spec.out_dir = ".";
  if (workers > 0) spec.workers = workers;
  const auto res = table ? genprior::harness::phase_table(spec)
                         : genprior::harness::run(spec);
  for (const auto& f : res.files) std::printf("wrote %s\n", f.c_str());
  return kExitOk;
}

int cmd_certify(const std::vector<int>& dims, std::uint64_t seed, int probes) {
  using namespace genprior;
  const netgen::NetworkShape shape{dims};
  const auto net = netgen::sample_gaussian_network(shape, seed);
  const int k = shape.latent_dim();
  std::printf("network: depth=%d latent=%d output=%d seed=%llu\n",
              shape.depth(), k, shape.output_dim(),
              static_cast<unsigned long long>(seed));
  for (int layer = 0; layer < shape.depth(); ++layer) {
    const Eigen::MatrixXd& W = net.weights[layer];
    const auto pairs = conditions::sample_probe_pairs(
        static_cast<int>(W.cols()), probes, seed + layer);
    const auto rep = conditions::wdc_deviation(W, pairs, seed + layer);
    const auto ang = conditions::angle_contraction_check(
        W, pairs, rep.epsilon_hat, seed + layer);
    std::printf("layer %d: wdc_eps=%.6g angle_dev=%.6g (bound %.6g) %s\n",
                layer, rep.epsilon_hat, ang.epsilon_hat, ang.bound,
                ang.within_bound ? "ok" : "VIOLATED");
  }
  return kExitOk;
}

int cmd_recover(const std::string& instance_path, std::uint64_t seed,
                int max_iters, bool negate_on_stall) {
  using namespace genprior;
  const auto inst = measure::load_instance(instance_path);
  solver::DescentConfig cfg;
  cfg.max_iters = max_iters;
  cfg.tie_break_seed = seed;
  cfg.restart_policy = negate_on_stall ? solver::RestartPolicy::NegateOnStall
                                       : solver::RestartPolicy::None;
  Rng rng(seed, 0x4e);
  const Eigen::VectorXd x_init = rng.unit_vector(inst.net.latent_dim());
  const auto traj = solver::descend(inst, x_init, cfg);
  const double rel_err = (traj.final_x - inst.x0).norm() / inst.x0.norm();
  std::printf("iterations=%d restarts=%d final_risk=%.17g rel_err=%.17g\n",
              traj.iterations, traj.restarts, traj.final_risk, rel_err);
  return kExitOk;
}

int cmd_landscape_table(int grid, int d_max, const std::string& out_dir) {
  genprior::harness::ExperimentSpec spec;
  spec.kind = "g_table";
  spec.out_dir = out_dir;
  spec.params["grid"] = std::to_string(grid);
  spec.params["d_max"] = std::to_string(d_max);
  const auto res = genprior::harness::run(spec);
  for (const auto& f : res.files) std::printf("wrote %s\n", f.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for risk landscapes of expansive ReLU "
               "generative priors"};
  app.require_subcommand(1);

  std::string spec_path, out_dir, instance_path;
  int workers = 0, probes = 500, max_iters = 4000, grid = 1025, d_max = 500;
  std::uint64_t seed = 1;
  std::vector<int> dims{8, 160, 800};
  bool table = false, negate = true;

  auto* run = app.add_subcommand("run", "execute an experiment spec file");
  run->add_option("spec", spec_path, "key=value spec file")->required();
  run->add_option("-o,--out", out_dir, "output directory (overrides spec)");
  run->add_option("-w,--workers", workers, "worker threads");
  run->add_flag("--table", table,
                "aggregate a recovery_phase spec into a phase table");

  auto* certify =
      app.add_subcommand("certify", "estimate per-layer deviation constants");
  certify->add_option("--dims", dims, "layer dimensions, latent first");
  certify->add_option("--seed", seed, "network seed");
  certify->add_option("--probes", probes, "probe pairs per layer");

  auto* recover =
      app.add_subcommand("recover", "run descent on a saved instance");
  recover->add_option("instance", instance_path, "instance file")->required();
  recover->add_option("--seed", seed, "initialization seed");
  recover->add_option("--max-iters", max_iters, "iteration cap");
  recover->add_flag("--negate-on-stall,!--no-negate-on-stall", negate,
                    "negate the iterate when descent stalls");

  auto* lt = app.add_subcommand("landscape-table",
                                "dump angle-contraction and fixed-point "
                                "tables");
  lt->add_option("--grid", grid, "number of angle samples");
  lt->add_option("--d-max", d_max, "maximum depth for the fixed-point table");
  lt->add_option("-o,--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(spec_path, out_dir, workers, table);
    if (certify->parsed()) return cmd_certify(dims, seed, probes);
    if (recover->parsed())
      return cmd_recover(instance_path, seed, max_iters, negate);
    if (lt->parsed()) return cmd_landscape_table(grid, d_max, out_dir);
  } catch (const genprior::harness::InvalidSpec& e) {
    std::fprintf(stderr, "invalid spec: %s\n", e.what());
    return kExitInvalidSpec;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
