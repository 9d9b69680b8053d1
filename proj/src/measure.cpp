#include "genprior/measure.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "genprior/rng.hpp"

namespace genprior::measure {

Eigen::VectorXd MeasurementEnsemble::apply(const Eigen::VectorXd& v) const {
  if (kind == EnsembleKind::Identity) {
    if (v.size() != n)
      throw std::invalid_argument("ensemble: dimension mismatch");
    return v;
  }
  if (v.size() != A.cols())
    throw std::invalid_argument("ensemble: dimension mismatch");
  return A * v;
}

Eigen::VectorXd MeasurementEnsemble::apply_transpose(
    const Eigen::VectorXd& v) const {
  if (kind == EnsembleKind::Identity) {
    if (v.size() != n)
      throw std::invalid_argument("ensemble: dimension mismatch");
    return v;
  }
  if (v.size() != A.rows())
    throw std::invalid_argument("ensemble: dimension mismatch");
  return A.transpose() * v;
}

MeasurementEnsemble sample_ensemble(EnsembleKind kind, int m, int n,
                                    std::uint64_t seed) {
  if (m < 1 || n < 1)
    throw std::invalid_argument("sample_ensemble: m, n must be positive");
  MeasurementEnsemble e;
  e.kind = kind;
  e.n = n;
  e.seed = seed;
  if (kind == EnsembleKind::Identity) {
    if (m != n)
      throw std::invalid_argument("sample_ensemble: identity needs m == n");
    e.m = n;
    return e;
  }
  e.m = m;
  e.A.resize(m, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (int r = 0; r < m; ++r) {
    Rng rng(seed, static_cast<std::uint64_t>(r));
    if (kind == EnsembleKind::Gaussian) {
      for (int c = 0; c < n; ++c) e.A(r, c) = scale * rng.gaussian();
    } else {
      for (int c = 0; c < n; ++c)
        e.A(r, c) = (rng.next_u64() & 1u) ? scale : -scale;
    }
  }
  return e;
}

Instance make_instance(netgen::GeneratorNetwork net,
                       MeasurementEnsemble ensemble, Eigen::VectorXd x0) {
  if (ensemble.n != net.output_dim())
    throw std::invalid_argument("make_instance: ensemble width mismatch");
  if (x0.size() != net.latent_dim())
    throw std::invalid_argument("make_instance: x0 dimension mismatch");
  Instance inst;
  inst.y_obs = ensemble.apply(netgen::forward(net, x0).output);
  inst.net = std::move(net);
  inst.ensemble = std::move(ensemble);
  inst.x0 = std::move(x0);
  return inst;
}

double risk(const Instance& inst, const Eigen::VectorXd& x) {
  const Eigen::VectorXd residual =
      inst.ensemble.apply(netgen::forward(inst.net, x).output) - inst.y_obs;
  return 0.5 * residual.squaredNorm();
}

Eigen::VectorXd subgradient(const Instance& inst, const Eigen::VectorXd& x,
                            const Eigen::VectorXd* tie_break) {
  const Eigen::MatrixXd J =
      netgen::end_to_end_linearization(inst.net, x, tie_break);
  const Eigen::VectorXd residual =
      inst.ensemble.apply(netgen::forward(inst.net, x).output) - inst.y_obs;
  return J.transpose() * inst.ensemble.apply_transpose(residual);
}

double directional_derivative(const Instance& inst, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& v) {
  const double nv = v.norm();
  if (nv == 0.0)
    throw std::invalid_argument("directional_derivative: zero direction");
  const Eigen::VectorXd grad = subgradient(inst, x, &v);
  return grad.dot(v) / nv;
}

void save_instance(const Instance& inst, const std::string& path) {
  netgen::save_network(inst.net, path + ".net");

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_instance: cannot open " + path);
  auto write_vec = [&os](const Eigen::VectorXd& v) {
    const std::int64_t sz = v.size();
    os.write(reinterpret_cast<const char*>(&sz), sizeof sz);
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(sz * sizeof(double)));
  };
  write_vec(inst.x0);
  write_vec(inst.y_obs);
  if (!os) throw std::runtime_error("save_instance: write failed");

  nlohmann::json side;
  side["ensemble_kind"] = static_cast<int>(inst.ensemble.kind);
  side["m"] = inst.ensemble.m;
  side["n"] = inst.ensemble.n;
  side["ensemble_seed"] = inst.ensemble.seed;
  std::ofstream js(path + ".json");
  js << side.dump(2) << "\n";
}

Instance load_instance(const std::string& path) {
  netgen::GeneratorNetwork net = netgen::load_network(path + ".net");

  std::ifstream js(path + ".json");
  if (!js) throw std::runtime_error("load_instance: missing sidecar");
  nlohmann::json side = nlohmann::json::parse(js);
  MeasurementEnsemble ens = sample_ensemble(
      static_cast<EnsembleKind>(side["ensemble_kind"].get<int>()),
      side["m"].get<int>(), side["n"].get<int>(),
      side["ensemble_seed"].get<std::uint64_t>());

  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_instance: cannot open " + path);
  auto read_vec = [&is]() {
    std::int64_t sz = 0;
    is.read(reinterpret_cast<char*>(&sz), sizeof sz);
    if (sz < 0 || sz > (1 << 28))
      throw std::runtime_error("load_instance: corrupt vector header");
    Eigen::VectorXd v(sz);
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(sz * sizeof(double)));
    return v;
  };
  Eigen::VectorXd x0 = read_vec();
  Eigen::VectorXd y_obs = read_vec();
  if (!is) throw std::runtime_error("load_instance: truncated file");

  Instance inst = make_instance(std::move(net), std::move(ens), std::move(x0));
  // y_obs must be bit-identical to the recomputation
  if (inst.y_obs.size() != y_obs.size() || inst.y_obs != y_obs)
    throw std::runtime_error("load_instance: observation mismatch");
  return inst;
}

}  // namespace genprior::measure
