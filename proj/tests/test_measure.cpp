#include <doctest.h>

#include <filesystem>

#include <Eigen/Dense>

#include "genprior/measure.hpp"
#include "genprior/netgen.hpp"
#include "genprior/rng.hpp"

using namespace genprior;

namespace {

measure::Instance scalar_instance() {
  netgen::GeneratorNetwork net;
  net.shape = netgen::NetworkShape{{1, 1}};
  net.weights = {Eigen::MatrixXd::Identity(1, 1)};
  auto A = measure::sample_ensemble(measure::EnsembleKind::Identity, 1, 1, 0);
  Eigen::VectorXd x0(1);
  x0 << 1.0;
  return measure::make_instance(net, A, x0);
}

measure::Instance random_instance(int k, int d, measure::EnsembleKind kind,
                                  int m, std::uint64_t seed) {
  std::vector<int> dims{k};
  int n = k;
  for (int i = 0; i < d; ++i) {
    n *= 4;
    dims.push_back(n);
  }
  auto net = netgen::sample_gaussian_network(netgen::NetworkShape{dims}, seed);
  if (kind == measure::EnsembleKind::Identity) m = n;
  auto A = measure::sample_ensemble(kind, m, n, seed + 1);
  Rng rng(seed, 2);
  return measure::make_instance(std::move(net), std::move(A),
                                rng.unit_vector(k));
}

}  // namespace

TEST_CASE("ensemble scaling and the nesting property") {
  const auto small =
      measure::sample_ensemble(measure::EnsembleKind::Gaussian, 20, 30, 9);
  const auto big =
      measure::sample_ensemble(measure::EnsembleKind::Gaussian, 40, 30, 9);
  // per-row streams: the first 20 rows agree up to the 1/sqrt(m) scale
  const Eigen::MatrixXd top =
      big.A.topRows(20) * std::sqrt(40.0) / std::sqrt(20.0);
  CHECK((top - small.A).norm() < 1e-12 * small.A.norm());

  const auto bern =
      measure::sample_ensemble(measure::EnsembleKind::Bernoulli, 16, 10, 3);
  CHECK((bern.A.array().abs() - 1.0 / 4.0).matrix().norm() == 0.0);
}

TEST_CASE("scalar instance hand values") {
  const auto inst = scalar_instance();
  Eigen::VectorXd x(1);
  x << 2.0;  // G(x) = 2, y = 1
  CHECK(measure::risk(inst, x) == 0.5);
  const Eigen::VectorXd v = measure::subgradient(inst, x);
  CHECK(v[0] == 1.0);
  CHECK(measure::risk(inst, inst.x0) == 0.0);
}

TEST_CASE("subgradient matches central finite differences of the risk") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto inst = random_instance(
        3, 2, measure::EnsembleKind::Gaussian, 40, seed);
    Rng rng(seed, 5);
    for (int rep = 0; rep < 4; ++rep) {
      const Eigen::VectorXd x = rng.gaussian_vector(3);
      const Eigen::VectorXd v = measure::subgradient(inst, x);
      const double delta = 1e-6;
      for (int j = 0; j < 3; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(3);
        e[j] = delta;
        const double fd = (measure::risk(inst, x + e) -
                           measure::risk(inst, x - e)) /
                          (2.0 * delta);
        CHECK(std::abs(fd - v[j]) < 1e-5 * (1.0 + std::abs(v[j])));
        ++checked;
      }
    }
  }
  CHECK(checked >= 100);
}

TEST_CASE("one-sided derivatives are antisymmetric at smooth points") {
  const auto inst =
      random_instance(4, 2, measure::EnsembleKind::Bernoulli, 30, 77);
  Rng rng(78);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::VectorXd x = rng.gaussian_vector(4);
    const Eigen::VectorXd v = rng.unit_vector(4);
    const double fwd = measure::directional_derivative(inst, x, v);
    const double bwd = measure::directional_derivative(inst, x, -v);
    CHECK(std::abs(fwd + bwd) < 1e-10 * (1.0 + std::abs(fwd)));
    // finite-difference oracle for the one-sided limit
    const double delta = 1e-7;
    const double fd = (measure::risk(inst, x + delta * v) -
                       measure::risk(inst, x)) /
                      delta;
    CHECK(fwd == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("identity ensemble reproduces the unsampled risk") {
  const auto inst =
      random_instance(3, 2, measure::EnsembleKind::Identity, 0, 13);
  Rng rng(14);
  const Eigen::VectorXd x = rng.gaussian_vector(3);
  const Eigen::VectorXd gx = netgen::forward(inst.net, x).output;
  const Eigen::VectorXd g0 = netgen::forward(inst.net, inst.x0).output;
  CHECK(measure::risk(inst, x) ==
        doctest::Approx(0.5 * (gx - g0).squaredNorm()).epsilon(1e-14));
}

TEST_CASE("instance container round-trips") {
  const auto inst =
      random_instance(3, 2, measure::EnsembleKind::Gaussian, 24, 41);
  const auto path =
      (std::filesystem::temp_directory_path() / "gp_inst_rt.bin").string();
  measure::save_instance(inst, path);
  const auto back = measure::load_instance(path);
  CHECK(back.x0 == inst.x0);
  CHECK(back.y_obs == inst.y_obs);
  CHECK(back.ensemble.A == inst.ensemble.A);
  CHECK(back.net.weights[1] == inst.net.weights[1]);
  for (const auto& f : std::filesystem::directory_iterator(
           std::filesystem::temp_directory_path()))
    if (f.path().string().find("gp_inst_rt") != std::string::npos)
      std::filesystem::remove(f.path());
}
