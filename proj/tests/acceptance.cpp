// Acceptance suite: one line per criterion, [PASS]/[FAIL], exit 0 iff all
// pass.  Tolerances are pinned here, not configurable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "genprior/conditions.hpp"
#include "genprior/landscape.hpp"
#include "genprior/measure.hpp"
#include "genprior/netgen.hpp"
#include "genprior/rng.hpp"
#include "genprior/solver.hpp"

using namespace genprior;

namespace {

bool g_all_pass = true;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void report(int id, const char* name, bool pass, const std::string& detail,
            double secs) {
  std::printf("[%s] criterion %2d %-24s %s (%.1fs)\n", pass ? "PASS" : "FAIL",
              id, name, detail.c_str(), secs);
  std::fflush(stdout);
  g_all_pass = g_all_pass && pass;
}

// --- 1: analytic kernel exactness --------------------------------------

void criterion1() {
  Timer t;
  bool ok = landscape::g(0.0) == 0.0 &&
            std::abs(landscape::g(M_PI) - M_PI / 2) <= 1e-12;

  const auto chk = landscape::check_sequence(501);
  for (int i = 0; i <= 500; ++i)
    ok = ok && chk.values[i] >= M_PI / (i + 1) - 1e-12 &&
         chk.values[i] <= 3 * M_PI / (i + 3) + 1e-12;

  ok = ok && landscape::rho(1) == 0.0 &&
       std::abs(landscape::rho(2) - 1.0 / M_PI) <= 1e-12;

  double prev = -1.0;
  double worst_margin = 1e300;
  for (int d = 1; d <= 500; ++d) {
    const double rd = landscape::rho(d);
    ok = ok && rd > prev && rd < 1.0;
    prev = rd;
    double tail = 0.0;  // sum of cubed check angles, triangular weights
    for (int i = 1; i <= d; ++i)
      tail += std::pow(chk.values[i - 1], 3) / (6.0 * M_PI) *
              static_cast<double>(i + 1) / (d + 1);
    worst_margin = std::min(worst_margin, tail - (1.0 - rd));
    ok = ok && 1.0 - rd <= tail + 1e-12;
  }
  const double secs = t.seconds();
  ok = ok && secs < 1.0;
  char buf[128];
  std::snprintf(buf, sizeof buf, "rho_500=%.6f tail_margin_min=%.3g",
                prev, worst_margin);
  report(1, "kernel exactness", ok, buf, secs);
}

// --- 2: Q-matrix Monte-Carlo oracle ------------------------------------

void criterion2() {
  Timer t;
  const std::int64_t Ns[3] = {10000, 100000, 1000000};
  double sum_err[3] = {0, 0, 0};
  double max_err_final = 0.0;
  bool ok = true;
  Rng rng(20250826);
  for (int p = 0; p < 20; ++p) {
    const int k = 2 + p % 5;
    const Eigen::VectorXd x = rng.unit_vector(k);
    const Eigen::VectorXd y = rng.unit_vector(k);
    const Eigen::MatrixXd Q = conditions::q_matrix(x, y);
    for (int j = 0; j < 3; ++j) {
      const double err =
          (conditions::empirical_q(x, y, Ns[j], 1000 + p) - Q).norm();
      sum_err[j] += err;
      if (j == 2) max_err_final = std::max(max_err_final, err);
    }
  }
  ok = ok && max_err_final <= 0.01;
  const double slope = (std::log(sum_err[2] / 20) - std::log(sum_err[0] / 20)) /
                       (std::log(1e6) - std::log(1e4));
  ok = ok && slope >= -0.6 && slope <= -0.4;
  const double secs = t.seconds();
  ok = ok && secs < 60.0;
  char buf[128];
  std::snprintf(buf, sizeof buf, "max_err@1e6=%.4g slope=%.3f", max_err_final,
                slope);
  report(2, "Q-matrix oracle", ok, buf, secs);
}

// --- 3: subgradient vs central finite differences -----------------------

void criterion3() {
  Timer t;
  double worst = 0.0;
  int points = 0;
  for (int d = 1; d <= 3; ++d) {
    std::vector<int> dims{3};
    for (int i = 0; i < d; ++i) dims.push_back(dims.back() * 4);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto net =
          netgen::sample_gaussian_network(netgen::NetworkShape{dims}, seed);
      const int n = net.output_dim();
      auto A = measure::sample_ensemble(measure::EnsembleKind::Gaussian,
                                        std::max(8, n / 4), n, seed + 50);
      Rng rng(seed, 9);
      const auto inst = measure::make_instance(std::move(net), std::move(A),
                                               rng.unit_vector(3));
      for (int rep = 0; rep < 8; ++rep) {
        const Eigen::VectorXd x = rng.gaussian_vector(3);
        const Eigen::VectorXd v = measure::subgradient(inst, x);
        Eigen::VectorXd fd(3);
        const double delta = 1e-6;
        for (int j = 0; j < 3; ++j) {
          Eigen::VectorXd e = Eigen::VectorXd::Zero(3);
          e[j] = delta;
          fd[j] = (measure::risk(inst, x + e) - measure::risk(inst, x - e)) /
                  (2.0 * delta);
        }
        worst = std::max(worst, (fd - v).norm() / std::max(1.0, v.norm()));
        ++points;
      }
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "points=%d max_rel_err=%.3g", points, worst);
  report(3, "subgradient exactness", points >= 100 && worst <= 1e-5, buf,
         t.seconds());
}

// --- 4: WDC trend + angle contraction -----------------------------------

double g_eps_hat_largest = 0.0;  // handed to criterion 7

void criterion4() {
  Timer t;
  const int k = 5;
  const int n_list[3] = {50, 200, 800};
  double med[3] = {0, 0, 0};
  bool angle_ok = true;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> eps;
    for (int trial = 0; trial < 20; ++trial) {
      const std::uint64_t seed = 4000 + 100 * c + trial;
      const auto W = netgen::sample_gaussian_network(
                         netgen::NetworkShape{{k, n_list[c]}}, seed)
                         .weights[0];
      const auto probes = conditions::sample_probe_pairs(k, 200, seed);
      const auto wdc = conditions::wdc_deviation(W, probes, seed);
      const auto ang = conditions::angle_contraction_check(
          W, probes, wdc.epsilon_hat, seed);
      angle_ok = angle_ok && ang.within_bound;
      eps.push_back(wdc.epsilon_hat);
    }
    med[c] = median(eps);
  }
  g_eps_hat_largest = med[2];
  bool ok = med[0] > med[1] && med[1] > med[2] && angle_ok;
  const double secs = t.seconds();
  ok = ok && secs < 300.0;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "median_eps={%.3f,%.3f,%.3f} angle_bound=%s", med[0], med[1],
                med[2], angle_ok ? "held" : "violated");
  report(4, "WDC trend", ok, buf, secs);
}

// --- 5: RRIC identity + trend --------------------------------------------

void criterion5() {
  Timer t;
  const auto net = netgen::sample_gaussian_network(
      netgen::NetworkShape{{6, 60, 300}}, 500);
  const auto ident =
      measure::sample_ensemble(measure::EnsembleKind::Identity, 300, 300, 0);
  const double id_eps =
      conditions::rric_deviation(ident, net, 50, 501).epsilon_hat;

  const int m_list[3] = {50, 200, 800};
  double med[3];
  for (int c = 0; c < 3; ++c) {
    std::vector<double> eps;
    for (int trial = 0; trial < 20; ++trial) {
      const auto A = measure::sample_ensemble(
          measure::EnsembleKind::Gaussian, m_list[c], 300,
          5100 + 100 * c + trial);
      eps.push_back(
          conditions::rric_deviation(A, net, 50, 502 + trial).epsilon_hat);
    }
    med[c] = median(eps);
  }
  const bool ok = id_eps == 0.0 && med[0] > med[1] && med[1] > med[2];
  char buf[160];
  std::snprintf(buf, sizeof buf, "identity=%.3g median_eps={%.3f,%.3f,%.3f}",
                id_eps, med[0], med[1], med[2]);
  report(5, "RRIC trend", ok, buf, t.seconds());
}

// --- 6: concentration of the landscape field -----------------------------

void criterion6() {
  Timer t;
  const int n1_list[3] = {60, 240, 960};
  double med[3];
  for (int c = 0; c < 3; ++c) {
    const int n1 = n1_list[c];
    const auto net = netgen::sample_gaussian_network(
        netgen::NetworkShape{{6, n1, 5 * n1}}, 600 + c);
    const auto ident = measure::sample_ensemble(
        measure::EnsembleKind::Identity, 5 * n1, 5 * n1, 0);
    Rng rng(600 + c, 1);
    const Eigen::VectorXd x0 = rng.unit_vector(6);
    const auto inst = measure::make_instance(net, ident, x0);
    std::vector<double> dev;
    for (int p = 0; p < 200; ++p) {
      const Eigen::VectorXd x = rng.unit_vector(6) * rng.uniform(0.25, 4.0);
      const Eigen::VectorXd v = measure::subgradient(inst, x);
      const Eigen::VectorXd h = landscape::h_field(x, x0, 2);
      dev.push_back((v - h).norm() * 4.0 / std::max(x.norm(), x0.norm()));
    }
    med[c] = median(dev);
  }
  const bool ok = med[0] > med[1] && med[1] > med[2] && med[2] <= 0.2;
  char buf[160];
  std::snprintf(buf, sizeof buf, "median_dev={%.3f,%.3f,%.3f}", med[0],
                med[1], med[2]);
  report(6, "field concentration", ok, buf, t.seconds());
}

// --- 7: descent direction outside the basins -----------------------------

void criterion7() {
  Timer t;
  const int k = 5, n = 800;
  const auto net =
      netgen::sample_gaussian_network(netgen::NetworkShape{{k, n}}, 700);
  const auto ident =
      measure::sample_ensemble(measure::EnsembleKind::Identity, n, n, 0);
  Rng rng(701);
  const Eigen::VectorXd x0 = rng.unit_vector(k);
  const auto inst = measure::make_instance(net, ident, x0);

  // The paper's radii constants (56, 500 d^11) are astronomically
  // conservative at desk scale: with the measured eps_hat both balls cover
  // the whole sampling shell.  Shrink eps by decades until the outside
  // region is nonempty, keeping the claim hypothesis-true but testable.
  double eps = std::min(g_eps_hat_largest, 1.0 / (64.0 * M_PI * M_PI));
  landscape::BasinPrediction basins;
  std::vector<Eigen::VectorXd> points;
  for (; eps >= 1e-14 && points.size() < 1000; eps /= 10.0) {
    basins = landscape::predicted_basins(x0, 1, eps);
    points.clear();
    Rng sampler(702);
    for (int draw = 0; draw < 200000 && points.size() < 1000; ++draw) {
      const Eigen::VectorXd x =
          sampler.unit_vector(k) * sampler.uniform(0.1, 10.0) * x0.norm();
      if ((x - basins.center_pos).norm() > basins.radius_pos &&
          (x - basins.center_neg).norm() > basins.radius_neg)
        points.push_back(x);
    }
  }

  int negative = 0;
  for (const auto& x : points) {
    const auto chk = solver::verify_descent(inst, x, basins);
    if (chk.outside_basins && chk.directional_value < 0.0) ++negative;
  }

  int origin_negative = 0;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(k);
  for (int rep = 0; rep < 1000; ++rep) {
    const Eigen::VectorXd v = rng.unit_vector(k);
    if (measure::directional_derivative(inst, zero, v) < 0.0)
      ++origin_negative;
  }

  const bool ok = points.size() >= 1000 &&
                  negative >= static_cast<int>(0.99 * points.size()) &&
                  origin_negative == 1000;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "descent=%d/%zu origin_descent=%d/1000", negative,
                points.size(), origin_negative);
  report(7, "descent off basins", ok, buf, t.seconds());
}

// --- 8: exact zero of h and residual-set dichotomy -----------------------

void criterion8() {
  Timer t;
  Rng rng(800);
  double worst = 0.0;
  for (int d = 2; d <= 8; ++d) {
    const Eigen::VectorXd x0 = rng.unit_vector(6) * rng.uniform(0.5, 2.0);
    const Eigen::VectorXd xneg = -landscape::rho(d) * x0;
    worst = std::max(worst, landscape::h_field(xneg, x0, d).norm() *
                                std::ldexp(1.0, d) / x0.norm());
  }
  bool ok = worst <= 1e-9;

  // dichotomy search at d = 3; eps keeps 8 pi d^6 sqrt(eps) <= 1
  const int d = 3, k = 6;
  const double eps = 1e-9;
  const double sq = std::sqrt(eps);
  const double rho_d = landscape::rho(d);
  const Eigen::VectorXd x0 = rng.unit_vector(k);
  int members = 0, dichotomy_ok = 0;
  for (int i = 0; i < 100000; ++i) {
    Eigen::VectorXd x;
    if (i % 10 == 9) {
      x = rng.unit_vector(k) * rng.uniform(0.05, 3.0);
    } else {
      const Eigen::VectorXd base = (i % 2 == 0) ? x0 : (-rho_d * x0);
      const double scale = std::pow(10.0, rng.uniform(-13.0, -2.0));
      x = base + scale * rng.gaussian_vector(k);
    }
    if (x.norm() == 0.0 || !landscape::in_S_eps(x, x0, d, eps)) continue;
    ++members;
    const double theta = landscape::angle(x, x0);
    const bool small_angle =
        theta <= 2.0 * sq &&
        std::abs(x.norm() - x0.norm()) <= 18.0 * d * sq * x0.norm();
    const bool large_angle =
        std::abs(theta - M_PI) <= 8.0 * M_PI * std::pow(d, 4) * sq &&
        std::abs(x.norm() - rho_d * x0.norm()) <=
            200.0 * std::pow(d, 7) * sq * x0.norm();
    if (small_angle || large_angle) ++dichotomy_ok;
  }
  ok = ok && members > 100 && dichotomy_ok == members;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "max_scaled_h=%.2g members=%d dichotomy=%d", worst, members,
                dichotomy_ok);
  report(8, "spurious-point geometry", ok, buf, t.seconds());
}

// --- 9: region counting --------------------------------------------------

void criterion9() {
  Timer t;
  bool ok = true;
  Rng rng(900);
  for (int n = 3; n <= 12; ++n) {
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::MatrixXd W(n, 6);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < 6; ++j) W(i, j) = rng.gaussian();
      const auto c = conditions::count_activation_patterns(W, 2, n + trial);
      ok = ok && c.exact_count == 2 * n && c.exact_count <= 10 * n * n;
    }
  }
  std::int64_t max_observed = 0;
  bool composed_ok = true;
  for (int trial = 0; trial < 20; ++trial) {
    const auto net = netgen::sample_gaussian_network(
        netgen::NetworkShape{{2, 6, 8}}, 910 + trial);
    const auto c = conditions::count_composed_patterns(net, 2000);
    max_observed = std::max(max_observed, c.observed);
    composed_ok = composed_ok && c.observed <= 100LL * 36 * 64;
  }
  ok = ok && composed_ok;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "sections=2n held, composed_max=%lld bound=%d",
                static_cast<long long>(max_observed), 100 * 36 * 64);
  report(9, "region counting", ok, buf, t.seconds());
}

// --- 10: end-to-end recovery ---------------------------------------------

void criterion10() {
  Timer t;
  const netgen::NetworkShape shape{{8, 160, 800}};
  const int m_list[6] = {16, 32, 64, 128, 200, 256};
  int successes[6] = {0, 0, 0, 0, 0, 0};
  const int trials = 50;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t seed = 10000 + trial;
    const auto net = netgen::sample_gaussian_network(shape, seed);
    Rng rng(seed, 4);
    const Eigen::VectorXd x0 = rng.unit_vector(8);
    const Eigen::VectorXd x_init = rng.unit_vector(8);
    for (int c = 0; c < 6; ++c) {
      const auto A = measure::sample_ensemble(
          measure::EnsembleKind::Gaussian, m_list[c], 800, seed + 7777);
      const auto inst = measure::make_instance(net, A, x0);
      solver::DescentConfig cfg;
      cfg.max_iters = 1500;
      cfg.restart_policy = solver::RestartPolicy::NegateOnStall;
      cfg.tie_break_seed = seed;
      const auto traj = solver::descend(inst, x_init, cfg);
      if ((traj.final_x - x0).norm() / x0.norm() <= 1e-4) ++successes[c];
    }
  }
  bool ok = successes[4] >= 45;  // m = 200 headline cell
  for (int c = 1; c < 6; ++c) ok = ok && successes[c] >= successes[c - 1];
  const double secs = t.seconds();
  ok = ok && secs < 600.0;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "success/50 over m={16,32,64,128,200,256}: "
                "{%d,%d,%d,%d,%d,%d}",
                successes[0], successes[1], successes[2], successes[3],
                successes[4], successes[5]);
  report(10, "end-to-end recovery", ok, buf, secs);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  std::printf("%s\n", g_all_pass ? "ALL CRITERIA PASSED"
                                 : "ONE OR MORE CRITERIA FAILED");
  return g_all_pass ? 0 : 1;
}
