#include "genprior/conditions.hpp"

#include <array>
#include <cmath>
#include <set>

#include <Eigen/Dense>

#include "genprior/landscape.hpp"
#include "genprior/rng.hpp"

namespace genprior::conditions {

double spectral_norm(const Eigen::MatrixXd& M, double rel_tol) {
  if (M.rows() == 0 || M.cols() == 0) return 0.0;
  // deterministic, generically non-orthogonal start
  Eigen::VectorXd v(M.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = 1.0 + 0.5 * std::sin(static_cast<double>(i) + 1.0);
  v.normalize();

  double sigma = 0.0;
  constexpr int kMaxIters = 20000;
  for (int it = 0; it < kMaxIters; ++it) {
    const Eigen::VectorXd Mv = M * v;
    const double next = Mv.norm();
    if (next == 0.0) return 0.0;
    Eigen::VectorXd w = M.transpose() * Mv;
    const double wn = w.norm();
    if (wn == 0.0) return next;
    w /= wn;
    if (it > 0 && std::abs(next - sigma) <= rel_tol * next) return next;
    sigma = next;
    v = std::move(w);
  }
  return sigma;
}

double symmetric_spectral_norm(const Eigen::MatrixXd& S, double rel_tol) {
  return spectral_norm(S, rel_tol);
}

Eigen::MatrixXd q_matrix(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0.0 || ny == 0.0)
    throw landscape::ZeroVector("q_matrix: zero vector");
  const Eigen::Index k = x.size();
  const Eigen::VectorXd xh = x / nx;
  const Eigen::VectorXd yh = y / ny;
  const double theta0 = landscape::angle(x, y);

  Eigen::MatrixXd M;
  constexpr double kDegenerate = 1e-9;
  if (theta0 < kDegenerate) {
    M = xh * xh.transpose();
  } else if (M_PI - theta0 < kDegenerate) {
    M = -(xh * xh.transpose());
  } else {
    // Orthonormal frame {u, w} of span{x, y}; in it M is the reflection
    // [[cos, sin], [sin, -cos]] and vanishes on the orthocomplement.
    const Eigen::VectorXd u = xh;
    Eigen::VectorXd w = yh - yh.dot(u) * u;
    w.normalize();
    const double c = std::cos(theta0);
    const double s = std::sin(theta0);
    M = c * (u * u.transpose() - w * w.transpose()) +
        s * (u * w.transpose() + w * u.transpose());
  }
  return (M_PI - theta0) / (2.0 * M_PI) *
             Eigen::MatrixXd::Identity(k, k) +
         std::sin(theta0) / (2.0 * M_PI) * M;
}

Eigen::MatrixXd empirical_q(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            std::int64_t n_samples, std::uint64_t seed) {
  if (n_samples < 1)
    throw std::invalid_argument("empirical_q: need n_samples >= 1");
  const Eigen::Index k = x.size();
  Rng rng(seed, 0);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd w(k);
  for (std::int64_t s = 0; s < n_samples; ++s) {
    for (Eigen::Index i = 0; i < k; ++i) w[i] = rng.gaussian();
    if (w.dot(x) > 0.0 && w.dot(y) > 0.0)
      T.selfadjointView<Eigen::Upper>().rankUpdate(w, 1.0);
  }
  T = T.selfadjointView<Eigen::Upper>();
  return T / static_cast<double>(n_samples);
}

std::vector<ProbePair> sample_probe_pairs(int k, int count,
                                          std::uint64_t seed) {
  std::vector<ProbePair> probes;
  probes.reserve(count);
  Rng rng(seed, 1);
  for (int i = 0; i < count; ++i) {
    const Eigen::VectorXd x = rng.unit_vector(k);
    Eigen::VectorXd y;
    switch (i % 5) {
      case 0:
      case 1:  // uniform pair
        y = rng.unit_vector(k);
        break;
      case 2:  // near-parallel
        y = (x + 1e-6 * rng.unit_vector(k)).normalized();
        break;
      case 3:  // near-antipodal
        y = (-x + 1e-6 * rng.unit_vector(k)).normalized();
        break;
      default: {  // coordinate-sparse
        Eigen::VectorXd e = Eigen::VectorXd::Zero(k);
        e[static_cast<Eigen::Index>(rng.next_u64() % k)] =
            rng.uniform() < 0.5 ? 1.0 : -1.0;
        y = e;
        break;
      }
    }
    probes.emplace_back(x, y);
  }
  return probes;
}

ConditionReport wdc_deviation(const Eigen::MatrixXd& W,
                              const std::vector<ProbePair>& probes,
                              std::uint64_t probe_seed) {
  if (probes.empty()) throw EmptyProbeSet("wdc_deviation: no probes");
  const Eigen::Index k = W.cols();
  ConditionReport report;
  report.condition = Condition::WDC;
  report.num_probes = static_cast<int>(probes.size());
  report.probe_seed = probe_seed;

  Eigen::MatrixXd T(k, k);
  for (const auto& [x, y] : probes) {
    const Eigen::VectorXd zx = W * x;
    const Eigen::VectorXd zy = W * y;
    T.setZero();
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      if (zx[r] > 0.0 && zy[r] > 0.0)
        T.selfadjointView<Eigen::Upper>().rankUpdate(W.row(r).transpose(),
                                                     1.0);
    T = T.selfadjointView<Eigen::Upper>();
    const double dev = symmetric_spectral_norm(T - q_matrix(x, y));
    if (dev > report.epsilon_hat) {
      report.epsilon_hat = dev;
      report.worst_probe = {x, y};
    }
  }
  return report;
}

ConditionReport wdc_deviation(const Eigen::MatrixXd& W, int num_probes,
                              std::uint64_t probe_seed) {
  return wdc_deviation(
      W, sample_probe_pairs(static_cast<int>(W.cols()), num_probes, probe_seed),
      probe_seed);
}

ConditionReport rric_deviation(
    const measure::MeasurementEnsemble& ensemble,
    const netgen::GeneratorNetwork& net,
    const std::vector<std::array<Eigen::VectorXd, 4>>& quadruples,
    std::uint64_t probe_seed) {
  if (quadruples.empty()) throw EmptyProbeSet("rric_deviation: no probes");
  ConditionReport report;
  report.condition = Condition::RRIC;
  report.num_probes = static_cast<int>(quadruples.size());
  report.probe_seed = probe_seed;

  int usable = 0;
  for (const auto& q : quadruples) {
    const Eigen::VectorXd u = netgen::forward(net, q[0]).output -
                              netgen::forward(net, q[1]).output;
    const Eigen::VectorXd v = netgen::forward(net, q[2]).output -
                              netgen::forward(net, q[3]).output;
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu == 0.0 || nv == 0.0) {
      ++report.num_skipped;
      continue;
    }
    ++usable;
    const double defect =
        std::abs(ensemble.apply(u).dot(ensemble.apply(v)) - u.dot(v)) /
        (nu * nv);
    if (defect >= report.epsilon_hat) {
      report.epsilon_hat = defect;
      report.worst_probe = {q[0], q[1], q[2], q[3]};
    }
  }
  if (usable == 0)
    throw AllProbesDegenerate("rric_deviation: all probes degenerate");
  return report;
}

ConditionReport rric_deviation(const measure::MeasurementEnsemble& ensemble,
                               const netgen::GeneratorNetwork& net,
                               int num_probes, std::uint64_t probe_seed) {
  const int k = net.latent_dim();
  Rng rng(probe_seed, 2);
  std::vector<std::array<Eigen::VectorXd, 4>> quads;
  quads.reserve(num_probes);
  for (int i = 0; i < num_probes; ++i)
    quads.push_back({rng.gaussian_vector(k), rng.gaussian_vector(k),
                     rng.gaussian_vector(k), rng.gaussian_vector(k)});
  return rric_deviation(ensemble, net, quads, probe_seed);
}

ConditionReport angle_contraction_check(const Eigen::MatrixXd& W,
                                        const std::vector<ProbePair>& probes,
                                        double eps, std::uint64_t probe_seed) {
  if (probes.empty()) throw EmptyProbeSet("angle_contraction_check: no probes");
  ConditionReport report;
  report.condition = Condition::AngleContraction;
  report.num_probes = static_cast<int>(probes.size());
  report.probe_seed = probe_seed;

  for (const auto& [x, y] : probes) {
    const Eigen::VectorXd ax = (W * x).cwiseMax(0.0);
    const Eigen::VectorXd ay = (W * y).cwiseMax(0.0);
    if (ax.norm() == 0.0 || ay.norm() == 0.0) {
      ++report.num_skipped;  // DegenerateImage: reported, not thrown
      continue;
    }
    const double dev =
        std::abs(landscape::angle(ax, ay) - landscape::g(landscape::angle(x, y)));
    if (dev > report.epsilon_hat) {
      report.epsilon_hat = dev;
      report.worst_probe = {x, y};
    }
  }
  report.bound = 4.0 * std::sqrt(eps);
  report.within_bound = report.epsilon_hat <= report.bound;
  return report;
}

namespace {

std::int64_t binomial(int n, int r) {
  if (r < 0 || r > n) return 0;
  std::int64_t res = 1;
  r = std::min(r, n - r);
  for (int i = 0; i < r; ++i) {
    res *= (n - i);
    res /= (i + 1);
  }
  return res;
}

std::int64_t pow_i64(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

std::uint32_t pattern_bits(const Eigen::MatrixXd& R, const Eigen::VectorXd& u) {
  std::uint32_t bits = 0;
  const Eigen::VectorXd z = R * u;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if (z[i] > 0.0) bits |= (1u << i);
  return bits;
}

// distinct sign patterns of R u over u in R^2: walk the sorted arc
// boundaries of the circle
std::int64_t exact_count_2d(const Eigen::MatrixXd& R) {
  std::vector<double> cuts;
  for (Eigen::Index i = 0; i < R.rows(); ++i) {
    const double a = R(i, 0);
    const double b = R(i, 1);
    if (a == 0.0 && b == 0.0) continue;
    double phi = std::atan2(-a, b);  // a cos(phi) + b sin(phi) = 0
    if (phi < 0.0) phi += 2.0 * M_PI;
    cuts.push_back(phi);
    double phi2 = phi + M_PI;
    if (phi2 >= 2.0 * M_PI) phi2 -= 2.0 * M_PI;
    cuts.push_back(phi2);
  }
  if (cuts.empty()) return 1;
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::set<std::uint32_t> patterns;
  const std::size_t nc = cuts.size();
  for (std::size_t i = 0; i < nc; ++i) {
    const double next = (i + 1 < nc) ? cuts[i + 1] : cuts[0] + 2.0 * M_PI;
    const double mid = 0.5 * (cuts[i] + next);
    patterns.insert(
        pattern_bits(R, Eigen::Vector2d(std::cos(mid), std::sin(mid))));
  }
  return static_cast<std::int64_t>(patterns.size());
}

// distinct sign patterns of R u over u in R^3: every cell of a generic
// central arrangement (n >= 2) touches an intersection line of two planes,
// so probing around those lines reaches every cell
std::int64_t exact_count_3d(const Eigen::MatrixXd& R) {
  const Eigen::Index n = R.rows();
  std::vector<Eigen::Vector3d> rows;
  for (Eigen::Index i = 0; i < n; ++i)
    if (R.row(i).norm() > 0.0) rows.push_back(R.row(i).transpose());

  std::set<std::uint32_t> patterns;
  if (rows.size() < 2) {
    for (double s : {1.0, -1.0}) {
      const Eigen::Vector3d u = s * Eigen::Vector3d(0.3, 0.7, 0.64).normalized();
      patterns.insert(pattern_bits(R, u));
    }
    return static_cast<std::int64_t>(patterns.size());
  }

  constexpr double kStep = 1e-7;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      const Eigen::Vector3d ri = rows[i].normalized();
      const Eigen::Vector3d rj = rows[j].normalized();
      Eigen::Vector3d line = ri.cross(rj);
      const double ln = line.norm();
      if (ln == 0.0) continue;  // parallel planes
      line /= ln;
      // p moves off plane i only, q off plane j only
      Eigen::Vector3d p = rj.cross(line);
      p /= ri.dot(p);
      Eigen::Vector3d q = ri.cross(line);
      q /= rj.dot(q);
      for (double s : {1.0, -1.0})
        for (double s1 : {1.0, -1.0})
          for (double s2 : {1.0, -1.0})
            patterns.insert(
                pattern_bits(R, s * line + kStep * (s1 * p + s2 * q)));
    }
  }
  return static_cast<std::int64_t>(patterns.size());
}

}  // namespace

RegionCount count_activation_patterns(const Eigen::MatrixXd& W,
                                      int subspace_dim,
                                      std::uint64_t basis_seed) {
  const int n = static_cast<int>(W.rows());
  const int k = static_cast<int>(W.cols());
  if (subspace_dim < 1 || subspace_dim > 3 || n > 24)
    throw BudgetExceeded("count_activation_patterns: need l <= 3 and n <= 24");
  if (subspace_dim > k)
    throw std::invalid_argument("count_activation_patterns: l > k");

  Eigen::MatrixXd R;
  if (subspace_dim == k) {
    R = W;
  } else {
    Rng rng(basis_seed, 777);
    Eigen::MatrixXd B(k, subspace_dim);
    for (int c = 0; c < subspace_dim; ++c) B.col(c) = rng.gaussian_vector(k);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(B);
    B = qr.householderQ() * Eigen::MatrixXd::Identity(k, subspace_dim);
    R = W * B;
  }

  RegionCount out;
  out.wendel_count = 0;
  for (int i = 0; i < subspace_dim; ++i)
    out.wendel_count += binomial(n - 1, i);
  out.wendel_count *= 2;
  out.paper_bound = 10 * pow_i64(n, subspace_dim);

  switch (subspace_dim) {
    case 1: {
      std::set<std::uint32_t> pats;
      Eigen::VectorXd u(1);
      u[0] = 1.0;
      pats.insert(pattern_bits(R, u));
      u[0] = -1.0;
      pats.insert(pattern_bits(R, u));
      out.exact_count = static_cast<std::int64_t>(pats.size());
      break;
    }
    case 2:
      out.exact_count = exact_count_2d(R);
      break;
    default:
      out.exact_count = exact_count_3d(R);
      break;
  }
  return out;
}

ComposedPatternCount count_composed_patterns(
    const netgen::GeneratorNetwork& net, int num_probes) {
  const int k = net.latent_dim();
  const int d = net.depth();
  if (k > 2 || d > 2)
    throw BudgetExceeded("count_composed_patterns: need k <= 2 and d <= 2");
  for (int i = 1; i <= d; ++i)
    if (net.shape.dims[i] > 12)
      throw BudgetExceeded("count_composed_patterns: need n_i <= 12");
  if (num_probes < 1)
    throw std::invalid_argument("count_composed_patterns: need probes");

  // patterns are scale-invariant, so probing directions suffices
  std::set<std::vector<std::uint8_t>> seen;
  auto visit = [&](const Eigen::VectorXd& x) {
    const netgen::ActivationPattern pat = netgen::forward(net, x).pattern;
    std::vector<std::uint8_t> flat;
    for (const auto& mask : pat.masks)
      flat.insert(flat.end(), mask.begin(), mask.end());
    seen.insert(std::move(flat));
  };
  if (k == 1) {
    Eigen::VectorXd x(1);
    x[0] = 1.0;
    visit(x);
    x[0] = -1.0;
    visit(x);
  } else {
    for (int t = 0; t < num_probes; ++t) {
      const double phi = 2.0 * M_PI * t / num_probes;
      visit(Eigen::Vector2d(std::cos(phi), std::sin(phi)));
    }
  }

  ComposedPatternCount out;
  out.observed = static_cast<std::int64_t>(seen.size());
  out.paper_bound = pow_i64(10, d);
  for (int i = 1; i <= d; ++i)
    out.paper_bound *= pow_i64(net.shape.dims[i], k);
  return out;
}

}  // namespace genprior::conditions
