#include "genprior/landscape.hpp"

#include <algorithm>
#include <cmath>

namespace genprior::landscape {

double angle(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0.0 || ny == 0.0) throw ZeroVector("angle: zero vector");
  // Kahan's formulation: theta = 2 atan2(|x |y| - y |x||, |x |y| + y |x||).
  const double num = (x * ny - y * nx).norm();
  const double den = (x * ny + y * nx).norm();
  return 2.0 * std::atan2(num, den);
}

double g(double theta) {
  constexpr double kSlack = 1e-12;
  if (theta < -kSlack || theta > M_PI + kSlack)
    throw DomainError("g: angle outside [0, pi]");
  theta = std::clamp(theta, 0.0, M_PI);
  const double arg = ((M_PI - theta) * std::cos(theta) + std::sin(theta)) / M_PI;
  return std::acos(std::clamp(arg, -1.0, 1.0));
}

AngleSequence theta_bar(double theta0, int d) {
  AngleSequence seq;
  seq.theta0 = theta0;
  seq.values.resize(d + 1);
  seq.values[0] = std::clamp(theta0, 0.0, M_PI);
  for (int i = 1; i <= d; ++i) seq.values[i] = g(seq.values[i - 1]);
  return seq;
}

CheckSequence check_sequence(int d) {
  CheckSequence seq;
  seq.values.resize(d);
  if (d > 0) {
    seq.values[0] = M_PI;
    for (int i = 1; i < d; ++i) seq.values[i] = g(seq.values[i - 1]);
  }
  return seq;
}

namespace {

// sin with an exact zero at the endpoint theta = pi, so the d = 1 radius
// and the field at the antipode vanish exactly instead of at ~1e-16.
inline double sin_exact(double theta) {
  return theta == M_PI ? 0.0 : std::sin(theta);
}

}  // namespace

double rho(int d) {
  if (d < 1) throw DomainError("rho: d must be >= 1");
  const CheckSequence chk = check_sequence(d);
  double sum = 0.0;
  for (int i = 0; i < d; ++i) {
    double prod = 1.0;
    for (int j = i + 1; j < d; ++j) prod *= (M_PI - chk.values[j]) / M_PI;
    sum += sin_exact(chk.values[i]) / M_PI * prod;
  }
  return sum;
}

namespace {

// Shared core of h_field / h_tilde: the product chain xi and sine sum zeta
// over the angle recursion started at theta0.
struct XiZeta {
  double xi;
  double zeta;
};

XiZeta xi_zeta(double theta0, int d) {
  const AngleSequence seq = theta_bar(theta0, d);
  double xi = 1.0;
  for (int i = 0; i < d; ++i) xi *= (M_PI - seq.values[i]) / M_PI;
  double zeta = 0.0;
  for (int i = 0; i < d; ++i) {
    double prod = 1.0;
    for (int j = i + 1; j < d; ++j) prod *= (M_PI - seq.values[j]) / M_PI;
    zeta += sin_exact(seq.values[i]) / M_PI * prod;
  }
  return {xi, zeta};
}

}  // namespace

Eigen::VectorXd h_field(const Eigen::VectorXd& x, const Eigen::VectorXd& x0,
                        int d) {
  if (x.norm() == 0.0 || x0.norm() == 0.0)
    throw ZeroVector("h_field: zero vector");
  const auto [xi, zeta] = xi_zeta(angle(x, x0), d);
  const double scale = std::ldexp(1.0, -d);  // 2^-d
  return scale * (-xi * x0 + (1.0 - zeta * x0.norm() / x.norm()) * x);
}

Eigen::VectorXd h_tilde(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        int d) {
  if (x.norm() == 0.0 || y.norm() == 0.0)
    throw ZeroVector("h_tilde: zero vector");
  const auto [xi, zeta] = xi_zeta(angle(x, y), d);
  const double scale = std::ldexp(1.0, -d);
  return scale * (xi * y + zeta * y.norm() / x.norm() * x);
}

BasinPrediction predicted_basins(const Eigen::VectorXd& x0, int d,
                                 double eps) {
  if (x0.norm() == 0.0) throw ZeroVector("predicted_basins: zero x0");
  if (eps <= 0.0) throw DomainError("predicted_basins: eps must be positive");
  const double sq = std::sqrt(eps);
  const double dd = static_cast<double>(d);
  BasinPrediction b;
  b.rho_d = rho(d);
  b.center_pos = x0;
  b.radius_pos = 56.0 * dd * sq * x0.norm();
  b.center_neg = -b.rho_d * x0;
  b.radius_neg = 500.0 * std::pow(dd, 11) * sq * x0.norm();
  b.hypothesis_ok = 8.0 * M_PI * std::pow(dd, 6) * sq <= 1.0;
  return b;
}

bool in_S_eps(const Eigen::VectorXd& x, const Eigen::VectorXd& x0, int d,
              double eps) {
  const Eigen::VectorXd h = h_field(x, x0, d);
  const double bound = std::ldexp(1.0, -d) * eps * std::max(x.norm(), x0.norm());
  return h.norm() <= bound;
}

}  // namespace genprior::landscape
