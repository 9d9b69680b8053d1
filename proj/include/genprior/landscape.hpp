#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace genprior::landscape {

struct ZeroVector : std::invalid_argument {
  explicit ZeroVector(const std::string& what) : std::invalid_argument(what) {}
};

struct DomainError : std::domain_error {
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Angle between nonzero vectors via the norm-balanced atan2 form, accurate
// near 0 and pi.
double angle(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// g(theta) = acos(((pi - theta) cos theta + sin theta) / pi) on [0, pi].
// Inputs within 1e-12 of the endpoints are clamped; the acos argument is
// clamped to [-1, 1].
double g(double theta);

// theta0, g(theta0), g(g(theta0)), ..., d applications.
struct AngleSequence {
  double theta0 = 0.0;
  std::vector<double> values;  // length d + 1
};
AngleSequence theta_bar(double theta0, int d);

// check-angle recursion from pi: values[0] = pi, values[i] = g(values[i-1]).
struct CheckSequence {
  std::vector<double> values;  // length d
};
CheckSequence check_sequence(int d);

// rho_d = sum_{i=0}^{d-1} (sin check_i / pi) prod_{j=i+1}^{d-1} (pi - check_j)/pi
double rho(int d);

// The deterministic field the subgradient concentrates around.
Eigen::VectorXd h_field(const Eigen::VectorXd& x, const Eigen::VectorXd& x0,
                        int d);

// (1/2^d)[ prod((pi - thb_i)/pi) y + sum_i (sin thb_i/pi)
//          prod_{j>i}((pi - thb_j)/pi) (|y|/|x|) x ],  thb_0 = angle(x, y).
Eigen::VectorXd h_tilde(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        int d);

struct BasinPrediction {
  Eigen::VectorXd center_pos;
  double radius_pos = 0.0;
  Eigen::VectorXd center_neg;
  double radius_neg = 0.0;
  double rho_d = 0.0;
  // 8 pi d^6 sqrt(eps) <= 1; radii are advisory-only when this fails
  bool hypothesis_ok = true;
};

BasinPrediction predicted_basins(const Eigen::VectorXd& x0, int d, double eps);

// |h_{x,x0}| <= (1/2^d) eps max(|x|, |x0|)
bool in_S_eps(const Eigen::VectorXd& x, const Eigen::VectorXd& x0, int d,
              double eps);

}  // namespace genprior::landscape
