#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "genprior/landscape.hpp"
#include "genprior/measure.hpp"

namespace genprior::solver {

enum class RestartPolicy { None, NegateOnStall };

struct DescentConfig {
  // Fixed step eta = 0.25 * 2^d unless backtracking is enabled.
  double step_size = 0.0;  // 0 means "use the 0.25 * 2^d default"
  bool backtracking = false;
  double bt_init = 1.0;      // initial step, scaled by 2^d
  double bt_shrink = 0.5;    // 0 < shrink < 1
  double bt_decrease = 1e-4; // sufficient-decrease constant
  int max_iters = 10000;
  // stop when |v| <= grad_tol * 2^-d * |x_t|
  double grad_tol = 1e-9;
  // converged when risk <= risk_tol * max(risk(x_init), tiny)
  double risk_tol = 1e-10;
  std::uint64_t tie_break_seed = 0;
  RestartPolicy restart_policy = RestartPolicy::None;
  int stall_window = 25;
  int max_restarts = 2;
  bool record_iterates = true;
};

enum class EventKind { TieBreakUsed, Restart, Converged, Stalled };

struct Event {
  int iter = 0;
  EventKind kind = EventKind::Converged;
};

struct Trajectory {
  std::vector<Eigen::VectorXd> iterates;  // empty unless record_iterates
  std::vector<double> risks;
  std::vector<double> grad_norms;
  std::vector<Event> events;
  Eigen::VectorXd final_x;
  double final_risk = 0.0;
  bool converged = false;
  int iterations = 0;
  int restarts = 0;
};

// Subgradient descent x_{t+1} = x_t - eta v_{x_t, x0}, with a fresh random
// tie-break direction whenever a zero pre-activation is hit.  A zero x_init
// is replaced by a random unit vector (0 is a local maximum).
Trajectory descend(const measure::Instance& inst, Eigen::VectorXd x_init,
                   const DescentConfig& cfg);

// Negation restart point for a stalled trajectory: -x_current, or a random
// unit vector when the stall point is (numerically) zero.
Eigen::VectorXd negation_restart(const Trajectory& traj,
                                 const measure::Instance& inst,
                                 std::uint64_t seed = 0);

struct DescentCheck {
  bool outside_basins = false;
  double directional_value = 0.0;  // D_{-v} f(x)
  bool passes = false;
};

// D_{-v}f(x) with v the subgradient; the claim is only asserted outside the
// two predicted basins.
DescentCheck verify_descent(const measure::Instance& inst,
                            const Eigen::VectorXd& x,
                            const landscape::BasinPrediction& basins);

}  // namespace genprior::solver
