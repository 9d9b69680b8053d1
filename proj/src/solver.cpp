#include "genprior/solver.hpp"

#include <cmath>
#include <limits>

#include "genprior/netgen.hpp"
#include "genprior/rng.hpp"

namespace genprior::solver {

namespace {

// Subgradient with a fresh tie-break direction when the point is
// nondifferentiable; records whether one was needed.
Eigen::VectorXd robust_subgradient(const measure::Instance& inst,
                                   const Eigen::VectorXd& x, Rng& tie_rng,
                                   bool& tie_used) {
  tie_used = false;
  try {
    return measure::subgradient(inst, x);
  } catch (const netgen::NondifferentiablePoint&) {
    tie_used = true;
    const Eigen::VectorXd w = tie_rng.unit_vector(x.size());
    return measure::subgradient(inst, x, &w);
  }
}

}  // namespace

Trajectory descend(const measure::Instance& inst, Eigen::VectorXd x_init,
                   const DescentConfig& cfg) {
  const int d = inst.net.depth();
  const double two_d = std::ldexp(1.0, d);
  Rng tie_rng(cfg.tie_break_seed, 0xecf1);

  Trajectory traj;
  if (x_init.size() != inst.latent_dim())
    throw std::invalid_argument("descend: x_init dimension mismatch");
  if (x_init.isZero(0.0)) x_init = tie_rng.unit_vector(inst.latent_dim());

  Eigen::VectorXd x = std::move(x_init);
  double fx = measure::risk(inst, x);
  const double risk_floor =
      cfg.risk_tol * std::max(fx, std::numeric_limits<double>::min());

  Eigen::VectorXd best_x = x;
  double best_risk = fx;
  int stall_count = 0;

  for (int t = 0; t < cfg.max_iters; ++t) {
    bool tie_used = false;
    const Eigen::VectorXd v = robust_subgradient(inst, x, tie_rng, tie_used);
    const double vnorm = v.norm();

    if (cfg.record_iterates) traj.iterates.push_back(x);
    traj.risks.push_back(fx);
    traj.grad_norms.push_back(vnorm);
    if (tie_used) traj.events.push_back({t, EventKind::TieBreakUsed});
    traj.iterations = t;

    if (fx <= risk_floor) {
      traj.events.push_back({t, EventKind::Converged});
      traj.converged = true;
      break;
    }
    if (vnorm <= cfg.grad_tol / two_d * std::max(x.norm(), 1e-300)) {
      // stationary but not at the optimum: a stall
      stall_count = cfg.stall_window;
    }

    if (stall_count >= cfg.stall_window) {
      traj.events.push_back({t, EventKind::Stalled});
      if (cfg.restart_policy == RestartPolicy::NegateOnStall &&
          traj.restarts < cfg.max_restarts) {
        if (fx < best_risk) {
          best_risk = fx;
          best_x = x;
        }
        traj.final_x = x;
        x = negation_restart(traj, inst, cfg.tie_break_seed + traj.restarts);
        fx = measure::risk(inst, x);
        ++traj.restarts;
        traj.events.push_back({t, EventKind::Restart});
        stall_count = 0;
        continue;
      }
      break;
    }

    // take a step
    double fnext = 0.0;
    Eigen::VectorXd xnext;
    if (cfg.backtracking) {
      double eta = cfg.bt_init * two_d;
      const double slope = cfg.bt_decrease * vnorm * vnorm;
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt) {
        xnext = x - eta * v;
        fnext = measure::risk(inst, xnext);
        if (fnext <= fx - eta * slope) {
          accepted = true;
          break;
        }
        eta *= cfg.bt_shrink;
      }
      if (!accepted) {
        ++stall_count;
        continue;
      }
    } else {
      const double eta = cfg.step_size > 0.0 ? cfg.step_size : 0.25 * two_d;
      xnext = x - eta * v;
      fnext = measure::risk(inst, xnext);
    }

    if (fx - fnext <= 1e-12 * fx && fx > risk_floor)
      ++stall_count;
    else
      stall_count = 0;

    x = std::move(xnext);
    fx = fnext;
  }

  if (fx < best_risk) {
    best_risk = fx;
    best_x = x;
  }
  traj.final_x = std::move(best_x);
  traj.final_risk = best_risk;
  return traj;
}

Eigen::VectorXd negation_restart(const Trajectory& traj,
                                 const measure::Instance& inst,
                                 std::uint64_t seed) {
  const Eigen::VectorXd& x = traj.final_x;
  if (x.norm() <= 1e-12) {
    Rng rng(seed, 0xb00);
    return rng.unit_vector(inst.latent_dim());
  }
  return -x;
}

DescentCheck verify_descent(const measure::Instance& inst,
                            const Eigen::VectorXd& x,
                            const landscape::BasinPrediction& basins) {
  if (x.norm() == 0.0) throw landscape::ZeroVector("verify_descent: zero x");
  DescentCheck check;
  check.outside_basins =
      (x - basins.center_pos).norm() > basins.radius_pos &&
      (x - basins.center_neg).norm() > basins.radius_neg;

  Rng tie_rng(0xdead, 0);
  bool tie_used = false;
  const Eigen::VectorXd v = robust_subgradient(inst, x, tie_rng, tie_used);
  if (v.norm() == 0.0) {
    check.directional_value = 0.0;
  } else {
    check.directional_value = measure::directional_derivative(inst, x, -v);
  }
  check.passes = !check.outside_basins || check.directional_value < 0.0;
  return check;
}

}  // namespace genprior::solver
