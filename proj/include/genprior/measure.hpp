#pragma once

#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

#include "genprior/netgen.hpp"

namespace genprior::measure {

enum class EnsembleKind { Gaussian, Bernoulli, Identity };

// The m x n sampling matrix A.  Identity carries no stored matrix and
// applies as a no-op.
struct MeasurementEnsemble {
  EnsembleKind kind = EnsembleKind::Identity;
  int m = 0;
  int n = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd A;  // empty for identity

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& v) const;
};

// Gaussian entries N(0, 1/m); Bernoulli entries +-1/sqrt(m) equiprobable.
// Gaussian rows are drawn from per-row streams, so the first m rows of a
// larger ensemble coincide (up to the 1/sqrt(m) scale) with a smaller one.
MeasurementEnsemble sample_ensemble(EnsembleKind kind, int m, int n,
                                    std::uint64_t seed);

// A recovery problem: generator, sampling matrix, ground truth, observations.
struct Instance {
  netgen::GeneratorNetwork net;
  MeasurementEnsemble ensemble;
  Eigen::VectorXd x0;
  Eigen::VectorXd y_obs;  // ensemble.apply(G(x0)), cached

  int latent_dim() const { return net.latent_dim(); }
};

Instance make_instance(netgen::GeneratorNetwork net,
                       MeasurementEnsemble ensemble, Eigen::VectorXd x0);

// f(x) = (1/2) |A G(x) - y_obs|^2
double risk(const Instance& inst, const Eigen::VectorXd& x);

// v_{x,x0} = J^t A^t (A G(x) - y_obs), J the tie-broken linearization at x.
Eigen::VectorXd subgradient(const Instance& inst, const Eigen::VectorXd& x,
                            const Eigen::VectorXd* tie_break = nullptr);

// One-sided D_v f(x), computed exactly from the piecewise-quadratic
// structure: linearize at x with tie-break v, dot with v/|v|.
double directional_derivative(const Instance& inst, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& v);

void save_instance(const Instance& inst, const std::string& path);
Instance load_instance(const std::string& path);

}  // namespace genprior::measure
