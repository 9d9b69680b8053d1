#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "genprior/measure.hpp"
#include "genprior/netgen.hpp"

namespace genprior::conditions {

struct EmptyProbeSet : std::invalid_argument {
  explicit EmptyProbeSet(const std::string& what)
      : std::invalid_argument(what) {}
};

struct AllProbesDegenerate : std::runtime_error {
  explicit AllProbesDegenerate(const std::string& what)
      : std::runtime_error(what) {}
};

struct BudgetExceeded : std::invalid_argument {
  explicit BudgetExceeded(const std::string& what)
      : std::invalid_argument(what) {}
};

// Spectral norm by power iteration with a deterministic start vector,
// relative tolerance 1e-8.  Works for any rectangular M (iterates M^t M).
double spectral_norm(const Eigen::MatrixXd& M, double rel_tol = 1e-8);

// Largest |eigenvalue| of a symmetric S, same machinery.
double symmetric_spectral_norm(const Eigen::MatrixXd& S,
                               double rel_tol = 1e-8);

// Q_{x,y} = (pi - theta0)/(2 pi) I + (sin theta0)/(2 pi) M_{x<->y}, where
// M swaps the unit vectors of x and y and kills their orthocomplement.
Eigen::MatrixXd q_matrix(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Monte-Carlo estimate of Q as E[1_{w.x>0} 1_{w.y>0} w w^t], w ~ N(0, I_k).
// Oracle for q_matrix.
Eigen::MatrixXd empirical_q(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            std::int64_t n_samples, std::uint64_t seed);

enum class Condition { WDC, RRIC, AngleContraction };

struct ConditionReport {
  Condition condition = Condition::WDC;
  double epsilon_hat = 0.0;  // max observed deviation
  int num_probes = 0;
  int num_skipped = 0;  // degenerate probes
  std::uint64_t probe_seed = 0;
  std::vector<Eigen::VectorXd> worst_probe;  // argmax probe tuple
  // AngleContraction only; whether epsilon_hat <= 4 sqrt(eps_supplied)
  bool within_bound = false;
  double bound = 0.0;
};

using ProbePair = std::pair<Eigen::VectorXd, Eigen::VectorXd>;

// Seeded probe sampler: uniform sphere pairs plus adversarial pairs
// (near-parallel, near-antipodal, coordinate-sparse).
std::vector<ProbePair> sample_probe_pairs(int k, int count,
                                          std::uint64_t seed);

// epsilon_hat = max over probes of | sum_{w_i.x>0, w_i.y>0} w_i w_i^t - Q_{x,y} |.
ConditionReport wdc_deviation(const Eigen::MatrixXd& W,
                              const std::vector<ProbePair>& probes,
                              std::uint64_t probe_seed = 0);
ConditionReport wdc_deviation(const Eigen::MatrixXd& W, int num_probes,
                              std::uint64_t probe_seed);

// epsilon_hat = max normalized RRIC defect over quadruples of latent points.
ConditionReport rric_deviation(
    const measure::MeasurementEnsemble& ensemble,
    const netgen::GeneratorNetwork& net,
    const std::vector<std::array<Eigen::VectorXd, 4>>& quadruples,
    std::uint64_t probe_seed = 0);
ConditionReport rric_deviation(const measure::MeasurementEnsemble& ensemble,
                               const netgen::GeneratorNetwork& net,
                               int num_probes, std::uint64_t probe_seed);

// epsilon_hat = max |angle(W_{+,x}x, W_{+,y}y) - g(angle(x,y))|; probes whose
// images vanish are skipped and counted.
ConditionReport angle_contraction_check(const Eigen::MatrixXd& W,
                                        const std::vector<ProbePair>& probes,
                                        double eps,
                                        std::uint64_t probe_seed = 0);

struct RegionCount {
  std::int64_t exact_count = 0;
  std::int64_t wendel_count = 0;  // 2 sum_{i<l} C(n-1, i)
  std::int64_t paper_bound = 0;   // 10 n^l
};

// Distinct sign patterns (1_{w_i.v>0})_i over a generic l-dimensional
// subspace of the domain of W.  Exact enumeration: l = 1 two rays, l = 2
// sorted-angle walk, l = 3 cells around pairwise intersection lines.
// Budget guard: l <= 3 and n <= 24.
RegionCount count_activation_patterns(const Eigen::MatrixXd& W,
                                      int subspace_dim,
                                      std::uint64_t basis_seed = 0);

struct ComposedPatternCount {
  std::int64_t observed = 0;
  std::int64_t paper_bound = 0;  // 10^d n_1^k ... n_d^k
};

// Distinct full activation-pattern tuples over a dense latent direction
// grid.  Small nets only: k <= 2, d <= 2, n_i <= 12.
ComposedPatternCount count_composed_patterns(
    const netgen::GeneratorNetwork& net, int num_probes);

}  // namespace genprior::conditions
