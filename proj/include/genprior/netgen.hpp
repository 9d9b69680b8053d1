#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace genprior::netgen {

struct NondifferentiablePoint : std::runtime_error {
  explicit NondifferentiablePoint(const std::string& what)
      : std::runtime_error(what) {}
};

// Layer sizes of a d-layer ReLU generator: dims = (n_0 = k, n_1, ..., n_d).
struct NetworkShape {
  std::vector<int> dims;

  int depth() const { return static_cast<int>(dims.size()) - 1; }
  int latent_dim() const { return dims.front(); }
  int output_dim() const { return dims.back(); }

  bool valid() const;
  // n_i >= c * n_{i-1} * log(n_{i-1}) for every layer (log clamped to >= 1).
  bool is_expansive(double c) const;
  // total weight entries across all layers
  std::int64_t parameter_count() const;
};

enum class VarianceRule { PerLayer, Unit, Custom };

struct Provenance {
  std::uint64_t seed = 0;
  VarianceRule rule = VarianceRule::PerLayer;
  std::vector<double> custom_scales;  // per-layer std-dev, Custom only
};

struct GeneratorNetwork {
  NetworkShape shape;
  std::vector<Eigen::MatrixXd> weights;  // weights[i] is n_{i+1} x n_i
  Provenance provenance;

  int depth() const { return shape.depth(); }
  int latent_dim() const { return shape.latent_dim(); }
  int output_dim() const { return shape.output_dim(); }
};

// Per-layer binary masks; masks[i][j] = 1 iff pre-activation j of layer i+1
// is strictly positive.
struct ActivationPattern {
  std::vector<std::vector<std::uint8_t>> masks;

  bool operator==(const ActivationPattern&) const = default;
};

inline constexpr std::int64_t kDefaultParameterBudget = 200'000'000;

// Entries of weights[i] are i.i.d. N(0, 1/n_{i+1}); deterministic in
// (shape, seed), each layer drawn from its own stream.
GeneratorNetwork sample_gaussian_network(
    const NetworkShape& shape, std::uint64_t seed,
    std::int64_t parameter_budget = kDefaultParameterBudget);

// Unit-variance and custom-scale variants, for non-expansive controls.
GeneratorNetwork sample_network(
    const NetworkShape& shape, std::uint64_t seed, VarianceRule rule,
    const std::vector<double>& custom_scales = {},
    std::int64_t parameter_budget = kDefaultParameterBudget);

struct ForwardResult {
  Eigen::VectorXd output;
  ActivationPattern pattern;
};

ForwardResult forward(const GeneratorNetwork& net, const Eigen::VectorXd& x);

// W with rows whose dot product with x is <= 0 zeroed.
Eigen::MatrixXd active_matrix(const Eigen::MatrixXd& W,
                              const Eigen::VectorXd& x);

// End-to-end Jacobian W_{d,+,x'} ... W_{1,+,x'} in the limit x' = x + delta*w,
// delta -> 0+.  Zero pre-activations take the activity sign they acquire
// under tie_break; without a tie_break they raise NondifferentiablePoint.
Eigen::MatrixXd end_to_end_linearization(
    const GeneratorNetwork& net, const Eigen::VectorXd& x,
    const Eigen::VectorXd* tie_break = nullptr);

// Binary container (dims header + row-major float64 entries) with a JSON
// sidecar carrying seed/variance provenance.  Layout documented in README.
void save_network(const GeneratorNetwork& net, const std::string& path);
GeneratorNetwork load_network(const std::string& path);

}  // namespace genprior::netgen
