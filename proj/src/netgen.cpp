#include "genprior/netgen.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "genprior/rng.hpp"

namespace genprior::netgen {

bool NetworkShape::valid() const {
  if (dims.size() < 2) return false;
  for (int n : dims)
    if (n < 1) return false;
  return true;
}

bool NetworkShape::is_expansive(double c) const {
  for (std::size_t i = 1; i < dims.size(); ++i) {
    const double prev = dims[i - 1];
    const double need = c * prev * std::max(1.0, std::log(prev));
    if (dims[i] < need) return false;
  }
  return true;
}

std::int64_t NetworkShape::parameter_count() const {
  std::int64_t total = 0;
  for (std::size_t i = 1; i < dims.size(); ++i)
    total += static_cast<std::int64_t>(dims[i]) * dims[i - 1];
  return total;
}

GeneratorNetwork sample_network(const NetworkShape& shape, std::uint64_t seed,
                                VarianceRule rule,
                                const std::vector<double>& custom_scales,
                                std::int64_t parameter_budget) {
  if (!shape.valid())
    throw std::invalid_argument("sample_network: invalid shape");
  if (shape.parameter_count() > parameter_budget)
    throw std::invalid_argument("sample_network: parameter budget exceeded");
  const int d = shape.depth();
  if (rule == VarianceRule::Custom &&
      static_cast<int>(custom_scales.size()) != d)
    throw std::invalid_argument("sample_network: need one scale per layer");

  GeneratorNetwork net;
  net.shape = shape;
  net.provenance = {seed, rule, custom_scales};
  net.weights.reserve(d);
  for (int i = 0; i < d; ++i) {
    const int rows = shape.dims[i + 1];
    const int cols = shape.dims[i];
    double scale = 1.0;
    switch (rule) {
      case VarianceRule::PerLayer:
        scale = 1.0 / std::sqrt(static_cast<double>(rows));
        break;
      case VarianceRule::Unit:
        scale = 1.0;
        break;
      case VarianceRule::Custom:
        scale = custom_scales[i];
        break;
    }
    Rng rng(seed, static_cast<std::uint64_t>(i));
    Eigen::MatrixXd W(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) W(r, c) = scale * rng.gaussian();
    net.weights.push_back(std::move(W));
  }
  return net;
}

GeneratorNetwork sample_gaussian_network(const NetworkShape& shape,
                                         std::uint64_t seed,
                                         std::int64_t parameter_budget) {
  return sample_network(shape, seed, VarianceRule::PerLayer, {},
                        parameter_budget);
}

ForwardResult forward(const GeneratorNetwork& net, const Eigen::VectorXd& x) {
  if (x.size() != net.latent_dim())
    throw std::invalid_argument("forward: latent dimension mismatch");
  if (!x.allFinite()) throw std::invalid_argument("forward: non-finite input");

  ForwardResult res;
  res.pattern.masks.reserve(net.depth());
  Eigen::VectorXd h = x;
  for (const Eigen::MatrixXd& W : net.weights) {
    Eigen::VectorXd z = W * h;
    std::vector<std::uint8_t> mask(z.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      const bool active = z[j] > 0.0;  // ties at 0 resolve to inactive
      mask[j] = active ? 1 : 0;
      if (!active) z[j] = 0.0;
    }
    res.pattern.masks.push_back(std::move(mask));
    h = std::move(z);
  }
  res.output = std::move(h);
  return res;
}

Eigen::MatrixXd active_matrix(const Eigen::MatrixXd& W,
                              const Eigen::VectorXd& x) {
  if (W.cols() != x.size())
    throw std::invalid_argument("active_matrix: dimension mismatch");
  Eigen::MatrixXd out = W;
  const Eigen::VectorXd z = W * x;
  for (Eigen::Index r = 0; r < W.rows(); ++r)
    if (z[r] <= 0.0) out.row(r).setZero();
  return out;
}

Eigen::MatrixXd end_to_end_linearization(const GeneratorNetwork& net,
                                         const Eigen::VectorXd& x,
                                         const Eigen::VectorXd* tie_break) {
  if (x.size() != net.latent_dim())
    throw std::invalid_argument("linearization: latent dimension mismatch");
  if (x.isZero(0.0) && tie_break == nullptr)
    throw NondifferentiablePoint("linearization at 0 requires a tie-break");
  if (tie_break != nullptr && tie_break->size() != x.size())
    throw std::invalid_argument("linearization: tie-break dimension mismatch");

  // h carries the value chain, u the first-order perturbation direction.
  Eigen::VectorXd h = x;
  Eigen::VectorXd u =
      tie_break ? *tie_break : Eigen::VectorXd::Zero(x.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(x.size(), x.size());
  for (const Eigen::MatrixXd& W : net.weights) {
    Eigen::VectorXd z = W * h;
    Eigen::VectorXd zu = W * u;
    Eigen::MatrixXd Jn = W * J;
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      bool active;
      if (z[j] > 0.0) {
        active = true;
      } else if (z[j] < 0.0) {
        active = false;
      } else {
        if (tie_break == nullptr)
          throw NondifferentiablePoint(
              "zero pre-activation and no tie-break direction");
        active = zu[j] > 0.0;
      }
      if (!active) {
        z[j] = 0.0;
        zu[j] = 0.0;
        Jn.row(j).setZero();
      }
    }
    h = std::move(z);
    u = std::move(zu);
    J = std::move(Jn);
  }
  return J;
}

namespace {

constexpr char kMagic[8] = {'G', 'P', 'N', 'E', 'T', '0', '1', '\n'};

void write_i64(std::ostream& os, std::int64_t v) {
  // little-endian on all supported targets
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::int64_t read_i64(std::istream& is) {
  std::int64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

std::string rule_name(VarianceRule r) {
  switch (r) {
    case VarianceRule::PerLayer: return "per_layer";
    case VarianceRule::Unit: return "unit";
    case VarianceRule::Custom: return "custom";
  }
  return "per_layer";
}

VarianceRule rule_from_name(const std::string& s) {
  if (s == "unit") return VarianceRule::Unit;
  if (s == "custom") return VarianceRule::Custom;
  return VarianceRule::PerLayer;
}

}  // namespace

void save_network(const GeneratorNetwork& net, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_network: cannot open " + path);
  os.write(kMagic, sizeof kMagic);
  write_i64(os, net.depth() + 1);
  for (int n : net.shape.dims) write_i64(os, n);
  for (const Eigen::MatrixXd& W : net.weights) {
    // row-major entry order
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      os.write(reinterpret_cast<const char*>(W.row(r).eval().data()),
               static_cast<std::streamsize>(W.cols() * sizeof(double)));
  }
  if (!os) throw std::runtime_error("save_network: write failed: " + path);

  nlohmann::json side;
  side["seed"] = net.provenance.seed;
  side["variance_rule"] = rule_name(net.provenance.rule);
  side["custom_scales"] = net.provenance.custom_scales;
  side["dims"] = net.shape.dims;
  std::ofstream js(path + ".json");
  if (!js) throw std::runtime_error("save_network: cannot open sidecar");
  js << side.dump(2) << "\n";
}

GeneratorNetwork load_network(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_network: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw std::runtime_error("load_network: bad magic in " + path);
  const std::int64_t ndims = read_i64(is);
  if (ndims < 2 || ndims > 1000)
    throw std::runtime_error("load_network: corrupt header");
  GeneratorNetwork net;
  net.shape.dims.resize(ndims);
  for (auto& n : net.shape.dims) n = static_cast<int>(read_i64(is));
  if (!net.shape.valid())
    throw std::runtime_error("load_network: invalid dims");
  for (int i = 0; i < net.depth(); ++i) {
    const int rows = net.shape.dims[i + 1];
    const int cols = net.shape.dims[i];
    Eigen::MatrixXd W(rows, cols);
    for (int r = 0; r < rows; ++r) {
      Eigen::RowVectorXd row(cols);
      is.read(reinterpret_cast<char*>(row.data()),
              static_cast<std::streamsize>(cols * sizeof(double)));
      W.row(r) = row;
    }
    net.weights.push_back(std::move(W));
  }
  if (!is) throw std::runtime_error("load_network: truncated file");

  std::ifstream js(path + ".json");
  if (js) {
    nlohmann::json side = nlohmann::json::parse(js, nullptr, false);
    if (!side.is_discarded()) {
      net.provenance.seed = side.value("seed", std::uint64_t{0});
      net.provenance.rule =
          rule_from_name(side.value("variance_rule", std::string{"per_layer"}));
      net.provenance.custom_scales =
          side.value("custom_scales", std::vector<double>{});
    }
  }
  return net;
}

}  // namespace genprior::netgen
