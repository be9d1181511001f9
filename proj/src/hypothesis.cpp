#include "mee/hypothesis.hpp"

#include "mee/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace mee {
namespace {

constexpr int kSupProbePoints = 10001;
constexpr double kBallSlack = 1e-9;

} // namespace

Dictionary::Dictionary(std::string name, std::size_t input_dim,
                       std::vector<Feature> features, double domain_low,
                       double domain_high, int constant_feature)
    : name_(std::move(name)), input_dim_(input_dim), features_(std::move(features)),
      domain_low_(domain_low), domain_high_(domain_high),
      constant_feature_(constant_feature) {
  if (input_dim_ < 1) throw InvalidArgument("dictionary input dimension must be >= 1");
  if (features_.empty()) throw InvalidArgument("dictionary needs at least one feature");
  if (!(domain_low_ < domain_high_)) throw InvalidArgument("empty dictionary domain");
  if (constant_feature_ >= static_cast<int>(features_.size())) {
    throw InvalidArgument("constant feature index out of range");
  }
}

void Dictionary::features_at(std::span<const double> x, std::span<double> out) const {
  if (x.size() != input_dim_) {
    throw DimensionMismatch("input point has dimension " + std::to_string(x.size()) +
                            ", dictionary expects " + std::to_string(input_dim_));
  }
  for (std::size_t k = 0; k < features_.size(); ++k) {
    const double v = features_[k](x);
    if (!std::isfinite(v)) throw InvalidArgument("feature " + std::to_string(k) + " is not finite");
    out[k] = v;
  }
}

Dictionary make_dictionary(const DictionarySpec& spec) {
  if (spec.degree < 0) throw InvalidArgument("dictionary degree must be >= 0");
  const std::size_t n = spec.input_dim;
  std::vector<Feature> features;
  features.push_back([](std::span<const double>) { return 1.0; });

  if (spec.name == "polynomial") {
    for (int power = 1; power <= spec.degree; ++power) {
      for (std::size_t j = 0; j < n; ++j) {
        features.push_back([j, power](std::span<const double> x) {
          return std::pow(x[j], power);
        });
      }
    }
  } else if (spec.name == "trig") {
    if (n != 1) throw InvalidArgument("trig dictionary is one-dimensional");
    for (int k = 1; k <= spec.degree; ++k) {
      const double freq = k * std::numbers::pi;
      features.push_back([freq](std::span<const double> x) { return std::cos(freq * x[0]); });
      features.push_back([freq](std::span<const double> x) { return std::sin(freq * x[0]); });
    }
  } else if (spec.name == "rbf") {
    if (n != 1) throw InvalidArgument("rbf dictionary is one-dimensional");
    const int centers = spec.degree;
    const double lo = spec.domain_low;
    const double hi = spec.domain_high;
    const double width = centers > 1 ? (hi - lo) / (centers - 1) : (hi - lo);
    for (int k = 0; k < centers; ++k) {
      const double c = centers > 1 ? lo + k * width : 0.5 * (lo + hi);
      features.push_back([c, width](std::span<const double> x) {
        const double u = (x[0] - c) / width;
        return std::exp(-0.5 * u * u);
      });
    }
  } else {
    throw InvalidArgument("unknown dictionary '" + spec.name +
                          "' (expected polynomial, trig or rbf)");
  }

  int constant = 0;
  if (!spec.include_constant) {
    features.erase(features.begin());
    constant = -1;
  }
  if (spec.size > 0) {
    if (static_cast<std::size_t>(spec.size) > features.size()) {
      throw InvalidArgument("dictionary size " + std::to_string(spec.size) + " exceeds the " +
                            std::to_string(features.size()) + " available features");
    }
    features.resize(static_cast<std::size_t>(spec.size));
  }
  if (features.empty()) throw InvalidArgument("dictionary has no features");
  return Dictionary(spec.name, n, std::move(features), spec.domain_low, spec.domain_high,
                    constant);
}

HypothesisSpace::HypothesisSpace(Dictionary dictionary, double radius)
    : dictionary_(std::move(dictionary)), radius_(radius) {
  if (!(radius_ > 0.0) || !std::isfinite(radius_)) {
    throw InvalidArgument("hypothesis space radius must be positive and finite");
  }
  // Probe set: a uniform grid for n = 1, seeded uniform points otherwise.
  const std::size_t n = dictionary_.input_dim();
  const std::size_t d = dictionary_.size();
  const double lo = dictionary_.domain_low();
  const double hi = dictionary_.domain_high();
  std::vector<double> x(n);
  std::vector<double> phi(d);
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> unif(lo, hi);
  double max_norm = 0.0;
  for (int k = 0; k < kSupProbePoints; ++k) {
    if (n == 1) {
      x[0] = lo + (hi - lo) * k / (kSupProbePoints - 1);
    } else {
      for (auto& xi : x) xi = unif(rng);
    }
    dictionary_.features_at(x, phi);
    double sq = 0.0;
    for (double v : phi) sq += v * v;
    max_norm = std::max(max_norm, std::sqrt(sq));
  }
  sup_bound_ = radius_ * max_norm;
}

Eigen::MatrixXd HypothesisSpace::design_matrix(const InputMatrix& x) const {
  const auto m = x.rows();
  const auto d = static_cast<Eigen::Index>(dimension());
  if (static_cast<std::size_t>(x.cols()) != dictionary_.input_dim()) {
    throw DimensionMismatch("inputs have dimension " + std::to_string(x.cols()) +
                            ", dictionary expects " + std::to_string(dictionary_.input_dim()));
  }
  Eigen::MatrixXd phi(m, d);
  std::vector<double> row(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < m; ++i) {
    dictionary_.features_at({x.data() + i * x.cols(), static_cast<std::size_t>(x.cols())}, row);
    for (Eigen::Index k = 0; k < d; ++k) phi(i, k) = row[static_cast<std::size_t>(k)];
  }
  return phi;
}

double evaluate(const Predictor& p, const HypothesisSpace& space, std::span<const double> x) {
  const std::size_t d = space.dimension();
  if (static_cast<std::size_t>(p.coefficients.size()) != d) {
    throw DimensionMismatch("predictor has " + std::to_string(p.coefficients.size()) +
                            " coefficients, space has " + std::to_string(d) + " features");
  }
  std::array<double, 32> small{};
  std::vector<double> large;
  std::span<double> phi;
  if (d <= small.size()) {
    phi = std::span<double>(small.data(), d);
  } else {
    large.resize(d);
    phi = large;
  }
  space.dictionary().features_at(x, phi);
  double sum = 0.0;
  for (std::size_t k = 0; k < d; ++k) sum += p.coefficients[static_cast<Eigen::Index>(k)] * phi[k];
  return sum + p.offset;
}

Eigen::VectorXd evaluate_all(const Predictor& p, const HypothesisSpace& space,
                             const InputMatrix& x) {
  if (static_cast<std::size_t>(x.cols()) != space.dictionary().input_dim()) {
    throw DimensionMismatch("inputs have dimension " + std::to_string(x.cols()) +
                            ", dictionary expects " +
                            std::to_string(space.dictionary().input_dim()));
  }
  Eigen::VectorXd v(x.rows());
  const auto n = static_cast<std::size_t>(x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    v[i] = evaluate(p, space, {x.data() + i * x.cols(), n});
  }
  return v;
}

Eigen::VectorXd project_to_ball(const Eigen::VectorXd& c, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("ball radius must be positive");
  const double norm = c.norm();
  if (norm <= radius) return c;
  Eigen::VectorXd out = c * (radius / norm);
  // Rounding in the rescale can leave the norm a hair above the radius.
  for (int k = 0; k < 16 && out.norm() > radius; ++k) out *= (1.0 - 4e-16);
  return out;
}

void check_predictor(const Predictor& p, const HypothesisSpace& space) {
  if (static_cast<std::size_t>(p.coefficients.size()) != space.dimension()) {
    throw DimensionMismatch("predictor length does not match the hypothesis space");
  }
  if (!p.coefficients.allFinite() || !std::isfinite(p.offset)) {
    throw InvalidArgument("predictor has non-finite entries");
  }
  if (p.coefficients.norm() > space.radius() + kBallSlack) {
    throw InvalidArgument("predictor coefficients lie outside the hypothesis ball");
  }
}

} // namespace mee
