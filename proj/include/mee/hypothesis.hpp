#pragma once

#include "mee/sample.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mee {

using Feature = std::function<double(std::span<const double>)>;

/// Ordered list of feature functions phi_k on an axis-aligned input box.
class Dictionary {
public:
  /// `constant_feature` names the index of a feature identically equal to 1
  /// (or -1 if there is none).
  Dictionary(std::string name, std::size_t input_dim, std::vector<Feature> features,
             double domain_low = -1.0, double domain_high = 1.0, int constant_feature = -1);

  const std::string& name() const { return name_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t size() const { return features_.size(); }
  double domain_low() const { return domain_low_; }
  double domain_high() const { return domain_high_; }

  double feature(std::size_t k, std::span<const double> x) const { return features_[k](x); }

  /// Writes phi_1(x)..phi_d(x) into `out` (length d).
  void features_at(std::span<const double> x, std::span<double> out) const;

  /// Index of a feature that is identically 1, or -1.
  int constant_feature() const { return constant_feature_; }

private:
  std::string name_;
  std::size_t input_dim_;
  std::vector<Feature> features_;
  double domain_low_;
  double domain_high_;
  int constant_feature_ = -1;
};

/// Built-in dictionaries selected by name:
///  - "polynomial": 1, x, ..., x^degree (additive monomials per coordinate when n > 1)
///  - "trig": 1, cos(pi x), sin(pi x), ..., cos(degree pi x), sin(degree pi x)
///  - "rbf": 1 plus `degree` Gaussian bumps on a uniform grid over the domain (n = 1)
/// `size`, when positive, truncates to the first `size` features;
/// `include_constant = false` drops the leading constant.
struct DictionarySpec {
  std::string name = "polynomial";
  int degree = 1;
  int size = 0;
  bool include_constant = true;
  std::size_t input_dim = 1;
  double domain_low = -1.0;
  double domain_high = 1.0;
};

Dictionary make_dictionary(const DictionarySpec& spec);

/// Euclidean coefficient ball of radius R over a dictionary.
class HypothesisSpace {
public:
  HypothesisSpace(Dictionary dictionary, double radius);

  const Dictionary& dictionary() const { return dictionary_; }
  std::size_t dimension() const { return dictionary_.size(); }
  double radius() const { return radius_; }

  /// R * max over a probe set of ||phi(x)||_2, i.e. sup over the ball of |f(x)|
  /// on the probe set (attained by the coefficient direction phi(x)/||phi(x)||).
  double sup_bound() const { return sup_bound_; }

  /// m x d matrix with rows phi(x_i).
  Eigen::MatrixXd design_matrix(const InputMatrix& x) const;

private:
  Dictionary dictionary_;
  double radius_;
  double sup_bound_ = 0.0;
};

/// A point of the hypothesis space plus an additive constant. The constant is
/// only non-zero for the mean-adjusted estimator.
struct Predictor {
  Eigen::VectorXd coefficients;
  double offset = 0.0;

  static Predictor zero(std::size_t d) { return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)), 0.0}; }
};

/// sum_k c_k phi_k(x) + offset. Throws DimensionMismatch.
double evaluate(const Predictor& p, const HypothesisSpace& space, std::span<const double> x);

/// Values at every row of `x`, offset included.
Eigen::VectorXd evaluate_all(const Predictor& p, const HypothesisSpace& space, const InputMatrix& x);

/// Radial projection onto {c : ||c||_2 <= radius}.
Eigen::VectorXd project_to_ball(const Eigen::VectorXd& c, double radius);

/// Throws InvalidArgument if the coefficients leave the ball (1e-9 slack)
/// or have the wrong length.
void check_predictor(const Predictor& p, const HypothesisSpace& space);

} // namespace mee
