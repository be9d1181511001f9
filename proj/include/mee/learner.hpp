#pragma once

#include "mee/entropy.hpp"
#include "mee/hypothesis.hpp"
#include "mee/optimize.hpp"
#include "mee/sample.hpp"
#include "mee/windowing.hpp"

#include <Eigen/Dense>

namespace mee {

/// Empirical MEE risk minimization over a hypothesis ball: a sample, a space,
/// the scaling parameter h and the window. Caches the design matrix.
class MEEProblem {
public:
  MEEProblem(Sample sample, HypothesisSpace space, double h, WindowingFunction window);

  const Sample& sample() const { return sample_; }
  const HypothesisSpace& space() const { return space_; }
  double h() const { return h_; }
  const WindowingFunction& window() const { return window_; }
  const Eigen::MatrixXd& design() const { return design_; }

private:
  Sample sample_;
  HypothesisSpace space_;
  double h_;
  WindowingFunction window_;
  Eigen::MatrixXd design_;
};

/// e_i = y_i - f(x_i), offset included.
ErrorVector residuals(const Predictor& p, const HypothesisSpace& space, const Sample& sample);

/// Empirical Renyi-2 entropy of the residuals. The offset is dropped before the
/// residuals are formed: the objective only depends on pair differences, and
/// dropping it makes the invariance exact in floating point.
double mee_objective(const Predictor& p, const MEEProblem& prob);

/// Analytic gradient of mee_objective with respect to the coefficients.
Eigen::VectorXd mee_gradient(const Predictor& p, const MEEProblem& prob);

/// Objective adaptor used by minimize_mee; exposed for tests and the oracle.
class MeeObjective final : public SmoothObjective {
public:
  explicit MeeObjective(const MEEProblem& prob) : prob_(prob) {}
  std::size_t dimension() const override { return prob_.space().dimension(); }
  double value(const Eigen::VectorXd& c) const override;
  double value_and_gradient(const Eigen::VectorXd& c, Eigen::VectorXd& grad) const override;

private:
  const MEEProblem& prob_;
};

struct FitResult {
  Predictor predictor;
  double objective = 0.0;
  int iterations = 0;
  int evaluations = 0;
  int restart = 0;
  bool converged = false;
};

/// f_z: multi-start projected gradient minimization of mee_objective over the
/// coefficient ball. The returned predictor has offset 0.
FitResult minimize_mee(const MEEProblem& prob, const OptimizerSettings& settings = {});

/// Least squares over the ball: the closed-form (minimum-norm) solution when it
/// lies inside, otherwise projected gradient descent on (1/m) sum (y_i - f(x_i))^2.
Predictor least_squares_baseline(const Sample& sample, const HypothesisSpace& space,
                                 const OptimizerSettings& settings = {});

/// Clamp of y to [-sqrt(m), sqrt(m)].
double project_output(double y, std::size_t m);

/// Number of outputs moved by project_output.
std::size_t clipped_count(const Sample& sample);

/// (1/m) sum_i [f(x_i) - pi_sqrt(m)(y_i)], the computable stand-in for E[f(X) - f_rho(X)].
double mean_adjustment(const Predictor& p, const HypothesisSpace& space, const Sample& sample);

/// f_z minus its mean adjustment; coefficients unchanged.
Predictor adjusted_estimator(const Predictor& fz, const HypothesisSpace& space, const Sample& sample);

} // namespace mee
