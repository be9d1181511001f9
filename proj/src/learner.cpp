#include "mee/learner.hpp"

#include "mee/errors.hpp"
#include "mee/log.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace mee {
namespace {

class LeastSquaresObjective final : public SmoothObjective {
public:
  LeastSquaresObjective(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y)
      : phi_(phi), y_(y) {}
  std::size_t dimension() const override { return static_cast<std::size_t>(phi_.cols()); }
  double value(const Eigen::VectorXd& c) const override {
    return (y_ - phi_ * c).squaredNorm() / static_cast<double>(y_.size());
  }
  double value_and_gradient(const Eigen::VectorXd& c, Eigen::VectorXd& grad) const override {
    const Eigen::VectorXd r = y_ - phi_ * c;
    grad = (-2.0 / static_cast<double>(y_.size())) * (phi_.transpose() * r);
    return r.squaredNorm() / static_cast<double>(y_.size());
  }

private:
  const Eigen::MatrixXd& phi_;
  const Eigen::VectorXd& y_;
};

Eigen::VectorXd coefficient_residuals(const MEEProblem& prob, const Eigen::VectorXd& c) {
  if (c.size() != prob.design().cols()) {
    throw DimensionMismatch("coefficient vector length does not match the hypothesis space");
  }
  return prob.sample().y - prob.design() * c;
}

} // namespace

MEEProblem::MEEProblem(Sample sample, HypothesisSpace space, double h, WindowingFunction window)
    : sample_(std::move(sample)), space_(std::move(space)), h_(h), window_(std::move(window)) {
  sample_.validate();
  if (sample_.size() < 2) throw InvalidArgument("MEE needs a sample of size m >= 2");
  if (sample_.input_dim() != space_.dictionary().input_dim()) {
    throw DimensionMismatch("sample inputs do not match the dictionary input dimension");
  }
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw InvalidArgument("h must be positive and finite");
  log::warn_small_bandwidth(h_);
  design_ = space_.design_matrix(sample_.x);
}

ErrorVector residuals(const Predictor& p, const HypothesisSpace& space, const Sample& sample) {
  if (static_cast<std::size_t>(p.coefficients.size()) != space.dimension()) {
    throw DimensionMismatch("predictor length does not match the hypothesis space");
  }
  // Same arithmetic as the objective: y - (Phi c + offset).
  Eigen::VectorXd f = space.design_matrix(sample.x) * p.coefficients;
  f.array() += p.offset;
  const Eigen::VectorXd e = sample.y - f;
  return ErrorVector(std::vector<double>(e.data(), e.data() + e.size()));
}

double MeeObjective::value(const Eigen::VectorXd& c) const {
  const Eigen::VectorXd e = coefficient_residuals(prob_, c);
  return empirical_renyi2(ErrorVector(std::vector<double>(e.data(), e.data() + e.size())),
                          prob_.h(), prob_.window());
}

double MeeObjective::value_and_gradient(const Eigen::VectorXd& c, Eigen::VectorXd& grad) const {
  const Eigen::VectorXd e = coefficient_residuals(prob_, c);
  const auto m = static_cast<std::size_t>(e.size());
  const double h = prob_.h();
  const double scale = 1.0 / (2.0 * h * h);
  const WindowingFunction& w = prob_.window();

  // a_i = sum_j G'(t_ij) (e_i - e_j); the pair weights are antisymmetric, so
  // each unordered pair is visited once.
  std::vector<long double> a(m, 0.0L);
  long double upper = 0.0L;
  for (std::size_t i = 0; i < m; ++i) {
    const double ei = e[static_cast<Eigen::Index>(i)];
    long double ai = 0.0L;
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = ei - e[static_cast<Eigen::Index>(j)];
      double g = 0.0;
      double g1 = 0.0;
      w.eval_with_deriv(d * d * scale, g, g1);
      upper += g;
      const double wij = g1 * d;
      ai += wij;
      a[j] -= wij;
    }
    a[i] += ai;
  }
  const long double md = static_cast<long double>(m);
  const long double ip =
      (md * w.value_at_zero() + 2.0L * upper) / (md * md * static_cast<long double>(h));
  if (!(ip > 0.0L)) {
    throw NonpositivePotential("information potential is not positive at the current predictor");
  }

  Eigen::VectorXd av(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) av[static_cast<Eigen::Index>(i)] = static_cast<double>(a[i]);
  const double factor = static_cast<double>(2.0L / (ip * md * md * h * h * h));
  grad = factor * (prob_.design().transpose() * av);
  return -std::log(static_cast<double>(ip));
}

double mee_objective(const Predictor& p, const MEEProblem& prob) {
  return MeeObjective(prob).value(p.coefficients);
}

Eigen::VectorXd mee_gradient(const Predictor& p, const MEEProblem& prob) {
  Eigen::VectorXd grad;
  MeeObjective(prob).value_and_gradient(p.coefficients, grad);
  return grad;
}

FitResult minimize_mee(const MEEProblem& prob, const OptimizerSettings& settings) {
  const MeeObjective objective(prob);
  const MultiStartResult ms = multistart_minimize(objective, prob.space().radius(), settings);
  FitResult out;
  out.predictor = Predictor{ms.best.point, 0.0};
  out.objective = ms.best.value;
  out.iterations = ms.best.iterations;
  out.evaluations = ms.best.evaluations;
  out.restart = ms.restart_index;
  out.converged = ms.best.converged;
  return out;
}

Predictor least_squares_baseline(const Sample& sample, const HypothesisSpace& space,
                                 const OptimizerSettings& settings) {
  sample.validate();
  const Eigen::MatrixXd phi = space.design_matrix(sample.x);
  const Eigen::VectorXd c = phi.completeOrthogonalDecomposition().solve(sample.y);
  if (c.allFinite() && c.norm() <= space.radius()) return Predictor{c, 0.0};

  // Convex problem: a single start suffices.
  OptimizerSettings single = settings;
  single.restarts = 1;
  const LeastSquaresObjective objective(phi, sample.y);
  const Eigen::VectorXd start = c.allFinite() ? project_to_ball(c, space.radius())
                                              : Eigen::VectorXd::Zero(phi.cols());
  const DescentResult res = projected_descent(objective, start, space.radius(), single);
  return Predictor{res.point, 0.0};
}

double project_output(double y, std::size_t m) {
  if (m < 1) throw InvalidArgument("sample size must be >= 1");
  const double bound = std::sqrt(static_cast<double>(m));
  return std::clamp(y, -bound, bound);
}

std::size_t clipped_count(const Sample& sample) {
  const double bound = std::sqrt(static_cast<double>(sample.size()));
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < sample.y.size(); ++i) n += std::abs(sample.y[i]) > bound ? 1 : 0;
  return n;
}

double mean_adjustment(const Predictor& p, const HypothesisSpace& space, const Sample& sample) {
  const std::size_t m = sample.size();
  if (m < 1) throw InvalidArgument("mean adjustment needs a non-empty sample");
  const Eigen::VectorXd f = evaluate_all(p, space, sample.x);
  long double acc = 0.0L;
  for (std::size_t i = 0; i < m; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    acc += f[k] - project_output(sample.y[k], m);
  }
  return static_cast<double>(acc / static_cast<long double>(m));
}

Predictor adjusted_estimator(const Predictor& fz, const HypothesisSpace& space, const Sample& sample) {
  Predictor out = fz;
  out.offset = fz.offset - mean_adjustment(fz, space, sample);
  return out;
}

} // namespace mee
