#include "mee/optimize.hpp"

#include "mee/errors.hpp"
#include "mee/hypothesis.hpp"
#include "mee/random.hpp"

#include <cmath>
#include <exception>
#include <limits>

namespace mee {
namespace {

constexpr double kMinStep = 1e-12;
constexpr double kMaxStep = 1e12;
constexpr double kTieTolerance = 1e-12;

double safe_value(const SmoothObjective& objective, const Eigen::VectorXd& c) {
  try {
    const double v = objective.value(c);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  } catch (const NonpositivePotential&) {
    return std::numeric_limits<double>::infinity();
  }
}

} // namespace

void OptimizerSettings::validate() const {
  if (restarts < 1) throw InvalidArgument("restarts must be >= 1");
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
  if (!(gradient_tolerance > 0.0)) throw InvalidArgument("gradient_tolerance must be positive");
  if (!(initial_step > 0.0)) throw InvalidArgument("initial_step must be positive");
  if (!(shrink > 0.0 && shrink < 1.0)) throw InvalidArgument("shrink must lie in (0, 1)");
  if (!(armijo > 0.0 && armijo < 1.0)) throw InvalidArgument("armijo constant must lie in (0, 1)");
  if (max_backtracks < 1) throw InvalidArgument("max_backtracks must be >= 1");
}

DescentResult projected_descent(const SmoothObjective& objective, const Eigen::VectorXd& start,
                                double radius, const OptimizerSettings& settings) {
  settings.validate();
  DescentResult res;
  Eigen::VectorXd x = project_to_ball(start, radius);
  Eigen::VectorXd grad(x.size());
  // The value() path is the reference objective; the gradient pass only
  // supplies directions.
  objective.value_and_gradient(x, grad);
  double fx = objective.value(x);
  res.evaluations = 2;
  double step = settings.initial_step;

  for (int it = 0; it < settings.max_iterations; ++it) {
    const Eigen::VectorXd pg = project_to_ball(x - grad, radius) - x;
    if (pg.norm() <= settings.gradient_tolerance) {
      res.converged = true;
      break;
    }

    double lambda = std::clamp(step, kMinStep, kMaxStep);
    bool accepted = false;
    Eigen::VectorXd trial;
    double f_trial = 0.0;
    for (int bt = 0; bt < settings.max_backtracks; ++bt) {
      trial = project_to_ball(x - lambda * grad, radius);
      const Eigen::VectorXd d = trial - x;
      if (d.norm() == 0.0) break;
      f_trial = safe_value(objective, trial);
      ++res.evaluations;
      if (f_trial <= fx + settings.armijo * grad.dot(d)) {
        accepted = true;
        break;
      }
      lambda *= settings.shrink;
    }
    if (!accepted) {
      // No decrease is representable along the projected arc.
      res.converged = true;
      break;
    }

    Eigen::VectorXd new_grad(x.size());
    objective.value_and_gradient(trial, new_grad);
    ++res.evaluations;
    const Eigen::VectorXd s = trial - x;
    const Eigen::VectorXd y = new_grad - grad;
    const double sy = s.dot(y);
    step = sy > 0.0 ? s.squaredNorm() / sy : lambda / settings.shrink;

    x = trial;
    grad = new_grad;
    fx = f_trial;
    res.accepted_values.push_back(fx);
    res.iterations = it + 1;
  }

  res.point = x;
  res.value = fx;
  return res;
}

std::vector<Eigen::VectorXd> restart_points(std::size_t dimension, double radius,
                                            const OptimizerSettings& settings) {
  std::vector<Eigen::VectorXd> points;
  const auto d = static_cast<Eigen::Index>(dimension);
  points.push_back(Eigen::VectorXd::Zero(d));
  Rng rng(settings.seed);
  for (int r = 1; r < settings.restarts; ++r) {
    points.push_back(uniform_in_ball(rng, dimension, radius));
  }
  return points;
}

MultiStartResult multistart_minimize(const SmoothObjective& objective, double radius,
                                     const OptimizerSettings& settings) {
  settings.validate();
  const auto starts = restart_points(objective.dimension(), radius, settings);
  MultiStartResult out;
  bool have_best = false;
  std::exception_ptr last_error;

  for (std::size_t r = 0; r < starts.size(); ++r) {
    if (!std::isfinite(safe_value(objective, project_to_ball(starts[r], radius)))) {
      ++out.failed_restarts;
      try {
        objective.value(project_to_ball(starts[r], radius));
      } catch (...) {
        last_error = std::current_exception();
      }
      continue;
    }
    DescentResult cand = projected_descent(objective, starts[r], radius, settings);
    if (!have_best) {
      out.best = std::move(cand);
      out.restart_index = static_cast<int>(r);
      have_best = true;
      continue;
    }
    const double tol = kTieTolerance * std::max(1.0, std::abs(out.best.value));
    const bool better = cand.value < out.best.value - tol;
    const bool tie_smaller = std::abs(cand.value - out.best.value) <= tol &&
                             cand.point.norm() < out.best.point.norm();
    if (better || tie_smaller) {
      out.best = std::move(cand);
      out.restart_index = static_cast<int>(r);
    }
  }
  if (!have_best) {
    if (last_error) std::rethrow_exception(last_error);
    throw NonpositivePotential("objective is undefined at every restart point");
  }
  return out;
}

} // namespace mee
