#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace mee {

/// Projected-gradient settings shared by every minimization in the library.
struct OptimizerSettings {
  int restarts = 8;             // origin plus restarts-1 seeded points in the ball
  int max_iterations = 2000;
  double gradient_tolerance = 1e-8;  // on ||P(c - grad) - c||_2
  double initial_step = 1.0;
  double shrink = 0.5;
  double armijo = 1e-4;
  int max_backtracks = 60;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument unless all positive and shrink in (0, 1).
  void validate() const;
};

/// A C^1 function of a coefficient vector.
class SmoothObjective {
public:
  virtual ~SmoothObjective() = default;
  virtual std::size_t dimension() const = 0;
  virtual double value(const Eigen::VectorXd& c) const = 0;
  /// Fills `grad`; returns the objective value computed along the way.
  virtual double value_and_gradient(const Eigen::VectorXd& c, Eigen::VectorXd& grad) const = 0;
};

struct DescentResult {
  Eigen::VectorXd point;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::vector<double> accepted_values;  // objective after each accepted step
};

/// Projected gradient descent on the ball ||c|| <= radius. The trial step is the
/// Barzilai-Borwein ratio s's/s'y (settings.initial_step on the first iteration);
/// it is shrunk until the Armijo condition holds, so the objective never rises.
DescentResult projected_descent(const SmoothObjective& objective, const Eigen::VectorXd& start,
                                double radius, const OptimizerSettings& settings);

struct MultiStartResult {
  DescentResult best;
  int restart_index = 0;
  int failed_restarts = 0;
};

/// Runs projected_descent from the origin and settings.restarts-1 points drawn
/// uniformly from the ball. Picks the smallest objective; near-ties (relative
/// 1e-12) go to the smaller coefficient norm, then the lower restart index.
/// Restarts whose start point is infeasible (NonpositivePotential) are skipped;
/// if all are, the last such error is rethrown.
MultiStartResult multistart_minimize(const SmoothObjective& objective, double radius,
                                     const OptimizerSettings& settings);

/// Starting points used by multistart_minimize (origin first).
std::vector<Eigen::VectorXd> restart_points(std::size_t dimension, double radius,
                                            const OptimizerSettings& settings);

} // namespace mee
