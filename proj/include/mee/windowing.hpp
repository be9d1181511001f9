#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace mee {

/// Windowing function G on [0, inf) used for Parzen windowing of residuals.
///
/// The built-in kinds are evaluated through an inlined switch so the O(m^2)
/// pair loops do not pay for a type-erased call; custom windows go through
/// std::function.
class WindowingFunction {
public:
  using ScalarFn = std::function<double(double)>;

  enum class Kind { Gaussian, Rational, Custom };

  /// Custom window. If decay_constant is negative it is estimated as the sup of
  /// the (1+t)-weighted derivative magnitudes over the probe grid.
  WindowingFunction(std::string name, ScalarFn eval, ScalarFn deriv1,
                    ScalarFn deriv2, double decay_constant = -1.0);

  static WindowingFunction gaussian();
  static WindowingFunction rational();

  const std::string& name() const { return name_; }
  Kind kind() const { return kind_; }

  double eval(double t) const {
    switch (kind_) {
    case Kind::Gaussian: return std::exp(-t);
    case Kind::Rational: return 1.0 / (1.0 + t);
    default: return eval_(t);
    }
  }

  double deriv1(double t) const {
    switch (kind_) {
    case Kind::Gaussian: return -std::exp(-t);
    case Kind::Rational: {
      const double s = 1.0 + t;
      return -1.0 / (s * s);
    }
    default: return deriv1_(t);
    }
  }

  double deriv2(double t) const {
    switch (kind_) {
    case Kind::Gaussian: return std::exp(-t);
    case Kind::Rational: {
      const double s = 1.0 + t;
      return 2.0 / (s * s * s);
    }
    default: return deriv2_(t);
    }
  }

  /// G(t) and G'(t) together; the Gaussian shares one exp.
  void eval_with_deriv(double t, double& value, double& slope) const {
    switch (kind_) {
    case Kind::Gaussian:
      value = std::exp(-t);
      slope = -value;
      return;
    case Kind::Rational: {
      const double s = 1.0 / (1.0 + t);
      value = s;
      slope = -s * s;
      return;
    }
    default:
      value = eval_(t);
      slope = deriv1_(t);
    }
  }

  double value_at_zero() const { return value_at_zero_; }

  /// G(t) - G(0), without cancellation for the built-in kinds.
  double eval_minus_zero(double t) const {
    switch (kind_) {
    case Kind::Gaussian: return std::expm1(-t);
    case Kind::Rational: return -t / (1.0 + t);
    default: return eval_(t) - value_at_zero_;
    }
  }

  /// Second-order Taylor remainder G(t) - G(0) - G'_+(0) t.
  double taylor_remainder(double t) const {
    switch (kind_) {
    case Kind::Gaussian:
      if (t < 0.01) {
        // exp(-t) - 1 + t = t^2/2 - t^3/6 + ... ; truncation below 1e-16 relative.
        double term = 0.5 * t * t;
        double sum = term;
        for (int k = 3; k <= 9; ++k) {
          term *= -t / k;
          sum += term;
        }
        return sum;
      }
      return std::expm1(-t) + t;
    case Kind::Rational: return t * t / (1.0 + t);
    default: return eval_(t) - value_at_zero_ - deriv1_(0.0) * t;
    }
  }

  /// Grid estimate of sup_t max(|(1+t)G'(t)|, |(1+t)G''(t)|).
  double decay_constant() const { return decay_constant_; }

private:
  WindowingFunction(Kind kind, std::string name);

  Kind kind_;
  std::string name_;
  ScalarFn eval_;
  ScalarFn deriv1_;
  ScalarFn deriv2_;
  double value_at_zero_ = 0.0;
  double decay_constant_ = 0.0;
};

WindowingFunction make_gaussian_window();
WindowingFunction make_rational_window();

/// "gaussian" | "rational". Throws InvalidArgument for anything else.
WindowingFunction window_by_name(const std::string& name);

/// 10 000 log-spaced points on [1e-6, 1e6] preceded by t = 0.
const std::vector<double>& window_probe_grid();

struct WindowViolation {
  std::string condition;  // "normalization", "decay", "derivative_mismatch"
  double worst_t = 0.0;
  double worst_value = 0.0;
  std::string detail;
};

using WindowReport = std::vector<WindowViolation>;

/// Checks the smoothness, normalization and decay conditions on the probe
/// grid. Never throws on a bad window; an empty report means all hold.
WindowReport validate_window(const WindowingFunction& w);

std::string format_report(const WindowReport& report);

} // namespace mee
