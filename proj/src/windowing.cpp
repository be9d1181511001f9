#include "mee/windowing.hpp"

#include "mee/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mee {
namespace {

constexpr double kNormalizationTol = 1e-8;
constexpr double kZeroStep = 1e-6;
constexpr double kDerivRelTol = 1e-5;
constexpr double kDerivAbsFloor = 1e-13;
constexpr int kGridPoints = 10000;
constexpr double kGridLow = 1e-6;
constexpr double kGridHigh = 1e6;

double weighted_sup(const WindowingFunction& w) {
  double sup = 0.0;
  for (double t : window_probe_grid()) {
    sup = std::max({sup, std::abs((1.0 + t) * w.deriv1(t)),
                    std::abs((1.0 + t) * w.deriv2(t))});
  }
  return sup;
}

// Finite-difference estimates of G' and G'' at t. Central differences away
// from the boundary, second-order forward stencils when t is too close to 0.
// Also returns the rounding noise floor of each estimate.
void finite_differences(const WindowingFunction& w, double t, double& d1,
                        double& d2, double& noise1, double& noise2) {
  const double step = 1e-4 * std::max(1.0, t);
  const double eps = std::numeric_limits<double>::epsilon();
  const double scale = std::abs(w.eval(t)) + std::abs(w.eval(t + step));
  noise1 = 16.0 * eps * scale / step;
  noise2 = 64.0 * eps * scale / (step * step);
  if (t >= step) {
    const double gp = w.eval(t + step);
    const double g0 = w.eval(t);
    const double gm = w.eval(t - step);
    d1 = (gp - gm) / (2.0 * step);
    d2 = (gp - 2.0 * g0 + gm) / (step * step);
    return;
  }
  const double g0 = w.eval(t);
  const double g1 = w.eval(t + step);
  const double g2 = w.eval(t + 2.0 * step);
  const double g3 = w.eval(t + 3.0 * step);
  d1 = (-3.0 * g0 + 4.0 * g1 - g2) / (2.0 * step);
  d2 = (2.0 * g0 - 5.0 * g1 + 4.0 * g2 - g3) / (step * step);
}

} // namespace

WindowingFunction::WindowingFunction(Kind kind, std::string name)
    : kind_(kind), name_(std::move(name)) {}

WindowingFunction::WindowingFunction(std::string name, ScalarFn eval,
                                     ScalarFn deriv1, ScalarFn deriv2,
                                     double decay_constant)
    : kind_(Kind::Custom), name_(std::move(name)), eval_(std::move(eval)),
      deriv1_(std::move(deriv1)), deriv2_(std::move(deriv2)) {
  if (!eval_ || !deriv1_ || !deriv2_) {
    throw InvalidArgument("custom window requires G, G' and G''");
  }
  value_at_zero_ = eval_(0.0);
  decay_constant_ = decay_constant >= 0.0 ? decay_constant : weighted_sup(*this);
}

WindowingFunction WindowingFunction::gaussian() {
  WindowingFunction w(Kind::Gaussian, "gaussian");
  w.value_at_zero_ = 1.0;
  w.decay_constant_ = weighted_sup(w);
  return w;
}

WindowingFunction WindowingFunction::rational() {
  WindowingFunction w(Kind::Rational, "rational");
  w.value_at_zero_ = 1.0;
  w.decay_constant_ = weighted_sup(w);
  return w;
}

WindowingFunction make_gaussian_window() { return WindowingFunction::gaussian(); }
WindowingFunction make_rational_window() { return WindowingFunction::rational(); }

WindowingFunction window_by_name(const std::string& name) {
  if (name == "gaussian") return make_gaussian_window();
  if (name == "rational") return make_rational_window();
  throw InvalidArgument("unknown window '" + name +
                        "' (expected gaussian or rational)");
}

const std::vector<double>& window_probe_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g;
    g.reserve(kGridPoints + 1);
    g.push_back(0.0);
    const double lo = std::log(kGridLow);
    const double hi = std::log(kGridHigh);
    for (int k = 0; k < kGridPoints; ++k) {
      g.push_back(std::exp(lo + (hi - lo) * k / (kGridPoints - 1)));
    }
    g.back() = kGridHigh;
    return g;
  }();
  return grid;
}

WindowReport validate_window(const WindowingFunction& w) {
  WindowReport report;

  // Normalization G'_+(0) = -1, both as declared and as seen through G.
  const double declared = w.deriv1(0.0);
  const double h = kZeroStep;
  const double one_sided =
      (-3.0 * w.eval(0.0) + 4.0 * w.eval(h) - w.eval(2.0 * h)) / (2.0 * h);
  const double worst_norm =
      std::max(std::abs(declared + 1.0), std::abs(one_sided + 1.0));
  if (!(worst_norm <= kNormalizationTol)) {
    std::ostringstream os;
    os << "G'(0) = " << declared << ", one-sided difference " << one_sided
       << ", expected -1";
    report.push_back({"normalization", 0.0, worst_norm, os.str()});
  }

  const auto& grid = window_probe_grid();
  const double bound = w.decay_constant();
  double worst_decay = -1.0;
  double worst_decay_t = 0.0;
  double worst_mismatch = -1.0;
  double worst_mismatch_t = 0.0;
  std::vector<double> weighted(grid.size());

  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    const double g1 = w.deriv1(t);
    const double g2 = w.deriv2(t);
    const double wt = std::max(std::abs((1.0 + t) * g1), std::abs((1.0 + t) * g2));
    weighted[k] = wt;
    if (!std::isfinite(wt) || wt > bound * (1.0 + 1e-12) + 1e-300) {
      const double excess = std::isfinite(wt) ? wt - bound : HUGE_VAL;
      if (excess > worst_decay) {
        worst_decay = excess;
        worst_decay_t = t;
      }
    }
    if (t == 0.0) continue;
    double fd1 = 0.0;
    double fd2 = 0.0;
    double noise1 = 0.0;
    double noise2 = 0.0;
    finite_differences(w, t, fd1, fd2, noise1, noise2);
    const double e1 = std::abs(fd1 - g1) /
                      (kDerivRelTol * std::max(std::abs(g1), std::abs(fd1)) + noise1 + kDerivAbsFloor);
    const double e2 = std::abs(fd2 - g2) /
                      (kDerivRelTol * std::max(std::abs(g2), std::abs(fd2)) + noise2 + kDerivAbsFloor);
    const double e = std::max(e1, e2);
    if (!(e <= 1.0) && (std::isnan(e) || e > worst_mismatch)) {
      worst_mismatch = std::isnan(e) ? HUGE_VAL : e;
      worst_mismatch_t = t;
    }
  }

  if (worst_decay >= 0.0) {
    std::ostringstream os;
    os << "weighted derivative exceeds C_G = " << bound << " by " << worst_decay;
    report.push_back({"decay", worst_decay_t, worst_decay, os.str()});
  }

  // A weighted derivative still growing over the last decade means the sup
  // over [0, inf) is not finite even if the grid bound holds.
  const std::size_t last = grid.size() - 1;
  const std::size_t decade = last - (kGridPoints - 1) / 12;
  if (weighted[last] > 0.0 && weighted[last] > 1.01 * weighted[decade]) {
    std::ostringstream os;
    os << "(1+t)-weighted derivative grows from " << weighted[decade] << " at t = "
       << grid[decade] << " to " << weighted[last] << " at t = " << grid[last];
    report.push_back({"decay", grid[last], weighted[last], os.str()});
  }

  if (worst_mismatch >= 0.0) {
    std::ostringstream os;
    os << "analytic derivative disagrees with finite differences; error/tolerance = "
       << worst_mismatch;
    report.push_back({"derivative_mismatch", worst_mismatch_t, worst_mismatch, os.str()});
  }
  return report;
}

std::string format_report(const WindowReport& report) {
  std::ostringstream os;
  os << "violations: " << report.size() << '\n';
  for (const auto& v : report) {
    os << v.condition << " at t = " << v.worst_t << ": " << v.detail << '\n';
  }
  return os.str();
}

} // namespace mee
