#include "mee/entropy.hpp"

#include "mee/errors.hpp"
#include "mee/log.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mee {
namespace {

void check_bandwidth(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw InvalidArgument("scaling parameter h must be positive and finite");
  }
  log::warn_small_bandwidth(h);
}

void check_pairwise_size(const ErrorVector& errors) {
  if (errors.size() < 2) {
    throw InvalidArgument("entropy estimates need at least two errors");
  }
}

std::vector<double> sorted_copy(const ErrorVector& errors) {
  std::vector<double> v(errors.values().begin(), errors.values().end());
  std::sort(v.begin(), v.end());
  return v;
}

} // namespace

ErrorVector::ErrorVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("error vector is empty");
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("error vector has a non-finite entry");
  }
}

double parzen_density(double e, const ErrorVector& errors, double h,
                      const WindowingFunction& w) {
  if (!std::isfinite(e)) throw InvalidArgument("query point must be finite");
  check_bandwidth(h);
  const double scale = 1.0 / (2.0 * h * h);
  long double acc = 0.0L;
  for (double ei : errors.values()) {
    const double d = e - ei;
    acc += w.eval(d * d * scale);
  }
  return static_cast<double>(acc / (static_cast<long double>(errors.size()) * h));
}

double information_potential(const ErrorVector& errors, double h,
                             const WindowingFunction& w) {
  check_bandwidth(h);
  check_pairwise_size(errors);
  const std::vector<double> e = sorted_copy(errors);
  const std::size_t m = e.size();
  const double scale = 1.0 / (2.0 * h * h);
  // G is evaluated at a symmetric argument, so the double sum is the diagonal
  // plus twice the strict upper triangle.
  long double upper = 0.0L;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = e[i] - e[j];
      upper += w.eval(d * d * scale);
    }
  }
  const long double acc =
      static_cast<long double>(m) * w.value_at_zero() + 2.0L * upper;
  const long double m2 = static_cast<long double>(m) * static_cast<long double>(m);
  return static_cast<double>(acc / (m2 * h));
}

double empirical_renyi2(const ErrorVector& errors, double h,
                        const WindowingFunction& w) {
  const double ip = information_potential(errors, h, w);
  if (!(ip > 0.0)) {
    throw NonpositivePotential("information potential " + std::to_string(ip) +
                               " is not positive for window '" + w.name() + "'");
  }
  return -std::log(ip);
}

double empirical_shannon(const ErrorVector& errors, double h,
                         const WindowingFunction& w) {
  check_bandwidth(h);
  check_pairwise_size(errors);
  const std::vector<double> e = sorted_copy(errors);
  const std::size_t m = e.size();
  const double scale = 1.0 / (2.0 * h * h);
  const long double norm = static_cast<long double>(m) * h;
  long double total = 0.0L;
  for (std::size_t i = 0; i < m; ++i) {
    long double inner = 0.0L;
    for (std::size_t j = 0; j < m; ++j) {
      const double d = e[i] - e[j];
      inner += w.eval(d * d * scale);
    }
    inner /= norm;
    if (!(inner > 0.0L)) {
      throw NonpositivePotential("Parzen estimate at a sample error is not positive");
    }
    total += std::log(inner);
  }
  return static_cast<double>(-total / static_cast<long double>(m));
}

} // namespace mee
