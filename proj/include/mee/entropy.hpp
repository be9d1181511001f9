#pragma once

#include "mee/windowing.hpp"

#include <span>
#include <vector>

namespace mee {

/// Residuals e_i = y_i - f(x_i) of a predictor on a sample. All entries finite.
class ErrorVector {
public:
  explicit ErrorVector(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

private:
  std::vector<double> values_;
};

/// Parzen estimate (1/(m h)) sum_i G((e - e_i)^2 / (2 h^2)), unnormalized:
/// with the Gaussian window it integrates to sqrt(2 pi), not 1.
double parzen_density(double e, const ErrorVector& errors, double h,
                      const WindowingFunction& w);

/// (1/(m^2 h)) sum_{i,j} G((e_i - e_j)^2 / (2 h^2)) including the diagonal.
///
/// The sum runs over a sorted copy of the errors in lexicographic (i, j) order
/// with an extended-precision accumulator, so the result does not depend on
/// how the input is ordered. Requires m >= 2.
double information_potential(const ErrorVector& errors, double h,
                             const WindowingFunction& w);

/// Empirical Renyi entropy of order 2: -log(information_potential).
/// Throws NonpositivePotential when the potential is not positive.
double empirical_renyi2(const ErrorVector& errors, double h,
                        const WindowingFunction& w);

/// Empirical Shannon entropy -(1/m) sum_i log p_hat(e_i). Diagnostic only.
double empirical_shannon(const ErrorVector& errors, double h,
                         const WindowingFunction& w);

} // namespace mee
