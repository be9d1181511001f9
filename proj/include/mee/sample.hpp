#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <span>

namespace mee {

using InputMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// m labeled observations (x_i, y_i); row i of `x` is the input point x_i.
struct Sample {
  InputMatrix x;
  Eigen::VectorXd y;

  std::size_t size() const { return static_cast<std::size_t>(y.size()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(x.cols()); }
  std::span<const double> point(std::size_t i) const {
    return {x.data() + i * x.cols(), static_cast<std::size_t>(x.cols())};
  }

  /// Throws DimensionMismatch / InvalidArgument on inconsistent shapes or
  /// non-finite entries.
  void validate() const;
};

/// Headered CSV: columns x1..xn,y; one row per observation.
void write_sample_csv(const Sample& sample, const std::filesystem::path& path);
Sample read_sample_csv(const std::filesystem::path& path);

} // namespace mee
