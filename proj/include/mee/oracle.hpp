#pragma once

#include "mee/hypothesis.hpp"
#include "mee/optimize.hpp"
#include "mee/random.hpp"
#include "mee/sample.hpp"
#include "mee/windowing.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mee {

using RealFunction = std::function<double(std::span<const double>)>;

/// X ~ Uniform([low, high]^dim).
struct XLaw {
  std::size_t dim = 1;
  double low = -1.0;
  double high = 1.0;
};

/// Regression function presets:
///  - "affine": intercept + slope * (x_1 + ... + x_n)
///  - "sin":    amplitude * sin(pi x_1)
///  - "zero"
struct RegressionSpec {
  std::string name = "affine";
  double intercept = 0.5;
  double slope = 1.0;
  double amplitude = 1.0;
};

enum class NoiseKind { None, Gaussian, Uniform, StudentT };

/// `scale` is sigma (Gaussian), the half-width a (Uniform) or nu (Student-t).
struct NoiseSpec {
  NoiseKind kind = NoiseKind::None;
  double scale = 0.0;
};

NoiseSpec parse_noise(const std::string& name, double scale);
std::string noise_name(const NoiseSpec& noise);

/// Synthetic rho: X law, regression function f_rho, and zero-mean noise
/// independent of X, so Y = f_rho(X) + eps.
class DistributionModel {
public:
  DistributionModel(XLaw x_law, RegressionSpec regression, NoiseSpec noise);

  const XLaw& x_law() const { return x_law_; }
  const RegressionSpec& regression_spec() const { return regression_; }
  const NoiseSpec& noise() const { return noise_; }
  const std::string& noise_name() const { return noise_name_; }

  double regression(std::span<const double> x) const;
  RealFunction regression_function() const;

  /// sup |f_rho| over the X support (grid estimate for n = 1, exact corners otherwise).
  double regression_sup() const { return regression_sup_; }

  /// q with E|Y|^q < inf; +inf for Gaussian, bounded or absent noise,
  /// nu - 0.1 for Student-t(nu).
  double moment_q() const;
  /// min(q - 2, 2).
  double q_star() const;
  /// |Y| <= M almost surely, when the noise is bounded.
  std::optional<double> bound_M() const;
  /// Analytic E[eps^2] (C_rho); +inf when nu <= 2.
  double noise_variance() const;

  void draw_x(Rng& rng, std::span<double> x) const;
  double draw_noise(Rng& rng) const;

private:
  XLaw x_law_;
  RegressionSpec regression_;
  NoiseSpec noise_;
  std::string noise_name_;
  double regression_sup_ = 0.0;
};

/// i.i.d. draws with f_rho cached. Consecutive rows (2k, 2k+1) form the k-th
/// disjoint pair in the pair-based estimators.
struct Draws {
  InputMatrix x;
  Eigen::VectorXd y;
  Eigen::VectorXd f_rho;

  std::size_t size() const { return static_cast<std::size_t>(y.size()); }
  std::size_t pair_count() const { return size() / 2; }
  std::span<const double> point(std::size_t i) const {
    return {x.data() + i * x.cols(), static_cast<std::size_t>(x.cols())};
  }
};

/// n observations generated in independently seeded blocks of 65536, so the
/// result depends only on (model, n, seed).
Draws draw_observations(const DistributionModel& model, std::size_t n, std::uint64_t seed);

/// m i.i.d. pairs (x_i, y_i) from the model.
Sample generate_sample(const DistributionModel& model, std::size_t m, std::uint64_t seed);

struct MCEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t pair_count = 0;
};

/// Mean and standard error of the mean of i.i.d. terms.
MCEstimate mean_estimate(std::span<const double> terms);

/// Function f as a callable on input points. For pair-based functionals the
/// offset is irrelevant; pass include_offset = false to drop it exactly.
RealFunction as_function(const Predictor& p, const HypothesisSpace& space, bool include_offset = true);

/// C_rho = E[(Y - f_rho(X))^2].
MCEstimate c_rho(const DistributionModel& model, std::size_t n_mc, std::uint64_t seed);

/// Var[f(X) - f_rho(X)]; the std error comes from the delta method.
MCEstimate variance_distance(const RealFunction& f, const DistributionModel& model,
                             std::size_t n_mc, std::uint64_t seed);
MCEstimate variance_distance(const Predictor& f, const HypothesisSpace& space,
                             const DistributionModel& model, std::size_t n_mc, std::uint64_t seed);

/// Disjoint-pair estimate of the information error
///   E^(h)(f) = E[-h^2 G(((y - f(x)) - (y' - f(x')))^2 / (2 h^2))].
MCEstimate information_error(const RealFunction& f, const DistributionModel& model, double h,
                             const WindowingFunction& w, std::size_t n_pairs, std::uint64_t seed);
MCEstimate information_error(const Predictor& f, const HypothesisSpace& space,
                             const DistributionModel& model, double h, const WindowingFunction& w,
                             std::size_t n_pairs, std::uint64_t seed);

/// The same functional averaged over all ordered pairs i != j of n_obs draws
/// (a U-statistic). O(n_obs^2); used to cross-check the disjoint-pair route.
MCEstimate information_error_all_pairs(const RealFunction& f, const DistributionModel& model,
                                       double h, const WindowingFunction& w, std::size_t n_obs,
                                       std::uint64_t seed);

/// Disjoint-pair estimate of E[((y - f(x)) - (y' - f(x')))^2].
MCEstimate sym_ls_error(const RealFunction& f, const DistributionModel& model,
                        std::size_t n_pairs, std::uint64_t seed);
MCEstimate sym_ls_error(const Predictor& f, const HypothesisSpace& space,
                        const DistributionModel& model, std::size_t n_pairs, std::uint64_t seed);

/// Residual of the large-h approximation,
///   R(h) = E^(h)(f) + h^2 G(0) - C_rho - Var[f - f_rho],
/// estimated pair by pair as E[-h^2 (G(t) - G(0) - G'_+(0) t)] with
/// t = r^2 / (2 h^2). The two forms agree because E[r^2] / 2 = C_rho + Var[f - f_rho].
/// Reusing `draws` across h gives common random numbers.
MCEstimate information_residual(const RealFunction& f, const Draws& draws, double h,
                                const WindowingFunction& w);

/// Disjoint-pair estimate of E^(h)(f) - E^(h)(f_rho) = E[U_f(z, z')].
MCEstimate excess_information_error(const RealFunction& f, const DistributionModel& model,
                                    double h, const WindowingFunction& w, std::size_t n_pairs,
                                    std::uint64_t seed);

struct Observation {
  std::span<const double> x;
  double y = 0.0;
};

/// U_f(z, z') = -h^2 G(r_f^2 / (2h^2)) + h^2 G(r_rho^2 / (2h^2)).
double u_kernel(const RealFunction& f, const Observation& z, const Observation& zp,
                const DistributionModel& model, double h, const WindowingFunction& w);

/// V_f(z) = (1 / (m (m - 1))) sum_{i != j} U_f(z_i, z_j).
double u_statistic(const RealFunction& f, const Sample& sample, const DistributionModel& model,
                   double h, const WindowingFunction& w);

/// Pair-based objectives on fixed draws, minimized by the projected-gradient
/// machinery. Both depend on c only through r_k(c) = dy_k - dPhi_k c with
/// dy_k = y_2k - y_2k+1 and dPhi_k = phi(x_2k) - phi(x_2k+1).
class PairObjectiveBase : public SmoothObjective {
public:
  PairObjectiveBase(const HypothesisSpace& space, const Draws& draws);
  std::size_t dimension() const override { return static_cast<std::size_t>(dphi_.cols()); }
  /// Per-pair terms whose mean is value(c).
  virtual std::vector<double> terms(const Eigen::VectorXd& c) const = 0;

protected:
  Eigen::VectorXd pair_residuals(const Eigen::VectorXd& c) const { return dy_ - dphi_ * c; }

  Eigen::MatrixXd dphi_;
  Eigen::VectorXd dy_;
  Eigen::VectorXd dnoise_;  // r_k at f = f_rho
};

/// Var[f(X) - f_rho(X)] estimated as mean((r_k^2 - r0_k^2) / 2), i.e. E^sls / 2 - C_rho
/// on the same pairs. Unbiased, and exactly the h -> inf limit of the
/// information objective below on the same draws.
class PairVarianceObjective final : public PairObjectiveBase {
public:
  using PairObjectiveBase::PairObjectiveBase;
  double value(const Eigen::VectorXd& c) const override;
  double value_and_gradient(const Eigen::VectorXd& c, Eigen::VectorXd& grad) const override;
  std::vector<double> terms(const Eigen::VectorXd& c) const override;
};

/// E^(h)(f) + h^2 G(0) = mean(-h^2 (G(r_k^2 / (2h^2)) - G(0))).
class PairInformationObjective final : public PairObjectiveBase {
public:
  PairInformationObjective(const HypothesisSpace& space, const Draws& draws, double h,
                           WindowingFunction w);
  double value(const Eigen::VectorXd& c) const override;
  double value_and_gradient(const Eigen::VectorXd& c, Eigen::VectorXd& grad) const override;
  std::vector<double> terms(const Eigen::VectorXd& c) const override;

private:
  double h_;
  WindowingFunction w_;
};

struct ApproxTargets {
  MCEstimate approx_error;        // D_H = variance objective at f_approx
  Predictor f_approx;
  Predictor f_H;
  MCEstimate variance_at_f_H;      // same estimator at f_H
  double information_at_f_approx = 0.0;  // E^(h) + h^2 G(0) on the draws
  double information_at_f_H = 0.0;
};

/// f_approx = argmin Var[f - f_rho] and f_H = argmin E^(h)(f) over the ball,
/// both on the same fixed draws (2 * n_pairs observations from `seed`).
ApproxTargets approx_error_and_targets(const HypothesisSpace& space, const DistributionModel& model,
                                       double h, const WindowingFunction& w, std::size_t n_pairs,
                                       std::uint64_t seed, const OptimizerSettings& settings = {});
ApproxTargets approx_error_and_targets(const HypothesisSpace& space, const Draws& draws, double h,
                                       const WindowingFunction& w,
                                       const OptimizerSettings& settings = {});

/// Gaussian window, N(0, sigma^2) noise, f = f_rho: E^(h) = -h^3 / sqrt(h^2 + 2 sigma^2).
double gaussian_information_error(double h, double sigma);
/// The matching residual R(h) = E^(h) + h^2 - sigma^2, evaluated without cancellation.
double gaussian_information_residual(double h, double sigma);

} // namespace mee
