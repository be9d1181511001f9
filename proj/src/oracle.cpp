#include "mee/oracle.hpp"

#include "mee/errors.hpp"

#include <boost/random/student_t_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mee {
namespace {

constexpr std::size_t kBlockSize = 1u << 16;

void require_count(std::size_t n, std::size_t minimum, const char* what) {
  if (n < minimum) {
    throw InvalidArgument(std::string(what) + " must be at least " + std::to_string(minimum));
  }
}

void require_bandwidth(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("h must be positive and finite");
}

Eigen::VectorXd values_at(const RealFunction& f, const Draws& draws) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(draws.size()));
  for (std::size_t i = 0; i < draws.size(); ++i) v[static_cast<Eigen::Index>(i)] = f(draws.point(i));
  return v;
}

// r_k = (y_2k - f(x_2k)) - (y_2k+1 - f(x_2k+1)).
double pair_residual(const Draws& d, const Eigen::VectorXd& fv, std::size_t k) {
  const auto a = static_cast<Eigen::Index>(2 * k);
  return (d.y[a] - fv[a]) - (d.y[a + 1] - fv[a + 1]);
}

} // namespace

NoiseSpec parse_noise(const std::string& name, double scale) {
  if (name == "none") return {NoiseKind::None, 0.0};
  if (name == "gaussian") return {NoiseKind::Gaussian, scale};
  if (name == "uniform") return {NoiseKind::Uniform, scale};
  if (name == "student_t") return {NoiseKind::StudentT, scale};
  throw InvalidArgument("unknown noise '" + name +
                        "' (expected none, gaussian, uniform or student_t)");
}

std::string noise_name(const NoiseSpec& noise) {
  switch (noise.kind) {
  case NoiseKind::None: return "none";
  case NoiseKind::Gaussian: return "gaussian";
  case NoiseKind::Uniform: return "uniform";
  case NoiseKind::StudentT: return "student_t";
  }
  return "unknown";
}

DistributionModel::DistributionModel(XLaw x_law, RegressionSpec regression, NoiseSpec noise)
    : x_law_(x_law), regression_(std::move(regression)), noise_(noise),
      noise_name_(mee::noise_name(noise)) {
  if (x_law_.dim < 1) throw InvalidArgument("X dimension must be >= 1");
  if (!(x_law_.low < x_law_.high)) throw InvalidArgument("X support must have low < high");
  if (regression_.name != "affine" && regression_.name != "sin" && regression_.name != "zero") {
    throw InvalidArgument("unknown regression function '" + regression_.name +
                          "' (expected affine, sin or zero)");
  }
  switch (noise_.kind) {
  case NoiseKind::None: break;
  case NoiseKind::Gaussian:
  case NoiseKind::Uniform:
    if (!(noise_.scale >= 0.0) || !std::isfinite(noise_.scale)) {
      throw InvalidArgument("noise scale must be finite and non-negative");
    }
    break;
  case NoiseKind::StudentT:
    // The recorded moment index nu - 0.1 must exceed 2.
    if (!(noise_.scale > 2.1) || !std::isfinite(noise_.scale)) {
      throw InvalidArgument("Student-t noise needs nu > 2.1 so that E|Y|^q < inf for some q > 2");
    }
    break;
  }

  if (regression_.name == "affine") {
    const double reach = std::max(std::abs(x_law_.low), std::abs(x_law_.high));
    regression_sup_ = std::abs(regression_.intercept) +
                      std::abs(regression_.slope) * reach * static_cast<double>(x_law_.dim);
  } else if (regression_.name == "sin") {
    double sup = 0.0;
    for (int k = 0; k <= 10000; ++k) {
      const double x = x_law_.low + (x_law_.high - x_law_.low) * k / 10000.0;
      sup = std::max(sup, std::abs(std::sin(std::numbers::pi * x)));
    }
    regression_sup_ = std::abs(regression_.amplitude) * sup;
  }
}

double DistributionModel::regression(std::span<const double> x) const {
  if (x.size() != x_law_.dim) throw DimensionMismatch("input point has the wrong dimension");
  if (regression_.name == "affine") {
    double s = 0.0;
    for (double v : x) s += v;
    return regression_.intercept + regression_.slope * s;
  }
  if (regression_.name == "sin") return regression_.amplitude * std::sin(std::numbers::pi * x[0]);
  return 0.0;
}

RealFunction DistributionModel::regression_function() const {
  return [model = *this](std::span<const double> x) { return model.regression(x); };
}

double DistributionModel::moment_q() const {
  if (noise_.kind == NoiseKind::StudentT) return noise_.scale - 0.1;
  return std::numeric_limits<double>::infinity();
}

double DistributionModel::q_star() const { return std::min(moment_q() - 2.0, 2.0); }

std::optional<double> DistributionModel::bound_M() const {
  if (noise_.kind == NoiseKind::None) return regression_sup_;
  if (noise_.kind == NoiseKind::Uniform) return regression_sup_ + noise_.scale;
  return std::nullopt;
}

double DistributionModel::noise_variance() const {
  switch (noise_.kind) {
  case NoiseKind::None: return 0.0;
  case NoiseKind::Gaussian: return noise_.scale * noise_.scale;
  case NoiseKind::Uniform: return noise_.scale * noise_.scale / 3.0;
  case NoiseKind::StudentT: return noise_.scale / (noise_.scale - 2.0);
  }
  return 0.0;
}

void DistributionModel::draw_x(Rng& rng, std::span<double> x) const {
  for (double& v : x) v = x_law_.low + (x_law_.high - x_law_.low) * uniform01(rng);
}

double DistributionModel::draw_noise(Rng& rng) const {
  switch (noise_.kind) {
  case NoiseKind::None: return 0.0;
  case NoiseKind::Gaussian: return noise_.scale * standard_normal(rng);
  case NoiseKind::Uniform: return noise_.scale * (2.0 * uniform01(rng) - 1.0);
  case NoiseKind::StudentT: {
    boost::random::student_t_distribution<double> t(noise_.scale);
    return t(rng);
  }
  }
  return 0.0;
}

Draws draw_observations(const DistributionModel& model, std::size_t n, std::uint64_t seed) {
  const std::size_t dim = model.x_law().dim;
  Draws d;
  d.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  d.y.resize(static_cast<Eigen::Index>(n));
  d.f_rho.resize(static_cast<Eigen::Index>(n));
  for (std::size_t start = 0, block = 0; start < n; start += kBlockSize, ++block) {
    Rng rng(child_seed(seed, {block}));
    const std::size_t end = std::min(n, start + kBlockSize);
    for (std::size_t i = start; i < end; ++i) {
      std::span<double> xi(d.x.data() + i * dim, dim);
      model.draw_x(rng, xi);
      const auto k = static_cast<Eigen::Index>(i);
      d.f_rho[k] = model.regression(xi);
      d.y[k] = d.f_rho[k] + model.draw_noise(rng);
    }
  }
  return d;
}

Sample generate_sample(const DistributionModel& model, std::size_t m, std::uint64_t seed) {
  require_count(m, 1, "sample size");
  Draws d = draw_observations(model, m, seed);
  return Sample{std::move(d.x), std::move(d.y)};
}

MCEstimate mean_estimate(std::span<const double> terms) {
  MCEstimate est;
  est.pair_count = terms.size();
  if (terms.empty()) return est;
  long double sum = 0.0L;
  for (double t : terms) sum += t;
  const long double n = static_cast<long double>(terms.size());
  const long double mean = sum / n;
  long double ss = 0.0L;
  for (double t : terms) {
    const long double dev = t - mean;
    ss += dev * dev;
  }
  est.value = static_cast<double>(mean);
  est.std_error = terms.size() > 1 ? static_cast<double>(std::sqrt(ss / (n - 1.0L) / n)) : 0.0;
  return est;
}

RealFunction as_function(const Predictor& p, const HypothesisSpace& space, bool include_offset) {
  Predictor q = p;
  if (!include_offset) q.offset = 0.0;
  return [q, space](std::span<const double> x) { return evaluate(q, space, x); };
}

MCEstimate c_rho(const DistributionModel& model, std::size_t n_mc, std::uint64_t seed) {
  require_count(n_mc, 1000, "n_mc");
  const Draws d = draw_observations(model, n_mc, seed);
  std::vector<double> terms(n_mc);
  for (std::size_t i = 0; i < n_mc; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double e = d.y[k] - d.f_rho[k];
    terms[i] = e * e;
  }
  return mean_estimate(terms);
}

MCEstimate variance_distance(const RealFunction& f, const DistributionModel& model,
                             std::size_t n_mc, std::uint64_t seed) {
  require_count(n_mc, 1000, "n_mc");
  const Draws d = draw_observations(model, n_mc, seed);
  const Eigen::VectorXd fv = values_at(f, d);
  std::vector<double> g(n_mc);
  long double sum = 0.0L;
  for (std::size_t i = 0; i < n_mc; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    g[i] = fv[k] - d.f_rho[k];
    sum += g[i];
  }
  const double mean = static_cast<double>(sum / static_cast<long double>(n_mc));
  // Var = mean((g - gbar)^2) up to an O(1/n) bias; its error is that of a mean.
  for (double& v : g) v = (v - mean) * (v - mean);
  return mean_estimate(g);
}

MCEstimate variance_distance(const Predictor& f, const HypothesisSpace& space,
                             const DistributionModel& model, std::size_t n_mc, std::uint64_t seed) {
  return variance_distance(as_function(f, space), model, n_mc, seed);
}

MCEstimate information_error(const RealFunction& f, const DistributionModel& model, double h,
                             const WindowingFunction& w, std::size_t n_pairs, std::uint64_t seed) {
  require_count(n_pairs, 1000, "n_pairs");
  require_bandwidth(h);
  const Draws d = draw_observations(model, 2 * n_pairs, seed);
  const Eigen::VectorXd fv = values_at(f, d);
  const double h2 = h * h;
  std::vector<double> terms(n_pairs);
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const double r = pair_residual(d, fv, k);
    terms[k] = -h2 * w.eval(r * r / (2.0 * h2));
  }
  return mean_estimate(terms);
}

MCEstimate information_error(const Predictor& f, const HypothesisSpace& space,
                             const DistributionModel& model, double h, const WindowingFunction& w,
                             std::size_t n_pairs, std::uint64_t seed) {
  return information_error(as_function(f, space, false), model, h, w, n_pairs, seed);
}

MCEstimate information_error_all_pairs(const RealFunction& f, const DistributionModel& model,
                                       double h, const WindowingFunction& w, std::size_t n_obs,
                                       std::uint64_t seed) {
  require_count(n_obs, 2, "n_obs");
  require_bandwidth(h);
  const Draws d = draw_observations(model, n_obs, seed);
  const Eigen::VectorXd fv = values_at(f, d);
  Eigen::VectorXd e = d.y - fv;
  const double h2 = h * h;
  std::vector<long double> row(n_obs, 0.0L);
  long double total = 0.0L;
  for (std::size_t i = 0; i < n_obs; ++i) {
    for (std::size_t j = i + 1; j < n_obs; ++j) {
      const double r = e[static_cast<Eigen::Index>(i)] - e[static_cast<Eigen::Index>(j)];
      const double k = -h2 * w.eval(r * r / (2.0 * h2));
      row[i] += k;
      row[j] += k;
      total += k;
    }
  }
  const long double n = static_cast<long double>(n_obs);
  MCEstimate est;
  est.value = static_cast<double>(2.0L * total / (n * (n - 1.0L)));
  est.pair_count = n_obs * (n_obs - 1) / 2;
  // First-order (Hajek projection) standard error: 2 sd(row means) / sqrt(n).
  std::vector<double> psi(n_obs);
  for (std::size_t i = 0; i < n_obs; ++i) psi[i] = static_cast<double>(row[i] / (n - 1.0L));
  est.std_error = 2.0 * mean_estimate(psi).std_error;
  return est;
}

MCEstimate sym_ls_error(const RealFunction& f, const DistributionModel& model,
                        std::size_t n_pairs, std::uint64_t seed) {
  require_count(n_pairs, 1000, "n_pairs");
  const Draws d = draw_observations(model, 2 * n_pairs, seed);
  const Eigen::VectorXd fv = values_at(f, d);
  std::vector<double> terms(n_pairs);
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const double r = pair_residual(d, fv, k);
    terms[k] = r * r;
  }
  return mean_estimate(terms);
}

MCEstimate sym_ls_error(const Predictor& f, const HypothesisSpace& space,
                        const DistributionModel& model, std::size_t n_pairs, std::uint64_t seed) {
  return sym_ls_error(as_function(f, space, false), model, n_pairs, seed);
}

MCEstimate information_residual(const RealFunction& f, const Draws& draws, double h,
                                const WindowingFunction& w) {
  require_bandwidth(h);
  const std::size_t n_pairs = draws.pair_count();
  require_count(n_pairs, 1, "pair count");
  const Eigen::VectorXd fv = values_at(f, draws);
  const double h2 = h * h;
  std::vector<double> terms(n_pairs);
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const double r = pair_residual(draws, fv, k);
    terms[k] = -h2 * w.taylor_remainder(r * r / (2.0 * h2));
  }
  return mean_estimate(terms);
}

MCEstimate excess_information_error(const RealFunction& f, const DistributionModel& model,
                                    double h, const WindowingFunction& w, std::size_t n_pairs,
                                    std::uint64_t seed) {
  require_count(n_pairs, 1000, "n_pairs");
  require_bandwidth(h);
  const Draws d = draw_observations(model, 2 * n_pairs, seed);
  std::vector<double> terms(n_pairs);
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const Observation z{d.point(2 * k), d.y[static_cast<Eigen::Index>(2 * k)]};
    const Observation zp{d.point(2 * k + 1), d.y[static_cast<Eigen::Index>(2 * k + 1)]};
    terms[k] = u_kernel(f, z, zp, model, h, w);
  }
  return mean_estimate(terms);
}

double u_kernel(const RealFunction& f, const Observation& z, const Observation& zp,
                const DistributionModel& model, double h, const WindowingFunction& w) {
  const double h2 = h * h;
  const double rf = (z.y - f(z.x)) - (zp.y - f(zp.x));
  const double rr = (z.y - model.regression(z.x)) - (zp.y - model.regression(zp.x));
  return -h2 * w.eval(rf * rf / (2.0 * h2)) + h2 * w.eval(rr * rr / (2.0 * h2));
}

double u_statistic(const RealFunction& f, const Sample& sample, const DistributionModel& model,
                   double h, const WindowingFunction& w) {
  const std::size_t m = sample.size();
  require_count(m, 2, "sample size");
  require_bandwidth(h);
  std::vector<double> ef(m);
  std::vector<double> er(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double y = sample.y[static_cast<Eigen::Index>(i)];
    ef[i] = y - f(sample.point(i));
    er[i] = y - model.regression(sample.point(i));
  }
  const double h2 = h * h;
  long double acc = 0.0L;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      const double rf = ef[i] - ef[j];
      const double rr = er[i] - er[j];
      acc += -h2 * w.eval(rf * rf / (2.0 * h2)) + h2 * w.eval(rr * rr / (2.0 * h2));
    }
  }
  const long double md = static_cast<long double>(m);
  return static_cast<double>(acc / (md * (md - 1.0L)));
}

PairObjectiveBase::PairObjectiveBase(const HypothesisSpace& space, const Draws& draws) {
  const std::size_t n = draws.pair_count();
  require_count(n, 1, "pair count");
  const auto d = static_cast<Eigen::Index>(space.dimension());
  dphi_.resize(static_cast<Eigen::Index>(n), d);
  dy_.resize(static_cast<Eigen::Index>(n));
  dnoise_.resize(static_cast<Eigen::Index>(n));
  std::vector<double> a(space.dimension());
  std::vector<double> b(space.dimension());
  for (std::size_t k = 0; k < n; ++k) {
    space.dictionary().features_at(draws.point(2 * k), a);
    space.dictionary().features_at(draws.point(2 * k + 1), b);
    const auto row = static_cast<Eigen::Index>(k);
    for (Eigen::Index j = 0; j < d; ++j) {
      dphi_(row, j) = a[static_cast<std::size_t>(j)] - b[static_cast<std::size_t>(j)];
    }
    const auto i0 = static_cast<Eigen::Index>(2 * k);
    dy_[row] = draws.y[i0] - draws.y[i0 + 1];
    dnoise_[row] = (draws.y[i0] - draws.f_rho[i0]) - (draws.y[i0 + 1] - draws.f_rho[i0 + 1]);
  }
}

std::vector<double> PairVarianceObjective::terms(const Eigen::VectorXd& c) const {
  const Eigen::VectorXd r = pair_residuals(c);
  std::vector<double> t(static_cast<std::size_t>(r.size()));
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    t[static_cast<std::size_t>(k)] = 0.5 * (r[k] * r[k] - dnoise_[k] * dnoise_[k]);
  }
  return t;
}

double PairVarianceObjective::value(const Eigen::VectorXd& c) const {
  return mean_estimate(terms(c)).value;
}

double PairVarianceObjective::value_and_gradient(const Eigen::VectorXd& c,
                                                 Eigen::VectorXd& grad) const {
  const Eigen::VectorXd r = pair_residuals(c);
  const double n = static_cast<double>(r.size());
  grad = -(dphi_.transpose() * r) / n;
  return value(c);
}

PairInformationObjective::PairInformationObjective(const HypothesisSpace& space,
                                                   const Draws& draws, double h,
                                                   WindowingFunction w)
    : PairObjectiveBase(space, draws), h_(h), w_(std::move(w)) {
  require_bandwidth(h_);
}

std::vector<double> PairInformationObjective::terms(const Eigen::VectorXd& c) const {
  const Eigen::VectorXd r = pair_residuals(c);
  const double h2 = h_ * h_;
  std::vector<double> t(static_cast<std::size_t>(r.size()));
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    t[static_cast<std::size_t>(k)] = -h2 * w_.eval_minus_zero(r[k] * r[k] / (2.0 * h2));
  }
  return t;
}

double PairInformationObjective::value(const Eigen::VectorXd& c) const {
  return mean_estimate(terms(c)).value;
}

double PairInformationObjective::value_and_gradient(const Eigen::VectorXd& c,
                                                    Eigen::VectorXd& grad) const {
  const Eigen::VectorXd r = pair_residuals(c);
  const double h2 = h_ * h_;
  Eigen::VectorXd weight(r.size());
  long double acc = 0.0L;
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    const double t = r[k] * r[k] / (2.0 * h2);
    acc += -h2 * w_.eval_minus_zero(t);
    weight[k] = w_.deriv1(t) * r[k];
  }
  const double n = static_cast<double>(r.size());
  grad = (dphi_.transpose() * weight) / n;
  return static_cast<double>(acc / static_cast<long double>(r.size()));
}

ApproxTargets approx_error_and_targets(const HypothesisSpace& space, const Draws& draws, double h,
                                       const WindowingFunction& w,
                                       const OptimizerSettings& settings) {
  const PairVarianceObjective variance(space, draws);
  const PairInformationObjective information(space, draws, h, w);
  const MultiStartResult approx = multistart_minimize(variance, space.radius(), settings);
  const MultiStartResult target = multistart_minimize(information, space.radius(), settings);

  ApproxTargets out;
  out.f_approx = Predictor{approx.best.point, 0.0};
  out.f_H = Predictor{target.best.point, 0.0};
  out.approx_error = mean_estimate(variance.terms(out.f_approx.coefficients));
  out.variance_at_f_H = mean_estimate(variance.terms(out.f_H.coefficients));
  out.information_at_f_approx = information.value(out.f_approx.coefficients);
  out.information_at_f_H = information.value(out.f_H.coefficients);
  return out;
}

ApproxTargets approx_error_and_targets(const HypothesisSpace& space, const DistributionModel& model,
                                       double h, const WindowingFunction& w, std::size_t n_pairs,
                                       std::uint64_t seed, const OptimizerSettings& settings) {
  require_count(n_pairs, 1000, "n_pairs");
  if (space.dictionary().input_dim() != model.x_law().dim) {
    throw DimensionMismatch("hypothesis space and model disagree on the input dimension");
  }
  const Draws d = draw_observations(model, 2 * n_pairs, seed);
  return approx_error_and_targets(space, d, h, w, settings);
}

double gaussian_information_error(double h, double sigma) {
  require_bandwidth(h);
  return -h * h * h / std::sqrt(h * h + 2.0 * sigma * sigma);
}

double gaussian_information_residual(double h, double sigma) {
  require_bandwidth(h);
  // R = h^2 (1 - s/2 - (1 + s)^(-1/2)) with s = 2 sigma^2 / h^2. For small s the
  // binomial series avoids the cancellation between the three terms.
  const double s = 2.0 * sigma * sigma / (h * h);
  if (s >= 0.1) return h * h * (1.0 - 0.5 * s) - h * h / std::sqrt(1.0 + s);
  double term = -0.5 * s;  // binom(-1/2, 1) s
  double sum = 0.0;
  for (int k = 2; k < 40; ++k) {
    term *= -(2.0 * k - 1.0) / (2.0 * k) * s;
    sum -= term;
  }
  return h * h * sum;
}

} // namespace mee
