#include <doctest.h>

#include "mee/errors.hpp"
#include "mee/oracle.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>

using namespace mee;

namespace {

DistributionModel affine_model(NoiseSpec noise) {
  return DistributionModel(XLaw{}, RegressionSpec{}, noise);
}

HypothesisSpace poly_space(int degree, double radius, bool constant = true, int size = 0) {
  DictionarySpec spec{"polynomial", degree};
  spec.include_constant = constant;
  spec.size = size;
  return HypothesisSpace(make_dictionary(spec), radius);
}

bool within(const MCEstimate& a, double expected, double k = 3.0) {
  return std::abs(a.value - expected) <= k * a.std_error;
}

bool agree(const MCEstimate& a, const MCEstimate& b, double k = 3.0) {
  return std::abs(a.value - b.value) <= k * std::hypot(a.std_error, b.std_error);
}

// Independent quadrature oracle: E[-h^2 G(r^2 / (2h^2))] with r ~ N(0, 2 sigma^2).
double quadrature_information_error(double h, double sigma) {
  const double s = std::sqrt(2.0) * sigma;
  auto integrand = [&](double r) {
    const double density = std::exp(-r * r / (2 * s * s)) / (s * std::sqrt(2 * std::numbers::pi));
    return -h * h * std::exp(-r * r / (2 * h * h)) * density;
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 15,
      1e-13);
}

} // namespace

TEST_CASE("noise parsing") {
  CHECK(parse_noise("gaussian", 0.5).kind == NoiseKind::Gaussian);
  CHECK(parse_noise("none", 3.0).scale == 0.0);
  CHECK(noise_name(parse_noise("student_t", 5.0)) == "student_t");
  CHECK_THROWS_AS(parse_noise("cauchy", 1.0), InvalidArgument);
  CHECK_THROWS_AS(affine_model({NoiseKind::StudentT, 2.0}), InvalidArgument);
  CHECK_THROWS_AS(affine_model({NoiseKind::Gaussian, -1.0}), InvalidArgument);
  CHECK_THROWS_AS(DistributionModel(XLaw{1, 1.0, 0.0}, RegressionSpec{}, {}), InvalidArgument);
  CHECK_THROWS_AS(DistributionModel(XLaw{}, RegressionSpec{"cubic"}, {}), InvalidArgument);
}

TEST_CASE("model moments and bounds") {
  const auto t5 = affine_model({NoiseKind::StudentT, 5.0});
  CHECK(t5.moment_q() == doctest::Approx(4.9));
  CHECK(t5.q_star() == 2.0);
  CHECK_FALSE(t5.bound_M().has_value());
  CHECK(t5.noise_variance() == doctest::Approx(5.0 / 3.0));
  const auto t3 = affine_model({NoiseKind::StudentT, 3.0});
  CHECK(t3.q_star() == doctest::Approx(0.9));
  const auto uni = affine_model({NoiseKind::Uniform, 0.5});
  REQUIRE(uni.bound_M().has_value());
  CHECK(*uni.bound_M() == doctest::Approx(2.0));
  CHECK(std::isinf(uni.moment_q()));
  CHECK(uni.q_star() == 2.0);
  CHECK(uni.noise_variance() == doctest::Approx(0.25 / 3.0));
  const DistributionModel sinm(XLaw{1, 0.0, 1.0}, RegressionSpec{"sin"}, {});
  CHECK(sinm.regression_sup() == doctest::Approx(1.0));
  CHECK(*sinm.bound_M() == doctest::Approx(1.0));
}

TEST_CASE("draws are reproducible and block-stable") {
  const auto model = affine_model({NoiseKind::Gaussian, 1.0});
  const Draws a = draw_observations(model, 70000, 5);
  const Draws b = draw_observations(model, 70000, 5);
  CHECK(a.y == b.y);
  const Draws prefix = draw_observations(model, 1000, 5);
  CHECK(prefix.y == a.y.head(1000));
  const Draws other = draw_observations(model, 1000, 6);
  CHECK(other.y != prefix.y);
  for (std::size_t i = 0; i < 1000; ++i) {
    CHECK(a.x(static_cast<Eigen::Index>(i), 0) >= -1.0);
    CHECK(a.x(static_cast<Eigen::Index>(i), 0) < 1.0);
  }
}

TEST_CASE("Student-t noise moments") {
  const auto model = DistributionModel(XLaw{}, RegressionSpec{"zero"}, {NoiseKind::StudentT, 5.0});
  const Draws d = draw_observations(model, 1000000, 11);
  const MCEstimate mean = mean_estimate(std::span<const double>(d.y.data(), d.size()));
  CHECK(std::abs(mean.value) <= 4.0 * mean.std_error);
  const MCEstimate var = c_rho(model, 1000000, 11);
  CHECK(std::abs(var.value - 5.0 / 3.0) <= 0.05 * 5.0 / 3.0);
}

TEST_CASE("mean_estimate") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const MCEstimate e = mean_estimate(v);
  CHECK(e.value == 2.5);
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(e.pair_count == 4);
}

TEST_CASE("noise variance and variance distance") {
  const auto g = affine_model({NoiseKind::Gaussian, 0.5});
  CHECK(within(c_rho(g, 200000, 1), 0.25));
  // f = 0 against f_rho = 0.5 + x with X ~ U[-1, 1]: Var = 1/3.
  const RealFunction zero = [](std::span<const double>) { return 0.0; };
  CHECK(within(variance_distance(zero, g, 200000, 2), 1.0 / 3.0, 4.0));
  CHECK(variance_distance(g.regression_function(), g, 1000, 3).value == 0.0);
  CHECK_THROWS_AS(c_rho(g, 10, 1), InvalidArgument);
}

TEST_CASE("information error") {
  const auto w = make_gaussian_window();
  SUBCASE("noiseless, f = f_rho gives -h^2 G(0)") {
    const auto model = affine_model({});
    const MCEstimate e = information_error(model.regression_function(), model, 3.0, w, 1000, 1);
    CHECK(e.value == -9.0);
    CHECK(e.std_error == 0.0);
  }
  SUBCASE("Gaussian noise matches the closed form") {
    const auto model = affine_model({NoiseKind::Gaussian, 0.5});
    for (double h : {0.5, 2.0, 8.0}) {
      const MCEstimate e = information_error(model.regression_function(), model, h, w, 100000, 7);
      CHECK(within(e, gaussian_information_error(h, 0.5)));
    }
  }
  SUBCASE("offset does not change the estimate") {
    const auto model = affine_model({NoiseKind::Uniform, 1.0});
    const auto space = poly_space(2, 5.0);
    Predictor p{Eigen::Vector3d(0.1, 0.7, -0.3), 0.0};
    const double base = information_error(p, space, model, 1.5, w, 5000, 3).value;
    p.offset = 12.25;
    CHECK(information_error(p, space, model, 1.5, w, 5000, 3).value == base);
  }
  SUBCASE("all-pairs and disjoint-pair routes agree") {
    const auto model = affine_model({NoiseKind::Gaussian, 1.0});
    const RealFunction f = [](std::span<const double> x) { return x[0] * x[0]; };
    const MCEstimate disjoint = information_error(f, model, 1.0, w, 20000, 21);
    const MCEstimate all = information_error_all_pairs(f, model, 1.0, w, 3000, 22);
    CHECK(agree(disjoint, all));
  }
}

TEST_CASE("closed form agrees with quadrature") {
  for (double sigma : {0.2, 0.5, 1.5}) {
    for (double h : {0.3, 1.0, 4.0, 50.0}) {
      const double q = quadrature_information_error(h, sigma);
      CHECK(std::abs(gaussian_information_error(h, sigma) - q) <= 1e-8 * std::abs(q));
    }
  }
}

TEST_CASE("closed-form residual") {
  // Large h: h^2 R(h) -> -3/2 sigma^4.
  const double sigma = 0.5;
  const double h = 100.0;
  CHECK(std::abs(h * h * gaussian_information_residual(h, sigma) + 1.5 * std::pow(sigma, 4)) <=
        0.01 * std::pow(sigma, 4));
  // Agrees with the direct difference where that is well conditioned.
  for (double hh : {0.5, 1.0, 2.0}) {
    const double direct = gaussian_information_error(hh, sigma) + hh * hh - sigma * sigma;
    CHECK(gaussian_information_residual(hh, sigma) == doctest::Approx(direct).epsilon(1e-12));
  }
  // Continuity across the switch between the series and the direct form.
  const double hs = 2.0 * sigma / std::sqrt(0.1);
  CHECK(gaussian_information_residual(hs * (1 + 1e-12), sigma) ==
        doctest::Approx(gaussian_information_residual(hs * (1 - 1e-12), sigma)).epsilon(1e-10));
}

TEST_CASE("Monte-Carlo residual on common draws") {
  const auto w = make_gaussian_window();
  const auto model = affine_model({NoiseKind::Gaussian, 0.5});
  const Draws d = draw_observations(model, 400000, 9);
  for (double h : {1.0, 4.0}) {
    const MCEstimate r = information_residual(model.regression_function(), d, h, w);
    CHECK(within(r, gaussian_information_residual(h, 0.5)));
  }
}

TEST_CASE("symmetric least squares error") {
  const auto model = affine_model({NoiseKind::Gaussian, 0.5});
  CHECK(within(sym_ls_error(model.regression_function(), model, 100000, 4), 0.5));
  // E^sls(f) = 2 C_rho + 2 Var[f - f_rho], with independent seeds per term.
  const RealFunction f = [](std::span<const double> x) { return std::sin(2 * x[0]); };
  const MCEstimate sls = sym_ls_error(f, model, 100000, 41);
  const MCEstimate c = c_rho(model, 100000, 42);
  const MCEstimate v = variance_distance(f, model, 100000, 43);
  const double rhs = 2 * c.value + 2 * v.value;
  const double se = std::sqrt(sls.std_error * sls.std_error + 4 * c.std_error * c.std_error +
                              4 * v.std_error * v.std_error);
  CHECK(std::abs(sls.value - rhs) <= 3 * se);
}

TEST_CASE("U kernel and U statistic") {
  const auto w = make_rational_window();
  const auto model = affine_model({NoiseKind::Uniform, 1.0});
  const Sample s = generate_sample(model, 30, 5);
  const RealFunction f = [](std::span<const double> x) { return 2.0 * x[0]; };
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const Observation z{s.point(i), s.y[static_cast<Eigen::Index>(i)]};
    const Observation zp{s.point(i + 1), s.y[static_cast<Eigen::Index>(i + 1)]};
    CHECK(u_kernel(model.regression_function(), z, zp, model, 1.3, w) == 0.0);
    CHECK(u_kernel(f, z, z, model, 1.3, w) == 0.0);
    CHECK(u_kernel(f, z, zp, model, 1.3, w) == u_kernel(f, zp, z, model, 1.3, w));
  }
  CHECK(u_statistic(model.regression_function(), s, model, 1.3, w) == 0.0);
  CHECK_THROWS_AS(u_statistic(f, generate_sample(model, 1, 5), model, 1.0, w), InvalidArgument);
}

TEST_CASE("U statistic is unbiased for the excess information error") {
  const auto w = make_gaussian_window();
  const auto model = affine_model({NoiseKind::Gaussian, 0.5});
  const RealFunction f = [](std::span<const double> x) { return 0.5 - x[0]; };
  std::vector<double> v;
  for (std::uint64_t t = 0; t < 200; ++t) v.push_back(u_statistic(f, generate_sample(model, 50, 100 + t), model, 2.0, w));
  const MCEstimate mean_v = mean_estimate(v);
  const MCEstimate excess = excess_information_error(f, model, 2.0, w, 100000, 77);
  CHECK(excess.value > 0.0);
  CHECK(agree(mean_v, excess));
}

TEST_CASE("approximation targets: realizable case") {
  const auto w = make_gaussian_window();
  const auto model = affine_model({NoiseKind::Gaussian, 0.3});
  const auto space = poly_space(1, 5.0);
  const ApproxTargets t = approx_error_and_targets(space, model, 4.0, w, 20000, 3);
  CHECK(t.approx_error.value <= 1e-4);
  CHECK(t.f_approx.coefficients[1] == doctest::Approx(1.0).epsilon(0.02));
  CHECK(t.variance_at_f_H.value >= t.approx_error.value);
  CHECK(t.information_at_f_H <= t.information_at_f_approx);
}

TEST_CASE("approximation targets match a one-dimensional grid") {
  // f_rho = sin(pi x) on [0, 1] against the single feature cos(pi x).
  const auto w = make_gaussian_window();
  const DistributionModel model(XLaw{1, 0.0, 1.0}, RegressionSpec{"sin"}, {NoiseKind::Gaussian, 0.2});
  DictionarySpec spec{"trig", 1};
  spec.include_constant = false;
  spec.size = 1;
  spec.domain_low = 0.0;
  spec.domain_high = 1.0;
  const double radius = 2.0;
  const HypothesisSpace space(make_dictionary(spec), radius);
  const Draws d = draw_observations(model, 20000, 8);
  const double h = 2.0;
  const ApproxTargets t = approx_error_and_targets(space, d, h, w);
  const PairVarianceObjective var(space, d);
  const PairInformationObjective info(space, d, h, w);
  double best_var = HUGE_VAL;
  double best_info = HUGE_VAL;
  const int n = 20001;
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd c(1);
    c[0] = -radius + 2.0 * radius * k / (n - 1);
    best_var = std::min(best_var, var.value(c));
    best_info = std::min(best_info, info.value(c));
  }
  CHECK(std::abs(t.approx_error.value - best_var) <= 1e-6);
  CHECK(t.approx_error.value <= best_var + 1e-12);
  CHECK(std::abs(t.information_at_f_H - best_info) <= 1e-6);
  CHECK(t.information_at_f_H <= best_info + 1e-12);
  CHECK(t.approx_error.value > 0.01);
}

TEST_CASE("pair objective gradients") {
  const auto model = affine_model({NoiseKind::Gaussian, 0.4});
  const auto space = poly_space(2, 5.0);
  const Draws d = draw_observations(model, 2000, 12);
  const PairVarianceObjective var(space, d);
  const PairInformationObjective info(space, d, 1.5, make_rational_window());
  const Eigen::VectorXd c = Eigen::Vector3d(0.2, -0.5, 0.9);
  for (const SmoothObjective* obj : {static_cast<const SmoothObjective*>(&var),
                                     static_cast<const SmoothObjective*>(&info)}) {
    Eigen::VectorXd g;
    const double v = obj->value_and_gradient(c, g);
    CHECK(v == doctest::Approx(obj->value(c)).epsilon(1e-14));
    for (Eigen::Index k = 0; k < 3; ++k) {
      Eigen::VectorXd cp = c;
      Eigen::VectorXd cm = c;
      cp[k] += 1e-5;
      cm[k] -= 1e-5;
      const double fd = (obj->value(cp) - obj->value(cm)) / 2e-5;
      CHECK(g[k] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}
