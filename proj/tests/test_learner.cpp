#include <doctest.h>

#include "fd_oracle.hpp"
#include "mee/errors.hpp"
#include "mee/learner.hpp"
#include "mee/random.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace mee;
using mee::testing::central_difference;
using mee::testing::relative_error;

namespace {

constexpr double kTwoPointRenyi = 0.219070196379838628544234766377;

HypothesisSpace poly_space(int degree, double radius, bool constant = true) {
  DictionarySpec spec{"polynomial", degree};
  spec.include_constant = constant;
  return HypothesisSpace(make_dictionary(spec), radius);
}

Sample make_sample(std::vector<double> xs, std::vector<double> ys) {
  Sample s;
  s.x = Eigen::Map<InputMatrix>(xs.data(), static_cast<Eigen::Index>(xs.size()), 1);
  s.y = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  return s;
}

Sample random_sample(std::mt19937_64& rng, std::size_t m, const std::function<double(double)>& f,
                     double noise) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> xs(m);
  std::vector<double> ys(m);
  for (std::size_t i = 0; i < m; ++i) {
    xs[i] = u(rng);
    ys[i] = f(xs[i]) + noise * n(rng);
  }
  return make_sample(xs, ys);
}

// Variance of f - g over a uniform grid on [-1, 1]: distance modulo constants.
double grid_variance(const std::function<double(double)>& diff) {
  const int n = 2001;
  double s = 0.0;
  double s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double v = diff(-1.0 + 2.0 * k / (n - 1));
    s += v;
    s2 += v * v;
  }
  return s2 / n - (s / n) * (s / n);
}

} // namespace

TEST_CASE("residuals") {
  const auto space = poly_space(1, 10.0);
  const Sample s = make_sample({0.0, 1.0}, {1.0, 3.0});
  const ErrorVector zero = residuals(Predictor::zero(2), space, s);
  CHECK(zero[0] == 1.0);
  CHECK(zero[1] == 3.0);
  const ErrorVector e = residuals(Predictor{Eigen::Vector2d(0.0, 2.0), 0.0}, space, s);
  CHECK(e[0] == 1.0);
  CHECK(e[1] == 1.0);
  const ErrorVector fit = residuals(Predictor{Eigen::Vector2d(1.0, 2.0), 0.0}, space, s);
  CHECK(fit[0] == 0.0);
  CHECK(fit[1] == 0.0);
  CHECK_THROWS_AS(residuals(Predictor::zero(3), space, s), DimensionMismatch);
}

TEST_CASE("MEE objective values") {
  const auto w = make_gaussian_window();
  const auto space = poly_space(1, 10.0);
  SUBCASE("exact fit gives zero") {
    const MEEProblem prob(make_sample({0.0, 0.5, 1.0}, {1.0, 2.0, 3.0}), space, 1.0, w);
    CHECK(mee_objective(Predictor{Eigen::Vector2d(1.0, 2.0), 0.0}, prob) == 0.0);
  }
  SUBCASE("two points, f = 0") {
    const MEEProblem prob(make_sample({0.0, 1.0}, {0.0, 1.0}), space, 1.0, w);
    CHECK(mee_objective(Predictor::zero(2), prob) == doctest::Approx(kTwoPointRenyi).epsilon(1e-14));
  }
  SUBCASE("equals the empirical Renyi entropy of the residuals") {
    std::mt19937_64 rng(1);
    const MEEProblem prob(random_sample(rng, 20, [](double x) { return x * x; }, 0.3), space, 1.7, w);
    const Predictor p{Eigen::Vector2d(0.2, -0.9), 0.0};
    CHECK(mee_objective(p, prob) == empirical_renyi2(residuals(p, space, prob.sample()), 1.7, w));
  }
}

TEST_CASE("MEE objective is exactly invariant to the offset") {
  std::mt19937_64 rng(2);
  const auto w = make_gaussian_window();
  const auto space = poly_space(2, 5.0);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int rep = 0; rep < 30; ++rep) {
    const MEEProblem prob(random_sample(rng, 15, [](double x) { return std::sin(3 * x); }, 0.5),
                          space, 1.0 + rep % 4, w);
    Predictor p{Eigen::Vector3d(n(rng), n(rng), n(rng)) * 0.3, 0.0};
    const double base = mee_objective(p, prob);
    p.offset = n(rng);
    CHECK(mee_objective(p, prob) == base);
  }
}

TEST_CASE("MEE gradient: special cases") {
  const auto w = make_gaussian_window();
  const auto space = poly_space(2, 5.0);
  SUBCASE("all residuals equal gives a zero gradient") {
    const MEEProblem prob(make_sample({-0.5, 0.0, 0.7}, {1.0, 1.0, 1.0}), space, 1.0, w);
    const Eigen::VectorXd g = mee_gradient(Predictor::zero(3), prob);
    CHECK(g.norm() == 0.0);
  }
  SUBCASE("component along the constant feature vanishes") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 20; ++rep) {
      const MEEProblem prob(random_sample(rng, 25, [](double x) { return 2 * x; }, 1.0), space, 1.5, w);
      const Eigen::VectorXd g = mee_gradient(Predictor{Eigen::Vector3d(0.1, -0.4, 0.8), 0.0}, prob);
      CHECK(std::abs(g[0]) <= 1e-12);
    }
  }
}

TEST_CASE("MEE gradient matches central differences") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n(0.0, 1.0);
  for (const char* wname : {"gaussian", "rational"}) {
    const auto w = window_by_name(wname);
    for (int rep = 0; rep < 25; ++rep) {
      const auto space = poly_space(2, 10.0);
      const MEEProblem prob(random_sample(rng, 8, [](double x) { return x - x * x; }, 0.7), space,
                            1.0 + 0.5 * (rep % 3), w);
      const Eigen::VectorXd c = Eigen::Vector3d(n(rng), n(rng), n(rng));
      const Eigen::VectorXd g = mee_gradient(Predictor{c, 0.0}, prob);
      const Eigen::VectorXd fd = central_difference(
          [&](const Eigen::VectorXd& v) { return mee_objective(Predictor{v, 0.0}, prob); }, c);
      CHECK(relative_error(g, fd) <= 1e-5);
    }
  }
}

TEST_CASE("minimize_mee recovers a noiseless target up to a constant") {
  const auto w = make_gaussian_window();
  const auto space = poly_space(2, 5.0);
  const auto target = [](double x) { return 0.3 + 1.2 * x - 0.8 * x * x; };
  std::mt19937_64 rng(17);
  const MEEProblem prob(random_sample(rng, 40, target, 0.0), space, 1.0, w);
  const Predictor star{Eigen::Vector3d(0.3, 1.2, -0.8), 0.0};
  const FitResult fit = minimize_mee(prob);
  CHECK(fit.objective <= mee_objective(star, prob) + 1e-8);
  CHECK(fit.predictor.offset == 0.0);
  CHECK(fit.predictor.coefficients.norm() <= space.radius() + 1e-9);
  const double var = grid_variance([&](double x) {
    return evaluate(fit.predictor, space, std::vector<double>{x}) - target(x);
  });
  CHECK(var <= 1e-3);

  SUBCASE("mean-adjusted estimator recovers the target itself") {
    const Predictor adj = adjusted_estimator(fit.predictor, space, prob.sample());
    double sq = 0.0;
    for (int k = 0; k <= 200; ++k) {
      const double x = -1.0 + k / 100.0;
      const double d = evaluate(adj, space, std::vector<double>{x}) - target(x);
      sq += d * d;
    }
    CHECK(std::sqrt(sq / 201.0) <= 1e-3);
  }
}

TEST_CASE("minimize_mee matches a brute-force grid in one dimension") {
  // Grid oracle: 1e5 points over [-R, R] for the single coefficient.
  const auto w = make_gaussian_window();
  const double radius = 3.0;
  const auto space = poly_space(1, radius, false);
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 3; ++rep) {
    const MEEProblem prob(random_sample(rng, 30, [](double x) { return 1.7 * x + 0.4 * std::sin(5 * x); }, 0.5),
                          space, 1.0 + rep, w);
    double grid_best = HUGE_VAL;
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXd c(1);
      c[0] = -radius + 2.0 * radius * k / (n - 1);
      grid_best = std::min(grid_best, mee_objective(Predictor{c, 0.0}, prob));
    }
    const FitResult fit = minimize_mee(prob);
    CHECK(std::abs(fit.objective - grid_best) <= 1e-6);
    CHECK(fit.objective <= grid_best + 1e-12);
  }
}

TEST_CASE("flat objective resolves to the origin") {
  // Two identical observations: every pair difference is zero for all c.
  const auto w = make_gaussian_window();
  const MEEProblem prob(make_sample({0.4, 0.4}, {1.0, 1.0}), poly_space(2, 2.0), 1.0, w);
  const FitResult fit = minimize_mee(prob);
  CHECK(fit.restart == 0);
  CHECK(fit.predictor.coefficients.norm() == 0.0);
}

TEST_CASE("projected descent never accepts an increase and stays in the ball") {
  std::mt19937_64 rng(29);
  const auto w = make_gaussian_window();
  const auto space = poly_space(3, 0.8);
  for (int rep = 0; rep < 10; ++rep) {
    const MEEProblem prob(random_sample(rng, 30, [](double x) { return 3 * x * x * x; }, 0.2), space, 1.0, w);
    const MeeObjective obj(prob);
    OptimizerSettings settings;
    settings.seed = static_cast<std::uint64_t>(rep);
    for (const auto& start : restart_points(4, space.radius(), settings)) {
      const DescentResult res = projected_descent(obj, start, space.radius(), settings);
      double prev = obj.value(project_to_ball(start, space.radius()));
      for (double v : res.accepted_values) {
        CHECK(v <= prev);
        prev = v;
      }
      CHECK(res.point.norm() <= space.radius() + 1e-9);
    }
  }
}

TEST_CASE("minimize_mee is deterministic for a fixed seed") {
  std::mt19937_64 rng(31);
  const auto w = make_rational_window();
  const MEEProblem prob(random_sample(rng, 25, [](double x) { return std::cos(2 * x); }, 0.4),
                        poly_space(3, 2.0), 1.2, w);
  OptimizerSettings settings;
  settings.seed = 99;
  const FitResult a = minimize_mee(prob, settings);
  const FitResult b = minimize_mee(prob, settings);
  CHECK(a.predictor.coefficients == b.predictor.coefficients);
  CHECK(a.objective == b.objective);
  CHECK(a.restart == b.restart);
}

TEST_CASE("optimizer settings are validated") {
  OptimizerSettings s;
  s.shrink = 1.0;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s = {};
  s.restarts = 0;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s = {};
  s.gradient_tolerance = 0.0;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
}

TEST_CASE("MEE problem validation") {
  const auto w = make_gaussian_window();
  CHECK_THROWS_AS(MEEProblem(make_sample({0.0}, {1.0}), poly_space(1, 1.0), 1.0, w), InvalidArgument);
  CHECK_THROWS_AS(MEEProblem(make_sample({0.0, 1.0}, {1.0, 2.0}), poly_space(1, 1.0), 0.0, w),
                  InvalidArgument);
}

TEST_CASE("least squares baseline") {
  SUBCASE("line through two points") {
    const Predictor p = least_squares_baseline(make_sample({0.0, 1.0}, {0.0, 1.0}), poly_space(1, 10.0));
    CHECK(p.coefficients[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.coefficients[1] == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("constant dictionary gives the sample mean") {
    DictionarySpec spec{"polynomial", 0};
    const HypothesisSpace space(make_dictionary(spec), 100.0);
    const Predictor p = least_squares_baseline(make_sample({0.1, 0.5, 0.9}, {1.0, 2.0, 6.0}), space);
    CHECK(p.coefficients[0] == doctest::Approx(3.0).epsilon(1e-14));
  }
  SUBCASE("noiseless realizable data is fitted exactly") {
    std::mt19937_64 rng(37);
    const auto space = poly_space(2, 10.0);
    const Sample s = random_sample(rng, 50, [](double x) { return 1 - x + 2 * x * x; }, 0.0);
    const Predictor p = least_squares_baseline(s, space);
    const ErrorVector e = residuals(p, space, s);
    double rss = 0.0;
    for (double v : e.values()) rss += v * v;
    CHECK(rss <= 1e-16 * s.size());
  }
  SUBCASE("constrained optimum sits on the sphere with an outward gradient") {
    std::mt19937_64 rng(41);
    const auto space = poly_space(1, 0.5);
    const Sample s = random_sample(rng, 50, [](double x) { return 2 + 3 * x; }, 0.1);
    const Predictor p = least_squares_baseline(s, space);
    CHECK(p.coefficients.norm() == doctest::Approx(0.5).epsilon(1e-9));
    // KKT: -grad is parallel to c.
    const Eigen::MatrixXd phi = space.design_matrix(s.x);
    const Eigen::VectorXd grad = -2.0 / 50.0 * phi.transpose() * (s.y - phi * p.coefficients);
    const double cosine = -grad.dot(p.coefficients) / (grad.norm() * p.coefficients.norm());
    CHECK(cosine == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("output projection") {
  CHECK(project_output(5.0, 4) == 2.0);
  CHECK(project_output(-1.0, 4) == -1.0);
  CHECK(project_output(-9.0, 4) == -2.0);
  CHECK_THROWS_AS(project_output(1.0, 0), InvalidArgument);
  CHECK(clipped_count(make_sample({0.0, 0.0, 0.0, 0.0}, {5.0, -1.0, -9.0, 2.0})) == 2);
}

TEST_CASE("mean adjustment") {
  const auto space = poly_space(1, 10.0);
  SUBCASE("zero predictor with bounded outputs") {
    const Sample s = make_sample({0.0, 0.3, 0.6}, {1.0, -0.5, 1.25});
    CHECK(mean_adjustment(Predictor::zero(2), space, s) == doctest::Approx(-0.5833333333333334));
  }
  SUBCASE("perfect fit") {
    const Sample s = make_sample({0.0, 0.5}, {1.0, 1.375});
    CHECK(mean_adjustment(Predictor{Eigen::Vector2d(1.0, 0.75), 0.0}, space, s) == 0.0);
  }
  SUBCASE("clipped outputs: f = 1, y = (10, 10), m = 2") {
    const Sample s = make_sample({0.0, 1.0}, {10.0, 10.0});
    CHECK(mean_adjustment(Predictor{Eigen::Vector2d(1.0, 0.0), 0.0}, space, s) ==
          doctest::Approx(-0.41421356237309504880).epsilon(1e-15));
  }
}

TEST_CASE("adjusted estimator") {
  const auto space = poly_space(1, 10.0);
  const Sample s = make_sample({0.0, 0.5, 1.0}, {0.2, 1.1, 2.3});
  SUBCASE("no adjustment needed") {
    const Sample fit = make_sample({0.0, 0.5, 1.0}, {1.0, 1.25, 1.5});
    const Predictor fz{Eigen::Vector2d(1.0, 0.5), 0.0};
    const Predictor adj = adjusted_estimator(fz, space, fit);
    CHECK(adj.offset == 0.0);
    CHECK(adj.coefficients == fz.coefficients);
  }
  SUBCASE("a constant shift is cancelled") {
    const Predictor fz{Eigen::Vector2d(0.1, 2.0), 0.0};
    const Predictor shifted{Eigen::Vector2d(0.1 + 3.7, 2.0), 0.0};
    const Predictor a = adjusted_estimator(fz, space, s);
    const Predictor b = adjusted_estimator(shifted, space, s);
    CHECK(a.coefficients == fz.coefficients);
    for (double x : {-1.0, 0.0, 0.25, 1.0}) {
      const std::vector<double> pt{x};
      CHECK(std::abs(evaluate(a, space, pt) - evaluate(b, space, pt)) <= 1e-10);
    }
  }
}
