#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "barronforge/constructor.hpp"
#include "barronforge/metrics.hpp"

using namespace barronforge;

namespace {

constexpr double kPi = std::numbers::pi;

SpectralTarget lattice_mode(std::vector<double> xi, double a) {
  FourierMode m;
  m.frequency = Eigen::Map<Eigen::VectorXd>(xi.data(), static_cast<Eigen::Index>(xi.size()));
  m.amplitude = a;
  m.phase = 0.0;
  const int d = static_cast<int>(xi.size());
  return SpectralTarget(d, {m}, Box::unit(d));
}

ValueFn zero_fn() {
  return [](const Eigen::MatrixXd& p) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(p.cols()); };
}

}  // namespace

TEST_CASE("quadrature spec validation and nodes") {
  CHECK_THROWS_AS(QuadratureSpec::grid(15).validate(1), std::invalid_argument);
  CHECK_THROWS_AS(QuadratureSpec::grid(4096).validate(4), std::invalid_argument);
  CHECK_NOTHROW(QuadratureSpec::monte_carlo(16, 0).validate(20));

  const Box box{Eigen::Vector2d(0.0, 1.0), Eigen::Vector2d(2.0, 1.5)};
  const Eigen::MatrixXd g = quadrature_points(box, QuadratureSpec::grid(1000));
  CHECK(g.cols() == 31 * 31);
  CHECK(g(0, 0) == doctest::Approx(1.0 / 31));
  CHECK(g(1, 0) == doctest::Approx(1.0 + 0.25 / 31));
  CHECK(quadrature_points(Box::unit(3), QuadratureSpec::grid(1000)).cols() == 1000);

  const Eigen::MatrixXd a = quadrature_points(box, QuadratureSpec::monte_carlo(500, 4));
  const Eigen::MatrixXd b = quadrature_points(box, QuadratureSpec::monte_carlo(500, 4));
  const Eigen::MatrixXd c = quadrature_points(box, QuadratureSpec::monte_carlo(500, 5));
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a.row(0).minCoeff() >= 0.0);
  CHECK(a.row(0).maxCoeff() < 2.0);
  CHECK(a.row(1).minCoeff() >= 1.0);
  CHECK(a.row(1).maxCoeff() < 1.5);
}

TEST_CASE("identical functions have zero error") {
  const auto f = synth_target(3, 16, 3.0, 1);
  const ValueFn same = [&](const Eigen::MatrixXd& p) -> Eigen::VectorXd { return f.evaluate_batch(p); };
  CHECK(l2_error(f, same, QuadratureSpec::grid(4096)).estimate == 0.0);
  const ValueGradFn same_grad = [&](const Eigen::MatrixXd& p, Eigen::VectorXd& v, Eigen::MatrixXd& g) {
    v = f.evaluate_batch(p);
    g = f.gradient_batch(p);
  };
  CHECK(h1_error(f, same_grad, QuadratureSpec::monte_carlo(4096, 2)).estimate == 0.0);
}

TEST_CASE("single cosine against zero") {
  const auto f = lattice_mode({3.0, -2.0}, 0.8);
  const ErrorEstimate grid = l2_error(f, zero_fn(), QuadratureSpec::grid(4096));
  CHECK(grid.estimate == doctest::Approx(0.8 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(grid.std_err == 0.0);

  const auto g = lattice_mode({1.0, 0.0, 2.0, -1.0, 1.0}, 0.8);
  const ErrorEstimate mc = l2_error(g, zero_fn(), QuadratureSpec::monte_carlo(100000, 7));
  CHECK(mc.std_err > 0.0);
  CHECK(std::abs(mc.estimate - 0.8 / std::sqrt(2.0)) <= 4.0 * mc.std_err);
}

TEST_CASE("non-unit domains scale with the volume") {
  FourierMode m;
  m.frequency = Eigen::Vector2d(1.0, 0.0);
  m.amplitude = 1.0;
  m.phase = 0.0;
  const SpectralTarget f(2, {m}, Box{Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 3)});
  // |cos|^2 averages to 1/2 over whole periods, volume 6.
  CHECK(l2_error(f, zero_fn(), QuadratureSpec::grid(4096)).estimate == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));
}

TEST_CASE("independent Monte Carlo seeds agree") {
  const auto f = synth_target(6, 32, 3.0, 9);
  const ErrorEstimate a = l2_error(f, zero_fn(), QuadratureSpec::monte_carlo(100000, 1));
  const ErrorEstimate b = l2_error(f, zero_fn(), QuadratureSpec::monte_carlo(100000, 2));
  CHECK(std::abs(a.estimate - b.estimate) <= 3.0 * std::hypot(a.std_err, b.std_err));
}

TEST_CASE("doubling the Monte Carlo sample stays within three standard errors") {
  const auto f = synth_target(4, 16, 3.0, 3);
  int agree = 0;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    const ErrorEstimate a = l2_error(f, zero_fn(), QuadratureSpec::monte_carlo(1024, 2 * rep));
    const ErrorEstimate b = l2_error(f, zero_fn(), QuadratureSpec::monte_carlo(2048, 2 * rep + 1));
    agree += std::abs(a.estimate - b.estimate) < 3.0 * std::hypot(a.std_err, b.std_err);
  }
  CHECK(agree >= 95);
}

TEST_CASE("error is symmetric in the sign of the residual") {
  const auto f = synth_target(2, 8, 3.0, 5);
  const auto g = synth_target(2, 8, 3.0, 6);
  const ValueFn plus = [&](const Eigen::MatrixXd& p) -> Eigen::VectorXd { return f.evaluate_batch(p) + g.evaluate_batch(p); };
  const ValueFn minus = [&](const Eigen::MatrixXd& p) -> Eigen::VectorXd { return f.evaluate_batch(p) - g.evaluate_batch(p); };
  const QuadratureSpec q = QuadratureSpec::grid(2500);
  CHECK(l2_error(f, plus, q).estimate == doctest::Approx(l2_error(f, minus, q).estimate).epsilon(1e-13));
}

TEST_CASE("H1 error") {
  SUBCASE("constant target against zero") {
    const auto f = lattice_mode({0.0, 0.0, 0.0}, 1.7);
    const ValueGradFn zero = [](const Eigen::MatrixXd& p, Eigen::VectorXd& v, Eigen::MatrixXd& g) {
      v = Eigen::VectorXd::Zero(p.cols());
      g = Eigen::MatrixXd::Zero(p.rows(), p.cols());
    };
    CHECK(h1_error(f, zero, QuadratureSpec::grid(1000)).estimate == doctest::Approx(1.7).epsilon(1e-14));
  }
  SUBCASE("dominates the L2 error") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto f = synth_target(3, 16, 3.0, seed);
      RandomStream rng(seed);
      const auto net = assemble_network(f, sample_pairs(f, 8, Variant::L2, rng), Variant::L2);
      for (QuadratureSpec q : {QuadratureSpec::grid(1000), QuadratureSpec::monte_carlo(2000, seed)}) {
        CHECK(h1_error(f, net, q).estimate >= l2_error(f, net, q).estimate);
      }
    }
  }
  SUBCASE("dimension mismatch") {
    const auto f = synth_target(3, 4, 3.0, 0);
    CHECK_THROWS_AS(l2_error(f, identity_network(2), QuadratureSpec::grid(64)), std::invalid_argument);
    CHECK_THROWS_AS(h1_error(f, identity_network(3), QuadratureSpec::grid(64)), std::invalid_argument);
  }
}

TEST_CASE("pairwise summation") {
  std::vector<double> v(1000);
  for (int i = 0; i < 1000; ++i) v[i] = i + 1;
  CHECK(pairwise_sum(v) == 500500.0);
  CHECK(pairwise_sum(std::span<const double>()) == 0.0);
  std::vector<double> tiny(1 << 20, 0.1);
  CHECK(std::abs(pairwise_sum(tiny) - 0.1 * (1 << 20)) <= 1e-9);
}

TEST_CASE("cosine integral identity") {
  // t -> 0+: -2 pi^2 * 2 * integral_0^{1/2} r cos(2 pi r) dr = 1.
  CHECK(cos_lemma_integral(1e-12, 100000) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(cos_lemma_integral(0.25, 100000)) <= 1e-12);
  CHECK(cos_lemma_integral(0.5, 100000) == doctest::Approx(-1.0).epsilon(1e-10));

  SUBCASE("full grid") {
    std::vector<int> ns;
    for (int n = 1; n <= 64; ++n) ns.push_back(n);
    std::vector<double> ts;
    for (int i = 0; i < 512; ++i) ts.push_back((i + 0.5) / 512);
    const CosLemmaResult res = verify_cos_lemma(ns, ts, 100000);
    CHECK(res.max_abs_deviation <= 1e-8);
    CHECK(res.worst_n >= 1);
  }
  SUBCASE("Simpson convergence order") {
    for (double t : {0.1234, 0.31, 0.77}) {
      const double exact = std::cos(2.0 * kPi * t);
      // Below ~100 nodes the per-piece interval counts are too coarse to double cleanly.
      const double e1 = std::abs(cos_lemma_integral(t, 128) - exact);
      const double e2 = std::abs(cos_lemma_integral(t, 256) - exact);
      const double e3 = std::abs(cos_lemma_integral(t, 512) - exact);
      CHECK(e1 / e2 >= 8.0);
      CHECK(e2 / e3 >= 8.0);
    }
  }
  SUBCASE("invalid grids") {
    CHECK_THROWS_AS(verify_cos_lemma({}, {0.5}, 1000), std::invalid_argument);
    CHECK_THROWS_AS(verify_cos_lemma({0}, {0.5}, 1000), std::invalid_argument);
    CHECK_THROWS_AS(verify_cos_lemma({1}, {1.0}, 1000), std::invalid_argument);
    CHECK_THROWS_AS(verify_cos_lemma({1}, {0.5}, 999), std::invalid_argument);
  }
}

TEST_CASE("log-log slope fit") {
  const SlopeFit exact = slope_fit({{1, 1.0}, {4, 0.5}, {16, 0.25}});
  CHECK(exact.slope == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(exact.r2 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(slope_fit({{1, 3.0}, {4, 3.0}, {16, 3.0}}).slope == doctest::Approx(0.0));

  RandomStream rng(21);
  std::vector<std::pair<double, double>> pts;
  for (int m = 16; m <= 4096; m *= 2) pts.emplace_back(m, std::pow(m, -0.5) * (1.0 + 0.05 * rng.normal()));
  const SlopeFit noisy = slope_fit(pts);
  CHECK(noisy.slope >= -0.55);
  CHECK(noisy.slope <= -0.45);

  CHECK_THROWS_AS(slope_fit({{1, 1.0}, {2, 0.0}, {4, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(slope_fit({{1, 1.0}, {2, -1.0}, {4, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(slope_fit({{1, 1.0}, {2, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(slope_fit({{2, 1.0}, {2, 0.5}, {2, 0.3}}), std::invalid_argument);
}
