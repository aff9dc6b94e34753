#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "barronforge/constructor.hpp"
#include "barronforge/network.hpp"
#include "barronforge/rng.hpp"

using namespace barronforge;

namespace {

constexpr double kPi = std::numbers::pi;

double relu(double v) { return v > 0.0 ? v : 0.0; }
double beta_formula(double t) { return relu(2.0 * t) - 2.0 * relu(2.0 * t - 1.0); }

// The three-branch definition, written out separately from the library's kernel.
double gamma_piecewise(double t, double r) {
  if (t > 0.5) return gamma_piecewise(1.0 - t, r);
  if (t <= std::abs(r)) return std::max(0.0, r);
  return t - std::max(0.0, -r);
}

double frac(double v) { return v - std::floor(v); }

double eval1(const ReluNetwork& net, double t) { return net.eval(Eigen::VectorXd::Constant(1, t))[0]; }

SpectralTarget random_target(int d, int n, std::uint64_t seed, double max_freq) {
  RandomStream rng(seed);
  std::vector<FourierMode> modes;
  for (int j = 0; j < n; ++j) {
    FourierMode m;
    m.frequency = Eigen::VectorXd(d);
    for (int i = 0; i < d; ++i) m.frequency[i] = std::round(rng.uniform(-max_freq, max_freq) * 4.0) / 4.0;
    m.amplitude = rng.uniform(0.1, 1.0);
    m.phase = rng.uniform();
    modes.push_back(m);
  }
  return SpectralTarget(d, std::move(modes), Box::unit(d));
}

std::vector<ReluNetwork> random_subnets(const SpectralTarget& f, int m, RandomStream& rng) {
  std::vector<ReluNetwork> out;
  for (const auto& pair : sample_pairs(f, m, Variant::L2, rng)) {
    out.push_back(build_subnetwork(f, make_subnetwork_spec(f, pair, Variant::L2)));
  }
  return out;
}

}  // namespace

TEST_CASE("identity and affine networks") {
  const auto id = identity_network(3);
  const Eigen::Vector3d x(0.3, -2.0, 5.5);
  CHECK(id.eval(x) == x);
  CHECK(id.depth() == 1);
  CHECK(id.width() == 0);

  Eigen::MatrixXd w(2, 3);
  w << 1, 2, 3, -4, 5, 0.5;
  const auto aff = affine_network(w, Eigen::Vector2d(1.0, -1.0));
  for (const auto& p : {x, Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(-1, 1, 2)}) CHECK(aff.jacobian(p) == w);
  CHECK(aff.param_count() == 8);
}

TEST_CASE("layer validation") {
  std::vector<Layer> bad_chain{Layer{Eigen::MatrixXd::Ones(2, 3), Eigen::VectorXd::Zero(2), Activation::Relu},
                               Layer{Eigen::MatrixXd::Ones(1, 3), Eigen::VectorXd::Zero(1), Activation::None}};
  CHECK_THROWS_AS(ReluNetwork(3, bad_chain), std::invalid_argument);
  std::vector<Layer> nan_layer{Layer{Eigen::MatrixXd::Constant(1, 1, NAN), Eigen::VectorXd::Zero(1), Activation::None}};
  CHECK_THROWS_AS(ReluNetwork(1, nan_layer), std::invalid_argument);
  std::vector<Layer> relu_out{Layer{Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1), Activation::Relu}};
  CHECK_THROWS_AS(ReluNetwork(1, relu_out), std::invalid_argument);
  CHECK_THROWS_AS(ReluNetwork(1, {}), std::invalid_argument);
  CHECK_THROWS_AS(build_beta().eval(Eigen::Vector2d(0, 0)), std::invalid_argument);
  CHECK_THROWS_AS(build_beta().jacobian(Eigen::Vector2d(0, 0)), std::invalid_argument);
}

TEST_CASE("beta primitive") {
  const auto beta = build_beta();
  CHECK(beta.depth() == 2);
  CHECK(beta.width() == 2);
  CHECK(eval1(beta, 0.0) == 0.0);
  CHECK(eval1(beta, 0.25) == 0.5);
  CHECK(eval1(beta, 0.5) == 1.0);
  CHECK(eval1(beta, 0.75) == 0.5);
  CHECK(beta.jacobian(Eigen::VectorXd::Constant(1, 0.25))(0, 0) == 2.0);
  CHECK(beta.jacobian(Eigen::VectorXd::Constant(1, 0.75))(0, 0) == -2.0);

  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double t = i / 9999.0;
    worst = std::max(worst, std::abs(eval1(beta, t) - beta_formula(t)));
  }
  CHECK(worst == 0.0);
}

TEST_CASE("gamma tail primitive") {
  CHECK(eval1(build_gamma_tail(0.1), 0.05) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(eval1(build_gamma_tail(-0.1), 0.3) == doctest::Approx(0.2).epsilon(1e-15));

  RandomStream rng(3);
  for (int k = 0; k < 100; ++k) {
    const double r = rng.uniform(-0.5, 0.5);
    const auto g = build_gamma_tail(r);
    CHECK(std::abs(eval1(g, 0.8) - eval1(g, 0.2)) <= 1e-15);
  }

  double worst = 0.0;
  Eigen::MatrixXd t(1, 2000);
  for (int i = 0; i < 2000; ++i) t(0, i) = i / 1999.0;
  for (int j = 0; j < 200; ++j) {
    const double r = -0.5 + j / 199.0;
    const auto g = build_gamma_tail(r);
    CHECK(g.width() <= 3);
    const Eigen::MatrixXd out = g.eval_batch(t);
    for (int i = 0; i < 2000; ++i) {
      worst = std::max(worst, std::abs(out(0, i) - gamma_piecewise(t(0, i), r)));
      worst = std::max(worst, std::abs(gamma_kernel(t(0, i), r) - gamma_piecewise(t(0, i), r)));
    }
  }
  CHECK(worst <= 1e-12);

  CHECK_THROWS_AS(build_gamma_tail(0.5000001), std::invalid_argument);
  CHECK_THROWS_AS(build_gamma_tail(NAN), std::invalid_argument);
}

TEST_CASE("composition") {
  SUBCASE("identity is neutral") {
    const auto f = random_target(3, 4, 2, 3.0);
    RandomStream rng(4);
    const auto net = merge(random_subnets(f, 3, rng), 3, 2.0 * kPi * kPi * norm(f, NormKind::b0()));
    const auto left = compose(identity_network(1), net);
    const auto right = compose(net, identity_network(3));
    for (int k = 0; k < 50; ++k) {
      Eigen::Vector3d x(rng.uniform(), rng.uniform(), rng.uniform());
      CHECK(std::abs(left.eval(x)[0] - net.eval(x)[0]) <= 1e-12);
      CHECK(std::abs(right.eval(x)[0] - net.eval(x)[0]) <= 1e-12);
    }
  }
  SUBCASE("beta twice against the mod-1 oracle") {
    const auto bb = compose(build_beta(), build_beta());
    const double ts[] = {0.1, 0.3, 0.6, 0.9};
    const double expected[] = {0.4, 0.8, 0.4, 0.4};
    for (int i = 0; i < 4; ++i) {
      const double u = frac(2.0 * ts[i]);
      const double oracle = u <= 0.5 ? 2.0 * u : 2.0 - 2.0 * u;
      CHECK(oracle == doctest::Approx(expected[i]).epsilon(1e-14));
      CHECK(eval1(bb, ts[i]) == doctest::Approx(oracle).epsilon(1e-14));
    }
    CHECK(bb.depth() == 3);
    CHECK(bb.width() == 2);
  }
  SUBCASE("gamma tail after a beta chain") {
    RandomStream rng(8);
    Eigen::MatrixXd t(1, 10000);
    for (int i = 0; i < 10000; ++i) t(0, i) = i / 9999.0;
    double worst = 0.0;
    for (int L = 1; L <= 10; ++L) {
      const auto chain = build_beta_chain(L);
      CHECK(chain.hidden_layers() == L);
      for (int k = 0; k < 100; ++k) {
        const double r = rng.uniform(-0.5, 0.5);
        const Eigen::MatrixXd out = compose(build_gamma_tail(r), chain).eval_batch(t);
        for (int i = 0; i < 10000; ++i) {
          worst = std::max(worst, std::abs(out(0, i) - gamma_piecewise(frac(std::ldexp(t(0, i), L)), r)));
        }
      }
    }
    CHECK(worst <= 1e-9);
  }
  CHECK_THROWS_AS(compose(build_beta(), identity_network(2)), std::invalid_argument);
  CHECK_THROWS_AS(build_beta_chain(0), std::invalid_argument);
}

TEST_CASE("frequency depth") {
  CHECK(frequency_depth(0.0) == 1);
  CHECK(frequency_depth(2.0) == 2);
  CHECK(frequency_depth(5.0) == 3);
  CHECK(frequency_depth(6.0) == 3);
  CHECK(frequency_depth(6.0000001) == 4);
  CHECK(frequency_depth(1022.0) == 10);
  for (double l1 = 0.0; l1 < 300.0; l1 += 0.25) CHECK(frequency_depth(l1) == static_cast<int>(std::ceil(std::log2(2.0 + l1))));
  CHECK_THROWS_AS(frequency_depth(-1.0), std::invalid_argument);
}

TEST_CASE("sub-network") {
  SUBCASE("zero frequency is constant") {
    FourierMode m;
    m.frequency = Eigen::Vector2d(0.0, 0.0);
    m.amplitude = 0.7;
    m.phase = 0.0;
    const SpectralTarget f(2, {m}, Box::unit(2));
    SubNetworkSpec spec = make_subnetwork_spec(f, SampledPair{0, 0.2}, Variant::L2);
    CHECK(spec.theta == 0.0);
    CHECK(spec.depth_L == 1);
    const auto net = build_subnetwork(f, spec);
    const double expected = -2.0 * kPi * kPi * 0.7 * std::cos(2.0 * kPi * 0.2) * gamma_piecewise(0.0, 0.2);
    RandomStream rng(1);
    for (int k = 0; k < 20; ++k) {
      CHECK(net.eval(Eigen::Vector2d(rng.uniform(), rng.uniform()))[0] == doctest::Approx(expected).epsilon(1e-14));
    }
  }
  SUBCASE("depth for |xi|_1 = 5") {
    FourierMode m;
    m.frequency = Eigen::Vector2d(2.0, -3.0);
    m.amplitude = 1.0;
    m.phase = 0.25;
    const SpectralTarget f(2, {m}, Box::unit(2));
    const SubNetworkSpec spec = make_subnetwork_spec(f, SampledPair{0, 0.0}, Variant::L2);
    CHECK(spec.depth_L == 3);
    const auto net = build_subnetwork(f, spec);
    CHECK(net.hidden_layers() == spec.depth_L + 1);
    CHECK(net.width() <= 3);
  }
  SUBCASE("direct formula oracle") {
    RandomStream rng(12);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const int d = 1 + static_cast<int>(rng.uniform() * 5);
      FourierMode m;
      m.frequency = Eigen::VectorXd(d);
      for (int i = 0; i < d; ++i) m.frequency[i] = std::round(rng.uniform(-20.0, 20.0) * 2.0) / 2.0;
      m.amplitude = rng.uniform(0.1, 2.0);
      m.phase = rng.uniform();
      FourierMode other = m;
      other.frequency *= 0.5;
      const SpectralTarget f(d, {m, other}, Box::unit(d));
      const double r = rng.uniform(-0.5, 0.5);
      const Variant v = k % 2 ? Variant::H1 : Variant::L2;
      const SubNetworkSpec spec = make_subnetwork_spec(f, SampledPair{0, r}, v);
      const auto net = build_subnetwork(f, spec);

      double l1 = 0.0, neg = 0.0;
      for (int i = 0; i < d; ++i) {
        l1 += std::abs(m.frequency[i]);
        if (m.frequency[i] < 0) neg -= m.frequency[i];
      }
      const double n = std::exp2(std::ceil(std::log2(2.0 + l1)));
      const double theta = m.phase + std::ceil(neg - m.phase);
      const double b0 = m.amplitude + other.amplitude;
      const double b1 = (1.0 + l1) * m.amplitude + (1.0 + 0.5 * l1) * other.amplitude;
      const double scale_norm = v == Variant::L2 ? b0 : b1 / (1.0 + l1);

      Eigen::VectorXd x(d);
      for (int i = 0; i < d; ++i) x[i] = rng.uniform();
      const double t = (m.frequency.dot(x) + theta) / n;
      const double direct = -2.0 * kPi * kPi * scale_norm * std::cos(2.0 * kPi * r) * gamma_piecewise(frac(n * t), r);
      worst = std::max(worst, std::abs(net.eval(x)[0] - direct));
    }
    CHECK(worst <= 1e-9);
  }
  SUBCASE("bookkeeping errors are caught") {
    FourierMode m;
    m.frequency = Eigen::Vector2d(-1.0, 2.0);
    m.amplitude = 1.0;
    m.phase = 0.0;
    const SpectralTarget f(2, {m}, Box::unit(2));
    SubNetworkSpec spec = make_subnetwork_spec(f, SampledPair{0, 0.1}, Variant::L2);
    CHECK(spec.theta == 1.0);
    SubNetworkSpec wrong = spec;
    wrong.theta = 0.0;
    CHECK_THROWS_AS(build_subnetwork(f, wrong), std::domain_error);
    wrong = spec;
    wrong.depth_L = 5;
    CHECK_THROWS_AS(build_subnetwork(f, wrong), std::invalid_argument);
    wrong = spec;
    wrong.r = 0.6;
    CHECK_THROWS_AS(build_subnetwork(f, wrong), std::invalid_argument);
    const SpectralTarget big(2, {m}, Box{Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 1)});
    CHECK_THROWS_AS(build_subnetwork(big, spec), std::invalid_argument);
  }
}

TEST_CASE("merge") {
  for (int d : {2, 8}) {
    const auto f = random_target(d, 6, 20 + d, 6.0);
    const double offset = 2.0 * kPi * kPi * norm(f, NormKind::b0());
    RandomStream rng(d);
    for (int m : {1, 8, 64}) {
      CAPTURE(d);
      CAPTURE(m);
      const auto subs = random_subnets(f, m, rng);
      const auto merged = merge(subs, d, offset);
      CHECK(merged.width() == d + 4);
      int hidden = 0;
      int depth = 0;
      for (const auto& s : subs) {
        hidden += s.hidden_layers();
        depth += s.depth();
      }
      CHECK(merged.hidden_layers() == hidden);
      CHECK(merged.depth() == depth - m + 1);

      Eigen::MatrixXd pts(d, 1000);
      for (int j = 0; j < 1000; ++j) {
        for (int i = 0; i < d; ++i) pts(i, j) = rng.uniform();
      }
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(1000);
      for (const auto& s : subs) mean += s.eval_batch(pts).row(0).transpose();
      mean /= m;
      const Eigen::VectorXd got = merged.eval_batch(pts).row(0).transpose();
      CHECK((got - mean).lpNorm<Eigen::Infinity>() <= (m == 1 ? 1e-12 : 1e-9));
    }
  }
}

TEST_CASE("merge preconditions") {
  const auto f = random_target(2, 3, 1, 2.0);
  RandomStream rng(2);
  const auto subs = random_subnets(f, 2, rng);
  CHECK_THROWS_AS(merge({}, 2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(merge(subs, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(merge(subs, 2, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(merge(subs, 2, 1.0, Box{Eigen::Vector2d(-1, 0), Eigen::Vector2d(1, 1)}), std::domain_error);
  CHECK_THROWS_AS(merge({identity_network(2)}, 2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(merge({affine_network(Eigen::MatrixXd::Ones(1, 2), Eigen::VectorXd::Zero(1))}, 2, 1.0),
                  std::invalid_argument);
}

TEST_CASE("parameter count grows linearly with the number of sub-networks") {
  const auto f = random_target(3, 1, 5, 2.0);
  const SubNetworkSpec spec = make_subnetwork_spec(f, SampledPair{0, 0.1}, Variant::L2);
  const auto sub = build_subnetwork(f, spec);
  auto count = [&](int m) { return static_cast<long>(merge(std::vector<ReluNetwork>(m, sub), 3, 10.0).param_count()); };
  const long W = 3 + 4;
  const long h = sub.hidden_layers();
  // Input layer (W x d + W) + output (W + 1) - one shared hidden block.
  const long baseline = (W * 3 + W) + (W + 1) - (W * W + W);
  for (int m : {1, 2, 5, 16}) {
    CHECK(count(2 * m) - count(m) == count(m) - baseline);
    CHECK(count(m) == baseline + m * h * (W * W + W));
  }
}

TEST_CASE("gradients of merged networks") {
  const auto f = random_target(4, 8, 31, 5.0);
  RandomStream rng(32);
  const auto net = merge(random_subnets(f, 16, rng), 4, 2.0 * kPi * kPi * norm(f, NormKind::b0()));
  const double h = 1e-6;
  int checked = 0;
  double worst = 0.0;
  while (checked < 50) {
    Eigen::VectorXd x(4);
    for (int i = 0; i < 4; ++i) x[i] = rng.uniform(0.01, 0.99);
    if (net.kink_distance(x) < 1e-4) continue;
    const Eigen::RowVectorXd g = net.jacobian(x).row(0);
    Eigen::RowVectorXd fd(4);
    for (int i = 0; i < 4; ++i) {
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd[i] = (net.eval(xp)[0] - net.eval(xm)[0]) / (2.0 * h);
    }
    worst = std::max(worst, (g - fd).lpNorm<Eigen::Infinity>() / std::max(1.0, g.lpNorm<Eigen::Infinity>()));

    Eigen::VectorXd v;
    Eigen::MatrixXd gb;
    net.eval_with_gradient_batch(x, v, gb);
    CHECK(std::abs(v[0] - net.eval(x)[0]) <= 1e-12);
    CHECK((gb.col(0).transpose() - g).norm() <= 1e-9);
    ++checked;
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("merged networks are continuous") {
  const auto f = random_target(2, 5, 41, 8.0);
  RandomStream rng(42);
  const auto net = merge(random_subnets(f, 8, rng), 2, 2.0 * kPi * kPi * norm(f, NormKind::b0()));
  const double delta = 1e-9;
  for (int k = 0; k < 2000; ++k) {
    Eigen::Vector2d x(rng.uniform(), rng.uniform());
    Eigen::Vector2d dir(rng.normal(), rng.normal());
    dir.normalize();
    const Eigen::Vector2d y = x + delta * dir;
    const double slope = std::max(net.jacobian(x).norm(), net.jacobian(y).norm());
    const double jump = std::abs(net.eval(y)[0] - net.eval(x)[0]);
    CHECK(jump <= slope * delta * (1.0 + 1e-6) + 1e-11);
    CHECK(std::isfinite(net.eval(x)[0]));
  }
}

TEST_CASE("output scaling and affine precomposition") {
  const auto beta = build_beta();
  const auto scaled = scale_output(beta, -3.0);
  const auto shifted = precompose_affine(beta, Eigen::MatrixXd::Constant(1, 1, 0.5), Eigen::VectorXd::Constant(1, 0.25));
  for (double t = 0.0; t <= 1.0; t += 0.01) {
    CHECK(eval1(scaled, t) == doctest::Approx(-3.0 * beta_formula(t)));
    CHECK(eval1(shifted, t) == doctest::Approx(beta_formula(0.5 * t + 0.25)));
  }
}
