#include "barronforge/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "barronforge/metrics.hpp"
#include "barronforge/network.hpp"
#include "barronforge/rng.hpp"

namespace barronforge {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

Eigen::MatrixXd unit_grid(int n) {
  Eigen::MatrixXd t(1, n);
  for (int i = 0; i < n; ++i) t(0, i) = static_cast<double>(i) / (n - 1);
  return t;
}

ReluNetwork gamma_tail(double r, double fault) {
  ReluNetwork net = build_gamma_tail(r);
  if (fault == 0.0) return net;
  std::vector<Layer> layers = net.layers();
  layers.front().bias[0] += fault;
  return ReluNetwork(net.input_dim(), std::move(layers));
}

CheckResult check_beta() {
  const auto start = Clock::now();
  const ReluNetwork beta = build_beta();
  const Eigen::MatrixXd t = unit_grid(10000);
  const Eigen::MatrixXd out = beta.eval_batch(t);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < t.cols(); ++i) {
    const double x = t(0, i);
    const double formula = std::max(0.0, 2.0 * x) - 2.0 * std::max(0.0, 2.0 * x - 1.0);
    worst = std::max(worst, std::abs(out(0, i) - formula));
  }
  return {"beta exactness", worst, 1e-12, worst <= 1e-12, elapsed(start)};
}

CheckResult check_gamma(double fault) {
  const auto start = Clock::now();
  const Eigen::MatrixXd t = unit_grid(2000);
  double worst = 0.0;
  for (int j = 0; j < 200; ++j) {
    const double r = -0.5 + static_cast<double>(j) / 199.0;
    const Eigen::MatrixXd out = gamma_tail(r, fault).eval_batch(t);
    for (Eigen::Index i = 0; i < t.cols(); ++i) worst = std::max(worst, std::abs(out(0, i) - gamma_kernel(t(0, i), r)));
  }
  return {"gamma exactness", worst, 1e-12, worst <= 1e-12, elapsed(start)};
}

CheckResult check_composition(const VerifyOptions& opt) {
  const auto start = Clock::now();
  RandomStream rng = RandomStream(opt.seed).split(0xc0);
  const Eigen::MatrixXd t = unit_grid(10000);
  double worst = 0.0;
  for (int L = 1; L <= opt.composition_max_L; ++L) {
    const ReluNetwork chain = build_beta_chain(L);
    const double n = std::ldexp(1.0, L);
    for (int k = 0; k < opt.composition_r_draws; ++k) {
      const double r = rng.uniform(-0.5, 0.5);
      const Eigen::MatrixXd out = compose(gamma_tail(r, opt.gamma_bias_fault), chain).eval_batch(t);
      for (Eigen::Index i = 0; i < t.cols(); ++i) {
        const double nt = n * t(0, i);
        worst = std::max(worst, std::abs(out(0, i) - gamma_kernel(nt - std::floor(nt), r)));
      }
    }
  }
  return {"beta-chain composition law", worst, 1e-9, worst <= 1e-9, elapsed(start)};
}

CheckResult check_cos_lemma(const VerifyOptions& opt) {
  const auto start = Clock::now();
  std::vector<int> ns;
  for (int n = 1; n <= opt.cos_lemma_max_n; ++n) ns.push_back(n);
  std::vector<double> ts;
  for (int i = 0; i < opt.cos_lemma_t_points; ++i) ts.push_back((i + 0.5) / opt.cos_lemma_t_points);
  const CosLemmaResult res = verify_cos_lemma(ns, ts, opt.cos_lemma_r_points);
  return {"cosine integral identity", res.max_abs_deviation, 1e-8, res.max_abs_deviation <= 1e-8, elapsed(start)};
}

CheckResult check_log_submultiplicative() {
  const auto start = Clock::now();
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < 100; ++j) {
      const double c = 100.0 * i / 99.0;
      const double t = 100.0 * j / 99.0;
      worst = std::max(worst, std::log2(2.0 + c * t) - std::log2(2.0 + c) * std::log2(2.0 + t));
    }
  }
  return {"log2(2+ct) <= log2(2+c) log2(2+t)", worst, 0.0, worst <= 0.0, elapsed(start)};
}

}  // namespace

std::vector<CheckResult> run_verify_suite(const VerifyOptions& options) {
  std::vector<CheckResult> out;
  out.push_back(check_beta());
  out.push_back(check_gamma(options.gamma_bias_fault));
  out.push_back(check_composition(options));
  out.push_back(check_cos_lemma(options));
  out.push_back(check_log_submultiplicative());
  return out;
}

}  // namespace barronforge
