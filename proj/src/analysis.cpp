#include "barronforge/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "barronforge/rng.hpp"

namespace barronforge {

namespace {

constexpr double kPi = std::numbers::pi;

/// log2(2^a + 2^b) without overflow.
double log2_add(double a, double b) {
  if (std::isinf(a) && a < 0) return b;
  if (std::isinf(b) && b < 0) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log2(1.0 + std::exp2(lo - hi));
}

/// Slope, intercept and residual sum of squares of y on x.
struct LineFit {
  double slope = 0.0;
  double ssr = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (my + fit.slope * (x[i] - mx));
    fit.ssr += r * r;
  }
  return fit;
}

Eigen::VectorXd l1_sphere_point(int d, double radius, RandomStream& rng) {
  Eigen::VectorXd xi(d);
  double total = 0.0;
  for (int i = 0; i < d; ++i) {
    xi[i] = -std::log1p(-rng.uniform());
    total += xi[i];
  }
  for (int i = 0; i < d; ++i) xi[i] = rng.rademacher() * radius * xi[i] / total;
  return xi;
}

}  // namespace

void RademacherConfig::validate() const {
  if (n < 1 || d < 1 || sigma_draws < 1 || shells < 1 || candidates_per_shell < 1) {
    throw std::invalid_argument("rademacher config counts must all be >= 1");
  }
  if (!(Q >= 0.0) || !std::isfinite(Q)) throw std::invalid_argument("rademacher radius Q must be finite and >= 0");
}

RademacherResult rademacher_estimate(const RademacherConfig& config) {
  config.validate();
  const RandomStream root(config.seed);
  const int n = config.n;
  const int d = config.d;

  RandomStream data_rng = root.split(1);
  Eigen::MatrixXd x(d, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < d; ++i) x(i, j) = data_rng.uniform(-1.0, 1.0);
  }

  RandomStream sigma_rng = root.split(2);
  Eigen::MatrixXd sigma(config.sigma_draws, n);
  for (int s = 0; s < config.sigma_draws; ++s) {
    for (int j = 0; j < n; ++j) sigma(s, j) = sigma_rng.rademacher();
  }

  std::vector<Eigen::VectorXd> candidates;
  candidates.push_back(Eigen::VectorXd::Zero(d));
  for (int k = -1; k <= config.shells; ++k) {
    RandomStream shell_rng = root.split({3, static_cast<std::uint64_t>(k + 1)});
    const double lo = k < 0 ? 0.0 : std::ldexp(1.0, k);
    const double hi = std::ldexp(1.0, k + 1);
    for (int c = 0; c < config.candidates_per_shell; ++c) {
      const double radius = shell_rng.uniform(lo, hi);
      candidates.push_back(l1_sphere_point(d, radius, shell_rng));
    }
  }

  Eigen::VectorXd best = Eigen::VectorXd::Zero(config.sigma_draws);
  constexpr std::size_t kBlock = 128;
  for (std::size_t start = 0; start < candidates.size(); start += kBlock) {
    const std::size_t count = std::min(kBlock, candidates.size() - start);
    Eigen::MatrixXd re(n, static_cast<Eigen::Index>(count));
    Eigen::MatrixXd im(n, static_cast<Eigen::Index>(count));
    Eigen::VectorXd weight(static_cast<Eigen::Index>(count));
    for (std::size_t c = 0; c < count; ++c) {
      const Eigen::VectorXd& xi = candidates[start + c];
      const Eigen::ArrayXd phase = 2.0 * kPi * (x.transpose() * xi).array();
      re.col(static_cast<Eigen::Index>(c)) = phase.cos().matrix();
      im.col(static_cast<Eigen::Index>(c)) = phase.sin().matrix();
      weight[static_cast<Eigen::Index>(c)] = 1.0 / std::log2(2.0 + xi.lpNorm<1>());
    }
    const Eigen::MatrixXd zr = sigma * re / static_cast<double>(n);
    const Eigen::MatrixXd zi = sigma * im / static_cast<double>(n);
    const Eigen::MatrixXd mag =
        ((zr.array().square() + zi.array().square()).sqrt().rowwise() * weight.transpose().array()).matrix();
    best = best.cwiseMax(mag.rowwise().maxCoeff());
  }

  RademacherResult result;
  result.estimate = config.Q * best.mean();
  result.bound = config.Q * std::sqrt(static_cast<double>(d) / n);
  result.candidate_count = static_cast<int>(candidates.size());
  return result;
}

void ShellSpectrum::validate() const {
  if (d < 1) throw std::invalid_argument("shell spectrum needs d >= 1");
  if (!(s >= 0.0)) throw std::invalid_argument("shell spectrum needs s >= 0");
  if (K < 1) throw std::invalid_argument("shell spectrum needs K >= 1");
  if (construction == Construction::Prop43 && !(p > 2.0)) {
    throw std::invalid_argument("prop43 construction needs p > 2");
  }
}

double SeriesRow::hs_partial() const { return std::exp2(hs_partial_log2); }
double SeriesRow::blog_partial() const { return std::exp2(blog_partial_log2); }

double unit_ball_volume(int d) {
  return std::exp(0.5 * d * std::log(kPi) - std::lgamma(0.5 * d + 1.0));
}

std::string SeriesVerdict::describe() const {
  std::ostringstream os;
  os << (convergent ? "convergent" : "divergent") << " ("
     << (model == Model::Geometric ? "geometric, ratio " : "power law, exponent ")
     << (model == Model::Geometric ? ratio : power_exponent) << ")";
  return os.str();
}

SeriesVerdict classify_series(const std::vector<double>& increment_log2, const std::vector<double>& partial_log2) {
  if (increment_log2.empty() || increment_log2.size() != partial_log2.size()) {
    throw std::invalid_argument("classify_series needs matching nonempty sequences");
  }
  const std::size_t K = increment_log2.size();
  SeriesVerdict v;
  v.increment_test = increment_log2.back() < std::log2(1e-9) + partial_log2.back();
  if (K < 4) {
    v.convergent = v.increment_test;
    v.ratio = K >= 2 ? std::exp2(increment_log2[K - 1] - increment_log2[K - 2]) : 0.0;
    return v;
  }
  v.ratio = std::exp2(increment_log2[K - 1] - increment_log2[K - 2]);

  const std::size_t window = std::max<std::size_t>(4, K / 2);
  std::vector<double> ks, logks, ys;
  for (std::size_t i = K - window; i < K; ++i) {
    const auto k = static_cast<double>(i + 1);
    ks.push_back(k);
    logks.push_back(std::log2(k));
    ys.push_back(increment_log2[i]);
  }
  const LineFit geometric = fit_line(ks, ys);
  const LineFit power = fit_line(logks, ys);
  v.power_exponent = -power.slope;

  // Increments within rounding of a constant are a tie between the models;
  // both verdicts agree there (ratio 1, exponent 0).
  if (geometric.ssr <= power.ssr) {
    v.model = SeriesVerdict::Model::Geometric;
    v.convergent = std::exp2(geometric.slope) < 1.0 - 1e-9;
  } else {
    v.model = SeriesVerdict::Model::PowerLaw;
    v.convergent = v.power_exponent > 1.0 + 1e-9;
  }
  return v;
}

EmbeddingTable embedding_series(const ShellSpectrum& spec) {
  spec.validate();
  EmbeddingTable table;
  table.spec = spec;
  const double d = spec.d;
  const double s = spec.s;
  const double neg_inf = -std::numeric_limits<double>::infinity();

  double hs_sum = neg_inf;
  double blog_sum = neg_inf;
  std::vector<double> hs_inc, hs_part, blog_inc, blog_part;
  const double log2_ball = std::log2(unit_ball_volume(spec.d));

  for (int k = 1; k <= spec.K; ++k) {
    const double kk = k;
    const double log2k = std::log2(kk);
    SeriesRow row;
    row.k = k;
    if (spec.construction == ShellSpectrum::Construction::Prop42) {
      // c_k = 2^{-(d/2+s)k}/k, |A_k| = V_d (2^{d(k+1)} - 2^{dk}).
      const double log2_c = -(d / 2.0 + s) * kk - log2k;
      const double log2_vol = log2_ball + d * kk + std::log2(std::exp2(d) - 1.0);
      row.hs_increment_log2 = 2.0 * s * kk + 2.0 * log2_c + log2_vol;
      row.blog_increment_log2 = log2k + log2_c + log2_vol;
    } else {
      // m_k = k^p 2^k on |E_k| = k^{-2p} 2^{-k}.
      const double log2_m = spec.p * log2k + kk;
      const double log2_e = -2.0 * spec.p * log2k - kk;
      row.hs_increment_log2 = s * std::log2(2.0 / std::sqrt(d)) + s * kk + 2.0 * log2_m + log2_e;
      row.blog_increment_log2 = 1.0 + log2k + log2_m + log2_e;
    }
    hs_sum = log2_add(hs_sum, row.hs_increment_log2);
    blog_sum = log2_add(blog_sum, row.blog_increment_log2);
    row.hs_partial_log2 = hs_sum;
    row.blog_partial_log2 = blog_sum;
    hs_inc.push_back(row.hs_increment_log2);
    hs_part.push_back(hs_sum);
    blog_inc.push_back(row.blog_increment_log2);
    blog_part.push_back(blog_sum);
    table.rows.push_back(row);
  }
  table.hs = classify_series(hs_inc, hs_part);
  table.blog = classify_series(blog_inc, blog_part);
  return table;
}

}  // namespace barronforge
