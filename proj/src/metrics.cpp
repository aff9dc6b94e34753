#include "barronforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>

#include "barronforge/rng.hpp"

namespace barronforge {

namespace {

constexpr double kPi = std::numbers::pi;

int grid_nodes_per_axis(int n_points, int dim) {
  int k = static_cast<int>(std::floor(std::pow(static_cast<double>(n_points), 1.0 / dim)));
  auto fits = [&](int kk) {
    double total = 1.0;
    for (int i = 0; i < dim; ++i) total *= kk;
    return total <= n_points;
  };
  while (!fits(k)) --k;
  while (fits(k + 1)) ++k;
  return std::max(k, 1);
}

/// Turns mean-square samples into a norm estimate with a delta-method error.
ErrorEstimate finish(const Eigen::VectorXd& squared, double volume, bool monte_carlo) {
  const auto n = static_cast<double>(squared.size());
  const double mean = pairwise_sum({squared.data(), static_cast<std::size_t>(squared.size())}) / n;
  ErrorEstimate out;
  out.estimate = std::sqrt(volume * mean);
  if (monte_carlo && squared.size() > 1) {
    Eigen::VectorXd centered = (squared.array() - mean).square().matrix();
    const double var = pairwise_sum({centered.data(), static_cast<std::size_t>(centered.size())}) / (n - 1.0);
    const double se_mean = std::sqrt(var / n);
    out.std_err = out.estimate > 0.0 ? volume * se_mean / (2.0 * out.estimate) : 0.0;
  }
  return out;
}

double simpson(double a, double b, int intervals, double t) {
  if (b <= a) return 0.0;
  const double h = (b - a) / intervals;
  auto g = [t](double r) { return std::cos(2.0 * kPi * r) * gamma_kernel(t, r); };
  double odd = 0.0;
  double even = 0.0;
  for (int i = 1; i < intervals; ++i) {
    const double v = g(a + i * h);
    (i % 2 ? odd : even) += v;
  }
  return h / 3.0 * (g(a) + 4.0 * odd + 2.0 * even + g(b));
}

}  // namespace

void QuadratureSpec::validate(int dim) const {
  if (n_points < 16) throw std::invalid_argument("quadrature needs at least 16 points");
  if (kind == Kind::TensorGrid && dim > 3) throw std::invalid_argument("tensor-grid quadrature is limited to d <= 3");
}

const char* quadrature_kind_name(QuadratureSpec::Kind kind) {
  return kind == QuadratureSpec::Kind::TensorGrid ? "tensor-grid" : "monte-carlo";
}

Eigen::MatrixXd quadrature_points(const Box& box, const QuadratureSpec& quad) {
  const int d = box.dim();
  quad.validate(d);
  const Eigen::ArrayXd edge = (box.hi - box.lo).array();

  if (quad.kind == QuadratureSpec::Kind::MonteCarlo) {
    RandomStream rng = RandomStream(quad.seed).split(0x9ad);
    Eigen::MatrixXd pts(d, quad.n_points);
    for (int j = 0; j < quad.n_points; ++j) {
      for (int i = 0; i < d; ++i) pts(i, j) = box.lo[i] + edge[i] * rng.uniform();
    }
    return pts;
  }

  const int k = grid_nodes_per_axis(quad.n_points, d);
  Eigen::Index total = 1;
  for (int i = 0; i < d; ++i) total *= k;
  Eigen::MatrixXd pts(d, total);
  for (Eigen::Index j = 0; j < total; ++j) {
    Eigen::Index rest = j;
    for (int i = 0; i < d; ++i) {
      const auto idx = static_cast<double>(rest % k);
      rest /= k;
      pts(i, j) = box.lo[i] + edge[i] * (idx + 0.5) / k;
    }
  }
  return pts;
}

ErrorEstimate l2_error(const SpectralTarget& f, const ValueFn& approx, const QuadratureSpec& quad) {
  const Eigen::MatrixXd pts = quadrature_points(f.domain(), quad);
  const Eigen::VectorXd values = approx(pts);
  if (values.size() != pts.cols()) throw std::invalid_argument("approximant returned the wrong number of values");
  const Eigen::VectorXd squared = (f.evaluate_batch(pts) - values).array().square().matrix();
  return finish(squared, f.domain().volume(), quad.kind == QuadratureSpec::Kind::MonteCarlo);
}

ErrorEstimate l2_error(const SpectralTarget& f, const ReluNetwork& net, const QuadratureSpec& quad) {
  if (net.input_dim() != f.dim() || net.output_dim() != 1) {
    throw std::invalid_argument("dimension mismatch between target and network");
  }
  return l2_error(
      f, [&net](const Eigen::MatrixXd& pts) -> Eigen::VectorXd { return net.eval_batch(pts).row(0).transpose(); },
      quad);
}

ErrorEstimate h1_error(const SpectralTarget& f, const ValueGradFn& approx, const QuadratureSpec& quad) {
  const Eigen::MatrixXd pts = quadrature_points(f.domain(), quad);
  Eigen::VectorXd values;
  Eigen::MatrixXd grads;
  approx(pts, values, grads);
  if (values.size() != pts.cols() || grads.rows() != f.dim() || grads.cols() != pts.cols()) {
    throw std::invalid_argument("approximant returned mis-shaped values or gradients");
  }
  Eigen::VectorXd squared = (f.evaluate_batch(pts) - values).array().square().matrix();
  squared += (f.gradient_batch(pts) - grads).colwise().squaredNorm().transpose();
  return finish(squared, f.domain().volume(), quad.kind == QuadratureSpec::Kind::MonteCarlo);
}

ErrorEstimate h1_error(const SpectralTarget& f, const ReluNetwork& net, const QuadratureSpec& quad) {
  if (net.input_dim() != f.dim() || net.output_dim() != 1) {
    throw std::invalid_argument("dimension mismatch between target and network");
  }
  return h1_error(
      f,
      [&net](const Eigen::MatrixXd& pts, Eigen::VectorXd& v, Eigen::MatrixXd& g) {
        net.eval_with_gradient_batch(pts, v, g);
      },
      quad);
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double cos_lemma_integral(double t, int r_points) {
  if (r_points < 8) throw std::invalid_argument("cos lemma quadrature needs at least 8 points");
  t = std::min(t, 1.0 - t);
  const double knots[5] = {-0.5, -t, 0.0, t, 0.5};
  double total = 0.0;
  for (int p = 0; p < 4; ++p) {
    const double a = knots[p];
    const double b = knots[p + 1];
    if (b <= a) continue;
    int intervals = static_cast<int>(std::lround(r_points * (b - a)));
    intervals = std::max(2, intervals + (intervals % 2));
    total += simpson(a, b, intervals, t);
  }
  return -2.0 * kPi * kPi * total;
}

CosLemmaResult verify_cos_lemma(const std::vector<int>& n_values, const std::vector<double>& t_grid, int r_points) {
  if (n_values.empty() || t_grid.empty()) throw std::invalid_argument("cos lemma check needs nonempty grids");
  if (r_points < 1000) throw std::invalid_argument("cos lemma check needs at least 1000 r points");
  for (int n : n_values) {
    if (n < 1) throw std::invalid_argument("cos lemma frequencies must be >= 1");
  }
  for (double t : t_grid) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("cos lemma t values must lie in (0, 1)");
  }

  // The integral depends on (n, t) only through nt mod 1.
  std::map<double, double> cache;
  CosLemmaResult result;
  for (int n : n_values) {
    for (double t : t_grid) {
      const double nt = n * t;
      const double wrapped = nt - std::floor(nt);
      auto [it, fresh] = cache.try_emplace(wrapped, 0.0);
      if (fresh) it->second = cos_lemma_integral(wrapped, r_points);
      const double dev = std::abs(it->second - std::cos(2.0 * kPi * nt));
      if (result.worst_n == 0 || dev > result.max_abs_deviation) {
        result.max_abs_deviation = dev;
        result.worst_n = n;
        result.worst_t = t;
      }
    }
  }
  return result;
}

SlopeFit slope_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw std::invalid_argument("slope fit needs at least 3 points");
  std::vector<double> xs, ys;
  for (const auto& [m, err] : points) {
    if (!(m > 0.0)) throw std::invalid_argument("slope fit needs positive abscissae");
    if (!(err > 0.0) || !std::isfinite(err)) throw std::invalid_argument("slope fit needs positive errors");
    xs.push_back(std::log(m));
    ys.push_back(std::log(err));
  }
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("slope fit needs at least two distinct abscissae");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

}  // namespace barronforge
