#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "barronforge/network.hpp"
#include "barronforge/spectral.hpp"

namespace barronforge {

/// How integrals over the target domain are estimated.
///
/// Tensor grids use the midpoint rule with floor(n_points^(1/d)) nodes per
/// axis and are only allowed for d <= 3. Monte Carlo draws n_points uniform
/// points from the box using `seed`.
struct QuadratureSpec {
  enum class Kind { TensorGrid, MonteCarlo };

  Kind kind = Kind::MonteCarlo;
  int n_points = 4096;
  std::uint64_t seed = 0;

  static QuadratureSpec grid(int n_points) { return {Kind::TensorGrid, n_points, 0}; }
  static QuadratureSpec monte_carlo(int n_points, std::uint64_t seed) { return {Kind::MonteCarlo, n_points, seed}; }

  void validate(int dim) const;
};

const char* quadrature_kind_name(QuadratureSpec::Kind kind);

/// Equal-weight quadrature nodes (dim x n) for the box.
Eigen::MatrixXd quadrature_points(const Box& box, const QuadratureSpec& quad);

/// Norm estimate with the Monte Carlo standard error propagated to the root.
/// Tensor grids report std_err = 0.
struct ErrorEstimate {
  double estimate = 0.0;
  double std_err = 0.0;
};

/// Values of an approximant at the columns of a point matrix.
using ValueFn = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;
/// Values and gradients (dim x n) of an approximant.
using ValueGradFn = std::function<void(const Eigen::MatrixXd&, Eigen::VectorXd&, Eigen::MatrixXd&)>;

ErrorEstimate l2_error(const SpectralTarget& f, const ReluNetwork& net, const QuadratureSpec& quad);
ErrorEstimate l2_error(const SpectralTarget& f, const ValueFn& approx, const QuadratureSpec& quad);

/// sqrt(|f - F|^2_L2 + sum_j |D_j f - D_j F|^2_L2) using analytic gradients of
/// both sides.
ErrorEstimate h1_error(const SpectralTarget& f, const ReluNetwork& net, const QuadratureSpec& quad);
ErrorEstimate h1_error(const SpectralTarget& f, const ValueGradFn& approx, const QuadratureSpec& quad);

/// Pairwise summation; the reduction order depends only on the length.
double pairwise_sum(std::span<const double> values);

/// -2 pi^2 * integral over r in [-1/2, 1/2] of cos(2 pi r) gamma(t, r), by
/// composite Simpson on the pieces between the kinks {-t', 0, t'} where
/// t' = min(t, 1 - t). `r_points` is the total node budget.
double cos_lemma_integral(double t, int r_points);

struct CosLemmaResult {
  double max_abs_deviation = 0.0;
  int worst_n = 0;
  double worst_t = 0.0;
};

/// Max over n and t of |cos_lemma_integral(n t mod 1) - cos(2 pi n t)|.
CosLemmaResult verify_cos_lemma(const std::vector<int>& n_values, const std::vector<double>& t_grid, int r_points);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares of log(err) on log(m).
SlopeFit slope_fit(const std::vector<std::pair<double, double>>& points);

}  // namespace barronforge
