#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "barronforge/rng.hpp"

namespace barronforge {

/// One cosine atom A * cos(2*pi*(xi . x + phase)).
///
/// `phase` is measured in turns, so the complex Fourier coefficient of the
/// atom has argument 2*pi*phase.
struct FourierMode {
  Eigen::VectorXd frequency;
  double amplitude = 0.0;
  double phase = 0.0;

  double l1_norm() const { return frequency.lpNorm<1>(); }
};

/// Axis-aligned box [lo, hi].
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  static Box unit(int dim);

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const;
  double diameter() const;
  bool inside_unit_cube() const;
};

/// Real-valued target f(x) = sum_j A_j cos(2*pi*(xi_j . x + phi_j)) on a box.
///
/// Immutable after construction; the constructor enforces every invariant
/// (matching dimensions, nonnegative finite amplitudes, phases in [0,1),
/// finite positive box edges).
class SpectralTarget {
 public:
  SpectralTarget(int dim, std::vector<FourierMode> modes, Box domain);

  int dim() const noexcept { return dim_; }
  const std::vector<FourierMode>& modes() const noexcept { return modes_; }
  const Box& domain() const noexcept { return domain_; }

  double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Column-wise evaluation of a dim x n matrix of points.
  Eigen::VectorXd evaluate_batch(const Eigen::Ref<const Eigen::MatrixXd>& points) const;
  /// dim x n matrix of gradients.
  Eigen::MatrixXd gradient_batch(const Eigen::Ref<const Eigen::MatrixXd>& points) const;

 private:
  int dim_;
  std::vector<FourierMode> modes_;
  Box domain_;
};

/// Weighted Barron-type norms of an atomic spectrum.
struct NormKind {
  enum class Tag { B0, Bs, Blog, BsLog };

  Tag tag = Tag::B0;
  double order = 0.0;

  static NormKind b0() { return {Tag::B0, 0.0}; }
  static NormKind bs(double s);
  static NormKind blog() { return {Tag::Blog, 0.0}; }
  static NormKind bslog(double s);

  /// w(|xi|_1) such that the norm is sum_j w * A_j.
  double weight(double xi_l1) const;
  std::string name() const;
};

double norm(const SpectralTarget& target, NormKind kind);

/// Amplitude envelope of the synthetic family:
/// (1 + |xi|_1^d)^-1 * log2(2 + |xi|_1)^-log_exponent.
double decay_amplitude(double xi_l1, int dim, double log_exponent);

struct SynthOptions {
  double radius_lo = 0.5;
  double radius_hi = 4096.0;
  double lattice = 0.5;
};

/// Random finite-mode target on [0,1]^d with amplitudes on the decay envelope.
/// Radii are log-uniform in [radius_lo, radius_hi] (Euclidean), directions
/// uniform on the sphere, components rounded to the lattice.
SpectralTarget synth_target(int dim, int n_modes, double log_exponent, std::uint64_t seed,
                            const SynthOptions& options = {});

/// Index j drawn with probability w(xi_j) A_j / sum_k w(xi_k) A_k.
/// Only B0 and Bs(1) weightings are accepted.
class FrequencySampler {
 public:
  FrequencySampler(const SpectralTarget& target, NormKind weighting);

  std::size_t operator()(RandomStream& rng) const;
  const std::vector<double>& probabilities() const noexcept { return probabilities_; }

 private:
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
};

std::size_t sample_frequency(const SpectralTarget& target, NormKind weighting, RandomStream& rng);

}  // namespace barronforge
