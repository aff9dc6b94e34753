#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "barronforge/metrics.hpp"
#include "barronforge/network.hpp"
#include "barronforge/rng.hpp"
#include "barronforge/spectral.hpp"

namespace barronforge {

/// Integer shift making xi . x + theta land in [0, |xi|_1 + 1] on [0,1]^d:
/// theta = phase + ceil(sum_{xi_j < 0} |xi_j| - phase).
double compute_theta(const FourierMode& mode);

struct SampledPair {
  std::size_t mode_index = 0;
  double r = 0.0;
};

/// Weighting used to draw frequencies: B0 for L2, B1 for H1.
NormKind sampling_weight(Variant variant);

/// i.i.d. (mode, r) pairs: modes categorical under the variant weighting,
/// r uniform on [-1/2, 1/2].
std::vector<SampledPair> sample_pairs(const SpectralTarget& target, int m, Variant variant, RandomStream& rng);

/// Fills depth_L, theta and the output coefficient
/// -2 pi^2 * Norm * cos(2 pi r), Norm = |f|_B0 (L2) or |f|_B1 / (1 + |xi|_1) (H1).
SubNetworkSpec make_subnetwork_spec(const SpectralTarget& target, const SampledPair& pair, Variant variant);

/// Affine change of variables y = x / c + shift taking the original domain
/// into [0,1]^d.
struct AffineMap {
  double c = 1.0;
  Eigen::VectorXd shift;

  bool is_identity() const { return c == 1.0 && (shift.size() == 0 || shift.isZero(0.0)); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return x / c + shift; }
};

struct RescaleResult {
  SpectralTarget target;
  AffineMap map;
};

/// g(y) = f(c (y - shift)) with domain inside [0,1]^d. Frequencies scale by c,
/// amplitudes are unchanged and phases absorb the translation. Domains already
/// inside the unit cube map to the identity. c = diam(domain) for L2 and
/// max(1, diam(domain)) for H1.
RescaleResult rescale_to_unit(const SpectralTarget& target, Variant variant = Variant::L2);

struct BuildConfig {
  int m = 64;
  Variant variant = Variant::L2;
  std::uint64_t seed = 0;
  int max_retries = 16;
  QuadratureSpec quad{};
  double error_slack = 1.0;
  /// Acceptance requires estimate + margin * std_err <= slack * bound.
  double std_err_margin = 2.0;

  void validate() const;
};

/// Right-hand sides of the approximation theorems.
double l2_error_bound(int m, double volume, double norm_b0);
double h1_error_bound(int m, double volume, double norm_b1);
/// 5 m * numerator / denominator: the budget for the sum of beta-chain lengths.
double depth_budget(int m, double numerator_norm, double denominator_norm);
/// 6 m * numerator / denominator: hidden layers of the merged network.
double merged_depth_budget(int m, double numerator_norm, double denominator_norm);

struct BuildReport {
  Variant variant = Variant::L2;
  int m = 0;
  double error_estimate = 0.0;
  double error_std_err = 0.0;
  double error_bound = 0.0;
  double error_slack = 1.0;
  double std_err_margin = 2.0;
  int total_depth = 0;
  double depth_bound = 0.0;
  int retries_used = 0;
  bool accepted = false;

  // Bound constituents.
  double domain_volume = 0.0;
  double norm_b0 = 0.0;
  double norm_b1 = 0.0;
  double norm_blog = 0.0;
  double norm_b1log = 0.0;
  /// C1 = log2(2 + diam) for L2 or C2 = max(1, diam) for H1 when the domain
  /// was rescaled; 1 otherwise.
  double c_factor = 1.0;
  AffineMap rescale;

  int merged_depth = 0;
  int merged_hidden_layers = 0;
  int merged_width = 0;
  double merged_depth_bound = 0.0;

  QuadratureSpec quad{};
  std::uint64_t seed = 0;
  std::vector<SampledPair> samples;

  bool error_ok() const { return error_estimate + std_err_margin * error_std_err <= error_slack * error_bound; }
  bool depth_ok() const { return static_cast<double>(total_depth) <= depth_bound; }
};

struct BuildResult {
  ReluNetwork network;
  BuildReport report;
};

/// Samples, builds and merges m sub-networks, resampling until the error and
/// depth checks both pass. After max_retries failed resamples the best attempt
/// is returned with accepted = false.
BuildResult build_l2(const SpectralTarget& target, const BuildConfig& config);
BuildResult build_h1(const SpectralTarget& target, const BuildConfig& config);
BuildResult build(const SpectralTarget& target, const BuildConfig& config);

/// Merged network for a fixed list of samples on a unit-cube target, without
/// error measurement or retries.
ReluNetwork assemble_network(const SpectralTarget& unit_target, const std::vector<SampledPair>& samples,
                             Variant variant);

}  // namespace barronforge
