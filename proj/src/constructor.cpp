#include "barronforge/constructor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace barronforge {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPiSq = 2.0 * kPi * kPi;

double wrap_unit(double v) {
  double w = v - std::floor(v);
  if (w >= 1.0) w = 0.0;
  return w;
}

double attempt_score(const BuildReport& r) {
  const double err = (r.error_estimate + r.std_err_margin * r.error_std_err) / (r.error_slack * r.error_bound);
  const double depth = static_cast<double>(r.total_depth) / r.depth_bound;
  return std::max(err, depth);
}

BuildResult build_impl(const SpectralTarget& target, const BuildConfig& config, Variant variant) {
  config.validate();
  config.quad.validate(target.dim());

  const bool needs_rescale = !target.domain().inside_unit_cube();
  const RescaleResult unit = rescale_to_unit(target, variant);
  const SpectralTarget& g = unit.target;
  const double diam = target.domain().diameter();

  BuildReport base;
  base.variant = variant;
  base.m = config.m;
  base.error_slack = config.error_slack;
  base.std_err_margin = config.std_err_margin;
  base.domain_volume = target.domain().volume();
  base.norm_b0 = norm(target, NormKind::b0());
  base.norm_b1 = norm(target, NormKind::bs(1.0));
  base.norm_blog = norm(target, NormKind::blog());
  base.norm_b1log = norm(target, NormKind::bslog(1.0));
  base.rescale = unit.map;
  base.quad = config.quad;
  base.seed = config.seed;

  if (variant == Variant::L2) {
    base.c_factor = needs_rescale ? std::log2(2.0 + diam) : 1.0;
    base.error_bound = l2_error_bound(config.m, base.domain_volume, base.norm_b0);
    const double g_log = norm(g, NormKind::blog());
    const double g_b0 = norm(g, NormKind::b0());
    base.depth_bound = depth_budget(config.m, g_log, g_b0);
    base.merged_depth_bound = merged_depth_budget(config.m, g_log, g_b0);
  } else {
    base.c_factor = needs_rescale ? std::max(1.0, diam) : 1.0;
    base.error_bound = base.c_factor * h1_error_bound(config.m, base.domain_volume, base.norm_b1);
    const double g_b1log = norm(g, NormKind::bslog(1.0));
    const double g_b1 = norm(g, NormKind::bs(1.0));
    base.depth_bound = depth_budget(config.m, g_b1log, g_b1);
    base.merged_depth_bound = merged_depth_budget(config.m, g_b1log, g_b1);
  }

  const RandomStream streams = RandomStream(config.seed).split(0xb111d);
  std::optional<BuildResult> best;
  double best_score = std::numeric_limits<double>::infinity();

  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    RandomStream rng = streams.split(static_cast<std::uint64_t>(attempt));
    std::vector<SampledPair> samples = sample_pairs(g, config.m, variant, rng);
    ReluNetwork net = assemble_network(g, samples, variant);
    if (!unit.map.is_identity()) {
      const int d = target.dim();
      net = precompose_affine(net, Eigen::MatrixXd::Identity(d, d) / unit.map.c, unit.map.shift);
    }

    BuildReport report = base;
    report.retries_used = attempt;
    report.samples = std::move(samples);
    report.total_depth = 0;
    for (const auto& s : report.samples) report.total_depth += frequency_depth(g.modes()[s.mode_index].l1_norm());
    report.merged_depth = net.depth();
    report.merged_hidden_layers = net.hidden_layers();
    report.merged_width = net.width();

    const ErrorEstimate err =
        variant == Variant::L2 ? l2_error(target, net, config.quad) : h1_error(target, net, config.quad);
    report.error_estimate = err.estimate;
    report.error_std_err = err.std_err;
    report.accepted = report.error_ok() && report.depth_ok();

    if (report.accepted) return BuildResult{std::move(net), std::move(report)};
    const double score = attempt_score(report);
    if (!best || score < best_score) {
      best_score = score;
      best.emplace(BuildResult{std::move(net), std::move(report)});
    }
  }
  best->report.retries_used = config.max_retries;
  return std::move(*best);
}

}  // namespace

double compute_theta(const FourierMode& mode) {
  double negative = 0.0;
  for (Eigen::Index i = 0; i < mode.frequency.size(); ++i) {
    if (mode.frequency[i] < 0.0) negative -= mode.frequency[i];
  }
  return mode.phase + std::ceil(negative - mode.phase);
}

NormKind sampling_weight(Variant variant) { return variant == Variant::L2 ? NormKind::b0() : NormKind::bs(1.0); }

std::vector<SampledPair> sample_pairs(const SpectralTarget& target, int m, Variant variant, RandomStream& rng) {
  if (m < 1) throw std::invalid_argument("sample_pairs needs m >= 1");
  const FrequencySampler sampler(target, sampling_weight(variant));
  std::vector<SampledPair> pairs;
  pairs.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    SampledPair p;
    p.mode_index = sampler(rng);
    p.r = rng.uniform(-0.5, 0.5);
    pairs.push_back(p);
  }
  return pairs;
}

SubNetworkSpec make_subnetwork_spec(const SpectralTarget& target, const SampledPair& pair, Variant variant) {
  if (pair.mode_index >= target.modes().size()) throw std::invalid_argument("sampled mode index out of range");
  const FourierMode& mode = target.modes()[pair.mode_index];
  const double l1 = mode.l1_norm();
  const double amplitude_norm =
      variant == Variant::L2 ? norm(target, NormKind::b0()) : norm(target, NormKind::bs(1.0)) / (1.0 + l1);

  SubNetworkSpec spec;
  spec.mode_index = pair.mode_index;
  spec.r = pair.r;
  spec.depth_L = frequency_depth(l1);
  spec.theta = compute_theta(mode);
  spec.scale = -kTwoPiSq * amplitude_norm * std::cos(2.0 * kPi * pair.r);
  return spec;
}

ReluNetwork assemble_network(const SpectralTarget& unit_target, const std::vector<SampledPair>& samples,
                             Variant variant) {
  if (samples.empty()) throw std::invalid_argument("assemble_network needs at least one sample");
  const double scale_norm =
      variant == Variant::L2 ? norm(unit_target, NormKind::b0()) : norm(unit_target, NormKind::bs(1.0));
  std::vector<ReluNetwork> subnets;
  subnets.reserve(samples.size());
  for (const auto& s : samples) {
    subnets.push_back(build_subnetwork(unit_target, make_subnetwork_spec(unit_target, s, variant)));
  }
  // Every sub-network is bounded by 2 pi^2 * Norm * max(gamma) <= pi^2 * Norm.
  return merge(subnets, unit_target.dim(), kTwoPiSq * scale_norm, unit_target.domain());
}

RescaleResult rescale_to_unit(const SpectralTarget& target, Variant variant) {
  const int d = target.dim();
  if (target.domain().inside_unit_cube()) {
    return RescaleResult{target, AffineMap{1.0, Eigen::VectorXd::Zero(d)}};
  }
  const double diam = target.domain().diameter();
  if (!(diam > 0.0) || !std::isfinite(diam)) throw std::invalid_argument("rescale needs a domain of positive diameter");
  const double c = variant == Variant::H1 ? std::max(1.0, diam) : diam;
  const Eigen::VectorXd& lo = target.domain().lo;

  std::vector<FourierMode> modes;
  modes.reserve(target.modes().size());
  for (const auto& mode : target.modes()) {
    FourierMode scaled;
    scaled.frequency = c * mode.frequency;
    scaled.amplitude = mode.amplitude;
    scaled.phase = wrap_unit(mode.phase + mode.frequency.dot(lo));
    modes.push_back(std::move(scaled));
  }
  Box unit_box{Eigen::VectorXd::Zero(d), ((target.domain().hi - lo) / c).cwiseMin(1.0)};
  AffineMap map{c, -lo / c};
  return RescaleResult{SpectralTarget(d, std::move(modes), std::move(unit_box)), std::move(map)};
}

void BuildConfig::validate() const {
  if (m < 1) throw std::invalid_argument("build needs m >= 1");
  if (max_retries < 1) throw std::invalid_argument("build needs max_retries >= 1");
  if (!(error_slack >= 1.0)) throw std::invalid_argument("error_slack must be >= 1");
  if (!(std_err_margin >= 0.0)) throw std::invalid_argument("std_err_margin must be >= 0");
}

double l2_error_bound(int m, double volume, double norm_b0) {
  return 2.0 * kPi * kPi / std::sqrt(static_cast<double>(m)) * std::sqrt(volume) * norm_b0;
}

double h1_error_bound(int m, double volume, double norm_b1) {
  return 4.0 * kPi * kPi / std::sqrt(static_cast<double>(m)) * std::sqrt(volume) * norm_b1;
}

double depth_budget(int m, double numerator_norm, double denominator_norm) {
  return 5.0 * m * numerator_norm / denominator_norm;
}

double merged_depth_budget(int m, double numerator_norm, double denominator_norm) {
  return 6.0 * m * numerator_norm / denominator_norm;
}

BuildResult build_l2(const SpectralTarget& target, const BuildConfig& config) {
  return build_impl(target, config, Variant::L2);
}

BuildResult build_h1(const SpectralTarget& target, const BuildConfig& config) {
  return build_impl(target, config, Variant::H1);
}

BuildResult build(const SpectralTarget& target, const BuildConfig& config) {
  return build_impl(target, config, config.variant);
}

}  // namespace barronforge
