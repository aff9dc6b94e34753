#include "barronforge/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace barronforge {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_dim(const Eigen::Ref<const Eigen::VectorXd>& x, int dim) {
  if (x.size() != dim) {
    throw std::invalid_argument("dimension mismatch: expected " + std::to_string(dim) + ", got " +
                                std::to_string(x.size()));
  }
}

}  // namespace

Box Box::unit(int dim) { return Box{Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)}; }

double Box::volume() const { return (hi - lo).prod(); }

double Box::diameter() const { return (hi - lo).norm(); }

bool Box::inside_unit_cube() const { return lo.minCoeff() >= 0.0 && hi.maxCoeff() <= 1.0; }

SpectralTarget::SpectralTarget(int dim, std::vector<FourierMode> modes, Box domain)
    : dim_(dim), modes_(std::move(modes)), domain_(std::move(domain)) {
  if (dim_ < 1) throw std::invalid_argument("target dimension must be positive");
  if (modes_.empty()) throw std::invalid_argument("target needs at least one mode");
  if (domain_.lo.size() != dim_ || domain_.hi.size() != dim_) {
    throw std::invalid_argument("domain dimension does not match target dimension");
  }
  for (int i = 0; i < dim_; ++i) {
    const double lo = domain_.lo[i];
    const double hi = domain_.hi[i];
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
      throw std::invalid_argument("domain edges must be finite with hi > lo");
    }
  }
  for (const auto& mode : modes_) {
    if (mode.frequency.size() != dim_) throw std::invalid_argument("mode frequency has wrong length");
    if (!mode.frequency.allFinite()) throw std::invalid_argument("mode frequency must be finite");
    if (!std::isfinite(mode.amplitude) || mode.amplitude < 0.0) {
      throw std::invalid_argument("mode amplitude must be finite and nonnegative");
    }
    if (!std::isfinite(mode.phase) || mode.phase < 0.0 || mode.phase >= 1.0) {
      throw std::invalid_argument("mode phase must lie in [0, 1)");
    }
  }
}

double SpectralTarget::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  require_dim(x, dim_);
  double sum = 0.0;
  for (const auto& mode : modes_) {
    sum += mode.amplitude * std::cos(kTwoPi * (mode.frequency.dot(x) + mode.phase));
  }
  return sum;
}

Eigen::VectorXd SpectralTarget::gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  require_dim(x, dim_);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
  for (const auto& mode : modes_) {
    const double s = std::sin(kTwoPi * (mode.frequency.dot(x) + mode.phase));
    g -= (kTwoPi * mode.amplitude * s) * mode.frequency;
  }
  return g;
}

Eigen::VectorXd SpectralTarget::evaluate_batch(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  if (points.rows() != dim_) throw std::invalid_argument("dimension mismatch in evaluate_batch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(points.cols());
  for (const auto& mode : modes_) {
    const Eigen::ArrayXd arg = kTwoPi * ((points.transpose() * mode.frequency).array() + mode.phase);
    out.array() += mode.amplitude * arg.cos();
  }
  return out;
}

Eigen::MatrixXd SpectralTarget::gradient_batch(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  if (points.rows() != dim_) throw std::invalid_argument("dimension mismatch in gradient_batch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim_, points.cols());
  for (const auto& mode : modes_) {
    const Eigen::ArrayXd arg = kTwoPi * ((points.transpose() * mode.frequency).array() + mode.phase);
    const Eigen::RowVectorXd coeff = (-kTwoPi * mode.amplitude * arg.sin()).matrix().transpose();
    out.noalias() += mode.frequency * coeff;
  }
  return out;
}

NormKind NormKind::bs(double s) {
  if (!(s > 0.0)) throw std::invalid_argument("Barron order must be positive");
  return {Tag::Bs, s};
}

NormKind NormKind::bslog(double s) {
  if (!(s > 0.0)) throw std::invalid_argument("Barron order must be positive");
  return {Tag::BsLog, s};
}

double NormKind::weight(double xi_l1) const {
  switch (tag) {
    case Tag::B0:
      return 1.0;
    case Tag::Bs:
      return 1.0 + std::pow(xi_l1, order);
    case Tag::Blog:
      return std::log2(2.0 + xi_l1);
    case Tag::BsLog:
      return (1.0 + std::pow(xi_l1, order)) * std::log2(2.0 + xi_l1);
  }
  return 1.0;
}

std::string NormKind::name() const {
  auto order_str = [this] {
    std::string s = std::to_string(order);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  };
  switch (tag) {
    case Tag::B0:
      return "B0";
    case Tag::Bs:
      return "B" + order_str();
    case Tag::Blog:
      return "Blog";
    case Tag::BsLog:
      return "B" + order_str() + "log";
  }
  return "?";
}

double norm(const SpectralTarget& target, NormKind kind) {
  double sum = 0.0;
  for (const auto& mode : target.modes()) sum += kind.weight(mode.l1_norm()) * mode.amplitude;
  return sum;
}

double decay_amplitude(double xi_l1, int dim, double log_exponent) {
  return 1.0 / (1.0 + std::pow(xi_l1, dim)) / std::pow(std::log2(2.0 + xi_l1), log_exponent);
}

SpectralTarget synth_target(int dim, int n_modes, double log_exponent, std::uint64_t seed,
                            const SynthOptions& options) {
  if (dim < 1) throw std::invalid_argument("synth_target: dimension must be >= 1");
  if (n_modes < 1) throw std::invalid_argument("synth_target: n_modes must be >= 1");
  if (!(log_exponent > 1.0)) throw std::invalid_argument("synth_target: log_exponent must exceed 1");
  if (!(options.radius_lo > 0.0) || !(options.radius_hi >= options.radius_lo) || !(options.lattice > 0.0)) {
    throw std::invalid_argument("synth_target: invalid radius range or lattice");
  }

  RandomStream rng = RandomStream(seed).split(0x5e17);
  const double log_lo = std::log(options.radius_lo);
  const double log_hi = std::log(options.radius_hi);

  std::vector<FourierMode> modes;
  modes.reserve(static_cast<std::size_t>(n_modes));
  for (int j = 0; j < n_modes; ++j) {
    const double radius = std::exp(rng.uniform(log_lo, log_hi));
    Eigen::VectorXd direction(dim);
    do {
      for (int i = 0; i < dim; ++i) direction[i] = rng.normal();
    } while (direction.norm() == 0.0);
    direction.normalize();

    FourierMode mode;
    mode.frequency = (radius * direction / options.lattice).array().round() * options.lattice;
    mode.amplitude = decay_amplitude(mode.l1_norm(), dim, log_exponent);
    mode.phase = rng.uniform();
    modes.push_back(std::move(mode));
  }
  return SpectralTarget(dim, std::move(modes), Box::unit(dim));
}

FrequencySampler::FrequencySampler(const SpectralTarget& target, NormKind weighting) {
  const bool ok = weighting.tag == NormKind::Tag::B0 ||
                  (weighting.tag == NormKind::Tag::Bs && weighting.order == 1.0);
  if (!ok) throw std::invalid_argument("frequency sampling supports B0 or B1 weighting only");

  std::vector<double> w;
  w.reserve(target.modes().size());
  double total = 0.0;
  for (const auto& mode : target.modes()) {
    w.push_back(weighting.weight(mode.l1_norm()) * mode.amplitude);
    total += w.back();
  }
  if (!(total > 0.0)) throw std::invalid_argument("degenerate spectrum: all amplitudes are zero");

  probabilities_.resize(w.size());
  cumulative_.resize(w.size());
  double running = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    probabilities_[j] = w[j] / total;
    running += w[j];
    cumulative_[j] = running / total;
  }
  cumulative_.back() = 1.0;
}

std::size_t FrequencySampler::operator()(RandomStream& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  auto j = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
  j = std::min(j, cumulative_.size() - 1);
  // Zero-probability atoms share a cumulative value with their predecessor;
  // upper_bound already skips them.
  return j;
}

std::size_t sample_frequency(const SpectralTarget& target, NormKind weighting, RandomStream& rng) {
  return FrequencySampler(target, weighting)(rng);
}

}  // namespace barronforge
