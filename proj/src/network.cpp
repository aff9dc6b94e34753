#include "barronforge/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace barronforge {

namespace {

constexpr Eigen::Index kChunk = 512;

void require_input(Eigen::Index got, int expected) {
  if (got != expected) {
    throw std::invalid_argument("dimension mismatch: network expects " + std::to_string(expected) +
                                " inputs, got " + std::to_string(got));
  }
}

}  // namespace

ReluNetwork::ReluNetwork(int input_dim, std::vector<Layer> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
  if (input_dim_ < 1) throw std::invalid_argument("network input dimension must be positive");
  if (layers_.empty()) throw std::invalid_argument("network needs at least one layer");
  Eigen::Index prev = input_dim_;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    if (layer.weight.cols() != prev) {
      throw std::invalid_argument("layer " + std::to_string(l) + " expects " +
                                  std::to_string(layer.weight.cols()) + " inputs but receives " +
                                  std::to_string(prev));
    }
    if (layer.weight.rows() != layer.bias.size() || layer.bias.size() == 0) {
      throw std::invalid_argument("layer " + std::to_string(l) + " has inconsistent bias length");
    }
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
      throw std::invalid_argument("layer " + std::to_string(l) + " has non-finite parameters");
    }
    const bool last = l + 1 == layers_.size();
    if (last && layer.activation != Activation::None) {
      throw std::invalid_argument("final layer must be affine only");
    }
    if (!last && layer.activation != Activation::Relu) {
      throw std::invalid_argument("hidden layers must use ReLU");
    }
    prev = layer.weight.rows();
  }
}

int ReluNetwork::width() const {
  Eigen::Index w = 0;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) w = std::max(w, layers_[l].weight.rows());
  return static_cast<int>(w);
}

std::size_t ReluNetwork::param_count() const {
  std::size_t count = 0;
  for (const auto& layer : layers_) count += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  return count;
}

Eigen::VectorXd ReluNetwork::eval(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  require_input(x.size(), input_dim_);
  Eigen::VectorXd z = x;
  for (const auto& layer : layers_) {
    Eigen::VectorXd next = layer.weight * z + layer.bias;
    if (layer.activation == Activation::Relu) next = next.cwiseMax(0.0);
    z = std::move(next);
  }
  return z;
}

Eigen::MatrixXd ReluNetwork::eval_batch(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  require_input(points.rows(), input_dim_);
  Eigen::MatrixXd out(output_dim(), points.cols());
  Eigen::MatrixXd z, next;
  for (Eigen::Index start = 0; start < points.cols(); start += kChunk) {
    const Eigen::Index n = std::min(kChunk, points.cols() - start);
    z = points.middleCols(start, n);
    for (const auto& layer : layers_) {
      next.resize(layer.weight.rows(), n);
      next.noalias() = layer.weight * z;
      next.colwise() += layer.bias;
      if (layer.activation == Activation::Relu) next = next.cwiseMax(0.0);
      std::swap(z, next);
    }
    out.middleCols(start, n) = z;
  }
  return out;
}

Eigen::MatrixXd ReluNetwork::jacobian(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  require_input(x.size(), input_dim_);
  Eigen::VectorXd z = x;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(input_dim_, input_dim_);
  for (const auto& layer : layers_) {
    Eigen::VectorXd pre = layer.weight * z + layer.bias;
    Eigen::MatrixXd next_jac = layer.weight * jac;
    if (layer.activation == Activation::Relu) {
      for (Eigen::Index u = 0; u < pre.size(); ++u) {
        if (!(pre[u] > 0.0)) {
          pre[u] = 0.0;
          next_jac.row(u).setZero();
        }
      }
    }
    z = std::move(pre);
    jac = std::move(next_jac);
  }
  return jac;
}

void ReluNetwork::eval_with_gradient_batch(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                           Eigen::VectorXd& values, Eigen::MatrixXd& gradients) const {
  require_input(points.rows(), input_dim_);
  if (output_dim() != 1) throw std::invalid_argument("eval_with_gradient_batch needs a scalar output");
  const Eigen::Index total = points.cols();
  const int d = input_dim_;
  values.resize(total);
  gradients.resize(d, total);

  Eigen::MatrixXd z, next, tangent, next_tangent;
  for (Eigen::Index start = 0; start < total; start += kChunk) {
    const Eigen::Index n = std::min(kChunk, total - start);
    z = points.middleCols(start, n);
    // Tangent block k (columns k*n .. k*n+n-1) holds dz/dx_k.
    tangent.setZero(d, n * d);
    for (int k = 0; k < d; ++k) tangent.block(k, k * n, 1, n).setOnes();

    for (const auto& layer : layers_) {
      next.resize(layer.weight.rows(), n);
      next.noalias() = layer.weight * z;
      next.colwise() += layer.bias;
      next_tangent.resize(layer.weight.rows(), n * d);
      next_tangent.noalias() = layer.weight * tangent;
      if (layer.activation == Activation::Relu) {
        const Eigen::ArrayXXd mask = (next.array() > 0.0).cast<double>();
        next = next.cwiseMax(0.0);
        for (int k = 0; k < d; ++k) next_tangent.middleCols(k * n, n).array() *= mask;
      }
      std::swap(z, next);
      std::swap(tangent, next_tangent);
    }
    values.segment(start, n) = z.row(0).transpose();
    for (int k = 0; k < d; ++k) gradients.block(k, start, 1, n) = tangent.block(0, k * n, 1, n);
  }
}

double ReluNetwork::kink_distance(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  require_input(x.size(), input_dim_);
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd z = x;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(input_dim_, input_dim_);
  for (const auto& layer : layers_) {
    Eigen::VectorXd pre = layer.weight * z + layer.bias;
    Eigen::MatrixXd next_jac = layer.weight * jac;
    if (layer.activation == Activation::Relu) {
      for (Eigen::Index u = 0; u < pre.size(); ++u) {
        const double slope = next_jac.row(u).norm();
        if (slope > 0.0) best = std::min(best, std::abs(pre[u]) / slope);
        if (!(pre[u] > 0.0)) {
          pre[u] = 0.0;
          next_jac.row(u).setZero();
        }
      }
    }
    z = std::move(pre);
    jac = std::move(next_jac);
  }
  return best;
}

ReluNetwork identity_network(int dim) {
  return affine_network(Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Zero(dim));
}

ReluNetwork affine_network(Eigen::MatrixXd weight, Eigen::VectorXd bias) {
  const int in = static_cast<int>(weight.cols());
  std::vector<Layer> layers;
  layers.push_back(Layer{std::move(weight), std::move(bias), Activation::None});
  return ReluNetwork(in, std::move(layers));
}

ReluNetwork build_beta() {
  std::vector<Layer> layers;
  layers.push_back(Layer{Eigen::MatrixXd{{2.0}, {2.0}}, Eigen::VectorXd{{0.0, -1.0}}, Activation::Relu});
  layers.push_back(Layer{Eigen::MatrixXd{{1.0, -2.0}}, Eigen::VectorXd{{0.0}}, Activation::None});
  return ReluNetwork(1, std::move(layers));
}

ReluNetwork build_beta_chain(int count) {
  if (count < 1) throw std::invalid_argument("beta chain length must be >= 1");
  ReluNetwork chain = build_beta();
  for (int k = 1; k < count; ++k) chain = compose(build_beta(), chain);
  return chain;
}

ReluNetwork build_gamma_tail(double r) {
  if (!(std::abs(r) <= 0.5)) throw std::invalid_argument("gamma tail requires |r| <= 1/2");
  const double a = std::abs(r);
  // Kinks at |r|, 1/2 and 1 - |r|; slopes +1, 0 or -1, then back to 0.
  std::vector<Layer> layers;
  layers.push_back(Layer{Eigen::MatrixXd{{1.0}, {1.0}, {1.0}}, Eigen::VectorXd{{-a, -0.5, -(1.0 - a)}},
                         Activation::Relu});
  layers.push_back(Layer{Eigen::MatrixXd{{1.0, -2.0, 1.0}}, Eigen::VectorXd{{std::max(0.0, r)}}, Activation::None});
  return ReluNetwork(1, std::move(layers));
}

double gamma_kernel(double t, double r) {
  if (t > 0.5) t = 1.0 - t;
  const double a = std::abs(r);
  if (t <= a) return std::max(0.0, r);
  return t - std::max(0.0, -r);
}

ReluNetwork compose(const ReluNetwork& outer, const ReluNetwork& inner) {
  if (inner.output_dim() != outer.input_dim()) {
    throw std::invalid_argument("compose: inner output dimension " + std::to_string(inner.output_dim()) +
                                " does not match outer input dimension " + std::to_string(outer.input_dim()));
  }
  std::vector<Layer> layers(inner.layers().begin(), inner.layers().end() - 1);
  const Layer& last = inner.layers().back();
  const Layer& first = outer.layers().front();
  layers.push_back(Layer{first.weight * last.weight, first.weight * last.bias + first.bias, first.activation});
  layers.insert(layers.end(), outer.layers().begin() + 1, outer.layers().end());
  return ReluNetwork(inner.input_dim(), std::move(layers));
}

ReluNetwork scale_output(const ReluNetwork& net, double factor) {
  std::vector<Layer> layers = net.layers();
  layers.back().weight *= factor;
  layers.back().bias *= factor;
  return ReluNetwork(net.input_dim(), std::move(layers));
}

ReluNetwork precompose_affine(const ReluNetwork& net, const Eigen::MatrixXd& weight, const Eigen::VectorXd& bias) {
  return compose(net, affine_network(weight, bias));
}

int frequency_depth(double xi_l1) {
  if (!(xi_l1 >= 0.0) || !std::isfinite(xi_l1)) throw std::invalid_argument("frequency norm must be finite and >= 0");
  int exponent = 0;
  const double mantissa = std::frexp(2.0 + xi_l1, &exponent);
  return mantissa == 0.5 ? exponent - 1 : exponent;
}

const char* variant_name(Variant v) { return v == Variant::L2 ? "L2" : "H1"; }

Variant parse_variant(const std::string& name) {
  if (name == "L2" || name == "l2") return Variant::L2;
  if (name == "H1" || name == "h1") return Variant::H1;
  throw std::invalid_argument("unknown variant '" + name + "' (expected L2 or H1)");
}

ReluNetwork build_subnetwork(const SpectralTarget& target, const SubNetworkSpec& spec) {
  if (spec.mode_index >= target.modes().size()) throw std::invalid_argument("sub-network mode index out of range");
  if (!(std::abs(spec.r) <= 0.5)) throw std::invalid_argument("sub-network requires |r| <= 1/2");
  const FourierMode& mode = target.modes()[spec.mode_index];
  if (spec.depth_L != frequency_depth(mode.l1_norm())) {
    throw std::invalid_argument("sub-network depth_L does not match ceil(log2(2 + |xi|_1))");
  }
  if (!target.domain().inside_unit_cube()) throw std::invalid_argument("sub-network requires a domain inside [0,1]^d");

  const double n = std::ldexp(1.0, spec.depth_L);
  const Box& box = target.domain();
  const Eigen::ArrayXd lo_terms = mode.frequency.array() * box.lo.array();
  const Eigen::ArrayXd hi_terms = mode.frequency.array() * box.hi.array();
  const double t_min = (lo_terms.min(hi_terms).sum() + spec.theta) / n;
  const double t_max = (lo_terms.max(hi_terms).sum() + spec.theta) / n;
  constexpr double kSlack = 1e-12;
  if (t_min < -kSlack || t_max > 1.0 + kSlack) {
    throw std::domain_error("t(x) leaves [0,1] on the domain; theta is inconsistent with the mode");
  }

  ReluNetwork input = affine_network(mode.frequency.transpose() / n, Eigen::VectorXd::Constant(1, spec.theta / n));
  ReluNetwork net = compose(build_beta_chain(spec.depth_L), input);
  net = compose(build_gamma_tail(spec.r), net);
  return scale_output(net, spec.scale);
}

ReluNetwork merge(const std::vector<ReluNetwork>& subnets, int dim, double offset) {
  return merge(subnets, dim, offset, Box::unit(dim));
}

ReluNetwork merge(const std::vector<ReluNetwork>& subnets, int dim, double offset, const Box& domain) {
  if (subnets.empty()) throw std::invalid_argument("merge needs at least one sub-network");
  if (dim < 1) throw std::invalid_argument("merge dimension must be positive");
  if (!std::isfinite(offset) || offset < 0.0) throw std::invalid_argument("merge offset must be finite and >= 0");
  if (domain.dim() != dim) throw std::invalid_argument("merge domain dimension mismatch");
  if (domain.lo.minCoeff() < 0.0) {
    throw std::domain_error("merge: pass-through channels need a nonnegative domain");
  }

  int slot = 0;
  for (const auto& net : subnets) {
    if (net.input_dim() != dim) throw std::invalid_argument("merge: sub-network input dimension mismatch");
    if (net.output_dim() != 1) throw std::invalid_argument("merge: sub-networks must have scalar output");
    if (net.hidden_layers() < 1) throw std::invalid_argument("merge: sub-networks need at least one hidden layer");
    slot = std::max(slot, net.width());
  }

  const double inv_m = 1.0 / static_cast<double>(subnets.size());
  const Eigen::Index width = dim + slot + 1;
  const Eigen::Index acc = dim + slot;

  std::vector<Layer> layers;
  for (std::size_t i = 0; i < subnets.size(); ++i) {
    const auto& sub = subnets[i].layers();
    for (std::size_t j = 0; j + 1 < sub.size(); ++j) {
      const bool first_layer = layers.empty();
      Layer layer;
      layer.weight = Eigen::MatrixXd::Zero(width, first_layer ? dim : width);
      layer.bias = Eigen::VectorXd::Zero(width);
      layer.activation = Activation::Relu;
      layer.weight.topLeftCorner(dim, dim).setIdentity();

      const Layer& src = sub[j];
      const Eigen::Index rows = src.weight.rows();
      if (j == 0) {
        layer.weight.block(dim, 0, rows, dim) = src.weight;
      } else {
        layer.weight.block(dim, dim, rows, src.weight.cols()) = src.weight;
      }
      layer.bias.segment(dim, rows) = src.bias;

      if (first_layer) {
        layer.bias[acc] = offset;
      } else {
        layer.weight(acc, acc) = 1.0;
        if (j == 0) {
          // Close out the previous sub-network into the accumulator.
          const Layer& prev_out = subnets[i - 1].layers().back();
          layer.weight.block(acc, dim, 1, prev_out.weight.cols()) = inv_m * prev_out.weight;
          layer.bias[acc] = inv_m * prev_out.bias[0];
        }
      }
      layers.push_back(std::move(layer));
    }
  }

  const Layer& last_out = subnets.back().layers().back();
  Layer out;
  out.weight = Eigen::MatrixXd::Zero(1, width);
  out.weight(0, acc) = 1.0;
  out.weight.block(0, dim, 1, last_out.weight.cols()) = inv_m * last_out.weight;
  out.bias = Eigen::VectorXd::Constant(1, inv_m * last_out.bias[0] - offset);
  out.activation = Activation::None;
  layers.push_back(std::move(out));

  return ReluNetwork(dim, std::move(layers));
}

}  // namespace barronforge
