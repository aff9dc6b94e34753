#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "barronforge/spectral.hpp"

namespace barronforge {

enum class Activation { Relu, None };

struct Layer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
  Activation activation = Activation::Relu;
};

/// Feed-forward ReLU network: every layer but the last is affine-then-ReLU,
/// the last is affine only.
///
/// depth() counts affine maps, width() is the largest hidden-layer output
/// dimension (0 for a purely affine network).
class ReluNetwork {
 public:
  ReluNetwork(int input_dim, std::vector<Layer> layers);

  int input_dim() const noexcept { return input_dim_; }
  int output_dim() const { return static_cast<int>(layers_.back().bias.size()); }
  const std::vector<Layer>& layers() const noexcept { return layers_; }

  int depth() const noexcept { return static_cast<int>(layers_.size()); }
  int hidden_layers() const noexcept { return depth() - 1; }
  int width() const;
  std::size_t param_count() const;

  Eigen::VectorXd eval(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Evaluates every column of a (input_dim x n) matrix; returns (output_dim x n).
  Eigen::MatrixXd eval_batch(const Eigen::Ref<const Eigen::MatrixXd>& points) const;

  /// Piecewise-constant Jacobian (output_dim x input_dim) with ReLU'(0) = 0.
  Eigen::MatrixXd jacobian(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Values and input gradients of a scalar-output network at every column.
  /// `values` has length n, `gradients` is (input_dim x n).
  void eval_with_gradient_batch(const Eigen::Ref<const Eigen::MatrixXd>& points, Eigen::VectorXd& values,
                                Eigen::MatrixXd& gradients) const;

  /// Lower bound on the Euclidean distance from x to the nearest point where
  /// some hidden unit changes sign, using the locally affine pre-activations.
  /// Infinity for purely affine networks.
  double kink_distance(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  int input_dim_;
  std::vector<Layer> layers_;
};

ReluNetwork identity_network(int dim);

/// Single affine map x -> weight * x + bias.
ReluNetwork affine_network(Eigen::MatrixXd weight, Eigen::VectorXd bias);

/// beta(t) = ReLU(2t) - 2 ReLU(2t - 1).
ReluNetwork build_beta();

/// beta composed with itself `count` times (count >= 1).
ReluNetwork build_beta_chain(int count);

/// Exact realization of gamma(., r) on [0, 1] with one hidden layer of width 3.
ReluNetwork build_gamma_tail(double r);

/// Closed-form gamma(t, r) by its three-branch definition, t in [0,1], |r| <= 1/2.
double gamma_kernel(double t, double r);

/// outer(inner(x)); the final affine map of inner is fused into the first map
/// of outer, so depth(result) = depth(outer) + depth(inner) - 1.
ReluNetwork compose(const ReluNetwork& outer, const ReluNetwork& inner);

/// Multiplies the network output by `factor` (folded into the last layer).
ReluNetwork scale_output(const ReluNetwork& net, double factor);

/// net(A x + b), folded into the first layer.
ReluNetwork precompose_affine(const ReluNetwork& net, const Eigen::MatrixXd& weight,
                              const Eigen::VectorXd& bias);

/// ceil(log2(2 + l1)) computed without rounding surprises at powers of two.
int frequency_depth(double xi_l1);

enum class Variant { L2, H1 };

const char* variant_name(Variant v);
Variant parse_variant(const std::string& name);

/// Parameters of one sampled sub-network F(x; xi, r).
struct SubNetworkSpec {
  std::size_t mode_index = 0;
  double r = 0.0;
  int depth_L = 1;
  double theta = 0.0;
  double scale = 0.0;
};

/// Sub-network computing scale * gamma(n * t(x) mod 1, r), where
/// t(x) = (xi . x + theta) / n and n = 2^depth_L: an input affine map, depth_L
/// beta layers, then the gamma tail. Throws when t leaves [0,1] at a corner of
/// the target domain, which means theta is inconsistent with the mode.
ReluNetwork build_subnetwork(const SpectralTarget& target, const SubNetworkSpec& spec);

/// Stacks scalar sub-networks into one network of width d + N + 1 (N the
/// largest sub-network width) computing their arithmetic mean on `domain`.
///
/// The first d channels carry x through every layer, the next N carry the
/// active sub-network, and the last one accumulates the running average. The
/// output map of sub-network i-1 and the input map of sub-network i share a
/// layer, so hidden layers add up exactly. The accumulator is held at
/// `offset` + partial average so it survives the ReLU; the output layer
/// subtracts `offset` again.
ReluNetwork merge(const std::vector<ReluNetwork>& subnets, int dim, double offset, const Box& domain);
ReluNetwork merge(const std::vector<ReluNetwork>& subnets, int dim, double offset);

}  // namespace barronforge
