#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace barronforge {

struct RademacherConfig {
  int n = 256;
  int d = 4;
  double Q = 1.0;
  int sigma_draws = 64;
  int shells = 12;
  int candidates_per_shell = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RademacherResult {
  /// Lower estimate of the empirical Rademacher complexity of the Q-ball.
  double estimate = 0.0;
  /// Q sqrt(d / n), the bound with its constant set to 1.
  double bound = 0.0;
  int candidate_count = 0;
};

/// Q times the sigma-average of the max over candidate frequencies of
/// |(1/n) sum_j sigma_j exp(2 pi i xi . x_j)| / log2(2 + |xi|_1).
///
/// Data points are uniform on [-1,1]^d. Candidates are xi = 0 plus
/// `candidates_per_shell` random frequencies with |xi|_1 in [2^k, 2^(k+1))
/// for k = 0..shells and |xi|_1 < 1 for k = -1. Each shell draws from its own
/// substream, so raising candidates_per_shell only appends candidates.
RademacherResult rademacher_estimate(const RademacherConfig& config);

/// Dyadic-shell amplitude profile of one embedding counterexample.
///
/// Prop42: constant c_k = 2^-(d/2+s)k / k on Euclidean shells
/// 2^k <= |xi| < 2^(k+1). Prop43: height m_k = k^p 2^k on a set of measure
/// k^-2p 2^-k inside each l1 shell.
struct ShellSpectrum {
  enum class Construction { Prop42, Prop43 };

  int d = 2;
  double s = 1.0;
  Construction construction = Construction::Prop42;
  /// Exponent of the prop43 construction; must exceed 2.
  double p = 3.0;
  int K = 60;

  void validate() const;
};

struct SeriesRow {
  int k = 0;
  /// log2 of the shell increment and of the running partial sum.
  double hs_increment_log2 = 0.0;
  double hs_partial_log2 = 0.0;
  double blog_increment_log2 = 0.0;
  double blog_partial_log2 = 0.0;

  double hs_partial() const;
  double blog_partial() const;
};

/// Verdict on one accumulated series.
struct SeriesVerdict {
  enum class Model { Geometric, PowerLaw };

  bool convergent = false;
  /// Literal relative-increment test: last increment < 1e-9 * partial sum.
  bool increment_test = false;
  Model model = Model::Geometric;
  /// Trailing increment ratio a_K / a_{K-1}.
  double ratio = 0.0;
  /// Fitted decay exponent p in a_k ~ k^-p over the trailing window.
  double power_exponent = 0.0;

  std::string describe() const;
};

struct EmbeddingTable {
  ShellSpectrum spec;
  std::vector<SeriesRow> rows;
  SeriesVerdict hs;
  SeriesVerdict blog;
};

/// Per-shell Sobolev and log-Barron series of the embedding counterexamples,
/// accumulated in log2 space so shells with astronomically large terms stay
/// finite.
EmbeddingTable embedding_series(const ShellSpectrum& spec);

/// Classifies a positive series from log2 increments (k starting at 1).
/// Geometric and power-law decay models are both fitted over the trailing
/// half of the terms and the better fit decides: geometric converges iff the
/// ratio is below 1, power law iff the exponent exceeds 1.
SeriesVerdict classify_series(const std::vector<double>& increment_log2, const std::vector<double>& partial_log2);

/// Volume of the Euclidean unit ball in R^d.
double unit_ball_volume(int d);

}  // namespace barronforge
