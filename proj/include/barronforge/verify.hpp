#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace barronforge {

struct CheckResult {
  std::string name;
  /// Largest observed deviation (or violation) and the allowed maximum.
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  double seconds = 0.0;
};

struct VerifyOptions {
  /// Shifts the first gamma-tail bias by this amount (fault injection).
  double gamma_bias_fault = 0.0;
  int cos_lemma_max_n = 64;
  int cos_lemma_t_points = 512;
  int cos_lemma_r_points = 100000;
  int composition_max_L = 10;
  int composition_r_draws = 100;
  std::uint64_t seed = 0;
};

/// Exactness suite for the network primitives and the identities they rely on:
/// beta and gamma against their closed forms, the beta-chain composition law,
/// the cosine integral identity and the sub-multiplicative log inequality.
std::vector<CheckResult> run_verify_suite(const VerifyOptions& options = {});

}  // namespace barronforge
