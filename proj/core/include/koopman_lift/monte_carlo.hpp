#pragma once

// Monte-Carlo expectations of dictionary functions under uniform parameter
// and measurement draws, and the bound checks built on them.

#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "koopman_lift/types.hpp"

namespace klift {

enum class McFunction { Logistic, Rbf, ConjLogistic, ConjRbf, H };

[[nodiscard]] std::string_view to_string(McFunction fn);
[[nodiscard]] McFunction parse_mc_function(std::string_view name);

struct McEstimate {
  double mean = 0.0;
  double variance = 0.0;
  double std_error = 0.0;
  long samples = 0;
};

/// y, mu ~ U[-a, a] and alpha ~ U(0, a], independently per coordinate.
/// Scalar functions ignore m. Results do not depend on `threads`.
[[nodiscard]] McEstimate mc_expectation(McFunction fn, double a, int m, long samples, std::uint64_t seed,
                                        int threads = 1);

enum class BoundRow { LogLimApprox, LogPrime, RbfLimApprox, RbfPrime };

[[nodiscard]] std::string_view to_string(BoundRow row);
[[nodiscard]] BoundRow parse_bound_row(std::string_view name);

struct BoundCheckConfig {
  int m = 2;
  int N_L = 2;
  int N_R = 2;
  long samples = 10000;
  double a = 2.0;  // radius for centers, points and weights; alpha ~ U(0, a]
  std::uint64_t seed = 0;
  long min_samples = 100;
  int threads = 1;

  void validate() const;
};

/// Error bound of one row for a given nu matrix (m x (N_L + N_R)).
[[nodiscard]] double table_bound(BoundRow row, int m, int N_L, const Mat& nu);

struct BoundCheckResult {
  BoundRow row = BoundRow::LogLimApprox;
  double mean_error = 0.0;  // Monte-Carlo mean of |difference|
  double error_se = 0.0;
  double mean_bound = 0.0;  // Monte-Carlo mean of the bound
  double margin = 0.0;      // mean_bound + 3 se - mean_error
  bool passed = false;
  bool inconclusive = false;
  std::string nu_interpretation = "nu_ij = |alpha_li * w_ij| per sample";
};

/// Draws theta_l, the dictionary terms, w and y, evaluates the row's
/// difference expression and bound per sample; passes iff
/// mean |difference| <= mean bound + 3 SE.
[[nodiscard]] BoundCheckResult bound_check_table(BoundRow row, const BoundCheckConfig& cfg);

struct OccupancyResult {
  double fraction = 0.0;
  double expected = 0.0;  // 2^-m
  double std_error = 0.0;
  bool within_3se = false;
};

/// Fraction of (theta_l, theta_k) draws with mu_l < mu_k in every coordinate.
[[nodiscard]] OccupancyResult h_occupancy(int m, double a, long samples, std::uint64_t seed);

[[nodiscard]] nlohmann::json to_json(const McEstimate& e);
[[nodiscard]] nlohmann::json to_json(const BoundCheckResult& r);
[[nodiscard]] nlohmann::json to_json(const OccupancyResult& r);

}  // namespace klift
