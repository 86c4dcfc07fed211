#pragma once

// Numerical checks of the product-approximation limits and of the
// Lie-derivative approximation chain for augSILL dictionaries.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "koopman_lift/lifting.hpp"

namespace klift {

/// P(y; theta_k) if mu_l < mu_k in every coordinate, else 0.
[[nodiscard]] double decision_H(const Vec& y, const DictParams& theta_l, const DictParams& theta_k);

/// Lambda(y; theta_l) P(y; theta_k) - H(y; theta_l, theta_k).
[[nodiscard]] double product_error_LP(const Vec& y, const DictParams& theta_l, const DictParams& theta_k);
/// P(y; theta_l) P(y; theta_k).
[[nodiscard]] double product_error_PP(const Vec& y, const DictParams& theta_l, const DictParams& theta_k);
/// Lambda(y; theta_l) Lambda(y; theta_j) - Lambda(y; theta*).
[[nodiscard]] double product_error_LL(const Vec& y, const DictParams& theta_l, const DictParams& theta_j);

enum class ClosureCase { LL, LPOrdered, LPDisordered, PP };

[[nodiscard]] std::string_view to_string(ClosureCase c);
/// "LL", "LP_ordered", "LP_disordered", "PP" (case-insensitive).
[[nodiscard]] ClosureCase parse_closure_case(std::string_view name);
[[nodiscard]] std::vector<ClosureCase> all_closure_cases();

struct ClosureConfig {
  int m = 2;
  int N_L = 2;
  int N_R = 2;
  std::vector<double> alpha_grid{2, 4, 8, 16, 32, 64};
  int sample_count = 50;       // random configurations per sweep
  int points_per_config = 8;   // test points per configuration
  double interval_radius = 1.0;  // centers and points drawn from [-a, a]
  double margin = 0.1;         // min distance of test points from every center coordinate
  std::uint64_t seed = 0;
  double slope_threshold = 0.05;  // pass needs slope < -slope_threshold
  double monotone_tol = 1e-12;    // relative slack for the non-increasing check
  double required_fraction = 0.95;
  int threads = 1;

  void validate() const;
};

[[nodiscard]] nlohmann::json closure_config_to_json(const ClosureConfig& cfg);
[[nodiscard]] ClosureConfig closure_config_from_json(const nlohmann::json& j, ClosureConfig base = {});

struct ConfigSweep {
  std::vector<double> max_error;  // per alpha
  double slope = 0.0;             // -inf when every error is exactly zero
  bool slope_ok = false;
  bool monotone = false;          // non-increasing after the first grid point
  bool endpoint_ok = false;       // error(alpha_max) < error(alpha = 4, or the first alpha >= 4)
  bool monotone_required = true;  // false for the corollary pairs (explicit alpha prefactor)
  [[nodiscard]] bool passed() const { return slope_ok && endpoint_ok && (monotone || !monotone_required); }
};

struct CaseResult {
  std::string name;
  int m = 0;
  std::vector<double> alpha_grid;
  std::vector<ConfigSweep> configs;
  std::vector<double> sup_error;  // max over configurations, per alpha
  double pass_fraction = 0.0;
  double median_slope = 0.0;
  bool passed = false;
};

struct ClosureReport {
  std::vector<CaseResult> cases;
  std::vector<CaseResult> corollaries;
  [[nodiscard]] bool all_passed() const;
};

/// Random margin-separated configurations; each is evaluated on the whole
/// alpha grid with every steepness component set to the grid value.
[[nodiscard]] CaseResult convergence_sweep(ClosureCase c, const ClosureConfig& cfg);

/// Weights of the vector field F_i(y) = sum_j w_ij Lambda_j + sum_k w_ik P_k
/// over the nonlinear terms of a dictionary (m x (N_L + N_R)).
struct FieldExpansion {
  Mat w;
};

/// F(y) for an augSILL dictionary.
[[nodiscard]] Vec field_eval(const Dictionary& dict, const FieldExpansion& f, const Vec& y);

enum class TermKind { Logistic, Rbf };

/// The forms that connect the Lie derivative of Lambda_l (or P_l) with its
/// linear approximation.
enum class ChainForm {
  LogPrime,      // exact bilinear expansion for Lambda_l
  LogLimApprox,  // sum a w (1 - lambda) Lambda(theta*) + sum a w (1 - lambda) H(l, k)
  Cor3Pre,       // sum a w Lambda_l Lambda_j + sum a w Lambda_l P_k
  Cor3Post,      // sum a w Lambda(theta*) + sum a w H(l, k)
  RbfPrime,      // exact bilinear expansion for P_l
  RbfLimApprox,  // sum a w (1 - 2 lambda) H(j, l)
  Cor4Pre,       // sum a w P_l Lambda_j + sum a w P_l P_k
  Cor4Post,      // sum a w H(j, l)
};

[[nodiscard]] std::string_view to_string(ChainForm form);

/// Evaluates one form; theta_l is the differentiated observable, the
/// remaining terms come from `dict` (augSILL).
[[nodiscard]] double lie_chain_form(ChainForm form, const Dictionary& dict, const DictParams& theta_l,
                                    const FieldExpansion& f, const Vec& y);

[[nodiscard]] double lie_derivative_exact(TermKind kind, const Dictionary& dict, const DictParams& theta_l,
                                          const FieldExpansion& f, const Vec& y);
[[nodiscard]] double lie_derivative_linear_approx(TermKind kind, const Dictionary& dict,
                                                  const DictParams& theta_l, const FieldExpansion& f,
                                                  const Vec& y);

/// Linear approximation written as k^T psi(y) over `dict` extended with any
/// theta* (and theta_l) terms it lacks.
struct LinearRow {
  Dictionary dict;
  Vec k;
};
[[nodiscard]] LinearRow linear_approx_row(TermKind kind, const Dictionary& dict, const DictParams& theta_l,
                                          const FieldExpansion& f);

/// Pre / post pairs of the chain swept like the theorem cases, except that
/// monotonicity is reported but not required:
/// LogPrime vs LogLimApprox, RbfPrime vs RbfLimApprox, Cor3Pre vs Cor3Post,
/// Cor4Pre vs Cor4Post.
[[nodiscard]] std::vector<CaseResult> corollary_sweeps(const ClosureConfig& cfg);

[[nodiscard]] ClosureReport verify_closure(const std::vector<ClosureCase>& cases, const ClosureConfig& cfg,
                                           bool with_corollaries = true);

[[nodiscard]] nlohmann::json closure_report_to_json(const ClosureReport& report);
/// closure_report.json, <case>.csv (alpha,max_error) and <case>.svg.
void write_closure_artifacts(const ClosureReport& report, const std::filesystem::path& dir);

}  // namespace klift
