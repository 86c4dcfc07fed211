#pragma once

// Dictionary function families: conjunctive logistic and conjunctive RBF
// observables (SILL / augSILL), summed one-dimensional RBFs, and the
// Legendre / Hermite polynomial baselines.

#include <string>
#include <string_view>
#include <vector>

#include "koopman_lift/types.hpp"

namespace klift {

/// Center / steepness pair for one measurement dimension.
struct ScalarParam {
  double mu = 0.0;
  double alpha = 1.0;
};

/// Center and steepness vectors (theta_k) of one conjunctive observable.
struct DictParams {
  Vec mu;
  Vec alpha;

  DictParams() = default;
  DictParams(Vec mu_, Vec alpha_);

  [[nodiscard]] Index dim() const { return mu.size(); }
  [[nodiscard]] ScalarParam at(Index i) const { return {mu[i], alpha[i]}; }
  [[nodiscard]] bool all_alpha_positive() const;

  friend bool operator==(const DictParams& a, const DictParams& b);
};

enum class DictKind { AugSILL, SILL, SummedRBF, Legendre, Hermite };

[[nodiscard]] std::string_view to_string(DictKind kind);
/// Accepts "augsill", "sill", "summedrbf" (also "summed_rbf"), "legendre",
/// "hermite"; case-insensitive.
[[nodiscard]] DictKind parse_dict_kind(std::string_view name);
[[nodiscard]] bool is_parametric(DictKind kind);
[[nodiscard]] bool is_polynomial(DictKind kind);

class UnsupportedKindError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exponent arguments are clamped to this magnitude so that steep sweeps
/// saturate instead of producing Inf/NaN.
inline constexpr double kExpClamp = 500.0;

/// 1 / (1 + exp(-alpha (y - mu))).
[[nodiscard]] double logistic_eval(double y, ScalarParam p);
/// exp(-alpha (y - mu)) / (1 + exp(-alpha (y - mu)))^2, i.e. lambda - lambda^2.
[[nodiscard]] double rbf_eval(double y, ScalarParam p);

[[nodiscard]] double conj_logistic_eval(const Vec& y, const DictParams& p);
[[nodiscard]] double conj_rbf_eval(const Vec& y, const DictParams& p);
/// (1/m) sum_i rho(y_i; theta_i).
[[nodiscard]] double summed_rbf_eval(const Vec& y, const DictParams& p);

/// [grad Lambda]_i = alpha_i (1 - lambda_i) Lambda.
[[nodiscard]] Vec grad_y_conj_logistic(const Vec& y, const DictParams& p);
/// [grad P]_i = alpha_i (1 - 2 lambda_i) P.
[[nodiscard]] Vec grad_y_conj_rbf(const Vec& y, const DictParams& p);

/// Legendre polynomial P_n(x) by the Bonnet recurrence.
[[nodiscard]] double legendre(int n, double x);
/// Probabilists' Hermite polynomial He_n(x).
[[nodiscard]] double hermite(int n, double x);

/// The first `count` multi-indices of total degree >= 2 in graded
/// lexicographic order (degree ascending, then first coordinate descending).
[[nodiscard]] std::vector<std::vector<int>> graded_multi_indices(int m, int count);

/// Affine map applied to measurements before polynomial evaluation:
/// u_i = (y_i - center_i) / half_width_i.
struct PolyDomain {
  Vec center;
  Vec half_width;
};

struct Dictionary {
  DictKind kind = DictKind::AugSILL;
  int m = 0;
  std::vector<DictParams> logistic_terms;
  std::vector<DictParams> rbf_terms;  // summed-RBF terms live here too
  std::vector<std::vector<int>> poly_degree_indices;
  PolyDomain poly_domain;  // polynomial kinds only; identity when empty

  /// N = 1 + m + number of nonlinear observables.
  [[nodiscard]] int size() const;
  [[nodiscard]] int nonlinear_size() const;
  [[nodiscard]] int logistic_count() const { return static_cast<int>(logistic_terms.size()); }
  [[nodiscard]] int rbf_count() const { return static_cast<int>(rbf_terms.size()); }
  /// Number of (mu, alpha) scalars: 2 m (N_L + N_R); zero for polynomials.
  [[nodiscard]] int param_count() const;
  /// Throws DimensionError / UnsupportedKindError on a malformed dictionary.
  void validate() const;

  friend bool operator==(const Dictionary& a, const Dictionary& b);
};

/// [1, y] only (the DMD lifting).
[[nodiscard]] Dictionary make_identity_dictionary(int m);
[[nodiscard]] Dictionary make_augsill(int m, std::vector<DictParams> logistic,
                                      std::vector<DictParams> rbf);
[[nodiscard]] Dictionary make_sill(int m, std::vector<DictParams> logistic);
[[nodiscard]] Dictionary make_summed_rbf(int m, std::vector<DictParams> terms);
/// Polynomial dictionary of total size N (graded multi-indices).
[[nodiscard]] Dictionary make_polynomial(DictKind kind, int m, int N, PolyDomain domain = {});

/// psi(y) = [1, y, Lambda_1..Lambda_NL, P_1..P_NR] (or the polynomial /
/// summed-RBF block in place of the conjunctive terms).
[[nodiscard]] Vec dict_eval(const Dictionary& d, const Vec& y);
/// Row-wise lifting of an (r x m) measurement matrix into (r x N).
[[nodiscard]] Mat dict_eval_rows(const Dictionary& d, const Mat& Y);

/// Jacobian of psi(y) with respect to all dictionary parameters, shape
/// N x param_count(). Column layout: for every nonlinear term in output
/// order, [mu_1..mu_m, alpha_1..alpha_m].
[[nodiscard]] Mat grad_params_dict(const Dictionary& d, const Vec& y);

/// Lifts y and, for parametric kinds, fills `term_grads` (n_terms x 2m):
/// row t is d psi_{1+m+t} / d theta_t laid out as [d mu, d alpha].
void lift_with_term_gradients(const Dictionary& d, const Vec& y, Vec& psi, Mat& term_grads);

/// Flattened parameters in the grad_params_dict column layout.
[[nodiscard]] Vec pack_params(const Dictionary& d);
void unpack_params(Dictionary& d, const Vec& params);

/// Target of the Lambda_a * Lambda_b product limit: elementwise-max center,
/// steepness taken from whichever factor owns that center.
[[nodiscard]] DictParams product_target(const DictParams& a, const DictParams& b);

}  // namespace klift
