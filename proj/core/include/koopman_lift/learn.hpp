#pragma once

// Koopman model fitting: closed-form DMD / EDMD, joint SGD over the
// dictionary parameters and K, and full matching pursuit.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "koopman_lift/lifting.hpp"
#include "koopman_lift/simulate.hpp"

namespace klift {

/// One row of a loss trace. test_5step is NaN on epochs where the test
/// error was not evaluated.
struct TraceRow {
  int epoch = 0;
  double train_loss = 0.0;
  double test_5step = 0.0;
};

struct TrainingMeta {
  std::string method;
  std::uint64_t seed = 0;
  int epochs = 0;
  double train_loss = 0.0;        // mean squared lifted residual
  double condition_number = 0.0;  // of the regularized Gram matrix (closed-form fits)
  bool used_pseudo_inverse = false;
  bool aborted = false;
  std::vector<TraceRow> trace;
  std::vector<double> pursuit_objective;  // matching pursuit: objective after each round
  std::vector<std::string> warnings;
};

/// psi(y') ~ K psi(y); rows 1..m of psi are the state readout.
struct KoopmanModel {
  Dictionary dict;
  Mat K;
  double dt = 0.0;
  TrainingMeta meta;

  [[nodiscard]] int size() const { return dict.size(); }
  /// N^2 + 2 m (N_L + N_R).
  [[nodiscard]] int param_count() const;
  void validate() const;
};

[[nodiscard]] nlohmann::json model_to_json(const KoopmanModel& model);
[[nodiscard]] KoopmanModel model_from_json(const nlohmann::json& j);

struct TrainConfig {
  int epochs = 1000;
  int batch_size = 32;
  double learning_rate = 1e-2;
  std::uint64_t seed = 0;
  double ridge = 1e-8;
  double alpha_floor = 1e-2;
  /// Test-error evaluation period in epochs (epoch 0 and the last epoch are
  /// always evaluated).
  int log_every = 10;
  int eval_steps = 5;
  /// Update (mu, alpha) alongside K; ignored for polynomial dictionaries.
  bool train_dictionary = true;

  void validate() const;
};

[[nodiscard]] nlohmann::json train_config_to_json(const TrainConfig& cfg);
[[nodiscard]] TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

/// Least-squares solution of PsiNext ~ Psi K^T.
struct LiftedFit {
  Mat K;
  double residual_sum = 0.0;   // sum_r ||psi' - K psi||^2
  double residual_mean = 0.0;  // residual_sum / r
  double condition_number = 0.0;
  bool used_pseudo_inverse = false;
};

enum class SolveMethod { Gram, PivotedQR };

/// Ridge-regularized closed-form solve. With ridge == 0 and a rank-deficient
/// Psi the pseudo-inverse solution is returned and flagged.
[[nodiscard]] LiftedFit solve_lifted(const Mat& Psi, const Mat& PsiNext, double ridge,
                                     SolveMethod method = SolveMethod::Gram);

/// Identity lifting [1, y]; pivoted-QR ridge least squares.
[[nodiscard]] KoopmanModel dmd_fit(const SnapshotSet& snapshots, double ridge = 1e-8);

/// Fixed dictionary, K from the regularized normal equations. If N > r the
/// ridge is raised to at least 1e-8 and a warning recorded.
[[nodiscard]] KoopmanModel edmd_fit(const Dictionary& dict, const SnapshotSet& snapshots,
                                    double ridge = 1e-8);

/// Per-dimension [min, max] over X and Xp.
[[nodiscard]] Box data_range(const SnapshotSet& snapshots);

/// Initial dictionary of total size N: for parametric kinds, centers uniform
/// over the data range and unit steepness (augSILL splits the nonlinear
/// budget as N_L = ceil(n/2), N_R = floor(n/2)). Polynomial kinds act on raw
/// measurements unless `scale_polynomials` maps the data range onto [-1, 1].
[[nodiscard]] Dictionary initial_dictionary(DictKind kind, int m, int N, const Box& range,
                                            std::uint64_t seed, bool scale_polynomials = false);

/// Loss (1/B) sum_b ||psi(y'_b) - K psi(y_b)||^2 over `rows`, with its
/// gradients with respect to K and to pack_params(dict).
struct BatchGradient {
  double loss = 0.0;
  Mat grad_K;
  Vec grad_params;
};
[[nodiscard]] BatchGradient batch_loss_and_gradient(const Dictionary& dict, const Mat& K,
                                                    const Mat& X, const Mat& Xp,
                                                    std::span<const Index> rows);

/// Mean squared lifted one-step residual over all rows.
[[nodiscard]] double lifted_loss(const Dictionary& dict, const Mat& K, const Mat& X, const Mat& Xp);

/// Joint mini-batch SGD on K and the dictionary parameters. K starts at the
/// identity. Trace rows cover epochs 0..epochs; test_5step is evaluated on
/// `test` every cfg.log_every epochs. A non-finite loss stops training and
/// restores the last finite epoch (meta.aborted = true).
[[nodiscard]] KoopmanModel sgd_train(const Dictionary& dict_init, const SnapshotSet& train,
                                     std::span<const Trajectory> test, const TrainConfig& cfg);

enum class PursuitObjective {
  /// One-step residual of the constant and state rows (fixed target, so the
  /// objective is non-increasing round to round).
  StateRows,
  /// Full lifted residual including the candidate's own row.
  Lifted,
};

struct PursuitConfig {
  int pool_size = 200;
  double alpha_lo = 0.5;
  double alpha_hi = 5.0;
  std::uint64_t seed = 0;
  double ridge = 1e-8;
  int threads = 1;
  PursuitObjective objective = PursuitObjective::StateRows;
};

[[nodiscard]] std::string_view to_string(PursuitObjective objective);
[[nodiscard]] PursuitObjective parse_pursuit_objective(std::string_view name);

/// Greedy full matching pursuit: starting from [1, y], each round samples
/// a fresh candidate pool, refits K with every candidate appended, and keeps
/// the candidate with the lowest objective (ties: lowest index).
[[nodiscard]] KoopmanModel matching_pursuit_fit(DictKind kind, const PursuitConfig& cfg,
                                                const SnapshotSet& snapshots, int N_target);

}  // namespace klift
