#pragma once

// Prediction-error metrics, dictionary comparison runs and report writers.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "koopman_lift/learn.hpp"

namespace klift {

struct Rollout {
  Mat states;  // n x m, row k is the prediction after k+1 steps
  bool diverged = false;
  int diverged_at = -1;  // first step (1-based) with a non-finite or runaway value
};

/// Lift once (z0 = psi(y0)), iterate z_{k+1} = K z_k and read rows 1..m.
/// With relift = true the prediction is re-lifted every step (diagnostic
/// only).
[[nodiscard]] Rollout predict_n_steps(const KoopmanModel& model, const Vec& y0, int n,
                                      bool relift = false);

struct EvalReport {
  std::string model_id;
  int n_step = 5;
  Vec mse_per_step;          // mean over initial conditions, per step
  double mean_5step = 0.0;   // mse at step n_step (headline number)
  double mean_over_steps = 0.0;  // average of mse_per_step
  int test_size = 0;         // initial conditions that entered the mean
  int diverged_count = 0;    // excluded from the mean
};

/// Every state of every test trajectory that has n_step successors is an
/// initial condition; the squared error is averaged over state components.
[[nodiscard]] EvalReport five_step_error(const KoopmanModel& model,
                                         std::span<const Trajectory> test, int n_step = 5,
                                         int threads = 1, bool relift = false);

[[nodiscard]] nlohmann::json eval_report_to_json(const EvalReport& report);

struct CompareConfig {
  std::vector<std::string> systems;
  std::vector<DictKind> kinds;
  std::vector<int> sizes{5, 10, 20};
  SimulationConfig simulation;
  TrainConfig train;
  bool scale_polynomials = false;
  int threads = 1;
};

struct CompareCell {
  std::string system;
  DictKind kind = DictKind::AugSILL;
  int N = 0;
  std::vector<TraceRow> trace;
  double final_5step = 0.0;
  double dmd_5step = 0.0;
  std::string error;  // non-empty when the cell failed
};

struct ComparisonTable {
  std::vector<CompareCell> cells;

  [[nodiscard]] const CompareCell* find(std::string_view system, DictKind kind, int N) const;
};

/// Trains every (system, kind, N) cell with sgd_train on a dataset shared
/// per system. A failing cell is recorded, not rethrown.
[[nodiscard]] ComparisonTable compare_dictionaries(const CompareConfig& cfg);

/// CSV `system,kind,N,epoch,train_loss,test_5step` (17 significant digits).
void write_comparison_csv(const ComparisonTable& table, const std::filesystem::path& path);
/// One SVG per system: log-scale 5-step error vs epoch, one line per (kind, N).
std::vector<std::filesystem::path> write_comparison_svgs(const ComparisonTable& table,
                                                         const std::filesystem::path& dir);
/// CSV `epoch,train_loss,test_5step`.
void write_trace_csv(const std::vector<TraceRow>& trace, const std::filesystem::path& path);

}  // namespace klift
