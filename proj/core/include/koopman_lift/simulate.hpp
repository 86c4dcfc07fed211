#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "koopman_lift/systems.hpp"

namespace klift {

/// Integration failure (non-finite right-hand side) at a given time.
class IntegrationError : public NumericalError {
 public:
  IntegrationError(const std::string& what, double time) : NumericalError(what), time_(time) {}
  [[nodiscard]] double time() const { return time_; }

 private:
  double time_;
};

struct Trajectory {
  std::string system_name;
  Vec times;     // T, constant spacing
  Mat states;    // T x n
  bool truncated = false;  // stopped early on blow-up

  [[nodiscard]] Index length() const { return states.rows(); }
  [[nodiscard]] double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

/// One classical fourth-order Runge-Kutta step; throws IntegrationError
/// (time `t`) if any stage is non-finite.
[[nodiscard]] Vec rk4_step(const Rhs& rhs, const Vec& x, double dt, double t = 0.0);

/// steps+1 recorded states at spacing dt, each interval split into
/// `substeps` RK4 steps. Blow-up past system.blowup_bound truncates the
/// trajectory and sets `truncated`.
[[nodiscard]] Trajectory simulate(const SystemDef& system, const Vec& x0, double dt, int steps,
                                  int substeps);

/// i.i.d. uniform draws from `box`, reproducible under `seed`.
[[nodiscard]] std::vector<Vec> sample_initials(const Box& box, int count, std::uint64_t seed);

enum class Split { Train, Test };

/// Consecutive measurement pairs (y_t, y_{t+dt}) with their trajectory of
/// origin. Rows are grouped by trajectory in input order.
struct SnapshotSet {
  double dt = 0.0;
  Mat X;
  Mat Xp;
  std::vector<int> trajectory_of_row;
  std::vector<Split> split_of_row;
  std::vector<int> train_trajectories;
  std::vector<int> test_trajectories;
  std::vector<std::string> warnings;

  [[nodiscard]] Index rows() const { return X.rows(); }
  [[nodiscard]] Index dim() const { return X.cols(); }
  /// Rows of one split only (same dt, trajectory tags preserved).
  [[nodiscard]] SnapshotSet subset(Split split) const;
  /// Rows whose trajectory index is in `keep`.
  [[nodiscard]] SnapshotSet select_trajectories(const std::vector<int>& keep) const;
};

/// Whole trajectories are assigned to train or test: a seeded shuffle of
/// trajectory indices, the first round(train_fraction * count) go to train.
[[nodiscard]] SnapshotSet build_snapshots(const std::vector<Trajectory>& trajectories,
                                          double train_fraction, std::uint64_t seed);

/// Snapshot pairs of every trajectory, all tagged train.
[[nodiscard]] SnapshotSet snapshots_of(const std::vector<Trajectory>& trajectories);

/// Splits one long trajectory into consecutive windows of `window` rows that
/// share their boundary state; used when data come from a single initial
/// condition.
[[nodiscard]] std::vector<Trajectory> split_trajectory(const Trajectory& traj, int window);

/// Simulation settings shared by the CLI and the experiment drivers.
struct SimulationConfig {
  double dt = 0.1;
  int steps = 50;
  int substeps = 10;
  int train_trajectories = 100;
  int test_trajectories = 20;
  std::uint64_t seed = 0;
};

struct Dataset {
  std::string system_name;
  std::vector<Trajectory> train;
  std::vector<Trajectory> test;
  SnapshotSet snapshots;  // train pairs only
};

/// Samples initial conditions from the system's default box and simulates
/// train + test trajectories (truncated ones are dropped).
[[nodiscard]] Dataset make_dataset(const SystemDef& system, const SimulationConfig& cfg,
                                   int threads = 1);

}  // namespace klift
