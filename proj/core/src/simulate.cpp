#include "koopman_lift/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "koopman_lift/rng.hpp"

namespace klift {

Vec rk4_step(const Rhs& rhs, const Vec& x, double dt, double t) {
  if (!(dt > 0.0)) throw DomainError("rk4_step: dt must be positive");
  auto checked = [&](const Vec& v) {
    if (!v.allFinite()) throw IntegrationError("rk4_step: non-finite derivative", t);
    return v;
  };
  const Vec k1 = checked(rhs(x));
  const Vec k2 = checked(rhs(x + 0.5 * dt * k1));
  const Vec k3 = checked(rhs(x + 0.5 * dt * k2));
  const Vec k4 = checked(rhs(x + dt * k3));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory simulate(const SystemDef& system, const Vec& x0, double dt, int steps, int substeps) {
  if (steps < 1) throw DomainError("simulate: at least one step is required");
  if (substeps < 1) throw DomainError("simulate: substeps must be >= 1");
  require_dim(x0.size(), system.n, "simulate initial state");
  Trajectory traj;
  traj.system_name = system.name;
  Mat states(steps + 1, system.n);
  states.row(0) = x0.transpose();
  const double h = dt / substeps;
  Vec x = x0;
  Index recorded = 1;
  for (int s = 1; s <= steps; ++s) {
    for (int k = 0; k < substeps && !traj.truncated; ++k) {
      x = rk4_step(system.rhs, x, h, (s - 1) * dt + k * h);
      traj.truncated = x.lpNorm<Eigen::Infinity>() > system.blowup_bound;
    }
    if (traj.truncated) break;
    states.row(recorded++) = x.transpose();
  }
  traj.states = states.topRows(recorded);
  traj.times = Vec::LinSpaced(recorded, 0.0, dt * static_cast<double>(recorded - 1));
  if (recorded == 1) traj.times = Vec::Zero(1);
  return traj;
}

std::vector<Vec> sample_initials(const Box& box, int count, std::uint64_t seed) {
  if (count < 0) throw DomainError("sample_initials: negative count");
  require_dim(box.hi.size(), box.lo.size(), "sample_initials box");
  Rng rng(seed);
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int c = 0; c < count; ++c) {
    Vec x(box.dim());
    for (Index i = 0; i < box.dim(); ++i) x[i] = rng.uniform(box.lo[i], box.hi[i]);
    out.push_back(std::move(x));
  }
  return out;
}

namespace {

void append_pairs(SnapshotSet& set, const Trajectory& t, int index, Split split, Index& row) {
  for (Index k = 0; k + 1 < t.length(); ++k) {
    set.X.row(row) = t.states.row(k);
    set.Xp.row(row) = t.states.row(k + 1);
    set.trajectory_of_row.push_back(index);
    set.split_of_row.push_back(split);
    ++row;
  }
}

SnapshotSet assemble(const std::vector<Trajectory>& trajectories, const std::vector<Split>& splits) {
  SnapshotSet set;
  Index total = 0;
  Index dim = -1;
  for (const auto& t : trajectories) {
    if (t.length() >= 2) total += t.length() - 1;
    if (dim < 0 && t.length() > 0) dim = t.states.cols();
  }
  if (total == 0) throw DomainError("build_snapshots: no trajectory has two or more rows");
  set.dt = 0.0;
  set.X.resize(total, dim);
  set.Xp.resize(total, dim);
  Index row = 0;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const auto& t = trajectories[i];
    if (t.length() > 0) require_dim(t.states.cols(), dim, "build_snapshots state dimension");
    if (set.dt == 0.0 && t.length() > 1) set.dt = t.dt();
    append_pairs(set, t, static_cast<int>(i), splits[i], row);
    (splits[i] == Split::Train ? set.train_trajectories : set.test_trajectories)
        .push_back(static_cast<int>(i));
  }
  return set;
}

}  // namespace

SnapshotSet build_snapshots(const std::vector<Trajectory>& trajectories, double train_fraction,
                            std::uint64_t seed) {
  if (train_fraction < 0.0 || train_fraction > 1.0) {
    throw DomainError("build_snapshots: train_fraction must lie in [0, 1]");
  }
  const std::size_t count = trajectories.size();
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = count; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(count)));
  std::vector<Split> splits(count, Split::Test);
  for (std::size_t i = 0; i < n_train; ++i) splits[order[i]] = Split::Train;
  SnapshotSet set = assemble(trajectories, splits);
  if (set.test_trajectories.empty()) set.warnings.emplace_back("test split is empty");
  if (set.train_trajectories.empty()) set.warnings.emplace_back("train split is empty");
  return set;
}

SnapshotSet snapshots_of(const std::vector<Trajectory>& trajectories) {
  return assemble(trajectories, std::vector<Split>(trajectories.size(), Split::Train));
}

SnapshotSet SnapshotSet::subset(Split split) const {
  std::vector<int> keep = split == Split::Train ? train_trajectories : test_trajectories;
  return select_trajectories(keep);
}

SnapshotSet SnapshotSet::select_trajectories(const std::vector<int>& keep) const {
  SnapshotSet out;
  out.dt = dt;
  std::vector<Index> rows_kept;
  for (Index r = 0; r < rows(); ++r) {
    if (std::find(keep.begin(), keep.end(), trajectory_of_row[static_cast<std::size_t>(r)]) != keep.end()) {
      rows_kept.push_back(r);
    }
  }
  out.X.resize(static_cast<Index>(rows_kept.size()), dim());
  out.Xp.resize(static_cast<Index>(rows_kept.size()), dim());
  for (std::size_t i = 0; i < rows_kept.size(); ++i) {
    const Index r = rows_kept[i];
    out.X.row(static_cast<Index>(i)) = X.row(r);
    out.Xp.row(static_cast<Index>(i)) = Xp.row(r);
    out.trajectory_of_row.push_back(trajectory_of_row[static_cast<std::size_t>(r)]);
    out.split_of_row.push_back(split_of_row[static_cast<std::size_t>(r)]);
  }
  for (int t : train_trajectories) {
    if (std::find(keep.begin(), keep.end(), t) != keep.end()) out.train_trajectories.push_back(t);
  }
  for (int t : test_trajectories) {
    if (std::find(keep.begin(), keep.end(), t) != keep.end()) out.test_trajectories.push_back(t);
  }
  return out;
}

std::vector<Trajectory> split_trajectory(const Trajectory& traj, int window) {
  if (window < 2) throw DomainError("split_trajectory: window must be >= 2");
  std::vector<Trajectory> out;
  for (Index start = 0; start + 1 < traj.length(); start += window - 1) {
    const Index len = std::min<Index>(window, traj.length() - start);
    if (len < 2) break;
    Trajectory piece;
    piece.system_name = traj.system_name;
    piece.states = traj.states.middleRows(start, len);
    piece.times = traj.times.segment(start, len);
    out.push_back(std::move(piece));
  }
  return out;
}

Dataset make_dataset(const SystemDef& system, const SimulationConfig& cfg, int threads) {
  const int total = cfg.train_trajectories + cfg.test_trajectories;
  const auto initials = sample_initials(system.default_init_box, total, cfg.seed);
  std::vector<Trajectory> trajs(static_cast<std::size_t>(total));
  parallel_for(trajs.size(), threads, [&](std::size_t i) {
    trajs[i] = simulate(system, initials[i], cfg.dt, cfg.steps, cfg.substeps);
  });
  Dataset ds;
  ds.system_name = system.name;
  for (int i = 0; i < total; ++i) {
    auto& t = trajs[static_cast<std::size_t>(i)];
    if (t.truncated) continue;
    (i < cfg.train_trajectories ? ds.train : ds.test).push_back(std::move(t));
  }
  ds.snapshots = snapshots_of(ds.train);
  return ds;
}

}  // namespace klift
