#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "koopman_lift/simulate.hpp"

namespace klift {
namespace {

SystemDef linear_system() {
  SystemDef s;
  s.name = "linear";
  s.n = 2;
  s.default_init_box = {Vec{{-1.0, -1.0}}, Vec{{1.0, 1.0}}};
  s.rhs = [](const Vec& x) { return Vec{{-0.1 * x[0], -0.2 * x[1]}}; };
  return s;
}

TEST(Simulate, Rk4OnLinearSystemIsFourthOrder) {
  const SystemDef s = linear_system();
  const Vec x0{{1.0, -2.0}};
  auto err = [&](int substeps) {
    const Trajectory t = simulate(s, x0, 1.0, 1, substeps);
    return std::abs(t.states(1, 0) - std::exp(-0.1));
  };
  EXPECT_LT(err(10), 1e-9);
  EXPECT_NEAR(std::log2(err(2) / err(4)), 4.0, 0.1);
}

// Reference: scipy DOP853 with rtol 1e-13.
TEST(Simulate, VanDerPolMatchesReferenceSolution) {
  const Trajectory t = simulate(make_system("vanderpol"), Vec{{1.0, 0.5}}, 0.1, 10, 10);
  ASSERT_EQ(t.length(), 11);
  EXPECT_NEAR(t.times[10], 1.0, 1e-15);
  EXPECT_NEAR(t.states(10, 0), 0.9554206727769083, 1e-9);
  EXPECT_NEAR(t.states(10, 1), -0.5699018617576943, 1e-9);
}

TEST(Simulate, ToggleMatchesReferenceSolution) {
  const Trajectory t = simulate(make_system("toggle"), Vec{{1.0, 2.0}}, 0.1, 20, 10);
  EXPECT_NEAR(t.states(20, 0), 1.612865551572125, 1e-9);
  EXPECT_NEAR(t.states(20, 1), 2.1989175458681767, 1e-9);
}

TEST(Simulate, GlycolysisMatchesReferenceSolution) {
  const Trajectory t = simulate(make_system("glycolysis"), glycolysis_default_initial(), 0.05, 10, 20);
  const Vec expected{{0.119815212542942, 1.0672512100185936, 0.10647531908789516, 0.2353133716483029,
                      0.15488044241018514, 0.76103123298982, 0.07602093338460848}};
  EXPECT_LT((t.states.row(10).transpose() - expected).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(Simulate, BlowUpTruncates) {
  // x'' = x + x^3 escapes in finite time
  const SystemDef s = make_system("duffing", {{"c4", -1.0}});
  const Trajectory t = simulate(s, Vec{{2.0, 2.0}}, 0.1, 100, 10);
  EXPECT_TRUE(t.truncated);
  EXPECT_LT(t.length(), 101);
  EXPECT_TRUE(t.states.allFinite());
}

TEST(Simulate, NonFiniteStageThrowsWithTime) {
  const Rhs bad = [](const Vec& x) { return Vec(x.array().log()); };
  try {
    (void)rk4_step(bad, Vec{{-1.0}}, 0.1, 2.5);
    FAIL();
  } catch (const IntegrationError& e) {
    EXPECT_EQ(e.time(), 2.5);
  }
}

TEST(Simulate, InvalidArguments) {
  const SystemDef s = linear_system();
  EXPECT_THROW((void)simulate(s, Vec::Zero(2), 0.1, 0, 1), DomainError);
  EXPECT_THROW((void)simulate(s, Vec::Zero(2), 0.1, 5, 0), DomainError);
  EXPECT_THROW((void)simulate(s, Vec::Zero(3), 0.1, 5, 1), DimensionError);
}

TEST(Simulate, SampleInitialsReproducibleAndInBox) {
  const Box box{Vec{{0.0, -1.0}}, Vec{{4.0, 1.0}}};
  const auto a = sample_initials(box, 50, 7);
  const auto b = sample_initials(box, 50, 7);
  const auto c = sample_initials(box, 50, 8);
  ASSERT_EQ(a.size(), 50u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    EXPECT_TRUE(box.contains(a[i]));
  }
  EXPECT_NE(a[0], c[0]);
}

std::vector<Trajectory> linear_trajectories(int count) {
  const SystemDef s = linear_system();
  std::vector<Trajectory> out;
  for (const auto& x0 : sample_initials(s.default_init_box, count, 1)) out.push_back(simulate(s, x0, 0.1, 6, 2));
  return out;
}

TEST(Simulate, SnapshotsKeepTrajectoriesWhole) {
  const auto trajs = linear_trajectories(10);
  const SnapshotSet set = build_snapshots(trajs, 0.7, 3);
  EXPECT_EQ(set.rows(), 60);
  EXPECT_EQ(set.train_trajectories.size(), 7u);
  EXPECT_EQ(set.test_trajectories.size(), 3u);
  std::set<int> train_ids(set.train_trajectories.begin(), set.train_trajectories.end());
  for (Index r = 0; r < set.rows(); ++r) {
    const int t = set.trajectory_of_row[static_cast<std::size_t>(r)];
    EXPECT_EQ(set.split_of_row[static_cast<std::size_t>(r)] == Split::Train, train_ids.count(t) == 1);
  }
  const SnapshotSet train = set.subset(Split::Train);
  EXPECT_EQ(train.rows(), 42);
  for (Index r = 0; r + 1 < train.rows(); ++r) {
    if (train.trajectory_of_row[static_cast<std::size_t>(r)] == train.trajectory_of_row[static_cast<std::size_t>(r + 1)]) {
      EXPECT_EQ(train.Xp.row(r), train.X.row(r + 1));
    }
  }
  const SnapshotSet again = build_snapshots(trajs, 0.7, 3);
  EXPECT_EQ(again.train_trajectories, set.train_trajectories);
}

TEST(Simulate, EmptySplitWarns) {
  const SnapshotSet set = build_snapshots(linear_trajectories(3), 1.0, 0);
  EXPECT_TRUE(set.test_trajectories.empty());
  EXPECT_FALSE(set.warnings.empty());
}

TEST(Simulate, SplitTrajectorySharesBoundaries) {
  const Trajectory t = simulate(make_system("vanderpol"), Vec{{1.0, 0.0}}, 0.1, 100, 2);
  const auto pieces = split_trajectory(t, 26);
  ASSERT_EQ(pieces.size(), 4u);
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
    EXPECT_EQ(pieces[i].length(), 26);
    EXPECT_EQ(pieces[i].states.bottomRows(1), pieces[i + 1].states.topRows(1));
  }
  EXPECT_THROW((void)split_trajectory(t, 1), DomainError);
}

TEST(Simulate, MakeDatasetCounts) {
  SimulationConfig cfg;
  cfg.steps = 10;
  cfg.train_trajectories = 6;
  cfg.test_trajectories = 2;
  const Dataset d = make_dataset(make_system("duffing"), cfg);
  EXPECT_EQ(d.train.size(), 6u);
  EXPECT_EQ(d.test.size(), 2u);
  EXPECT_EQ(d.snapshots.rows(), 60);
  EXPECT_DOUBLE_EQ(d.snapshots.dt, 0.1);
  const Dataset threaded = make_dataset(make_system("duffing"), cfg, 3);
  EXPECT_EQ(threaded.snapshots.X, d.snapshots.X);
}

}  // namespace
}  // namespace klift
