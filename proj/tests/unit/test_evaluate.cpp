#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "koopman_lift/evaluate.hpp"

namespace klift {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("klift_eval_" + name);
  fs::remove_all(dir);
  return dir;
}

SystemDef linear_system() {
  SystemDef s;
  s.name = "linear";
  s.n = 2;
  s.default_init_box = {Vec{{-1.0, -1.0}}, Vec{{1.0, 1.0}}};
  s.rhs = [](const Vec& x) { return Vec{{-0.1 * x[0], -0.2 * x[1]}}; };
  return s;
}

Dataset dataset_of(const SystemDef& s) {
  SimulationConfig cfg;
  cfg.steps = 20;
  cfg.train_trajectories = 10;
  cfg.test_trajectories = 4;
  cfg.seed = 5;
  return make_dataset(s, cfg);
}

TEST(Evaluate, IdentityModelPredictsConstant) {
  KoopmanModel model;
  model.dict = make_identity_dictionary(2);
  model.K = Mat::Identity(3, 3);
  const Vec y0{{0.3, -1.2}};
  const Rollout r = predict_n_steps(model, y0, 5);
  EXPECT_FALSE(r.diverged);
  for (int k = 0; k < 5; ++k) EXPECT_EQ(r.states.row(k).transpose(), y0);
}

TEST(Evaluate, LinearRolloutMatchesMatrixExponential) {
  const Dataset d = dataset_of(linear_system());
  const KoopmanModel model = dmd_fit(d.snapshots);
  Mat A(2, 2);
  A << -0.1, 0.0, 0.0, -0.2;
  const Vec y0{{0.8, -0.6}};
  const Rollout r = predict_n_steps(model, y0, 5);
  for (int n = 1; n <= 5; ++n) {
    const Vec exact = (A * (0.1 * n)).exp() * y0;
    EXPECT_LT((r.states.row(n - 1).transpose() - exact).norm(), 1e-5);
  }
  const EvalReport rep = five_step_error(model, d.test);
  EXPECT_LT(rep.mean_5step, 1e-10);
  EXPECT_EQ(rep.test_size, 4 * 16);
}

TEST(Evaluate, RealizableModelOneStepOnTrainingPair) {
  const Dataset d = dataset_of(linear_system());
  const KoopmanModel model = dmd_fit(d.snapshots);
  const Rollout r = predict_n_steps(model, d.snapshots.X.row(3).transpose(), 1);
  EXPECT_LT((r.states.row(0) - d.snapshots.Xp.row(3)).norm(), 1e-8);
}

TEST(Evaluate, ZeroOperatorErrorEqualsMeanSquaredState) {
  const Dataset d = dataset_of(make_system("vanderpol"));
  KoopmanModel model;
  model.dict = make_identity_dictionary(2);
  model.K = Mat::Zero(3, 3);
  const EvalReport rep = five_step_error(model, d.test);
  Vec oracle = Vec::Zero(5);
  int count = 0;
  for (const auto& t : d.test) {
    for (Index r = 0; r + 5 < t.length(); ++r, ++count) {
      for (int k = 0; k < 5; ++k) oracle[k] += t.states.row(r + k + 1).squaredNorm() / 2.0;
    }
  }
  oracle /= count;
  EXPECT_EQ(rep.test_size, count);
  EXPECT_LT((rep.mse_per_step - oracle).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_DOUBLE_EQ(rep.mean_5step, rep.mse_per_step[4]);
  EXPECT_NEAR(rep.mean_over_steps, oracle.mean(), 1e-12);
}

TEST(Evaluate, DivergedRolloutsAreCountedSeparately) {
  KoopmanModel model;
  model.dict = make_identity_dictionary(1);
  model.K = Mat::Identity(2, 2) * 1e4;
  Trajectory t;
  t.states = Mat::Constant(8, 1, 1.0);
  t.times = Vec::LinSpaced(8, 0, 0.7);
  const std::vector<Trajectory> test{t};
  const EvalReport rep = five_step_error(model, test);
  EXPECT_EQ(rep.diverged_count, 3);
  EXPECT_EQ(rep.test_size, 0);
  EXPECT_TRUE(std::isnan(rep.mean_5step));
  const auto j = eval_report_to_json(rep);
  EXPECT_TRUE(j["mean_5step"].is_null());
  const Rollout r = predict_n_steps(model, Vec::Ones(1), 5);
  EXPECT_TRUE(r.diverged);
  EXPECT_EQ(r.diverged_at, 4);  // 1e12 itself is not past the runaway threshold
}

TEST(Evaluate, ReliftMatchesForIdentityDictionary) {
  const Dataset d = dataset_of(make_system("duffing"));
  const KoopmanModel model = dmd_fit(d.snapshots);
  const EvalReport a = five_step_error(model, d.test);
  const EvalReport b = five_step_error(model, d.test, 5, 1, true);
  EXPECT_NEAR(a.mean_5step, b.mean_5step, 1e-12);
}

TEST(Evaluate, ThreadCountDoesNotChangeResult) {
  const Dataset d = dataset_of(make_system("predprey"));
  const KoopmanModel model = edmd_fit(initial_dictionary(DictKind::AugSILL, 2, 8, data_range(d.snapshots), 1), d.snapshots);
  EXPECT_EQ(five_step_error(model, d.test, 5, 1).mse_per_step, five_step_error(model, d.test, 5, 4).mse_per_step);
}

TEST(Evaluate, CompareDictionariesRecordsCellsAndFailures) {
  CompareConfig cfg;
  cfg.systems = {"vanderpol"};
  cfg.kinds = {DictKind::AugSILL, DictKind::Legendre};
  cfg.sizes = {2, 5};
  cfg.simulation.steps = 15;
  cfg.simulation.train_trajectories = 6;
  cfg.simulation.test_trajectories = 2;
  cfg.train.epochs = 4;
  cfg.train.log_every = 2;
  const ComparisonTable table = compare_dictionaries(cfg);
  ASSERT_EQ(table.cells.size(), 4u);
  const CompareCell* bad = table.find("vanderpol", DictKind::AugSILL, 2);
  ASSERT_NE(bad, nullptr);
  EXPECT_FALSE(bad->error.empty());
  const CompareCell* good = table.find("vanderpol", DictKind::AugSILL, 5);
  ASSERT_NE(good, nullptr);
  EXPECT_TRUE(good->error.empty());
  EXPECT_EQ(good->trace.size(), 5u);
  EXPECT_TRUE(std::isfinite(good->final_5step));
  EXPECT_TRUE(std::isfinite(good->dmd_5step));
  EXPECT_EQ(table.find("duffing", DictKind::AugSILL, 5), nullptr);

  const fs::path dir = scratch_dir("compare");
  write_comparison_csv(table, dir / "comparison.csv");
  const auto svgs = write_comparison_svgs(table, dir);
  ASSERT_EQ(svgs.size(), 1u);
  EXPECT_EQ(svgs[0].filename(), "vanderpol_5step.svg");
  std::ifstream in(dir / "comparison.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "system,kind,N,epoch,train_loss,test_5step");
  std::stringstream svg;
  svg << std::ifstream(svgs[0]).rdbuf();
  EXPECT_NE(svg.str().find("<svg"), std::string::npos);
  EXPECT_NE(svg.str().find("augsill N=5"), std::string::npos);
}

}  // namespace
}  // namespace klift
