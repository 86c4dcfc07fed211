#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "koopman_lift/closure.hpp"
#include "koopman_lift/rng.hpp"

namespace klift {
namespace {

DictParams tied(const Vec& mu, double alpha) { return {mu, Vec::Constant(mu.size(), alpha)}; }

Vec random_vec(Rng& rng, int n, double lo, double hi) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

TEST(Closure, DecisionFunction) {
  const Vec y{{0.1, 0.2}};
  const DictParams lo = tied(Vec{{-0.5, -0.5}}, 3.0);
  const DictParams hi = tied(Vec{{0.5, 0.5}}, 3.0);
  const DictParams mixed = tied(Vec{{0.5, -0.6}}, 3.0);
  EXPECT_DOUBLE_EQ(decision_H(y, lo, hi), conj_rbf_eval(y, hi));
  EXPECT_EQ(decision_H(y, hi, lo), 0.0);
  EXPECT_EQ(decision_H(y, lo, mixed), 0.0);
}

TEST(Closure, ProductErrorsShrinkWithSteepness) {
  const Vec y{{0.3, -0.45}};
  const Vec a{{-0.2, 0.1}};
  const Vec b{{0.6, 0.4}};
  for (auto err : {product_error_LL, product_error_LP, product_error_PP}) {
    EXPECT_LT(std::abs(err(y, tied(a, 64.0), tied(b, 64.0))), std::abs(err(y, tied(a, 4.0), tied(b, 4.0))));
    EXPECT_LT(std::abs(err(y, tied(a, 64.0), tied(b, 64.0))), 1e-5);
  }
}

class SweepCase : public ::testing::TestWithParam<std::tuple<ClosureCase, int>> {};

TEST_P(SweepCase, ConvergesAtEveryDimension) {
  ClosureConfig cfg;
  cfg.m = std::get<1>(GetParam());
  cfg.sample_count = 20;
  const CaseResult r = convergence_sweep(std::get<0>(GetParam()), cfg);
  EXPECT_TRUE(r.passed) << r.name << " pass fraction " << r.pass_fraction;
  EXPECT_LT(r.median_slope, -cfg.slope_threshold);
  EXPECT_EQ(r.configs.size(), 20u);
  EXPECT_LT(r.sup_error.back(), r.sup_error[1]);
}

INSTANTIATE_TEST_SUITE_P(AllCases, SweepCase,
                         ::testing::Combine(::testing::ValuesIn(all_closure_cases()), ::testing::Values(1, 2, 3)));

TEST(Closure, SweepIndependentOfThreads) {
  ClosureConfig cfg;
  cfg.sample_count = 12;
  const CaseResult a = convergence_sweep(ClosureCase::LL, cfg);
  cfg.threads = 4;
  const CaseResult b = convergence_sweep(ClosureCase::LL, cfg);
  EXPECT_EQ(a.sup_error, b.sup_error);
}

TEST(Closure, CaseNames) {
  for (ClosureCase c : all_closure_cases()) EXPECT_EQ(parse_closure_case(to_string(c)), c);
  EXPECT_EQ(parse_closure_case("lp_ordered"), ClosureCase::LPOrdered);
  EXPECT_ANY_THROW((void)parse_closure_case("LR"));
}

struct ChainSetup {
  Dictionary dict;
  DictParams theta_l;
  FieldExpansion f;
  Vec y;
};

ChainSetup random_chain(Rng& rng, int m, double alpha_lo, double alpha_hi) {
  std::vector<DictParams> l, r;
  for (int j = 0; j < 2; ++j) l.emplace_back(random_vec(rng, m, -1, 1), random_vec(rng, m, alpha_lo, alpha_hi));
  for (int k = 0; k < 3; ++k) r.emplace_back(random_vec(rng, m, -1, 1), random_vec(rng, m, alpha_lo, alpha_hi));
  ChainSetup s{make_augsill(m, l, r), DictParams(random_vec(rng, m, -1, 1), random_vec(rng, m, alpha_lo, alpha_hi)),
               {Mat(m, 5)}, random_vec(rng, m, -1, 1)};
  for (Index i = 0; i < s.f.w.size(); ++i) s.f.w.data()[i] = rng.uniform(-1, 1);
  return s;
}

TEST(Closure, LieDerivativeMatchesChainRule) {
  Rng rng(31);
  for (int c = 0; c < 100; ++c) {
    const int m = 1 + static_cast<int>(rng.below(3));
    const ChainSetup s = random_chain(rng, m, 0.5, 5.0);
    const Vec F = field_eval(s.dict, s.f, s.y);
    const double log_ref = grad_y_conj_logistic(s.y, s.theta_l).dot(F);
    const double rbf_ref = grad_y_conj_rbf(s.y, s.theta_l).dot(F);
    EXPECT_NEAR(lie_derivative_exact(TermKind::Logistic, s.dict, s.theta_l, s.f, s.y), log_ref, 1e-10);
    EXPECT_NEAR(lie_derivative_exact(TermKind::Rbf, s.dict, s.theta_l, s.f, s.y), rbf_ref, 1e-10);
  }
}

TEST(Closure, FieldExpansionEvaluation) {
  Rng rng(2);
  const ChainSetup s = random_chain(rng, 2, 1, 2);
  const Vec psi = dict_eval(s.dict, s.y);
  EXPECT_LT((field_eval(s.dict, s.f, s.y) - s.f.w * psi.tail(5)).norm(), 1e-15);
  EXPECT_THROW((void)field_eval(s.dict, {Mat::Zero(2, 4)}, s.y), DimensionError);
}

TEST(Closure, LinearRowReproducesApproximation) {
  Rng rng(17);
  for (int c = 0; c < 30; ++c) {
    const int m = 1 + static_cast<int>(rng.below(3));
    const ChainSetup s = random_chain(rng, m, 1.0, 8.0);
    for (TermKind kind : {TermKind::Logistic, TermKind::Rbf}) {
      const LinearRow row = linear_approx_row(kind, s.dict, s.theta_l, s.f);
      ASSERT_EQ(row.k.size(), row.dict.size());
      const double via_row = row.k.dot(dict_eval(row.dict, s.y));
      EXPECT_NEAR(via_row, lie_derivative_linear_approx(kind, s.dict, s.theta_l, s.f, s.y), 1e-12);
      EXPECT_EQ(row.k.head(1 + m), Vec::Zero(1 + m));
    }
  }
}

TEST(Closure, CorollarySweepsPass) {
  ClosureConfig cfg;
  cfg.sample_count = 30;
  for (const auto& r : corollary_sweeps(cfg)) {
    EXPECT_TRUE(r.passed) << r.name << " " << r.pass_fraction;
    for (const auto& c : r.configs) EXPECT_FALSE(c.monotone_required);
  }
}

TEST(Closure, ConfigValidationAndJson) {
  ClosureConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  const ClosureConfig back = closure_config_from_json(closure_config_to_json(cfg));
  EXPECT_EQ(closure_config_to_json(back), closure_config_to_json(cfg));
  cfg.alpha_grid = {4};
  EXPECT_ANY_THROW(cfg.validate());
  cfg = {};
  cfg.sample_count = 0;
  EXPECT_ANY_THROW(cfg.validate());
}

TEST(Closure, ReportAndArtifacts) {
  ClosureConfig cfg;
  cfg.sample_count = 6;
  const ClosureReport report = verify_closure({ClosureCase::PP, ClosureCase::LL}, cfg, false);
  ASSERT_EQ(report.cases.size(), 2u);
  EXPECT_TRUE(report.corollaries.empty());
  EXPECT_TRUE(report.all_passed());
  const auto j = closure_report_to_json(report);
  EXPECT_EQ(j["cases"][0]["case"], "PP");
  const auto dir = std::filesystem::temp_directory_path() / "klift_closure_artifacts";
  std::filesystem::remove_all(dir);
  write_closure_artifacts(report, dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "closure_report.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "PP.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "LL.svg"));
}

}  // namespace
}  // namespace klift
