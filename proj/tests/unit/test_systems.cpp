#include <gtest/gtest.h>

#include "koopman_lift/systems.hpp"

namespace klift {
namespace {

TEST(Systems, PlanarFieldsAtKnownPoints) {
  EXPECT_EQ(vanderpol_rhs(Vec{{1.0, 0.5}}), (Vec{{0.5, -1.0}}));
  EXPECT_EQ(duffing_rhs(Vec{{2.0, 1.0}}), (Vec{{1.0, -6.0}}));
  EXPECT_TRUE(predprey_rhs(Vec{{2.0, 3.0}}).isApprox(Vec{{-0.8, 0.0}}, 1e-15) ||
              (predprey_rhs(Vec{{2.0, 3.0}}) - Vec{{-0.8, 0.0}}).norm() < 1e-15);
  EXPECT_TRUE(toggle_rhs(Vec{{1.0, 1.0}}).isApprox(Vec{{1.0, 0.5}}, 1e-15));
}

TEST(Systems, ToggleRejectsNegativeState) {
  EXPECT_THROW((void)toggle_rhs(Vec{{-0.1, 1.0}}), DomainError);
}

// Reference: independent numpy transcription of the seven-state model.
TEST(Systems, GlycolysisAtDefaultInitial) {
  const Vec x0 = glycolysis_default_initial();
  ASSERT_EQ(x0.size(), 7);
  const Vec expected{{-11.42682698524306, 26.37165397048612, -11.554, 8.702, -2.886, -3.3288539704861204,
                      -0.02500000000000001}};
  EXPECT_LT((glycolysis_rhs(x0) - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW((void)glycolysis_rhs(-x0), DomainError);
}

TEST(Systems, Registry) {
  EXPECT_EQ(system_names().size(), 5u);
  EXPECT_EQ(planar_system_names().size(), 4u);
  for (const auto& name : system_names()) {
    const SystemDef s = make_system(name);
    EXPECT_EQ(s.name, name);
    EXPECT_EQ(s.default_init_box.dim(), s.n);
    const Vec mid = 0.5 * (s.default_init_box.lo + s.default_init_box.hi);
    EXPECT_TRUE(s.default_init_box.contains(mid));
    EXPECT_TRUE(s.rhs(mid).allFinite());
  }
}

TEST(Systems, UnknownNameListsValidOnes) {
  try {
    (void)make_system("lorenz");
    FAIL();
  } catch (const UnknownSystemError& e) {
    EXPECT_NE(std::string(e.what()).find("vanderpol"), std::string::npos);
  }
}

TEST(Systems, Overrides) {
  const SystemDef s = make_system("vanderpol", {{"c1", 2.0}});
  EXPECT_EQ(s.params.at("c1"), 2.0);
  EXPECT_EQ(s.rhs(Vec{{0.0, 1.0}}), (Vec{{1.0, 2.0}}));
  EXPECT_ANY_THROW((void)make_system("vanderpol", {{"mu", 2.0}}));
}

}  // namespace
}  // namespace klift
