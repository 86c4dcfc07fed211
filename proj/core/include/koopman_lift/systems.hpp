#pragma once

// Benchmark vector fields: Van der Pol, Duffing, predator-prey, the
// Gardner-Collins toggle switch, and a seven-state glycolytic oscillator.

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "koopman_lift/types.hpp"

namespace klift {

/// Axis-aligned box, one [lo_i, hi_i] interval per dimension.
struct Box {
  Vec lo;
  Vec hi;

  [[nodiscard]] Index dim() const { return lo.size(); }
  [[nodiscard]] bool contains(const Vec& x) const;
};

using Params = std::map<std::string, double>;
using Rhs = std::function<Vec(const Vec&)>;

struct SystemDef {
  std::string name;
  int n = 0;
  Params params;
  Box default_init_box;
  /// Trajectories whose max-norm exceeds this are truncated.
  double blowup_bound = 1e6;
  Rhs rhs;
};

class UnknownSystemError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// c1 = 1
[[nodiscard]] Vec vanderpol_rhs(const Vec& x, double c1 = 1.0);
// c2 = 0, c3 = -1, c4 = 1
[[nodiscard]] Vec duffing_rhs(const Vec& x, double c2 = 0.0, double c3 = -1.0, double c4 = 1.0);
// c5 = 1.1, c6 = 0.5, c7 = 0.1, c8 = 0.2
[[nodiscard]] Vec predprey_rhs(const Vec& x, double c5 = 1.1, double c6 = 0.5, double c7 = 0.1,
                               double c8 = 0.2);

struct ToggleParams {
  double c9 = 2.5;
  double c10 = 1.5;
  double c11 = 1.4;
  double c12 = 1.1;
  double c13 = 0.25;
};
/// Throws DomainError for negative states (fractional powers).
[[nodiscard]] Vec toggle_rhs(const Vec& x, const ToggleParams& p = {});

/// Yeast glycolysis (Ruoff et al. 2003, as used by Daniels & Nemenman 2015).
/// Units: mM and minutes.
struct GlycolysisParams {
  double J0 = 2.5;
  double k1 = 100.0;
  double k2 = 6.0;
  double k3 = 16.0;
  double k4 = 100.0;
  double k5 = 1.28;
  double k6 = 12.0;
  double k = 1.8;
  double kappa = 13.0;
  double q = 4.0;
  double K1 = 0.52;
  double psi = 0.1;
  double N = 1.0;
  double A = 4.0;
};
/// Throws DomainError for negative states.
[[nodiscard]] Vec glycolysis_rhs(const Vec& x, const GlycolysisParams& p = {});
/// x0 = [1, 0.19, 0.2, 0.1, 0.3, 0.14, 0.05].
[[nodiscard]] Vec glycolysis_default_initial();

/// "vanderpol", "duffing", "predprey", "toggle", "glycolysis".
[[nodiscard]] std::vector<std::string> system_names();
/// The four planar benchmark systems.
[[nodiscard]] std::vector<std::string> planar_system_names();
/// Builds a system by name; `overrides` replaces named constants (unknown
/// keys are rejected).
[[nodiscard]] SystemDef make_system(std::string_view name, const Params& overrides = {});

}  // namespace klift
