#include "koopman_lift/systems.hpp"

#include <cmath>

namespace klift {

bool Box::contains(const Vec& x) const {
  require_dim(x.size(), dim(), "Box::contains");
  return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
}

Vec vanderpol_rhs(const Vec& x, double c1) {
  require_dim(x.size(), 2, "vanderpol_rhs");
  return Vec{{x[1], -x[0] + c1 * (1.0 - x[0] * x[0]) * x[1]}};
}

Vec duffing_rhs(const Vec& x, double c2, double c3, double c4) {
  require_dim(x.size(), 2, "duffing_rhs");
  return Vec{{x[1], -c2 * x[1] - c3 * x[0] - c4 * x[0] * x[0] * x[0]}};
}

Vec predprey_rhs(const Vec& x, double c5, double c6, double c7, double c8) {
  require_dim(x.size(), 2, "predprey_rhs");
  return Vec{{c5 * x[0] - c6 * x[0] * x[1], c7 * x[0] * x[1] - c8 * x[1]}};
}

Vec toggle_rhs(const Vec& x, const ToggleParams& p) {
  require_dim(x.size(), 2, "toggle_rhs");
  if (x[0] < 0.0 || x[1] < 0.0) throw DomainError("toggle_rhs: state must be non-negative");
  return Vec{{p.c9 / (1.0 + std::pow(x[1], p.c11)) - p.c13 * x[0],
              p.c10 / (1.0 + std::pow(x[0], p.c12)) - p.c13 * x[1]}};
}

Vec glycolysis_rhs(const Vec& x, const GlycolysisParams& p) {
  require_dim(x.size(), 7, "glycolysis_rhs");
  if ((x.array() < 0.0).any()) throw DomainError("glycolysis_rhs: state must be non-negative");
  const double s1 = x[0], s2 = x[1], s3 = x[2], s4 = x[3], s5 = x[4], s6 = x[5], s7 = x[6];
  // ATP-inhibited hexokinase/PFK step
  const double v1 = p.k1 * s1 * s6 / (1.0 + std::pow(s6 / p.K1, p.q));
  const double v2 = p.k2 * s2 * (p.N - s5);
  const double v3 = p.k3 * s3 * (p.A - s6);
  const double v4 = p.k4 * s4 * s5;
  const double v5 = p.k5 * s6;
  const double v6 = p.k6 * s2 * s5;
  const double transport = p.kappa * (s4 - s7);
  Vec dx(7);
  dx[0] = p.J0 - v1;
  dx[1] = 2.0 * v1 - v2 - v6;
  dx[2] = v2 - v3;
  dx[3] = v3 - v4 - transport;
  dx[4] = v2 - v4 - v6;
  dx[5] = -2.0 * v1 + 2.0 * v3 - v5;
  dx[6] = p.psi * transport - p.k * s7;
  return dx;
}

Vec glycolysis_default_initial() { return Vec{{1.0, 0.19, 0.2, 0.1, 0.3, 0.14, 0.05}}; }

std::vector<std::string> system_names() {
  return {"vanderpol", "duffing", "predprey", "toggle", "glycolysis"};
}

std::vector<std::string> planar_system_names() { return {"vanderpol", "duffing", "predprey", "toggle"}; }

namespace {

Box square_box(double lo, double hi) { return {Vec::Constant(2, lo), Vec::Constant(2, hi)}; }

Params apply_overrides(Params defaults, const Params& overrides, std::string_view system) {
  for (const auto& [key, value] : overrides) {
    auto it = defaults.find(key);
    if (it == defaults.end()) {
      throw UnknownSystemError("system '" + std::string(system) + "' has no constant '" + key + "'");
    }
    it->second = value;
  }
  return defaults;
}

std::string joined_names() {
  std::string out;
  for (const auto& n : system_names()) out += (out.empty() ? "" : ", ") + n;
  return out;
}

}  // namespace

SystemDef make_system(std::string_view name, const Params& overrides) {
  SystemDef s;
  s.name = std::string(name);
  if (name == "vanderpol") {
    s.n = 2;
    s.params = apply_overrides({{"c1", 1.0}}, overrides, name);
    s.default_init_box = square_box(-2.0, 2.0);
    s.rhs = [c1 = s.params["c1"]](const Vec& x) { return vanderpol_rhs(x, c1); };
  } else if (name == "duffing") {
    s.n = 2;
    s.params = apply_overrides({{"c2", 0.0}, {"c3", -1.0}, {"c4", 1.0}}, overrides, name);
    s.default_init_box = square_box(-2.0, 2.0);
    s.rhs = [p = s.params](const Vec& x) {
      return duffing_rhs(x, p.at("c2"), p.at("c3"), p.at("c4"));
    };
  } else if (name == "predprey") {
    s.n = 2;
    s.params =
        apply_overrides({{"c5", 1.1}, {"c6", 0.5}, {"c7", 0.1}, {"c8", 0.2}}, overrides, name);
    s.default_init_box = square_box(0.5, 3.0);
    s.rhs = [p = s.params](const Vec& x) {
      return predprey_rhs(x, p.at("c5"), p.at("c6"), p.at("c7"), p.at("c8"));
    };
  } else if (name == "toggle") {
    s.n = 2;
    s.params = apply_overrides(
        {{"c9", 2.5}, {"c10", 1.5}, {"c11", 1.4}, {"c12", 1.1}, {"c13", 0.25}}, overrides, name);
    s.default_init_box = square_box(0.0, 4.0);
    const ToggleParams tp{s.params["c9"], s.params["c10"], s.params["c11"], s.params["c12"],
                          s.params["c13"]};
    s.rhs = [tp](const Vec& x) { return toggle_rhs(x, tp); };
  } else if (name == "glycolysis") {
    s.n = 7;
    const GlycolysisParams d;
    s.params = apply_overrides({{"J0", d.J0},
                                {"k1", d.k1},
                                {"k2", d.k2},
                                {"k3", d.k3},
                                {"k4", d.k4},
                                {"k5", d.k5},
                                {"k6", d.k6},
                                {"k", d.k},
                                {"kappa", d.kappa},
                                {"q", d.q},
                                {"K1", d.K1},
                                {"psi", d.psi},
                                {"N", d.N},
                                {"A", d.A}},
                               overrides, name);
    const auto& p = s.params;
    const GlycolysisParams gp{p.at("J0"), p.at("k1"), p.at("k2"), p.at("k3"), p.at("k4"),
                              p.at("k5"), p.at("k6"), p.at("k"),  p.at("kappa"), p.at("q"),
                              p.at("K1"), p.at("psi"), p.at("N"), p.at("A")};
    // initial-condition ranges reported for this model
    s.default_init_box = {Vec{{0.15, 0.19, 0.04, 0.10, 0.08, 0.14, 0.05}},
                          Vec{{1.60, 2.16, 0.20, 0.35, 0.30, 2.67, 0.10}}};
    s.rhs = [gp](const Vec& x) { return glycolysis_rhs(x, gp); };
  } else {
    throw UnknownSystemError("unknown system '" + std::string(name) + "' (valid: " + joined_names() + ")");
  }
  return s;
}

}  // namespace klift
