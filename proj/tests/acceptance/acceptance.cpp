// Acceptance gate: one PASS/FAIL line per criterion, details underneath.
// Exit status is 0 once every criterion has been evaluated; --strict makes
// any FAIL a non-zero exit.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "klift_cli/cli.hpp"
#include "koopman_lift/closure.hpp"
#include "koopman_lift/evaluate.hpp"
#include "koopman_lift/monte_carlo.hpp"
#include "koopman_lift/report_io.hpp"
#include "koopman_lift/rng.hpp"

namespace {

using namespace klift;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::vector<std::string> details;
  void note(const std::string& s) { details.push_back(s); }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string sci(double v) { return fmt("%.3e", v); }

Vec random_vec(Rng& rng, int n, double lo, double hi) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-4}); }

Outcome criterion_sweeps() {
  Outcome o;
  const auto t0 = Clock::now();
  bool ok = true;
  for (int m = 1; m <= 3; ++m) {
    ClosureConfig cfg;
    cfg.m = m;
    for (const ClosureCase c : all_closure_cases()) {
      const CaseResult r = convergence_sweep(c, cfg);
      ok = ok && r.passed && r.configs.size() == 50;
      o.note("m=" + std::to_string(m) + " " + r.name + ": pass fraction " + fmt("%.2f", r.pass_fraction) +
             ", median slope " + fmt("%.3f", r.median_slope));
    }
  }
  const double secs = seconds_since(t0);
  o.note("runtime " + fmt("%.2f", secs) + " s (limit 60 s)");
  o.pass = ok && secs < 60.0;
  return o;
}

Outcome criterion_expectations() {
  Outcome o;
  const auto t0 = Clock::now();
  const long n = 100000;
  bool ok = true;
  double prev_rho = 0.25;
  for (const double a : {1.0, 5.0, 10.0}) {
    const double lam = mc_expectation(McFunction::Logistic, a, 1, n, 1).mean;
    const double rho = mc_expectation(McFunction::Rbf, a, 1, n, 2).mean;
    ok = ok && std::abs(lam - 0.5) <= 0.01 && rho <= 0.25 && rho < prev_rho;
    prev_rho = rho;
    o.note("a=" + fmt("%g", a) + ": E[lambda]=" + fmt("%.4f", lam) + " E[rho]=" + fmt("%.4f", rho));
    for (int m = 1; m <= 3; ++m) {
      const double L = mc_expectation(McFunction::ConjLogistic, a, m, n, 3).mean;
      const double P = mc_expectation(McFunction::ConjRbf, a, m, n, 4).mean;
      const bool row_ok = L < std::ldexp(1.05, -m) && P < std::ldexp(1.05, -2 * m);
      ok = ok && row_ok;
      o.note("  m=" + std::to_string(m) + ": E[Lambda]=" + sci(L) + " (< " + sci(std::ldexp(1.05, -m)) +
             ") E[P]=" + sci(P) + " (< " + sci(std::ldexp(1.05, -2 * m)) + ")");
    }
  }
  const double secs = seconds_since(t0);
  o.note("runtime " + fmt("%.2f", secs) + " s (limit 30 s)");
  o.pass = ok && secs < 30.0;
  return o;
}

Outcome criterion_bounds() {
  Outcome o;
  const auto t0 = Clock::now();
  bool ok = true;
  for (const BoundRow row : {BoundRow::LogLimApprox, BoundRow::LogPrime, BoundRow::RbfLimApprox, BoundRow::RbfPrime}) {
    BoundCheckConfig cfg;
    cfg.samples = 10000;
    const BoundCheckResult r = bound_check_table(row, cfg);
    ok = ok && r.passed;
    o.note(std::string(to_string(row)) + ": mean |diff| " + sci(r.mean_error) + " +- " + sci(r.error_se) +
           ", mean bound " + sci(r.mean_bound) + (r.passed ? "" : "  <-- exceeds"));
  }
  const OccupancyResult occ = h_occupancy(2, 2.0, 10000, 0);
  ok = ok && occ.within_3se;
  o.note("H occupancy " + fmt("%.4f", occ.fraction) + " vs " + fmt("%.4f", occ.expected) + " (3 SE = " +
         fmt("%.4f", 3 * occ.std_error) + ")");
  const double secs = seconds_since(t0);
  o.note("runtime " + fmt("%.2f", secs) + " s (limit 60 s)");
  o.pass = ok && secs < 60.0;
  return o;
}

Outcome criterion_gradients() {
  Outcome o;
  Rng rng(2024);
  double worst_rho = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const ScalarParam p{rng.uniform(-3, 3), rng.uniform(0.01, 20)};
    const double y = rng.uniform(-5, 5);
    const double lam = logistic_eval(y, p);
    worst_rho = std::max(worst_rho, std::abs(rbf_eval(y, p) - (lam - lam * lam)));
  }
  o.note("rho identity max deviation " + sci(worst_rho) + " (10^4 points)");

  const double h = 1e-6;
  double worst_y = 0.0, worst_theta = 0.0, worst_lie = 0.0;
  for (int c = 0; c < 100; ++c) {
    const int m = 1 + static_cast<int>(rng.below(3));
    std::vector<DictParams> lt, rt;
    for (int j = 0; j < 2; ++j) lt.emplace_back(random_vec(rng, m, -1, 1), random_vec(rng, m, 0.5, 4));
    for (int k = 0; k < 2; ++k) rt.emplace_back(random_vec(rng, m, -1, 1), random_vec(rng, m, 0.5, 4));
    const Dictionary d = make_augsill(m, lt, rt);
    const Vec y = random_vec(rng, m, -1.5, 1.5);

    for (const auto& t : lt) {
      const Vec g = grad_y_conj_logistic(y, t);
      for (int i = 0; i < m; ++i) {
        Vec yp = y, ym = y;
        yp[i] += h;
        ym[i] -= h;
        worst_y = std::max(worst_y, rel_err(g[i], (conj_logistic_eval(yp, t) - conj_logistic_eval(ym, t)) / (2 * h)));
      }
    }
    for (const auto& t : rt) {
      const Vec g = grad_y_conj_rbf(y, t);
      for (int i = 0; i < m; ++i) {
        Vec yp = y, ym = y;
        yp[i] += h;
        ym[i] -= h;
        worst_y = std::max(worst_y, rel_err(g[i], (conj_rbf_eval(yp, t) - conj_rbf_eval(ym, t)) / (2 * h)));
      }
    }

    const Mat G = grad_params_dict(d, y);
    const Vec theta = pack_params(d);
    for (Index col = 0; col < theta.size(); ++col) {
      Dictionary dp = d, dm = d;
      Vec tp = theta, tm = theta;
      tp[col] += h;
      tm[col] -= h;
      unpack_params(dp, tp);
      unpack_params(dm, tm);
      const Vec fd = (dict_eval(dp, y) - dict_eval(dm, y)) / (2 * h);
      for (Index r = 0; r < d.size(); ++r) worst_theta = std::max(worst_theta, rel_err(G(r, col), fd[r]));
    }

    FieldExpansion f{Mat(m, 4)};
    for (Index i = 0; i < f.w.size(); ++i) f.w.data()[i] = rng.uniform(-1, 1);
    const DictParams theta_l(random_vec(rng, m, -1, 1), random_vec(rng, m, 0.5, 4));
    const Vec F = field_eval(d, f, y);
    worst_lie = std::max(worst_lie, std::abs(lie_derivative_exact(TermKind::Logistic, d, theta_l, f, y) -
                                             grad_y_conj_logistic(y, theta_l).dot(F)));
    worst_lie = std::max(worst_lie, std::abs(lie_derivative_exact(TermKind::Rbf, d, theta_l, f, y) -
                                             grad_y_conj_rbf(y, theta_l).dot(F)));
  }
  o.note("measurement gradients: worst relative FD mismatch " + sci(worst_y) + " (100 configs)");
  o.note("parameter gradients: worst relative FD mismatch " + sci(worst_theta));
  o.note("Lie derivative vs chain rule: worst abs mismatch " + sci(worst_lie));
  o.pass = worst_rho <= 1e-12 && worst_y <= 1e-5 && worst_theta <= 1e-5 && worst_lie <= 1e-10;
  return o;
}

Outcome criterion_linear_oracle() {
  Outcome o;
  SystemDef s;
  s.name = "linear";
  s.n = 2;
  s.default_init_box = {Vec{{-1.0, -1.0}}, Vec{{1.0, 1.0}}};
  s.rhs = [](const Vec& x) { return Vec{{-0.1 * x[0], -0.2 * x[1]}}; };
  SimulationConfig sim;
  sim.train_trajectories = 20;
  sim.test_trajectories = 5;
  const Dataset d = make_dataset(s, sim);
  Mat A(2, 2);
  A << -0.1, 0.0, 0.0, -0.2;
  const Mat oracle = (A * sim.dt).exp();
  bool ok = true;
  for (const auto& [name, model] :
       {std::pair{"dmd", dmd_fit(d.snapshots)}, std::pair{"edmd", edmd_fit(make_identity_dictionary(2), d.snapshots)}}) {
    const double map_err = (model.K.block(1, 1, 2, 2) - oracle).cwiseAbs().maxCoeff();
    const double offset = model.K.block(1, 0, 2, 1).cwiseAbs().maxCoeff();
    const EvalReport rep = five_step_error(model, d.test);
    double roll = 0.0;
    for (const auto& t : d.test) {
      const Rollout r = predict_n_steps(model, t.states.row(0).transpose(), 5);
      roll = std::max(roll, (r.states.row(4).transpose() - (A * (5 * sim.dt)).exp() * t.states.row(0).transpose()).norm());
    }
    ok = ok && map_err <= 1e-6 && offset <= 1e-6 && rep.mean_5step < 1e-5 && roll < 1e-5;
    o.note(std::string(name) + ": one-step map error " + sci(map_err) + ", 5-step mse " + sci(rep.mean_5step) +
           ", 5-step vs exp(5 A dt) " + sci(roll));
  }
  o.pass = ok;
  return o;
}

struct PlanarRun {
  ComparisonTable table;
  CompareConfig cfg;
};

PlanarRun run_comparison(const fs::path& out) {
  PlanarRun run;
  run.cfg.systems = planar_system_names();
  run.cfg.kinds = {DictKind::AugSILL, DictKind::SILL, DictKind::SummedRBF, DictKind::Legendre, DictKind::Hermite};
  run.cfg.sizes = {20};
  run.cfg.train.epochs = 1000;
  run.cfg.train.log_every = 50;
  run.table = compare_dictionaries(run.cfg);
  write_comparison_csv(run.table, out / "comparison.csv");
  (void)write_comparison_svgs(run.table, out);
  return run;
}

Outcome criterion_dictionary_trend(const PlanarRun& run, double secs) {
  Outcome o;
  auto err = [&](const std::string& sys, DictKind k) {
    const CompareCell* c = run.table.find(sys, k, 20);
    return c && c->error.empty() ? c->final_5step : std::nan("");
  };
  bool ok = true;
  for (const auto& sys : run.cfg.systems) {
    const double aug = err(sys, DictKind::AugSILL), sill = err(sys, DictKind::SILL), rbf = err(sys, DictKind::SummedRBF);
    const double leg = err(sys, DictKind::Legendre), her = err(sys, DictKind::Hermite);
    o.note(sys + ": augsill " + sci(aug) + " sill " + sci(sill) + " summedrbf " + sci(rbf) + " legendre " + sci(leg) +
           " hermite " + sci(her) + " (dmd " + sci(run.table.find(sys, DictKind::AugSILL, 20)->dmd_5step) + ")");
    if (sys == "vanderpol" || sys == "toggle") {
      const bool good = aug <= 0.1 * leg;
      ok = ok && good;
      o.note("  augsill <= 0.1 x legendre: " + std::string(good ? "yes" : "NO") + " (ratio " + fmt("%.3g", leg / aug) + ")");
    }
    const double hi = std::max({aug, sill, rbf}), lo = std::min({aug, sill, rbf});
    const bool within = std::isfinite(hi) && std::isfinite(lo) && hi <= 3.0 * lo;
    ok = ok && within;
    o.note("  conjunctive/summed kinds within 3x: " + std::string(within ? "yes" : "NO") + " (spread " + fmt("%.3g", hi / lo) + ")");
    const bool poly = leg <= her;
    ok = ok && poly;
    o.note("  legendre <= hermite: " + std::string(poly ? "yes" : "NO"));
  }
  o.note("runtime " + fmt("%.1f", secs) + " s (limit 900 s)");
  o.pass = ok && secs < 900.0;
  return o;
}

Outcome criterion_pursuit(const PlanarRun& run) {
  Outcome o;
  bool ok = true;
  for (const auto& sys : run.cfg.systems) {
    const Dataset data = make_dataset(make_system(sys), run.cfg.simulation);
    const Dictionary init = initial_dictionary(DictKind::AugSILL, 2, 20, data_range(data.snapshots), run.cfg.train.seed);
    auto t0 = Clock::now();
    const KoopmanModel sgd = sgd_train(init, data.snapshots, data.test, run.cfg.train);
    const double sgd_secs = seconds_since(t0);
    t0 = Clock::now();
    const KoopmanModel mp = matching_pursuit_fit(DictKind::AugSILL, {}, data.snapshots, 20);
    const double mp_secs = seconds_since(t0);
    const double e_sgd = five_step_error(sgd, data.test).mean_5step;
    const double e_mp = five_step_error(mp, data.test).mean_5step;
    const double ratio = std::max(e_sgd, e_mp) / std::min(e_sgd, e_mp);
    const bool good = std::isfinite(ratio) && ratio <= 2.0;
    ok = ok && good;
    o.note(sys + ": sgd " + sci(e_sgd) + " (" + fmt("%.1f", sgd_secs) + " s), matching pursuit " + sci(e_mp) + " (" +
           fmt("%.1f", mp_secs) + " s), ratio " + fmt("%.2f", ratio) + (good ? "" : "  <-- outside 2x"));
  }
  o.pass = ok;
  return o;
}

Outcome criterion_glycolysis(const fs::path& out) {
  Outcome o;
  const auto t0 = Clock::now();
  const Trajectory traj = simulate(make_system("glycolysis"), glycolysis_default_initial(), 0.02, 1000, 10);
  const auto pieces = split_trajectory(traj, 51);
  const std::size_t n_test = pieces.size() / 5;
  const std::vector<Trajectory> train(pieces.begin(), pieces.end() - static_cast<long>(n_test));
  const std::vector<Trajectory> test(pieces.end() - static_cast<long>(n_test), pieces.end());
  const SnapshotSet snaps = snapshots_of(train);
  TrainConfig cfg;
  cfg.epochs = 5000;
  cfg.log_every = 100;
  const Dictionary init = initial_dictionary(DictKind::AugSILL, 7, 27, data_range(snaps), cfg.seed);
  const KoopmanModel model = sgd_train(init, snaps, test, cfg);
  write_trace_csv(model.meta.trace, out / "glycolysis_trace.csv");
  double e1000 = std::nan(""), e5000 = std::nan("");
  for (const auto& row : model.meta.trace) {
    if (row.epoch == 1000) e1000 = row.test_5step;
    if (row.epoch == 5000) e5000 = row.test_5step;
  }
  const double change = std::abs(e5000 - e1000) / e1000;
  o.note("parameters " + std::to_string(model.param_count()) + ", " + std::to_string(snaps.rows()) + " training pairs, " +
         std::to_string(test.size()) + " held-out windows");
  o.note("5-step error: epoch 1000 " + sci(e1000) + ", epoch 5000 " + sci(e5000) + ", relative change " +
         fmt("%.3f", change) + " (limit 0.20); dmd " + sci(five_step_error(dmd_fit(snaps), test).mean_5step));
  o.note("runtime " + fmt("%.1f", seconds_since(t0)) + " s");
  o.pass = !model.meta.aborted && model.param_count() == 995 && std::isfinite(change) && change < 0.2;
  return o;
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return out;
}

Outcome criterion_determinism(const fs::path& out) {
  Outcome o;
  const fs::path root = out / "determinism";
  fs::remove_all(root);
  const std::string data = (root / "data").string();
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
      {"simulate", {"simulate", "--system", "vanderpol", "--trajectories", "24", "--seed", "7"}},
      {"train-sgd", {"train", "--system", "duffing", "--method", "sgd", "--N", "10", "--epochs", "20", "--seed", "7"}},
      {"train-mp", {"train", "--system", "predprey", "--method", "mp", "--N", "10", "--seed", "7"}},
      {"compare", {"compare", "--quick", "--systems", "toggle", "--kinds", "augsill,hermite", "--epochs", "5"}},
      {"verify-closure", {"verify-closure", "--m", "2", "--bounds"}}};
  bool ok = true;
  std::ostringstream sink;
  auto run_twice = [&](const std::string& label, std::vector<std::string> args) {
    std::map<std::string, std::string> first;
    bool same = true;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path dir = root / (label + "_" + std::to_string(rep));
      auto full = args;
      full.insert(full.end(), {"--threads", "1", "--out", dir.string()});
      if (cli::run(full, sink) != cli::kExitOk) return false;
      if (rep == 0) {
        first = read_tree(dir);
      } else {
        same = read_tree(dir) == first;
      }
    }
    o.note(label + ": " + std::to_string(first.size()) + " files, " + (same ? "identical" : "DIFFERENT"));
    return same;
  };
  for (const auto& [label, args] : commands) ok = run_twice(label, args) && ok;
  ok = ok && cli::run({"simulate", "--system", "vanderpol", "--trajectories", "24", "--seed", "7", "--out", data}, sink) == 0;
  ok = run_twice("evaluate", {"evaluate", "--model", (root / "train-sgd_0" / "model.json").string(), "--data", data}) && ok;
  o.pass = ok;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  bool strict = false;
  std::vector<int> only;
  std::string out_dir = "acceptance_out";
  app.add_flag("--strict", strict, "Exit non-zero if any criterion fails");
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  app.add_option("--out", out_dir, "Artifact directory");
  CLI11_PARSE(app, argc, argv);

  const fs::path out(out_dir);
  fs::create_directories(out);
  const std::set<int> selected(only.begin(), only.end());
  auto wanted = [&](int id) { return selected.empty() || selected.count(id) > 0; };

  std::optional<PlanarRun> planar;
  double planar_secs = 0.0;
  auto planar_run = [&]() -> const PlanarRun& {
    if (!planar) {
      const auto t0 = Clock::now();
      planar = run_comparison(out);
      planar_secs = seconds_since(t0);
    }
    return *planar;
  };

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, criterion_sweeps},
      {2, criterion_expectations},
      {3, criterion_bounds},
      {4, criterion_gradients},
      {5, criterion_linear_oracle},
      {6, [&] { const auto& r = planar_run(); return criterion_dictionary_trend(r, planar_secs); }},
      {7, [&] { return criterion_pursuit(planar_run()); }},
      {8, [&] { return criterion_glycolysis(out); }},
      {9, [&] { return criterion_determinism(out); }}};

  nlohmann::json summary = nlohmann::json::array();
  std::vector<std::string> lines;
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    if (!wanted(id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note(std::string("exception: ") + e.what());
    }
    const std::string line = "criterion " + std::to_string(id) + ": " + (o.pass ? "PASS" : "FAIL");
    std::printf("%s  (%.1f s)\n", line.c_str(), seconds_since(t0));
    for (const auto& d : o.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
    lines.push_back(line);
    failed += o.pass ? 0 : 1;
    summary.push_back({{"criterion", id}, {"pass", o.pass}, {"details", o.details}});
  }
  write_json_file(out / "acceptance.json", summary);
  std::printf("\nsummary\n");
  for (const auto& l : lines) std::printf("%s\n", l.c_str());
  std::printf("%zu evaluated, %d failed\n", lines.size(), failed);
  return strict && failed > 0 ? 1 : 0;
}
