#include "klift_cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "koopman_lift/closure.hpp"
#include "koopman_lift/dataset_io.hpp"
#include "koopman_lift/dictionary_io.hpp"
#include "koopman_lift/evaluate.hpp"
#include "koopman_lift/learn.hpp"
#include "koopman_lift/monte_carlo.hpp"
#include "koopman_lift/report_io.hpp"
#include "koopman_lift/systems.hpp"

namespace klift::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_path;
  std::string out = "out";
  int threads = 1;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON config file (flags override it)");
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker threads (1 = bit-reproducible)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "Global seed (fallback: KOOPMAN_LIFT_SEED, then 0)");
}

json load_config(const Common& c) {
  if (c.config_path.empty()) return json::object();
  json j = read_json_file(c.config_path);
  if (!j.is_object()) throw ConfigError(c.config_path + ": config must be a JSON object");
  return j;
}

std::uint64_t resolve_seed(const Common& c, const json& file) {
  if (c.seed) return *c.seed;
  if (file.contains("seed")) return file["seed"].get<std::uint64_t>();
  if (const char* env = std::getenv("KOOPMAN_LIFT_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw ConfigError(std::string("KOOPMAN_LIFT_SEED is not an integer: ") + env);
    return v;
  }
  return 0;
}

/// defaults <- config file <- flags; the caller applies flags afterwards.
// Flat simulation keys in a config file are folded into the "simulation" block.
json start_config(const json& defaults, const json& file) {
  json cfg = defaults;
  json patch = file;
  if (defaults.contains("simulation") && patch.is_object()) {
    if (patch.contains("trajectories")) {
      const int total = patch["trajectories"].get<int>();
      if (total < 1) throw ConfigError("trajectories must be >= 1");
      const int test = patch.value("test_trajectories", static_cast<int>(std::llround(total / 6.0)));
      patch["train_trajectories"] = total - std::min(test, total);
      patch["test_trajectories"] = std::min(test, total);
      patch.erase("trajectories");
    }
    for (const char* key : {"dt", "steps", "substeps", "train_trajectories", "test_trajectories"}) {
      if (patch.contains(key)) {
        patch["simulation"][key] = patch[key];
        patch.erase(key);
      }
    }
  }
  cfg.merge_patch(patch);
  return cfg;
}

template <typename T>
void set_if(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

void finish_config(json& cfg, const Common& c, std::uint64_t seed, const char* command) {
  cfg["command"] = command;
  cfg["seed"] = seed;
  cfg["threads"] = c.threads;
  write_json_file(fs::path(c.out) / "config.resolved.json", cfg);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void log_phase(std::ostream& log, const char* phase, double secs) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "[time] %s: %.3f s\n", phase, secs);
  log << buf;
}

Params parse_params(const json& j) {
  Params p;
  for (const auto& [k, v] : j.items()) p[k] = v.get<double>();
  return p;
}

json params_json(const Params& p) {
  json j = json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

// ---------------------------------------------------------------- simulate

struct SimulateFlags {
  Common common;
  std::optional<std::string> system;
  std::optional<int> trajectories;
  std::optional<int> test_trajectories;
  std::optional<double> dt;
  std::optional<int> steps;
  std::optional<int> substeps;
  std::vector<double> x0;
  std::optional<int> window;
  std::optional<int> test_windows;
  std::vector<std::string> params;
};

int cmd_simulate(const SimulateFlags& f, std::ostream& log) {
  const json file = load_config(f.common);
  const std::uint64_t seed = resolve_seed(f.common, file);
  json cfg = start_config({{"system", "vanderpol"},
                           {"params", json::object()},
                           {"simulation", simulation_config_to_json({})},
                           {"x0", nullptr},
                           {"window", 0},
                           {"test_windows", 0}},
                          file);
  set_if(cfg, "system", f.system);
  auto& sim = cfg["simulation"];
  if (f.trajectories) {
    const int total = *f.trajectories;
    if (total < 1) throw ConfigError("--trajectories must be >= 1");
    const int test = f.test_trajectories.value_or(static_cast<int>(std::llround(total / 6.0)));
    sim["train_trajectories"] = total - std::min(test, total);
    sim["test_trajectories"] = std::min(test, total);
  } else {
    set_if(sim, "test_trajectories", f.test_trajectories);
  }
  set_if(sim, "dt", f.dt);
  set_if(sim, "steps", f.steps);
  set_if(sim, "substeps", f.substeps);
  sim["seed"] = seed;
  if (!f.x0.empty()) cfg["x0"] = f.x0;
  set_if(cfg, "window", f.window);
  set_if(cfg, "test_windows", f.test_windows);
  for (const auto& kv : f.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--param expects name=value, got '" + kv + "'");
    cfg["params"][kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
  }

  const SimulationConfig sc = simulation_config_from_json(cfg["simulation"]);
  const SystemDef system = make_system(cfg["system"].get<std::string>(), parse_params(cfg["params"]));
  cfg["params"] = params_json(system.params);

  const auto t0 = std::chrono::steady_clock::now();
  Dataset data;
  data.system_name = system.name;
  if (!cfg["x0"].is_null()) {
    const Vec x0 = vec_from_json(cfg["x0"]);
    require_dim(x0.size(), system.n, "--x0");
    const Trajectory traj = simulate(system, x0, sc.dt, sc.steps, sc.substeps);
    const int window = cfg["window"].get<int>();
    std::vector<Trajectory> pieces = window > 0 ? split_trajectory(traj, window) : std::vector<Trajectory>{traj};
    const auto test = static_cast<std::size_t>(std::clamp(cfg["test_windows"].get<int>(), 0,
                                                          static_cast<int>(pieces.size()) - 1));
    data.train.assign(pieces.begin(), pieces.end() - static_cast<std::ptrdiff_t>(test));
    data.test.assign(pieces.end() - static_cast<std::ptrdiff_t>(test), pieces.end());
    if (traj.truncated) log << "warning: trajectory truncated at blow-up\n";
  } else {
    data = make_dataset(system, sc, f.common.threads);
    const int dropped = sc.train_trajectories + sc.test_trajectories -
                        static_cast<int>(data.train.size() + data.test.size());
    if (dropped > 0) log << "warning: " << dropped << " truncated trajectories dropped\n";
  }
  log_phase(log, "simulate", seconds_since(t0));

  write_dataset(data, f.common.out,
                {{"params", cfg["params"]}, {"simulation", cfg["simulation"]}, {"seed", seed}});
  finish_config(cfg, f.common, seed, "simulate");
  log << "wrote " << data.train.size() + data.test.size() << " trajectories to " << f.common.out << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- train

struct TrainFlags {
  Common common;
  std::optional<std::string> data;
  std::optional<std::string> system;
  std::optional<std::string> method;
  std::optional<std::string> dict;
  std::optional<int> N;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<int> batch;
  std::optional<double> ridge;
  std::optional<int> log_every;
  std::optional<std::string> objective;
  std::optional<int> pool;
  std::optional<bool> poly_scaling;
};

json pursuit_config_to_json(const PursuitConfig& p) {
  return {{"pool_size", p.pool_size},
          {"alpha_lo", p.alpha_lo},
          {"alpha_hi", p.alpha_hi},
          {"ridge", p.ridge},
          {"objective", to_string(p.objective)}};
}

PursuitConfig pursuit_config_from_json(const json& j, std::uint64_t seed, int threads) {
  PursuitConfig p;
  p.pool_size = j.value("pool_size", p.pool_size);
  p.alpha_lo = j.value("alpha_lo", p.alpha_lo);
  p.alpha_hi = j.value("alpha_hi", p.alpha_hi);
  p.ridge = j.value("ridge", p.ridge);
  p.objective = parse_pursuit_objective(j.value("objective", std::string(to_string(p.objective))));
  p.seed = seed;
  p.threads = threads;
  return p;
}

Dataset obtain_dataset(const json& cfg, int threads) {
  if (!cfg["data"].is_null()) return load_dataset(cfg["data"].get<std::string>());
  const SystemDef system = make_system(cfg["system"].get<std::string>());
  return make_dataset(system, simulation_config_from_json(cfg["simulation"]), threads);
}

int cmd_train(const TrainFlags& f, std::ostream& log) {
  const json file = load_config(f.common);
  const std::uint64_t seed = resolve_seed(f.common, file);
  json cfg = start_config({{"data", nullptr},
                           {"system", "vanderpol"},
                           {"simulation", simulation_config_to_json({})},
                           {"method", "sgd"},
                           {"dict", "augsill"},
                           {"N", 20},
                           {"scale_polynomials", false},
                           {"train", train_config_to_json({})},
                           {"pursuit", pursuit_config_to_json({})}},
                          file);
  set_if(cfg, "data", f.data);
  set_if(cfg, "system", f.system);
  set_if(cfg, "method", f.method);
  set_if(cfg, "dict", f.dict);
  set_if(cfg, "N", f.N);
  set_if(cfg, "scale_polynomials", f.poly_scaling);
  auto& tr = cfg["train"];
  set_if(tr, "epochs", f.epochs);
  set_if(tr, "learning_rate", f.lr);
  set_if(tr, "batch_size", f.batch);
  set_if(tr, "ridge", f.ridge);
  set_if(tr, "log_every", f.log_every);
  tr["seed"] = seed;
  set_if(cfg["pursuit"], "objective", f.objective);
  set_if(cfg["pursuit"], "pool_size", f.pool);
  set_if(cfg["pursuit"], "ridge", f.ridge);
  cfg["simulation"]["seed"] = seed;
  if (!cfg["data"].is_null()) {
    cfg.erase("system");
    cfg.erase("simulation");
  }

  const TrainConfig tc = train_config_from_json(cfg["train"]);
  const PursuitConfig pc = pursuit_config_from_json(cfg["pursuit"], seed, f.common.threads);
  const std::string method = cfg["method"].get<std::string>();
  const DictKind kind = parse_dict_kind(cfg["dict"].get<std::string>());
  const int N = cfg["N"].get<int>();
  const bool scale = cfg["scale_polynomials"].get<bool>();
  if (method != "dmd" && method != "edmd" && method != "sgd" && method != "mp") {
    throw ConfigError("unknown method '" + method + "' (dmd, edmd, sgd, mp)");
  }
  if (method == "dmd") {
    cfg.erase("dict");
    cfg.erase("N");
    cfg.erase("scale_polynomials");
  }

  auto t0 = std::chrono::steady_clock::now();
  const Dataset data = obtain_dataset(cfg, f.common.threads);
  log_phase(log, "data", seconds_since(t0));
  const int m = static_cast<int>(data.snapshots.dim());

  t0 = std::chrono::steady_clock::now();
  KoopmanModel model;
  if (method == "dmd") {
    model = dmd_fit(data.snapshots, tc.ridge);
  } else if (method == "edmd") {
    model = edmd_fit(initial_dictionary(kind, m, N, data_range(data.snapshots), seed, scale), data.snapshots, tc.ridge);
  } else if (method == "sgd") {
    model = sgd_train(initial_dictionary(kind, m, N, data_range(data.snapshots), seed, scale), data.snapshots, data.test, tc);
  } else {
    model = matching_pursuit_fit(kind, pc, data.snapshots, N);
  }
  log_phase(log, ("fit (" + method + ")").c_str(), seconds_since(t0));

  if (model.meta.trace.empty()) {
    const double test = data.test.empty() ? std::nan("") : five_step_error(model, data.test, tc.eval_steps).mean_5step;
    model.meta.trace.push_back({0, model.meta.train_loss, test});
  }
  for (const auto& w : model.meta.warnings) log << "warning: " << w << "\n";

  const fs::path out(f.common.out);
  write_json_file(out / "model.json", model_to_json(model));
  write_trace_csv(model.meta.trace, out / "trace.csv");
  finish_config(cfg, f.common, seed, "train");
  log << "lifted residual (mean) = " << format_double(model.meta.train_loss) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateFlags {
  Common common;
  std::optional<std::string> model;
  std::optional<std::string> data;
  std::optional<int> n_step;
  std::optional<bool> relift;
};

int cmd_evaluate(const EvaluateFlags& f, std::ostream& log) {
  const json file = load_config(f.common);
  const std::uint64_t seed = resolve_seed(f.common, file);
  json cfg = start_config({{"model", nullptr}, {"data", nullptr}, {"n_step", 5}, {"relift", false}}, file);
  set_if(cfg, "model", f.model);
  set_if(cfg, "data", f.data);
  set_if(cfg, "n_step", f.n_step);
  set_if(cfg, "relift", f.relift);
  if (cfg["model"].is_null() || cfg["data"].is_null()) throw ConfigError("evaluate needs --model and --data");

  const fs::path model_path = cfg["model"].get<std::string>();
  const KoopmanModel model = model_from_json(read_json_file(model_path));
  const Dataset data = load_dataset(cfg["data"].get<std::string>());
  std::vector<Trajectory> test = data.test;
  if (test.empty()) {
    log << "warning: dataset has no test split; evaluating on train trajectories\n";
    test = data.train;
  }
  for (const auto& t : test) {
    if (t.states.cols() != model.dict.m) {
      throw DimensionError("model has m = " + std::to_string(model.dict.m) + " but dataset has m = " +
                           std::to_string(t.states.cols()));
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  EvalReport report = five_step_error(model, test, cfg["n_step"].get<int>(), f.common.threads, cfg["relift"].get<bool>());
  log_phase(log, "evaluate", seconds_since(t0));
  report.model_id = model_path.stem().string();
  write_json_file(fs::path(f.common.out) / "eval.json", eval_report_to_json(report));
  finish_config(cfg, f.common, seed, "evaluate");
  log << "5-step error = " << format_double(report.mean_5step) << " over " << report.test_size << " initial conditions";
  if (report.diverged_count > 0) log << " (" << report.diverged_count << " diverged)";
  log << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------- compare

struct CompareFlags {
  Common common;
  bool quick = false;
  std::vector<std::string> systems;
  std::vector<std::string> kinds;
  std::vector<int> sizes;
  std::optional<int> epochs;
  std::optional<bool> poly_scaling;
};

int cmd_compare(const CompareFlags& f, std::ostream& log) {
  const json file = load_config(f.common);
  const std::uint64_t seed = resolve_seed(f.common, file);
  SimulationConfig sim;
  TrainConfig train;
  train.epochs = 200;
  json kinds = json::array();
  for (const auto k : {DictKind::AugSILL, DictKind::SILL, DictKind::SummedRBF, DictKind::Legendre, DictKind::Hermite}) {
    kinds.push_back(to_string(k));
  }
  json defaults = {{"systems", planar_system_names()},
                   {"kinds", kinds},
                   {"sizes", {5, 10, 20}},
                   {"simulation", simulation_config_to_json(sim)},
                   {"train", train_config_to_json(train)},
                   {"scale_polynomials", false},
                   {"quick", false}};
  if (f.quick || file.value("quick", false)) {
    defaults["quick"] = true;
    defaults["sizes"] = {5, 10};
    defaults["simulation"]["train_trajectories"] = 20;
    defaults["simulation"]["test_trajectories"] = 5;
    defaults["simulation"]["steps"] = 30;
    defaults["train"]["epochs"] = 20;
  }
  json cfg = start_config(defaults, file);
  if (!f.systems.empty()) cfg["systems"] = f.systems;
  if (!f.kinds.empty()) cfg["kinds"] = f.kinds;
  if (!f.sizes.empty()) cfg["sizes"] = f.sizes;
  set_if(cfg["train"], "epochs", f.epochs);
  set_if(cfg, "scale_polynomials", f.poly_scaling);
  cfg["train"]["seed"] = seed;
  cfg["simulation"]["seed"] = seed;

  CompareConfig cc;
  cc.systems = cfg["systems"].get<std::vector<std::string>>();
  for (const auto& k : cfg["kinds"]) cc.kinds.push_back(parse_dict_kind(k.get<std::string>()));
  cc.sizes = cfg["sizes"].get<std::vector<int>>();
  cc.simulation = simulation_config_from_json(cfg["simulation"]);
  cc.train = train_config_from_json(cfg["train"]);
  cc.scale_polynomials = cfg["scale_polynomials"].get<bool>();
  cc.threads = f.common.threads;
  for (const auto& s : cc.systems) (void)make_system(s);

  const auto t0 = std::chrono::steady_clock::now();
  const ComparisonTable table = compare_dictionaries(cc);
  log_phase(log, "compare", seconds_since(t0));

  const fs::path out(f.common.out);
  write_comparison_csv(table, out / "comparison.csv");
  (void)write_comparison_svgs(table, out);
  json cells = json::array();
  for (const auto& c : table.cells) {
    cells.push_back({{"system", c.system},
                     {"kind", to_string(c.kind)},
                     {"N", c.N},
                     {"final_5step", std::isfinite(c.final_5step) ? json(c.final_5step) : json(nullptr)},
                     {"dmd_5step", std::isfinite(c.dmd_5step) ? json(c.dmd_5step) : json(nullptr)},
                     {"error", c.error}});
    if (!c.error.empty()) log << "cell " << c.system << "/" << to_string(c.kind) << "/N=" << c.N << ": " << c.error << "\n";
  }
  write_json_file(out / "summary.json", {{"cells", cells}});
  finish_config(cfg, f.common, seed, "compare");
  return kExitOk;
}

// ---------------------------------------------------------- verify-closure

struct ClosureFlags {
  Common common;
  std::vector<std::string> cases;
  std::optional<int> m;
  std::optional<int> samples;
  std::optional<bool> corollaries;
  std::optional<bool> bounds;
};

json bound_config_to_json(const BoundCheckConfig& b) {
  return {{"m", b.m}, {"N_L", b.N_L}, {"N_R", b.N_R}, {"samples", b.samples}, {"a", b.a}, {"min_samples", b.min_samples}};
}

int cmd_verify_closure(const ClosureFlags& f, std::ostream& log) {
  const json file = load_config(f.common);
  const std::uint64_t seed = resolve_seed(f.common, file);
  json cfg = start_config({{"cases", {"all"}},
                           {"closure", closure_config_to_json({})},
                           {"corollaries", true},
                           {"bounds", false},
                           {"bound_check", bound_config_to_json({})},
                           {"monte_carlo", {{"samples", 100000}, {"a_values", {1.0, 5.0, 10.0}}, {"m_values", {1, 2, 3}}}}},
                          file);
  if (!f.cases.empty()) cfg["cases"] = f.cases;
  set_if(cfg["closure"], "m", f.m);
  set_if(cfg["closure"], "sample_count", f.samples);
  cfg["closure"]["seed"] = seed;
  set_if(cfg, "corollaries", f.corollaries);
  set_if(cfg, "bounds", f.bounds);

  ClosureConfig cc = closure_config_from_json(cfg["closure"]);
  cc.threads = f.common.threads;
  std::vector<ClosureCase> cases;
  for (const auto& name : cfg["cases"]) {
    if (name.get<std::string>() == "all") {
      for (const auto c : all_closure_cases()) {
        if (std::find(cases.begin(), cases.end(), c) == cases.end()) cases.push_back(c);
      }
    } else {
      cases.push_back(parse_closure_case(name.get<std::string>()));
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  const ClosureReport report = verify_closure(cases, cc, cfg["corollaries"].get<bool>());
  log_phase(log, "closure sweeps", seconds_since(t0));
  const fs::path out(f.common.out);
  write_closure_artifacts(report, out);
  for (const auto& c : report.cases) {
    log << c.name << ": pass fraction " << format_double(c.pass_fraction) << (c.passed ? " PASS" : " FAIL") << "\n";
  }
  for (const auto& c : report.corollaries) {
    log << c.name << ": pass fraction " << format_double(c.pass_fraction) << (c.passed ? " PASS" : " FAIL") << "\n";
  }

  if (cfg["bounds"].get<bool>()) {
    const auto t1 = std::chrono::steady_clock::now();
    const auto& bj = cfg["bound_check"];
    BoundCheckConfig bc;
    bc.m = bj.value("m", bc.m);
    bc.N_L = bj.value("N_L", bc.N_L);
    bc.N_R = bj.value("N_R", bc.N_R);
    bc.samples = bj.value("samples", bc.samples);
    bc.a = bj.value("a", bc.a);
    bc.min_samples = bj.value("min_samples", bc.min_samples);
    bc.seed = seed;
    bc.threads = f.common.threads;
    json rows = json::array();
    for (const auto row : {BoundRow::LogLimApprox, BoundRow::LogPrime, BoundRow::RbfLimApprox, BoundRow::RbfPrime}) {
      rows.push_back(to_json(bound_check_table(row, bc)));
    }
    const auto& mj = cfg["monte_carlo"];
    const long samples = mj["samples"].get<long>();
    json expectations = json::array();
    for (const double a : mj["a_values"].get<std::vector<double>>()) {
      for (const auto fn : {McFunction::Logistic, McFunction::Rbf}) {
        json e = to_json(mc_expectation(fn, a, 1, samples, seed, f.common.threads));
        e["function"] = to_string(fn);
        e["a"] = a;
        e["m"] = 1;
        expectations.push_back(e);
      }
      for (const int m : mj["m_values"].get<std::vector<int>>()) {
        for (const auto fn : {McFunction::ConjLogistic, McFunction::ConjRbf, McFunction::H}) {
          json e = to_json(mc_expectation(fn, a, m, samples, seed, f.common.threads));
          e["function"] = to_string(fn);
          e["a"] = a;
          e["m"] = m;
          expectations.push_back(e);
        }
      }
    }
    write_json_file(out / "bounds.json", {{"table_rows", rows},
                                          {"h_occupancy", to_json(h_occupancy(bc.m, bc.a, bc.samples, seed))},
                                          {"expectations", expectations}});
    log_phase(log, "bounds", seconds_since(t1));
  }
  finish_config(cfg, f.common, seed, "verify-closure");
  log << "closure checks " << (report.all_passed() ? "passed" : "did not all pass") << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& log) {
  CLI::App app{"Koopman operator learning with logistic / RBF dictionaries", "koopman-lift"};
  app.require_subcommand(1);

  SimulateFlags sim;
  auto* s = app.add_subcommand("simulate", "Simulate a benchmark system into trajectory CSVs");
  add_common(s, sim.common);
  s->add_option("--system", sim.system, "vanderpol, duffing, predprey, toggle, glycolysis");
  s->add_option("--trajectories", sim.trajectories, "Total trajectory count");
  s->add_option("--test-trajectories", sim.test_trajectories, "Held-out trajectory count");
  s->add_option("--dt", sim.dt, "Sampling interval");
  s->add_option("--steps", sim.steps, "Samples per trajectory (excluding the initial state)");
  s->add_option("--substeps", sim.substeps, "RK4 steps per sampling interval");
  s->add_option("--x0", sim.x0, "Single initial condition instead of random draws")->delimiter(',');
  s->add_option("--window", sim.window, "Split the --x0 trajectory into windows of this many rows");
  s->add_option("--test-windows", sim.test_windows, "Trailing windows held out for testing");
  s->add_option("--param", sim.params, "Override a system constant, name=value");

  TrainFlags tr;
  auto* t = app.add_subcommand("train", "Fit a Koopman model");
  add_common(t, tr.common);
  t->add_option("--data", tr.data, "Dataset directory written by simulate");
  t->add_option("--system", tr.system, "Simulate this system inline when --data is absent");
  t->add_option("--method", tr.method, "dmd, edmd, sgd, mp");
  t->add_option("--dict", tr.dict, "augsill, sill, summedrbf, legendre, hermite");
  t->add_option("--N", tr.N, "Dictionary size");
  t->add_option("--epochs", tr.epochs);
  t->add_option("--lr", tr.lr, "Learning rate");
  t->add_option("--batch", tr.batch, "Batch size");
  t->add_option("--ridge", tr.ridge);
  t->add_option("--log-every", tr.log_every, "Test-error period in epochs");
  t->add_option("--objective", tr.objective, "Matching-pursuit objective: state_rows, lifted");
  t->add_option("--pool", tr.pool, "Matching-pursuit candidate pool size");
  t->add_flag("--poly-scaling", tr.poly_scaling, "Map the data range onto [-1, 1] for polynomial dictionaries");

  EvaluateFlags ev;
  auto* e = app.add_subcommand("evaluate", "n-step prediction error of a model on a dataset");
  add_common(e, ev.common);
  e->add_option("--model", ev.model, "model.json");
  e->add_option("--data", ev.data, "Dataset directory");
  e->add_option("--n-step", ev.n_step);
  e->add_flag("--relift", ev.relift, "Re-lift the prediction every step");

  CompareFlags cmp;
  auto* c = app.add_subcommand("compare", "Dictionary comparison grid");
  add_common(c, cmp.common);
  c->add_flag("--quick", cmp.quick, "Small grid for a fast smoke run");
  c->add_option("--systems", cmp.systems)->delimiter(',');
  c->add_option("--kinds", cmp.kinds)->delimiter(',');
  c->add_option("--sizes", cmp.sizes)->delimiter(',');
  c->add_option("--epochs", cmp.epochs);
  c->add_flag("--poly-scaling", cmp.poly_scaling, "Map the data range onto [-1, 1] for polynomial dictionaries");

  ClosureFlags cl;
  auto* v = app.add_subcommand("verify-closure", "Product-limit sweeps and bound checks");
  add_common(v, cl.common);
  v->add_option("--case", cl.cases, "all, LL, LP_ordered, LP_disordered, PP")->delimiter(',');
  v->add_option("--m", cl.m, "Measurement dimension");
  v->add_option("--samples", cl.samples, "Random configurations per case");
  v->add_flag("--corollaries,!--no-corollaries", cl.corollaries, "Include the Lie-derivative chain sweeps");
  v->add_flag("--bounds", cl.bounds, "Also run Monte-Carlo expectations and bound checks");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*s) return cmd_simulate(sim, log);
    if (*t) return cmd_train(tr, log);
    if (*e) return cmd_evaluate(ev, log);
    if (*c) return cmd_compare(cmp, log);
    if (*v) return cmd_verify_closure(cl, log);
  } catch (const NumericalError& err) {
    log << "numerical failure: " << err.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& err) {
    log << "error: " << err.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace klift::cli
