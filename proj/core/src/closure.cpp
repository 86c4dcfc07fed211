#include "koopman_lift/closure.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>

#include "koopman_lift/report_io.hpp"
#include "koopman_lift/rng.hpp"
#include "koopman_lift/svg_plot.hpp"

namespace klift {

namespace {

bool ordered_below(const DictParams& a, const DictParams& b) {
  return (a.mu.array() < b.mu.array()).all();
}

}  // namespace

double decision_H(const Vec& y, const DictParams& theta_l, const DictParams& theta_k) {
  require_dim(theta_l.dim(), y.size(), "decision_H theta_l");
  require_dim(theta_k.dim(), y.size(), "decision_H theta_k");
  return ordered_below(theta_l, theta_k) ? conj_rbf_eval(y, theta_k) : 0.0;
}

double product_error_LP(const Vec& y, const DictParams& theta_l, const DictParams& theta_k) {
  return conj_logistic_eval(y, theta_l) * conj_rbf_eval(y, theta_k) - decision_H(y, theta_l, theta_k);
}

double product_error_PP(const Vec& y, const DictParams& theta_l, const DictParams& theta_k) {
  return conj_rbf_eval(y, theta_l) * conj_rbf_eval(y, theta_k);
}

double product_error_LL(const Vec& y, const DictParams& theta_l, const DictParams& theta_j) {
  return conj_logistic_eval(y, theta_l) * conj_logistic_eval(y, theta_j) -
         conj_logistic_eval(y, product_target(theta_l, theta_j));
}

std::string_view to_string(ClosureCase c) {
  switch (c) {
    case ClosureCase::LL: return "LL";
    case ClosureCase::LPOrdered: return "LP_ordered";
    case ClosureCase::LPDisordered: return "LP_disordered";
    case ClosureCase::PP: return "PP";
  }
  return "?";
}

ClosureCase parse_closure_case(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const ClosureCase c : all_closure_cases()) {
    std::string known(to_string(c));
    std::transform(known.begin(), known.end(), known.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (lower == known) return c;
  }
  throw DomainError("unknown closure case '" + std::string(name) + "' (LL, LP_ordered, LP_disordered, PP)");
}

std::vector<ClosureCase> all_closure_cases() {
  return {ClosureCase::LL, ClosureCase::LPOrdered, ClosureCase::LPDisordered, ClosureCase::PP};
}

void ClosureConfig::validate() const {
  if (m < 1) throw DomainError("ClosureConfig: m must be >= 1");
  if (N_L < 0 || N_R < 0) throw DomainError("ClosureConfig: N_L, N_R must be >= 0");
  if (alpha_grid.size() < 2) throw DomainError("ClosureConfig: alpha_grid needs at least two values");
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    if (!(alpha_grid[i] > 0.0)) throw DomainError("ClosureConfig: alpha_grid must be positive");
    if (i > 0 && !(alpha_grid[i] > alpha_grid[i - 1])) {
      throw DomainError("ClosureConfig: alpha_grid must be strictly increasing");
    }
  }
  if (sample_count < 1 || points_per_config < 1) throw DomainError("ClosureConfig: counts must be >= 1");
  if (!(interval_radius > 0.0)) throw DomainError("ClosureConfig: interval_radius must be > 0");
  if (!(margin > 0.0)) throw DomainError("ClosureConfig: margin must be > 0");
  if (!(margin < interval_radius)) throw DomainError("ClosureConfig: margin must be < interval_radius");
  if (required_fraction < 0.0 || required_fraction > 1.0) {
    throw DomainError("ClosureConfig: required_fraction must be in [0, 1]");
  }
}

nlohmann::json closure_config_to_json(const ClosureConfig& cfg) {
  return {{"m", cfg.m},
          {"N_L", cfg.N_L},
          {"N_R", cfg.N_R},
          {"alpha_grid", cfg.alpha_grid},
          {"sample_count", cfg.sample_count},
          {"points_per_config", cfg.points_per_config},
          {"interval_radius", cfg.interval_radius},
          {"margin", cfg.margin},
          {"seed", cfg.seed},
          {"slope_threshold", cfg.slope_threshold},
          {"monotone_tol", cfg.monotone_tol},
          {"required_fraction", cfg.required_fraction}};
}

ClosureConfig closure_config_from_json(const nlohmann::json& j, ClosureConfig base) {
  base.m = j.value("m", base.m);
  base.N_L = j.value("N_L", base.N_L);
  base.N_R = j.value("N_R", base.N_R);
  if (j.contains("alpha_grid")) base.alpha_grid = j["alpha_grid"].get<std::vector<double>>();
  base.sample_count = j.value("sample_count", base.sample_count);
  base.points_per_config = j.value("points_per_config", base.points_per_config);
  base.interval_radius = j.value("interval_radius", base.interval_radius);
  base.margin = j.value("margin", base.margin);
  base.seed = j.value("seed", base.seed);
  base.slope_threshold = j.value("slope_threshold", base.slope_threshold);
  base.monotone_tol = j.value("monotone_tol", base.monotone_tol);
  base.required_fraction = j.value("required_fraction", base.required_fraction);
  base.validate();
  return base;
}

bool ClosureReport::all_passed() const {
  auto ok = [](const CaseResult& c) { return c.passed; };
  return std::all_of(cases.begin(), cases.end(), ok) && std::all_of(corollaries.begin(), corollaries.end(), ok);
}

namespace {

Vec random_point(Rng& rng, int m, double a) {
  Vec v(m);
  for (int i = 0; i < m; ++i) v[i] = rng.uniform(-a, a);
  return v;
}

/// Uniform point in [-a, a]^m at least `margin` away from every listed
/// center coordinate.
Vec separated_point(Rng& rng, int m, double a, double margin, const std::vector<Vec>& centers) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Vec y = random_point(rng, m, a);
    bool ok = true;
    for (const auto& c : centers) {
      if (((y - c).array().abs() < margin).any()) {
        ok = false;
        break;
      }
    }
    if (ok) return y;
  }
  throw DomainError("closure sweep: margin leaves no admissible test points");
}

DictParams tied(const Vec& mu, double alpha) { return DictParams(mu, Vec::Constant(mu.size(), alpha)); }

ConfigSweep finish_sweep(std::vector<double> errors, const ClosureConfig& cfg) {
  ConfigSweep s;
  s.max_error = std::move(errors);
  const auto& grid = cfg.alpha_grid;
  const std::size_t n = grid.size();
  const bool all_zero = std::all_of(s.max_error.begin(), s.max_error.end(), [](double e) { return e == 0.0; });
  if (all_zero) {
    s.slope = -std::numeric_limits<double>::infinity();
  } else {
    double mx = 0.0, my = 0.0;
    std::vector<double> ly(n);
    for (std::size_t i = 0; i < n; ++i) {
      ly[i] = std::log(std::max(s.max_error[i], 1e-300));
      mx += grid[i];
      my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sxy += (grid[i] - mx) * (ly[i] - my);
      sxx += (grid[i] - mx) * (grid[i] - mx);
    }
    s.slope = sxy / sxx;
  }
  s.slope_ok = s.slope < -cfg.slope_threshold;
  s.monotone = true;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (s.max_error[i + 1] > s.max_error[i] * (1.0 + cfg.monotone_tol)) s.monotone = false;
  }
  std::size_t ref = 0;
  while (ref + 1 < n && grid[ref] < 4.0) ++ref;
  s.endpoint_ok = all_zero || s.max_error.back() < s.max_error[ref] ||
                  (s.max_error.back() == 0.0 && s.max_error[ref] == 0.0);
  return s;
}

CaseResult summarize(std::string name, const ClosureConfig& cfg, std::vector<ConfigSweep> configs) {
  CaseResult r;
  r.name = std::move(name);
  r.m = cfg.m;
  r.alpha_grid = cfg.alpha_grid;
  r.sup_error.assign(cfg.alpha_grid.size(), 0.0);
  std::vector<double> slopes;
  int passed = 0;
  for (const auto& c : configs) {
    for (std::size_t i = 0; i < r.sup_error.size(); ++i) r.sup_error[i] = std::max(r.sup_error[i], c.max_error[i]);
    slopes.push_back(c.slope);
    passed += c.passed() ? 1 : 0;
  }
  std::sort(slopes.begin(), slopes.end());
  r.median_slope = slopes[slopes.size() / 2];
  r.pass_fraction = static_cast<double>(passed) / static_cast<double>(configs.size());
  r.passed = r.pass_fraction >= cfg.required_fraction;
  r.configs = std::move(configs);
  return r;
}

/// Shared sweep driver: `setup` draws one configuration and returns the
/// centers to keep test points away from plus an error functional of
/// (y, alpha).
using ErrorFn = std::function<double(const Vec&, double)>;
using Setup = std::function<ErrorFn(Rng&, std::vector<Vec>&)>;

CaseResult run_sweep(const std::string& name, std::uint64_t stream, const ClosureConfig& cfg, const Setup& setup,
                     bool monotone_required = true) {
  cfg.validate();
  std::vector<ConfigSweep> configs(static_cast<std::size_t>(cfg.sample_count));
  parallel_for(configs.size(), cfg.threads, [&](std::size_t idx) {
    Rng rng(substream_seed(substream_seed(cfg.seed, stream), idx));
    std::vector<Vec> centers;
    const ErrorFn err = setup(rng, centers);
    std::vector<Vec> points;
    for (int p = 0; p < cfg.points_per_config; ++p) {
      points.push_back(separated_point(rng, cfg.m, cfg.interval_radius, cfg.margin, centers));
    }
    std::vector<double> errors;
    for (const double alpha : cfg.alpha_grid) {
      double worst = 0.0;
      for (const auto& y : points) worst = std::max(worst, std::abs(err(y, alpha)));
      errors.push_back(worst);
    }
    configs[idx] = finish_sweep(std::move(errors), cfg);
    configs[idx].monotone_required = monotone_required;
  });
  return summarize(name, cfg, std::move(configs));
}

}  // namespace

CaseResult convergence_sweep(ClosureCase c, const ClosureConfig& cfg) {
  const int m = cfg.m;
  const double a = cfg.interval_radius;
  Setup setup = [c, m, a](Rng& rng, std::vector<Vec>& centers) -> ErrorFn {
    Vec mu_l = random_point(rng, m, a);
    Vec mu_k = random_point(rng, m, a);
    if (c == ClosureCase::LPOrdered) {
      const Vec lo = mu_l.cwiseMin(mu_k);
      const Vec hi = mu_l.cwiseMax(mu_k);
      mu_l = lo;
      mu_k = hi;
    } else if (c == ClosureCase::LPDisordered && (mu_l.array() < mu_k.array()).all()) {
      std::swap(mu_l[0], mu_k[0]);
    }
    centers = {mu_l, mu_k};
    switch (c) {
      case ClosureCase::LL:
        return [=](const Vec& y, double al) { return product_error_LL(y, tied(mu_l, al), tied(mu_k, al)); };
      case ClosureCase::PP:
        return [=](const Vec& y, double al) { return product_error_PP(y, tied(mu_l, al), tied(mu_k, al)); };
      default:
        return [=](const Vec& y, double al) { return product_error_LP(y, tied(mu_l, al), tied(mu_k, al)); };
    }
  };
  return run_sweep(std::string(to_string(c)), static_cast<std::uint64_t>(c), cfg, setup);
}

Vec field_eval(const Dictionary& dict, const FieldExpansion& f, const Vec& y) {
  require_dim(f.w.rows(), dict.m, "FieldExpansion rows");
  require_dim(f.w.cols(), dict.logistic_count() + dict.rbf_count(), "FieldExpansion cols");
  Vec terms(f.w.cols());
  for (int j = 0; j < dict.logistic_count(); ++j) terms[j] = conj_logistic_eval(y, dict.logistic_terms[j]);
  for (int k = 0; k < dict.rbf_count(); ++k) terms[dict.logistic_count() + k] = conj_rbf_eval(y, dict.rbf_terms[k]);
  return f.w * terms;
}

std::string_view to_string(ChainForm form) {
  switch (form) {
    case ChainForm::LogPrime: return "log_prime";
    case ChainForm::LogLimApprox: return "log_lim_approx";
    case ChainForm::Cor3Pre: return "cor3_pre";
    case ChainForm::Cor3Post: return "cor3_post";
    case ChainForm::RbfPrime: return "rbf_prime";
    case ChainForm::RbfLimApprox: return "rbf_lim_approx";
    case ChainForm::Cor4Pre: return "cor4_pre";
    case ChainForm::Cor4Post: return "cor4_post";
  }
  return "?";
}

double lie_chain_form(ChainForm form, const Dictionary& dict, const DictParams& theta_l, const FieldExpansion& f,
                      const Vec& y) {
  const int m = dict.m;
  require_dim(y.size(), m, "lie_chain_form y");
  require_dim(theta_l.dim(), m, "lie_chain_form theta_l");
  require_dim(f.w.rows(), m, "FieldExpansion rows");
  const int NL = dict.logistic_count();
  const int NR = dict.rbf_count();
  require_dim(f.w.cols(), NL + NR, "FieldExpansion cols");

  const bool log_side = form == ChainForm::LogPrime || form == ChainForm::LogLimApprox ||
                        form == ChainForm::Cor3Pre || form == ChainForm::Cor3Post;
  const double self = log_side ? conj_logistic_eval(y, theta_l) : conj_rbf_eval(y, theta_l);

  // Per-term factors A_j (logistic columns) and B_k (RBF columns).
  Vec terms = Vec::Zero(NL + NR);
  for (int j = 0; j < NL; ++j) {
    const DictParams& tj = dict.logistic_terms[j];
    switch (form) {
      case ChainForm::LogPrime:
      case ChainForm::Cor3Pre: terms[j] = self * conj_logistic_eval(y, tj); break;
      case ChainForm::LogLimApprox:
      case ChainForm::Cor3Post: terms[j] = conj_logistic_eval(y, product_target(theta_l, tj)); break;
      case ChainForm::RbfPrime:
      case ChainForm::Cor4Pre: terms[j] = self * conj_logistic_eval(y, tj); break;
      case ChainForm::RbfLimApprox:
      case ChainForm::Cor4Post: terms[j] = decision_H(y, tj, theta_l); break;
    }
  }
  for (int k = 0; k < NR; ++k) {
    const DictParams& tk = dict.rbf_terms[k];
    switch (form) {
      case ChainForm::LogPrime:
      case ChainForm::Cor3Pre:
      case ChainForm::RbfPrime:
      case ChainForm::Cor4Pre: terms[NL + k] = self * conj_rbf_eval(y, tk); break;
      case ChainForm::LogLimApprox:
      case ChainForm::Cor3Post: terms[NL + k] = decision_H(y, theta_l, tk); break;
      case ChainForm::RbfLimApprox:
      case ChainForm::Cor4Post: terms[NL + k] = 0.0; break;
    }
  }

  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    const double lam = logistic_eval(y[i], theta_l.at(i));
    double factor = theta_l.alpha[i];
    if (form == ChainForm::LogPrime || form == ChainForm::LogLimApprox) factor *= 1.0 - lam;
    if (form == ChainForm::RbfPrime || form == ChainForm::RbfLimApprox) factor *= 1.0 - 2.0 * lam;
    total += factor * f.w.row(i).dot(terms);
  }
  return total;
}

double lie_derivative_exact(TermKind kind, const Dictionary& dict, const DictParams& theta_l, const FieldExpansion& f,
                            const Vec& y) {
  return lie_chain_form(kind == TermKind::Logistic ? ChainForm::LogPrime : ChainForm::RbfPrime, dict, theta_l, f, y);
}

double lie_derivative_linear_approx(TermKind kind, const Dictionary& dict, const DictParams& theta_l,
                                    const FieldExpansion& f, const Vec& y) {
  return lie_chain_form(kind == TermKind::Logistic ? ChainForm::Cor3Post : ChainForm::Cor4Post, dict, theta_l, f, y);
}

LinearRow linear_approx_row(TermKind kind, const Dictionary& dict, const DictParams& theta_l,
                            const FieldExpansion& f) {
  if (dict.kind != DictKind::AugSILL && dict.kind != DictKind::SILL) {
    throw UnsupportedKindError("linear_approx_row needs an augSILL or SILL dictionary");
  }
  const int m = dict.m;
  const int NL = dict.logistic_count();
  const int NR = dict.rbf_count();
  require_dim(f.w.rows(), m, "FieldExpansion rows");
  require_dim(f.w.cols(), NL + NR, "FieldExpansion cols");

  std::vector<DictParams> logistic = dict.logistic_terms;
  std::vector<DictParams> rbf = dict.rbf_terms;
  std::vector<std::pair<bool, std::size_t>> slots;
  std::vector<double> coefs;
  auto add = [&](std::vector<DictParams>& list, bool is_rbf, const DictParams& term, double coef) {
    auto it = std::find(list.begin(), list.end(), term);
    const auto idx = static_cast<std::size_t>(it - list.begin());
    if (it == list.end()) list.push_back(term);
    slots.emplace_back(is_rbf, idx);
    coefs.push_back(coef);
  };
  auto weight = [&](int col) { return theta_l.alpha.dot(f.w.col(col)); };

  if (kind == TermKind::Logistic) {
    for (int j = 0; j < NL; ++j) add(logistic, false, product_target(theta_l, dict.logistic_terms[j]), weight(j));
    for (int k = 0; k < NR; ++k) {
      if (ordered_below(theta_l, dict.rbf_terms[k])) add(rbf, true, dict.rbf_terms[k], weight(NL + k));
    }
  } else {
    for (int j = 0; j < NL; ++j) {
      if (ordered_below(dict.logistic_terms[j], theta_l)) add(rbf, true, theta_l, weight(j));
    }
  }

  LinearRow row;
  row.dict = make_augsill(m, logistic, rbf);
  row.k = Vec::Zero(row.dict.size());
  const int nl_ext = static_cast<int>(logistic.size());
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const auto [is_rbf, idx] = slots[s];
    row.k[1 + m + (is_rbf ? nl_ext : 0) + static_cast<int>(idx)] += coefs[s];
  }
  return row;
}

std::vector<CaseResult> corollary_sweeps(const ClosureConfig& cfg) {
  struct Pair {
    const char* name;
    ChainForm pre;
    ChainForm post;
    TermKind kind;
  };
  const Pair pairs[] = {{"logPrime_vs_limApprox", ChainForm::LogPrime, ChainForm::LogLimApprox, TermKind::Logistic},
                        {"rbfPrime_vs_limApprox", ChainForm::RbfPrime, ChainForm::RbfLimApprox, TermKind::Rbf},
                        {"cor3_pre_vs_post", ChainForm::Cor3Pre, ChainForm::Cor3Post, TermKind::Logistic},
                        {"cor4_pre_vs_post", ChainForm::Cor4Pre, ChainForm::Cor4Post, TermKind::Rbf}};
  const int m = cfg.m;
  const double a = cfg.interval_radius;
  const int NL = cfg.N_L;
  const int NR = cfg.N_R;
  std::vector<CaseResult> out;
  std::uint64_t stream = 100;
  for (const Pair& pair : pairs) {
    Setup setup = [=](Rng& rng, std::vector<Vec>& centers) -> ErrorFn {
      std::vector<Vec> mu_log;
      std::vector<Vec> mu_rbf;
      for (int j = 0; j < NL; ++j) mu_log.push_back(random_point(rng, m, a));
      for (int k = 0; k < NR; ++k) mu_rbf.push_back(random_point(rng, m, a));
      const Vec mu_l = random_point(rng, m, a);
      Mat w(m, NL + NR);
      for (Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-1.0, 1.0);
      centers = mu_log;
      centers.insert(centers.end(), mu_rbf.begin(), mu_rbf.end());
      centers.push_back(mu_l);
      return [=](const Vec& y, double al) {
        std::vector<DictParams> lt;
        std::vector<DictParams> rt;
        for (const auto& mu : mu_log) lt.push_back(tied(mu, al));
        for (const auto& mu : mu_rbf) rt.push_back(tied(mu, al));
        const Dictionary dict = make_augsill(m, lt, rt);
        const DictParams theta_l = tied(mu_l, al);
        const FieldExpansion f{w};
        return lie_chain_form(pair.pre, dict, theta_l, f, y) - lie_chain_form(pair.post, dict, theta_l, f, y);
      };
    };
    out.push_back(run_sweep(pair.name, stream++, cfg, setup, false));
  }
  return out;
}

ClosureReport verify_closure(const std::vector<ClosureCase>& cases, const ClosureConfig& cfg, bool with_corollaries) {
  cfg.validate();
  ClosureReport report;
  for (const ClosureCase c : cases) report.cases.push_back(convergence_sweep(c, cfg));
  if (with_corollaries) report.corollaries = corollary_sweeps(cfg);
  return report;
}

namespace {

nlohmann::json case_to_json(const CaseResult& r) {
  auto slope_json = [](double s) { return std::isfinite(s) ? nlohmann::json(s) : nlohmann::json("-inf"); };
  nlohmann::json configs = nlohmann::json::array();
  for (const auto& c : r.configs) {
    configs.push_back({{"max_error", c.max_error},
                       {"slope", slope_json(c.slope)},
                       {"slope_ok", c.slope_ok},
                       {"monotone", c.monotone},
                       {"monotone_required", c.monotone_required},
                       {"endpoint_ok", c.endpoint_ok},
                       {"passed", c.passed()}});
  }
  return {{"case", r.name},
          {"m", r.m},
          {"alpha_grid", r.alpha_grid},
          {"sup_error", r.sup_error},
          {"median_slope", slope_json(r.median_slope)},
          {"pass_fraction", r.pass_fraction},
          {"passed", r.passed},
          {"configs", configs}};
}

}  // namespace

nlohmann::json closure_report_to_json(const ClosureReport& report) {
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& c : report.cases) cases.push_back(case_to_json(c));
  nlohmann::json cors = nlohmann::json::array();
  for (const auto& c : report.corollaries) cors.push_back(case_to_json(c));
  return {{"cases", cases}, {"corollaries", cors}, {"all_passed", report.all_passed()}};
}

void write_closure_artifacts(const ClosureReport& report, const std::filesystem::path& dir) {
  write_json_file(dir / "closure_report.json", closure_report_to_json(report));
  auto emit = [&](const CaseResult& r) {
    std::string csv = "alpha,max_error\n";
    for (std::size_t i = 0; i < r.alpha_grid.size(); ++i) {
      csv += format_double(r.alpha_grid[i]) + "," + format_double(r.sup_error[i]) + "\n";
    }
    write_text_file(dir / (r.name + ".csv"), csv);
    PlotSpec spec;
    spec.title = r.name + " (m=" + std::to_string(r.m) + ")";
    spec.x_label = "alpha";
    spec.y_label = "max |error|";
    spec.log_y = true;
    std::vector<PlotSeries> series{{"sup over configs", r.alpha_grid, r.sup_error}};
    write_text_file(dir / (r.name + ".svg"), render_line_plot(spec, series));
  };
  for (const auto& c : report.cases) emit(c);
  for (const auto& c : report.corollaries) emit(c);
}

}  // namespace klift
