#include "koopman_lift/monte_carlo.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <vector>

#include "koopman_lift/closure.hpp"
#include "koopman_lift/lifting.hpp"
#include "koopman_lift/rng.hpp"

namespace klift {

namespace {

constexpr long kChunk = 8192;

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

struct Moments {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  void merge(const Moments& o) {
    if (o.n == 0) return;
    const long total = n + o.n;
    const double d = o.mean - mean;
    mean += d * static_cast<double>(o.n) / static_cast<double>(total);
    m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / static_cast<double>(total);
    n = total;
  }
};

/// Runs `draw` over fixed-size chunks, each with its own sub-stream, and
/// merges per-channel moments in chunk order.
std::vector<Moments> chunked(long samples, std::uint64_t seed, int threads, int channels,
                             const std::function<void(Rng&, double*)>& draw) {
  const auto n_chunks = static_cast<std::size_t>((samples + kChunk - 1) / kChunk);
  std::vector<std::vector<Moments>> parts(n_chunks, std::vector<Moments>(static_cast<std::size_t>(channels)));
  parallel_for(n_chunks, threads, [&](std::size_t c) {
    Rng rng(substream_seed(seed, c));
    const long count = std::min(kChunk, samples - static_cast<long>(c) * kChunk);
    std::vector<double> out(static_cast<std::size_t>(channels));
    for (long s = 0; s < count; ++s) {
      draw(rng, out.data());
      for (int ch = 0; ch < channels; ++ch) parts[c][static_cast<std::size_t>(ch)].add(out[static_cast<std::size_t>(ch)]);
    }
  });
  std::vector<Moments> total(static_cast<std::size_t>(channels));
  for (const auto& p : parts) {
    for (int ch = 0; ch < channels; ++ch) total[static_cast<std::size_t>(ch)].merge(p[static_cast<std::size_t>(ch)]);
  }
  return total;
}

McEstimate estimate(const Moments& mo) {
  McEstimate e;
  e.samples = mo.n;
  e.mean = mo.mean;
  e.variance = mo.n > 1 ? mo.m2 / static_cast<double>(mo.n - 1) : 0.0;
  e.std_error = mo.n > 0 ? std::sqrt(e.variance / static_cast<double>(mo.n)) : 0.0;
  return e;
}

Vec uniform_vec(Rng& rng, int m, double a) {
  Vec v(m);
  for (int i = 0; i < m; ++i) v[i] = rng.uniform(-a, a);
  return v;
}

DictParams random_theta(Rng& rng, int m, double a) {
  Vec mu = uniform_vec(rng, m, a);
  Vec alpha(m);
  for (int i = 0; i < m; ++i) alpha[i] = rng.uniform_open_closed(a);
  return DictParams(std::move(mu), std::move(alpha));
}

}  // namespace

std::string_view to_string(McFunction fn) {
  switch (fn) {
    case McFunction::Logistic: return "logistic";
    case McFunction::Rbf: return "rbf";
    case McFunction::ConjLogistic: return "conj_logistic";
    case McFunction::ConjRbf: return "conj_rbf";
    case McFunction::H: return "H";
  }
  return "?";
}

McFunction parse_mc_function(std::string_view name) {
  const std::string s = lowercase(name);
  for (const McFunction fn : {McFunction::Logistic, McFunction::Rbf, McFunction::ConjLogistic, McFunction::ConjRbf,
                              McFunction::H}) {
    if (s == lowercase(to_string(fn))) return fn;
  }
  throw DomainError("unknown Monte-Carlo function '" + std::string(name) + "'");
}

McEstimate mc_expectation(McFunction fn, double a, int m, long samples, std::uint64_t seed, int threads) {
  if (!(a > 0.0)) throw DomainError("mc_expectation: a must be > 0");
  if (m < 1) throw DomainError("mc_expectation: m must be >= 1");
  if (samples < 1) throw DomainError("mc_expectation: samples must be >= 1");
  const auto moments = chunked(samples, seed, threads, 1, [&](Rng& rng, double* out) {
    switch (fn) {
      case McFunction::Logistic:
      case McFunction::Rbf: {
        const double y = rng.uniform(-a, a);
        const ScalarParam p{rng.uniform(-a, a), rng.uniform_open_closed(a)};
        out[0] = fn == McFunction::Logistic ? logistic_eval(y, p) : rbf_eval(y, p);
        break;
      }
      case McFunction::ConjLogistic:
      case McFunction::ConjRbf: {
        const Vec y = uniform_vec(rng, m, a);
        const DictParams t = random_theta(rng, m, a);
        out[0] = fn == McFunction::ConjLogistic ? conj_logistic_eval(y, t) : conj_rbf_eval(y, t);
        break;
      }
      case McFunction::H: {
        const Vec y = uniform_vec(rng, m, a);
        const DictParams tl = random_theta(rng, m, a);
        const DictParams tk = random_theta(rng, m, a);
        out[0] = decision_H(y, tl, tk);
        break;
      }
    }
  });
  return estimate(moments[0]);
}

std::string_view to_string(BoundRow row) {
  switch (row) {
    case BoundRow::LogLimApprox: return "log_limApprox";
    case BoundRow::LogPrime: return "log_prime";
    case BoundRow::RbfLimApprox: return "rbf_limApprox";
    case BoundRow::RbfPrime: return "rbf_prime";
  }
  return "?";
}

BoundRow parse_bound_row(std::string_view name) {
  const std::string s = lowercase(name);
  for (const BoundRow r : {BoundRow::LogLimApprox, BoundRow::LogPrime, BoundRow::RbfLimApprox, BoundRow::RbfPrime}) {
    if (s == lowercase(to_string(r))) return r;
  }
  throw DomainError("unknown bound row '" + std::string(name) + "'");
}

void BoundCheckConfig::validate() const {
  if (m < 1) throw DomainError("BoundCheckConfig: m must be >= 1");
  if (N_L < 0 || N_R < 0 || N_L + N_R < 1) throw DomainError("BoundCheckConfig: need N_L + N_R >= 1");
  if (samples < 1) throw DomainError("BoundCheckConfig: samples must be >= 1");
  if (!(a > 0.0)) throw DomainError("BoundCheckConfig: a must be > 0");
}

double table_bound(BoundRow row, int m, int N_L, const Mat& nu) {
  require_dim(nu.rows(), m, "table_bound nu rows");
  const double log_sum = nu.leftCols(N_L).sum();
  const double rbf_sum = nu.rightCols(nu.cols() - N_L).sum();
  auto inv = [](int e) { return std::ldexp(1.0, -e); };
  switch (row) {
    case BoundRow::LogLimApprox: return log_sum * inv(m + 1) + rbf_sum * inv(3 * m + 1);
    case BoundRow::LogPrime: return log_sum * inv(2 * m + 1) + rbf_sum * inv(3 * m + 1);
    case BoundRow::RbfLimApprox: return log_sum * inv(3 * m + 1);
    case BoundRow::RbfPrime: return log_sum * inv(3 * m + 1) + rbf_sum * inv(4 * m + 1);
  }
  return 0.0;
}

BoundCheckResult bound_check_table(BoundRow row, const BoundCheckConfig& cfg) {
  cfg.validate();
  const int m = cfg.m;
  const int NL = cfg.N_L;
  const int NR = cfg.N_R;
  const double a = cfg.a;
  const auto moments = chunked(cfg.samples, cfg.seed + static_cast<std::uint64_t>(row), cfg.threads, 2,
                               [&](Rng& rng, double* out) {
    const Vec y = uniform_vec(rng, m, a);
    const DictParams theta_l = random_theta(rng, m, a);
    std::vector<DictParams> logistic;
    std::vector<DictParams> rbf;
    for (int j = 0; j < NL; ++j) logistic.push_back(random_theta(rng, m, a));
    for (int k = 0; k < NR; ++k) rbf.push_back(random_theta(rng, m, a));
    Mat w(m, NL + NR);
    for (Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-a, a);

    const bool rbf_side = row == BoundRow::RbfLimApprox || row == BoundRow::RbfPrime;
    const double self = rbf_side ? conj_rbf_eval(y, theta_l) : conj_logistic_eval(y, theta_l);
    Vec terms = Vec::Zero(NL + NR);
    for (int j = 0; j < NL; ++j) {
      switch (row) {
        case BoundRow::LogLimApprox: terms[j] = conj_logistic_eval(y, product_target(theta_l, logistic[j])); break;
        case BoundRow::LogPrime:
        case BoundRow::RbfPrime: terms[j] = self * conj_logistic_eval(y, logistic[j]); break;
        case BoundRow::RbfLimApprox: terms[j] = 2.0 * decision_H(y, logistic[j], theta_l); break;
      }
    }
    for (int k = 0; k < NR; ++k) {
      switch (row) {
        case BoundRow::LogLimApprox: terms[NL + k] = decision_H(y, theta_l, rbf[k]); break;
        case BoundRow::LogPrime:
        case BoundRow::RbfPrime: terms[NL + k] = self * conj_rbf_eval(y, rbf[k]); break;
        case BoundRow::RbfLimApprox: break;
      }
    }
    double diff = 0.0;
    Mat nu(m, NL + NR);
    for (int i = 0; i < m; ++i) {
      const double lam = logistic_eval(y[i], theta_l.at(i));
      diff += theta_l.alpha[i] * lam * w.row(i).dot(terms);
      nu.row(i) = (theta_l.alpha[i] * w.row(i)).cwiseAbs();
    }
    out[0] = std::abs(diff);
    out[1] = table_bound(row, m, NL, nu);
  });

  BoundCheckResult r;
  r.row = row;
  const McEstimate err = estimate(moments[0]);
  const McEstimate bound = estimate(moments[1]);
  r.mean_error = err.mean;
  r.error_se = err.std_error;
  r.mean_bound = bound.mean;
  r.margin = r.mean_bound + 3.0 * r.error_se - r.mean_error;
  r.inconclusive = cfg.samples < cfg.min_samples || !std::isfinite(r.error_se);
  r.passed = !r.inconclusive && r.margin >= 0.0;
  return r;
}

OccupancyResult h_occupancy(int m, double a, long samples, std::uint64_t seed) {
  if (m < 1 || samples < 1 || !(a > 0.0)) throw DomainError("h_occupancy: need m >= 1, samples >= 1, a > 0");
  const auto moments = chunked(samples, seed, 1, 1, [&](Rng& rng, double* out) {
    const Vec mu_l = uniform_vec(rng, m, a);
    const Vec mu_k = uniform_vec(rng, m, a);
    out[0] = (mu_l.array() < mu_k.array()).all() ? 1.0 : 0.0;
  });
  OccupancyResult r;
  r.fraction = moments[0].mean;
  r.expected = std::ldexp(1.0, -m);
  r.std_error = std::sqrt(r.expected * (1.0 - r.expected) / static_cast<double>(samples));
  r.within_3se = std::abs(r.fraction - r.expected) <= 3.0 * r.std_error;
  return r;
}

nlohmann::json to_json(const McEstimate& e) {
  return {{"mean", e.mean}, {"variance", e.variance}, {"std_error", e.std_error}, {"samples", e.samples}};
}

nlohmann::json to_json(const BoundCheckResult& r) {
  return {{"row", to_string(r.row)},       {"mean_error", r.mean_error}, {"error_se", r.error_se},
          {"mean_bound", r.mean_bound},    {"margin", r.margin},         {"passed", r.passed},
          {"inconclusive", r.inconclusive}, {"nu_interpretation", r.nu_interpretation}};
}

nlohmann::json to_json(const OccupancyResult& r) {
  return {{"fraction", r.fraction},
          {"expected", r.expected},
          {"std_error", r.std_error},
          {"within_3se", r.within_3se}};
}

}  // namespace klift
