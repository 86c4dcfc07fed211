#include "koopman_lift/lifting.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace klift {

namespace {

double clamped_exponent(double y, ScalarParam p) {
  return std::clamp(-p.alpha * (y - p.mu), -kExpClamp, kExpClamp);
}

// lambda and rho from the clamped exponent z = -alpha (y - mu); both forms
// only ever exponentiate a non-positive number.
double logistic_from_exponent(double z) {
  if (z >= 0.0) {
    const double t = std::exp(-z);
    return t / (1.0 + t);
  }
  return 1.0 / (1.0 + std::exp(z));
}

double rbf_from_exponent(double z) {
  const double t = std::exp(-std::abs(z));
  return t / ((1.0 + t) * (1.0 + t));
}

void check_params(const Vec& y, const DictParams& p, const char* what) {
  require_dim(p.dim(), y.size(), what);
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

DictParams::DictParams(Vec mu_, Vec alpha_) : mu(std::move(mu_)), alpha(std::move(alpha_)) {
  if (mu.size() != alpha.size()) {
    throw DimensionError("DictParams: mu and alpha lengths differ");
  }
  if (mu.size() < 1) throw DimensionError("DictParams: need at least one dimension");
}

bool DictParams::all_alpha_positive() const { return (alpha.array() > 0.0).all(); }

bool operator==(const DictParams& a, const DictParams& b) {
  return a.mu.size() == b.mu.size() && a.mu == b.mu && a.alpha == b.alpha;
}

std::string_view to_string(DictKind kind) {
  switch (kind) {
    case DictKind::AugSILL: return "augsill";
    case DictKind::SILL: return "sill";
    case DictKind::SummedRBF: return "summedrbf";
    case DictKind::Legendre: return "legendre";
    case DictKind::Hermite: return "hermite";
  }
  return "unknown";
}

DictKind parse_dict_kind(std::string_view name) {
  const std::string s = lowercase(name);
  if (s == "augsill") return DictKind::AugSILL;
  if (s == "sill") return DictKind::SILL;
  if (s == "summedrbf" || s == "summed_rbf" || s == "summed-rbf") return DictKind::SummedRBF;
  if (s == "legendre") return DictKind::Legendre;
  if (s == "hermite") return DictKind::Hermite;
  throw UnsupportedKindError("unknown dictionary kind '" + std::string(name) +
                             "' (valid: augsill, sill, summedrbf, legendre, hermite)");
}

bool is_parametric(DictKind kind) {
  return kind == DictKind::AugSILL || kind == DictKind::SILL || kind == DictKind::SummedRBF;
}

bool is_polynomial(DictKind kind) { return kind == DictKind::Legendre || kind == DictKind::Hermite; }

double logistic_eval(double y, ScalarParam p) { return logistic_from_exponent(clamped_exponent(y, p)); }

double rbf_eval(double y, ScalarParam p) { return rbf_from_exponent(clamped_exponent(y, p)); }

double conj_logistic_eval(const Vec& y, const DictParams& p) {
  check_params(y, p, "conj_logistic_eval");
  double prod = 1.0;
  for (Index i = 0; i < y.size(); ++i) prod *= logistic_eval(y[i], p.at(i));
  return prod;
}

double conj_rbf_eval(const Vec& y, const DictParams& p) {
  check_params(y, p, "conj_rbf_eval");
  double prod = 1.0;
  for (Index i = 0; i < y.size(); ++i) prod *= rbf_eval(y[i], p.at(i));
  return prod;
}

double summed_rbf_eval(const Vec& y, const DictParams& p) {
  check_params(y, p, "summed_rbf_eval");
  double sum = 0.0;
  for (Index i = 0; i < y.size(); ++i) sum += rbf_eval(y[i], p.at(i));
  return sum / static_cast<double>(y.size());
}

Vec grad_y_conj_logistic(const Vec& y, const DictParams& p) {
  check_params(y, p, "grad_y_conj_logistic");
  const double value = conj_logistic_eval(y, p);
  Vec g(y.size());
  for (Index i = 0; i < y.size(); ++i) {
    g[i] = p.alpha[i] * (1.0 - logistic_eval(y[i], p.at(i))) * value;
  }
  return g;
}

Vec grad_y_conj_rbf(const Vec& y, const DictParams& p) {
  check_params(y, p, "grad_y_conj_rbf");
  const double value = conj_rbf_eval(y, p);
  Vec g(y.size());
  for (Index i = 0; i < y.size(); ++i) {
    g[i] = p.alpha[i] * (1.0 - 2.0 * logistic_eval(y[i], p.at(i))) * value;
  }
  return g;
}

double legendre(int n, double x) {
  if (n < 0) throw DomainError("legendre: negative degree");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0) * x * cur - k * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

double hermite(int n, double x) {
  if (n < 0) throw DomainError("hermite: negative degree");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < n; ++k) {
    const double next = x * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

namespace {

// All exponent vectors of length m with the given total degree, first
// coordinate descending.
void compositions(int m, int degree, std::vector<int>& prefix, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(prefix.size()) == m - 1) {
    prefix.push_back(degree);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int d = degree; d >= 0; --d) {
    prefix.push_back(d);
    compositions(m, degree - d, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<std::vector<int>> graded_multi_indices(int m, int count) {
  if (m < 1) throw DimensionError("graded_multi_indices: m must be >= 1");
  std::vector<std::vector<int>> out;
  for (int degree = 2; static_cast<int>(out.size()) < count; ++degree) {
    std::vector<int> prefix;
    std::vector<std::vector<int>> level;
    compositions(m, degree, prefix, level);
    for (auto& idx : level) {
      if (static_cast<int>(out.size()) == count) break;
      out.push_back(std::move(idx));
    }
  }
  return out;
}

int Dictionary::nonlinear_size() const {
  if (is_polynomial(kind)) return static_cast<int>(poly_degree_indices.size());
  return logistic_count() + rbf_count();
}

int Dictionary::size() const { return 1 + m + nonlinear_size(); }

int Dictionary::param_count() const {
  if (!is_parametric(kind)) return 0;
  return 2 * m * (logistic_count() + rbf_count());
}

void Dictionary::validate() const {
  if (m < 1) throw DimensionError("Dictionary: m must be >= 1");
  auto check_terms = [&](const std::vector<DictParams>& terms, const char* what) {
    for (const auto& t : terms) {
      require_dim(t.mu.size(), m, what);
      require_dim(t.alpha.size(), m, what);
    }
  };
  check_terms(logistic_terms, "Dictionary logistic term");
  check_terms(rbf_terms, "Dictionary rbf term");
  switch (kind) {
    case DictKind::SILL:
      if (!rbf_terms.empty()) throw UnsupportedKindError("SILL dictionary cannot hold RBF terms");
      [[fallthrough]];
    case DictKind::AugSILL:
      if (!poly_degree_indices.empty()) {
        throw UnsupportedKindError("parametric dictionary cannot hold polynomial indices");
      }
      break;
    case DictKind::SummedRBF:
      if (!logistic_terms.empty() || !poly_degree_indices.empty()) {
        throw UnsupportedKindError("summed-RBF dictionary holds only rbf_terms");
      }
      break;
    case DictKind::Legendre:
    case DictKind::Hermite:
      if (!logistic_terms.empty() || !rbf_terms.empty()) {
        throw UnsupportedKindError("polynomial dictionary cannot hold logistic/RBF terms");
      }
      for (const auto& idx : poly_degree_indices) {
        require_dim(static_cast<Index>(idx.size()), m, "Dictionary multi-index");
        for (int e : idx) {
          if (e < 0) throw DomainError("Dictionary: negative polynomial degree");
        }
      }
      if (poly_domain.center.size() != 0 || poly_domain.half_width.size() != 0) {
        require_dim(poly_domain.center.size(), m, "PolyDomain center");
        require_dim(poly_domain.half_width.size(), m, "PolyDomain half_width");
        if (!(poly_domain.half_width.array() > 0.0).all()) {
          throw DomainError("PolyDomain: half widths must be positive");
        }
      }
      break;
  }
}

bool operator==(const Dictionary& a, const Dictionary& b) {
  auto same_vec = [](const Vec& x, const Vec& y) { return x.size() == y.size() && x == y; };
  return a.kind == b.kind && a.m == b.m && a.logistic_terms == b.logistic_terms &&
         a.rbf_terms == b.rbf_terms && a.poly_degree_indices == b.poly_degree_indices &&
         same_vec(a.poly_domain.center, b.poly_domain.center) &&
         same_vec(a.poly_domain.half_width, b.poly_domain.half_width);
}

Dictionary make_identity_dictionary(int m) {
  Dictionary d;
  d.kind = DictKind::AugSILL;
  d.m = m;
  d.validate();
  return d;
}

Dictionary make_augsill(int m, std::vector<DictParams> logistic, std::vector<DictParams> rbf) {
  Dictionary d;
  d.kind = DictKind::AugSILL;
  d.m = m;
  d.logistic_terms = std::move(logistic);
  d.rbf_terms = std::move(rbf);
  d.validate();
  return d;
}

Dictionary make_sill(int m, std::vector<DictParams> logistic) {
  Dictionary d;
  d.kind = DictKind::SILL;
  d.m = m;
  d.logistic_terms = std::move(logistic);
  d.validate();
  return d;
}

Dictionary make_summed_rbf(int m, std::vector<DictParams> terms) {
  Dictionary d;
  d.kind = DictKind::SummedRBF;
  d.m = m;
  d.rbf_terms = std::move(terms);
  d.validate();
  return d;
}

Dictionary make_polynomial(DictKind kind, int m, int N, PolyDomain domain) {
  if (!is_polynomial(kind)) throw UnsupportedKindError("make_polynomial: not a polynomial kind");
  if (N < 1 + m) throw DimensionError("make_polynomial: N must be >= 1 + m");
  Dictionary d;
  d.kind = kind;
  d.m = m;
  d.poly_degree_indices = graded_multi_indices(m, N - 1 - m);
  d.poly_domain = std::move(domain);
  d.validate();
  return d;
}

namespace {

double poly_term(const Dictionary& d, const std::vector<int>& idx, const Vec& u) {
  double prod = 1.0;
  for (int i = 0; i < d.m; ++i) {
    prod *= d.kind == DictKind::Legendre ? legendre(idx[i], u[i]) : hermite(idx[i], u[i]);
  }
  return prod;
}

Vec poly_input(const Dictionary& d, const Vec& y) {
  if (d.poly_domain.center.size() == 0) return y;
  return ((y - d.poly_domain.center).array() / d.poly_domain.half_width.array()).matrix();
}

}  // namespace

Vec dict_eval(const Dictionary& d, const Vec& y) {
  require_dim(y.size(), d.m, "dict_eval");
  Vec out(d.size());
  out[0] = 1.0;
  out.segment(1, d.m) = y;
  Index row = 1 + d.m;
  switch (d.kind) {
    case DictKind::AugSILL:
    case DictKind::SILL:
      for (const auto& t : d.logistic_terms) out[row++] = conj_logistic_eval(y, t);
      for (const auto& t : d.rbf_terms) out[row++] = conj_rbf_eval(y, t);
      break;
    case DictKind::SummedRBF:
      for (const auto& t : d.rbf_terms) out[row++] = summed_rbf_eval(y, t);
      break;
    case DictKind::Legendre:
    case DictKind::Hermite: {
      const Vec u = poly_input(d, y);
      for (const auto& idx : d.poly_degree_indices) out[row++] = poly_term(d, idx, u);
      break;
    }
  }
  return out;
}

Mat dict_eval_rows(const Dictionary& d, const Mat& Y) {
  require_dim(Y.cols(), d.m, "dict_eval_rows");
  Mat out(Y.rows(), d.size());
  for (Index r = 0; r < Y.rows(); ++r) out.row(r) = dict_eval(d, Y.row(r).transpose()).transpose();
  return out;
}

void lift_with_term_gradients(const Dictionary& d, const Vec& y, Vec& psi, Mat& term_grads) {
  if (!is_parametric(d.kind)) {
    throw UnsupportedKindError("lift_with_term_gradients: polynomial dictionaries have no parameters");
  }
  require_dim(y.size(), d.m, "lift_with_term_gradients");
  const int m = d.m;
  psi.resize(d.size());
  term_grads.resize(d.nonlinear_size(), 2 * m);
  psi[0] = 1.0;
  psi.segment(1, m) = y;
  Index row = 0;
  std::vector<double> lam(static_cast<std::size_t>(m));
  std::vector<double> rho(static_cast<std::size_t>(m));
  double* lp = lam.data();
  double* rp = rho.data();
  auto fill_factors = [&](const DictParams& t) {
    for (int i = 0; i < m; ++i) {
      const double z = clamped_exponent(y[i], t.at(i));
      lp[i] = logistic_from_exponent(z);
      rp[i] = rbf_from_exponent(z);
    }
  };
  for (const auto& t : d.logistic_terms) {
    fill_factors(t);
    double value = 1.0;
    for (int i = 0; i < m; ++i) value *= lp[i];
    psi[1 + m + row] = value;
    for (int i = 0; i < m; ++i) {
      const double common = (1.0 - lp[i]) * value;
      term_grads(row, i) = -t.alpha[i] * common;
      term_grads(row, m + i) = (y[i] - t.mu[i]) * common;
    }
    ++row;
  }
  const bool summed = d.kind == DictKind::SummedRBF;
  for (const auto& t : d.rbf_terms) {
    fill_factors(t);
    double value = summed ? 0.0 : 1.0;
    for (int i = 0; i < m; ++i) value = summed ? value + rp[i] : value * rp[i];
    if (summed) value /= m;
    psi[1 + m + row] = value;
    for (int i = 0; i < m; ++i) {
      const double common = (1.0 - 2.0 * lp[i]) * (summed ? rp[i] / m : value);
      term_grads(row, i) = -t.alpha[i] * common;
      term_grads(row, m + i) = (y[i] - t.mu[i]) * common;
    }
    ++row;
  }
}

Mat grad_params_dict(const Dictionary& d, const Vec& y) {
  if (!is_parametric(d.kind)) {
    throw UnsupportedKindError("grad_params_dict: polynomial dictionaries have no parameters");
  }
  Vec psi;
  Mat term_grads;
  lift_with_term_gradients(d, y, psi, term_grads);
  const int m = d.m;
  Mat J = Mat::Zero(d.size(), d.param_count());
  for (Index t = 0; t < term_grads.rows(); ++t) {
    J.block(1 + m + t, 2 * m * t, 1, 2 * m) = term_grads.row(t);
  }
  return J;
}

Vec pack_params(const Dictionary& d) {
  Vec out(d.param_count());
  Index pos = 0;
  auto put = [&](const std::vector<DictParams>& terms) {
    for (const auto& t : terms) {
      out.segment(pos, d.m) = t.mu;
      out.segment(pos + d.m, d.m) = t.alpha;
      pos += 2 * d.m;
    }
  };
  if (is_parametric(d.kind)) {
    put(d.logistic_terms);
    put(d.rbf_terms);
  }
  return out;
}

void unpack_params(Dictionary& d, const Vec& params) {
  require_dim(params.size(), d.param_count(), "unpack_params");
  Index pos = 0;
  auto get = [&](std::vector<DictParams>& terms) {
    for (auto& t : terms) {
      t.mu = params.segment(pos, d.m);
      t.alpha = params.segment(pos + d.m, d.m);
      pos += 2 * d.m;
    }
  };
  get(d.logistic_terms);
  get(d.rbf_terms);
}

DictParams product_target(const DictParams& a, const DictParams& b) {
  require_dim(b.dim(), a.dim(), "product_target");
  Vec mu(a.dim());
  Vec alpha(a.dim());
  for (Index i = 0; i < a.dim(); ++i) {
    // ties keep the first factor
    const bool take_a = a.mu[i] >= b.mu[i];
    mu[i] = take_a ? a.mu[i] : b.mu[i];
    alpha[i] = take_a ? a.alpha[i] : b.alpha[i];
  }
  return {std::move(mu), std::move(alpha)};
}

}  // namespace klift
