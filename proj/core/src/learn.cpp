#include "koopman_lift/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "koopman_lift/dictionary_io.hpp"
#include "koopman_lift/evaluate.hpp"
#include "koopman_lift/rng.hpp"

namespace klift {

using nlohmann::json;

int KoopmanModel::param_count() const {
  return static_cast<int>(K.rows() * K.cols()) + dict.param_count();
}

void KoopmanModel::validate() const {
  dict.validate();
  if (K.rows() != dict.size() || K.cols() != dict.size()) {
    throw DimensionError("KoopmanModel: K must be N x N with N = " + std::to_string(dict.size()));
  }
}

namespace {

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double from_nullable(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

json model_to_json(const KoopmanModel& model) {
  json trace = json::array();
  for (const auto& row : model.meta.trace) {
    trace.push_back({{"epoch", row.epoch},
                     {"train_loss", nullable(row.train_loss)},
                     {"test_5step", nullable(row.test_5step)}});
  }
  json meta = {{"method", model.meta.method},
               {"seed", model.meta.seed},
               {"epochs", model.meta.epochs},
               {"train_loss", nullable(model.meta.train_loss)},
               {"condition_number", nullable(model.meta.condition_number)},
               {"used_pseudo_inverse", model.meta.used_pseudo_inverse},
               {"aborted", model.meta.aborted},
               {"trace", trace},
               {"pursuit_objective", model.meta.pursuit_objective},
               {"warnings", model.meta.warnings}};
  return {{"dictionary", dictionary_to_json(model.dict)},
          {"N", model.dict.size()},
          {"K", mat_to_json(model.K)},
          {"dt", model.dt},
          {"param_count", model.param_count()},
          {"training_meta", meta}};
}

KoopmanModel model_from_json(const json& j) {
  KoopmanModel model;
  model.dict = dictionary_from_json(j.at("dictionary"));
  model.K = mat_from_json(j.at("K"));
  model.dt = j.at("dt").get<double>();
  if (j.contains("training_meta")) {
    const auto& meta = j["training_meta"];
    model.meta.method = meta.value("method", "");
    model.meta.seed = meta.value("seed", std::uint64_t{0});
    model.meta.epochs = meta.value("epochs", 0);
    if (meta.contains("train_loss")) model.meta.train_loss = from_nullable(meta["train_loss"]);
    if (meta.contains("condition_number")) {
      model.meta.condition_number = from_nullable(meta["condition_number"]);
    }
    model.meta.used_pseudo_inverse = meta.value("used_pseudo_inverse", false);
    model.meta.aborted = meta.value("aborted", false);
    if (meta.contains("trace")) {
      for (const auto& row : meta["trace"]) {
        model.meta.trace.push_back({row.at("epoch").get<int>(), from_nullable(row.at("train_loss")),
                                    from_nullable(row.at("test_5step"))});
      }
    }
    if (meta.contains("pursuit_objective")) {
      model.meta.pursuit_objective = meta["pursuit_objective"].get<std::vector<double>>();
    }
    if (meta.contains("warnings")) model.meta.warnings = meta["warnings"].get<std::vector<std::string>>();
  }
  model.validate();
  return model;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw DomainError("TrainConfig: epochs must be >= 0");
  if (batch_size < 1) throw DomainError("TrainConfig: batch_size must be >= 1");
  if (learning_rate < 0.0) throw DomainError("TrainConfig: learning_rate must be >= 0");
  if (ridge < 0.0) throw DomainError("TrainConfig: ridge must be >= 0");
  if (!(alpha_floor > 0.0)) throw DomainError("TrainConfig: alpha_floor must be > 0");
  if (log_every < 1) throw DomainError("TrainConfig: log_every must be >= 1");
  if (eval_steps < 1) throw DomainError("TrainConfig: eval_steps must be >= 1");
}

json train_config_to_json(const TrainConfig& cfg) {
  return {{"epochs", cfg.epochs},
          {"batch_size", cfg.batch_size},
          {"learning_rate", cfg.learning_rate},
          {"seed", cfg.seed},
          {"ridge", cfg.ridge},
          {"alpha_floor", cfg.alpha_floor},
          {"log_every", cfg.log_every},
          {"eval_steps", cfg.eval_steps},
          {"train_dictionary", cfg.train_dictionary},
          {"k_init", "identity"},
          {"optimizer", "sgd"}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig base) {
  base.epochs = j.value("epochs", base.epochs);
  base.batch_size = j.value("batch_size", base.batch_size);
  base.learning_rate = j.value("learning_rate", base.learning_rate);
  base.seed = j.value("seed", base.seed);
  base.ridge = j.value("ridge", base.ridge);
  base.alpha_floor = j.value("alpha_floor", base.alpha_floor);
  base.log_every = j.value("log_every", base.log_every);
  base.eval_steps = j.value("eval_steps", base.eval_steps);
  base.train_dictionary = j.value("train_dictionary", base.train_dictionary);
  base.validate();
  return base;
}

LiftedFit solve_lifted(const Mat& Psi, const Mat& PsiNext, double ridge, SolveMethod method) {
  if (Psi.rows() != PsiNext.rows()) throw DimensionError("solve_lifted: row counts differ");
  if (Psi.rows() < 1) throw DomainError("solve_lifted: no snapshot pairs");
  if (ridge < 0.0) throw DomainError("solve_lifted: ridge must be >= 0");
  const Index n = Psi.cols();
  LiftedFit fit;
  Mat gram = Psi.transpose() * Psi;
  gram.diagonal().array() += ridge;
  const Eigen::SelfAdjointEigenSolver<Mat> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  fit.condition_number = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  const bool singular = !(lo > hi * 1e-15 * static_cast<double>(n));

  Mat KT;
  if (singular && ridge == 0.0) {
    fit.used_pseudo_inverse = true;
    KT = Psi.completeOrthogonalDecomposition().solve(PsiNext);
  } else if (method == SolveMethod::PivotedQR) {
    Mat A(Psi.rows() + n, n);
    A << Psi, std::sqrt(ridge) * Mat::Identity(n, n);
    Mat B(Psi.rows() + n, PsiNext.cols());
    B << PsiNext, Mat::Zero(n, PsiNext.cols());
    KT = A.colPivHouseholderQr().solve(B);
  } else {
    KT = gram.ldlt().solve(Psi.transpose() * PsiNext);
  }
  fit.K = KT.transpose();
  fit.residual_sum = (PsiNext - Psi * KT).squaredNorm();
  fit.residual_mean = fit.residual_sum / static_cast<double>(Psi.rows());
  return fit;
}

namespace {

KoopmanModel closed_form(const Dictionary& dict, const SnapshotSet& snapshots, double ridge,
                         SolveMethod method, const char* name) {
  KoopmanModel model;
  model.dict = dict;
  model.dt = snapshots.dt;
  model.meta.method = name;
  if (static_cast<Index>(dict.size()) > snapshots.rows()) {
    model.meta.warnings.emplace_back("dictionary size exceeds snapshot count; ridge forced > 0");
    ridge = std::max(ridge, 1e-8);
  }
  const LiftedFit fit = solve_lifted(dict_eval_rows(dict, snapshots.X),
                                     dict_eval_rows(dict, snapshots.Xp), ridge, method);
  model.K = fit.K;
  model.meta.train_loss = fit.residual_mean;
  model.meta.condition_number = fit.condition_number;
  model.meta.used_pseudo_inverse = fit.used_pseudo_inverse;
  if (fit.used_pseudo_inverse) {
    model.meta.warnings.emplace_back("rank-deficient lifted data; pseudo-inverse used");
  }
  return model;
}

}  // namespace

KoopmanModel dmd_fit(const SnapshotSet& snapshots, double ridge) {
  const auto m = static_cast<int>(snapshots.dim());
  if (snapshots.rows() < m) throw DomainError("dmd_fit: need at least m snapshot pairs");
  return closed_form(make_identity_dictionary(m), snapshots, ridge, SolveMethod::PivotedQR, "dmd");
}

KoopmanModel edmd_fit(const Dictionary& dict, const SnapshotSet& snapshots, double ridge) {
  dict.validate();
  require_dim(snapshots.dim(), dict.m, "edmd_fit");
  return closed_form(dict, snapshots, ridge, SolveMethod::Gram, "edmd");
}

Box data_range(const SnapshotSet& snapshots) {
  if (snapshots.rows() == 0) throw DomainError("data_range: empty snapshot set");
  Box box{snapshots.X.colwise().minCoeff().transpose(), snapshots.X.colwise().maxCoeff().transpose()};
  box.lo = box.lo.cwiseMin(snapshots.Xp.colwise().minCoeff().transpose());
  box.hi = box.hi.cwiseMax(snapshots.Xp.colwise().maxCoeff().transpose());
  return box;
}

Dictionary initial_dictionary(DictKind kind, int m, int N, const Box& range, std::uint64_t seed,
                              bool scale_polynomials) {
  require_dim(range.dim(), m, "initial_dictionary range");
  const int n = N - 1 - m;
  if (n < 0) throw DimensionError("initial_dictionary: N must be >= 1 + m");
  if (is_polynomial(kind)) {
    if (!scale_polynomials) return make_polynomial(kind, m, N);
    PolyDomain domain;
    domain.center = 0.5 * (range.lo + range.hi);
    domain.half_width = (0.5 * (range.hi - range.lo)).cwiseMax(1e-12);
    return make_polynomial(kind, m, N, domain);
  }
  Rng rng(seed);
  auto draw = [&] {
    Vec mu(m);
    for (int i = 0; i < m; ++i) mu[i] = rng.uniform(range.lo[i], range.hi[i]);
    return DictParams(mu, Vec::Ones(m));
  };
  std::vector<DictParams> logistic;
  std::vector<DictParams> rbf;
  switch (kind) {
    case DictKind::AugSILL: {
      const int n_log = (n + 1) / 2;
      for (int t = 0; t < n_log; ++t) logistic.push_back(draw());
      for (int t = n_log; t < n; ++t) rbf.push_back(draw());
      return make_augsill(m, std::move(logistic), std::move(rbf));
    }
    case DictKind::SILL:
      for (int t = 0; t < n; ++t) logistic.push_back(draw());
      return make_sill(m, std::move(logistic));
    case DictKind::SummedRBF:
      for (int t = 0; t < n; ++t) rbf.push_back(draw());
      return make_summed_rbf(m, std::move(rbf));
    default:
      break;
  }
  throw UnsupportedKindError("initial_dictionary: unsupported kind");
}

BatchGradient batch_loss_and_gradient(const Dictionary& dict, const Mat& K, const Mat& X,
                                      const Mat& Xp, std::span<const Index> rows) {
  if (rows.empty()) throw DomainError("batch_loss_and_gradient: empty batch");
  const int N = dict.size();
  const int m = dict.m;
  const bool parametric = is_parametric(dict.kind);
  BatchGradient g;
  g.grad_K = Mat::Zero(N, N);
  g.grad_params = Vec::Zero(dict.param_count());
  const double scale = 2.0 / static_cast<double>(rows.size());
  Vec psi;
  Vec psi_next;
  Mat grads;
  Mat grads_next;
  Vec r(N);
  Vec s(N);
  for (const Index row : rows) {
    const Vec y = X.row(row).transpose();
    const Vec y_next = Xp.row(row).transpose();
    if (parametric) {
      lift_with_term_gradients(dict, y, psi, grads);
      lift_with_term_gradients(dict, y_next, psi_next, grads_next);
    } else {
      psi = dict_eval(dict, y);
      psi_next = dict_eval(dict, y_next);
    }
    r.noalias() = psi_next - K * psi;
    g.loss += r.squaredNorm();
    g.grad_K.noalias() -= scale * r * psi.transpose();
    if (parametric && g.grad_params.size() > 0) {
      s.noalias() = K.transpose() * r;
      for (Index t = 0; t < grads.rows(); ++t) {
        const Index out = 1 + m + t;
        g.grad_params.segment(2 * m * t, 2 * m) +=
            scale * (r[out] * grads_next.row(t) - s[out] * grads.row(t)).transpose();
      }
    }
  }
  g.loss /= static_cast<double>(rows.size());
  return g;
}

double lifted_loss(const Dictionary& dict, const Mat& K, const Mat& X, const Mat& Xp) {
  if (X.rows() == 0) return 0.0;
  const Mat residual = dict_eval_rows(dict, Xp) - dict_eval_rows(dict, X) * K.transpose();
  return residual.squaredNorm() / static_cast<double>(X.rows());
}

namespace {

void apply_param_step(Dictionary& dict, const Vec& grad, double lr, double alpha_floor) {
  const int m = dict.m;
  Index t = 0;
  auto step = [&](std::vector<DictParams>& terms) {
    for (auto& term : terms) {
      term.mu -= lr * grad.segment(2 * m * t, m);
      term.alpha -= lr * grad.segment(2 * m * t + m, m);
      term.alpha = term.alpha.cwiseMax(alpha_floor);
      ++t;
    }
  };
  step(dict.logistic_terms);
  step(dict.rbf_terms);
}

double test_error(const Dictionary& dict, const Mat& K, double dt, std::span<const Trajectory> test,
                  int steps) {
  if (test.empty()) return std::numeric_limits<double>::quiet_NaN();
  KoopmanModel probe;
  probe.dict = dict;
  probe.K = K;
  probe.dt = dt;
  return five_step_error(probe, test, steps).mean_5step;
}

}  // namespace

KoopmanModel sgd_train(const Dictionary& dict_init, const SnapshotSet& train,
                       std::span<const Trajectory> test, const TrainConfig& cfg) {
  cfg.validate();
  dict_init.validate();
  require_dim(train.dim(), dict_init.m, "sgd_train");
  if (train.rows() == 0) throw DomainError("sgd_train: empty training set");
  const bool update_dict = cfg.train_dictionary && is_parametric(dict_init.kind);

  Dictionary dict = dict_init;
  Mat K = Mat::Identity(dict.size(), dict.size());
  std::vector<Index> order(static_cast<std::size_t>(train.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(cfg.seed);

  KoopmanModel model;
  model.dt = train.dt;
  model.meta.method = "sgd";
  model.meta.seed = cfg.seed;

  auto log_test = [&](int epoch) {
    return epoch % cfg.log_every == 0 || epoch == cfg.epochs
               ? test_error(dict, K, train.dt, test, cfg.eval_steps)
               : std::numeric_limits<double>::quiet_NaN();
  };

  double loss = lifted_loss(dict, K, train.X, train.Xp);
  model.meta.trace.push_back({0, loss, log_test(0)});
  Dictionary best_dict = dict;
  Mat best_K = K;
  int completed = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t len = std::min(order.size() - start, static_cast<std::size_t>(cfg.batch_size));
      const auto g = batch_loss_and_gradient(dict, K, train.X, train.Xp,
                                             std::span<const Index>(order.data() + start, len));
      K -= cfg.learning_rate * g.grad_K;
      if (update_dict) apply_param_step(dict, g.grad_params, cfg.learning_rate, cfg.alpha_floor);
    }
    loss = lifted_loss(dict, K, train.X, train.Xp);
    if (!std::isfinite(loss)) {
      model.meta.aborted = true;
      model.meta.warnings.push_back("non-finite loss at epoch " + std::to_string(epoch) +
                                    "; restored epoch " + std::to_string(completed));
      dict = best_dict;
      K = best_K;
      break;
    }
    completed = epoch;
    best_dict = dict;
    best_K = K;
    model.meta.trace.push_back({epoch, loss, log_test(epoch)});
  }

  model.dict = std::move(dict);
  model.K = std::move(K);
  model.meta.epochs = completed;
  model.meta.train_loss = lifted_loss(model.dict, model.K, train.X, train.Xp);
  if (model.meta.aborted && !model.meta.trace.empty() && std::isnan(model.meta.trace.back().test_5step)) {
    model.meta.trace.back().test_5step = test_error(model.dict, model.K, train.dt, test, cfg.eval_steps);
  }
  return model;
}

}  // namespace klift
