#include <algorithm>
#include <cctype>
#include <limits>
#include <string>

#include "koopman_lift/learn.hpp"
#include "koopman_lift/rng.hpp"

namespace klift {

std::string_view to_string(PursuitObjective objective) {
  return objective == PursuitObjective::StateRows ? "state_rows" : "lifted";
}

PursuitObjective parse_pursuit_objective(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "state_rows" || lower == "staterows") return PursuitObjective::StateRows;
  if (lower == "lifted") return PursuitObjective::Lifted;
  throw DomainError("unknown pursuit objective '" + std::string(name) + "' (state_rows, lifted)");
}

namespace {

struct Candidate {
  bool rbf = false;
  DictParams params;
};

Vec candidate_column(DictKind kind, const Candidate& c, const Mat& Y) {
  Vec out(Y.rows());
  for (Index r = 0; r < Y.rows(); ++r) {
    const Vec y = Y.row(r).transpose();
    if (kind == DictKind::SummedRBF) {
      out[r] = summed_rbf_eval(y, c.params);
    } else {
      out[r] = c.rbf ? conj_rbf_eval(y, c.params) : conj_logistic_eval(y, c.params);
    }
  }
  return out;
}

Dictionary assemble(DictKind kind, int m, const std::vector<Candidate>& chosen) {
  std::vector<DictParams> logistic;
  std::vector<DictParams> rbf;
  for (const auto& c : chosen) (c.rbf ? rbf : logistic).push_back(c.params);
  switch (kind) {
    case DictKind::AugSILL:
      return make_augsill(m, std::move(logistic), std::move(rbf));
    case DictKind::SILL:
      return make_sill(m, std::move(logistic));
    default:
      return make_summed_rbf(m, std::move(rbf));
  }
}

}  // namespace

KoopmanModel matching_pursuit_fit(DictKind kind, const PursuitConfig& cfg,
                                  const SnapshotSet& snapshots, int N_target) {
  if (!is_parametric(kind)) {
    throw UnsupportedKindError("matching pursuit needs a parametric dictionary kind");
  }
  if (cfg.pool_size < 1) throw DomainError("PursuitConfig: pool_size must be >= 1");
  if (!(cfg.alpha_lo > 0.0) || cfg.alpha_hi < cfg.alpha_lo) {
    throw DomainError("PursuitConfig: need 0 < alpha_lo <= alpha_hi");
  }
  const int m = static_cast<int>(snapshots.dim());
  const int rounds = N_target - 1 - m;
  if (rounds < 0) throw DimensionError("matching_pursuit_fit: N must be >= 1 + m");
  if (snapshots.rows() == 0) throw DomainError("matching_pursuit_fit: empty snapshot set");

  const Box range = data_range(snapshots);
  const Dictionary base = make_identity_dictionary(m);
  Mat Psi = dict_eval_rows(base, snapshots.X);
  Mat PsiNext = dict_eval_rows(base, snapshots.Xp);
  const Mat state_target = PsiNext.leftCols(1 + m);
  const bool state_rows = cfg.objective == PursuitObjective::StateRows;

  std::vector<Candidate> chosen;
  std::vector<double> objective;
  objective.push_back(
      solve_lifted(Psi, state_rows ? state_target : PsiNext, cfg.ridge).residual_mean);

  for (int round = 0; round < rounds; ++round) {
    Rng rng(substream_seed(cfg.seed, static_cast<std::uint64_t>(round)));
    std::vector<Candidate> pool(static_cast<std::size_t>(cfg.pool_size));
    for (std::size_t c = 0; c < pool.size(); ++c) {
      Vec mu(m);
      Vec alpha(m);
      for (int i = 0; i < m; ++i) {
        mu[i] = rng.uniform(range.lo[i], range.hi[i]);
        alpha[i] = rng.uniform(cfg.alpha_lo, cfg.alpha_hi);
      }
      const bool rbf = kind == DictKind::SummedRBF || (kind == DictKind::AugSILL && c % 2 == 1);
      pool[c] = {rbf, DictParams(mu, alpha)};
    }

    std::vector<double> score(pool.size(), std::numeric_limits<double>::infinity());
    parallel_for(pool.size(), cfg.threads, [&](std::size_t c) {
      Mat A(Psi.rows(), Psi.cols() + 1);
      A << Psi, candidate_column(kind, pool[c], snapshots.X);
      if (state_rows) {
        score[c] = solve_lifted(A, state_target, cfg.ridge).residual_mean;
      } else {
        Mat B(PsiNext.rows(), PsiNext.cols() + 1);
        B << PsiNext, candidate_column(kind, pool[c], snapshots.Xp);
        score[c] = solve_lifted(A, B, cfg.ridge).residual_mean;
      }
    });

    std::size_t best = 0;
    for (std::size_t c = 1; c < score.size(); ++c) {
      if (score[c] < score[best]) best = c;
    }
    const Candidate& pick = pool[best];
    Psi.conservativeResize(Eigen::NoChange, Psi.cols() + 1);
    Psi.col(Psi.cols() - 1) = candidate_column(kind, pick, snapshots.X);
    PsiNext.conservativeResize(Eigen::NoChange, PsiNext.cols() + 1);
    PsiNext.col(PsiNext.cols() - 1) = candidate_column(kind, pick, snapshots.Xp);
    chosen.push_back(pick);
    objective.push_back(score[best]);
  }

  KoopmanModel model = edmd_fit(assemble(kind, m, chosen), snapshots, cfg.ridge);
  model.meta.method = "matching_pursuit";
  model.meta.seed = cfg.seed;
  model.meta.pursuit_objective = std::move(objective);
  return model;
}

}  // namespace klift
