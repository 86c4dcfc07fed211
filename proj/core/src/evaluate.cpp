#include "koopman_lift/evaluate.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "koopman_lift/report_io.hpp"
#include "koopman_lift/rng.hpp"
#include "koopman_lift/svg_plot.hpp"

namespace klift {

namespace {

constexpr double kRunaway = 1e12;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

Rollout predict_n_steps(const KoopmanModel& model, const Vec& y0, int n, bool relift) {
  require_dim(y0.size(), model.dict.m, "predict_n_steps y0");
  if (n < 1) throw DomainError("predict_n_steps: n must be >= 1");
  const int m = model.dict.m;
  Rollout out;
  out.states = Mat::Constant(n, m, kNaN);
  Vec z = dict_eval(model.dict, y0);
  for (int k = 0; k < n; ++k) {
    z = relift && k > 0 ? Vec(model.K * dict_eval(model.dict, z.segment(1, m))) : Vec(model.K * z);
    const Vec y = z.segment(1, m);
    if (!y.allFinite() || y.cwiseAbs().maxCoeff() > kRunaway) {
      out.diverged = true;
      out.diverged_at = k + 1;
      break;
    }
    out.states.row(k) = y.transpose();
  }
  return out;
}

EvalReport five_step_error(const KoopmanModel& model, std::span<const Trajectory> test, int n_step,
                           int threads, bool relift) {
  if (n_step < 1) throw DomainError("five_step_error: n_step must be >= 1");
  struct Start {
    std::size_t traj;
    Index row;
  };
  std::vector<Start> starts;
  for (std::size_t t = 0; t < test.size(); ++t) {
    require_dim(test[t].states.cols(), model.dict.m, "five_step_error trajectory");
    for (Index r = 0; r + n_step < test[t].length(); ++r) starts.push_back({t, r});
  }

  Mat err(static_cast<Index>(starts.size()), n_step);
  std::vector<char> diverged(starts.size(), 0);
  parallel_for(starts.size(), threads, [&](std::size_t i) {
    const auto& traj = test[starts[i].traj];
    const Index r0 = starts[i].row;
    const Rollout roll = predict_n_steps(model, traj.states.row(r0).transpose(), n_step, relift);
    if (roll.diverged) {
      diverged[i] = 1;
      return;
    }
    const auto m = static_cast<double>(model.dict.m);
    for (int k = 0; k < n_step; ++k) {
      err(static_cast<Index>(i), k) = (roll.states.row(k) - traj.states.row(r0 + k + 1)).squaredNorm() / m;
    }
  });

  EvalReport report;
  report.n_step = n_step;
  report.mse_per_step = Vec::Zero(n_step);
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (diverged[i]) {
      ++report.diverged_count;
      continue;
    }
    report.mse_per_step += err.row(static_cast<Index>(i)).transpose();
    ++report.test_size;
  }
  if (report.test_size == 0) {
    report.mse_per_step.setConstant(kNaN);
  } else {
    report.mse_per_step /= static_cast<double>(report.test_size);
  }
  report.mean_5step = report.mse_per_step[n_step - 1];
  report.mean_over_steps = report.mse_per_step.mean();
  return report;
}

nlohmann::json eval_report_to_json(const EvalReport& report) {
  auto nullable = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json per_step = nlohmann::json::array();
  for (Index k = 0; k < report.mse_per_step.size(); ++k) per_step.push_back(nullable(report.mse_per_step[k]));
  return {{"model_id", report.model_id},
          {"n_step", report.n_step},
          {"mse_per_step", per_step},
          {"mean_5step", nullable(report.mean_5step)},
          {"mean_over_steps", nullable(report.mean_over_steps)},
          {"test_size", report.test_size},
          {"diverged_count", report.diverged_count}};
}

const CompareCell* ComparisonTable::find(std::string_view system, DictKind kind, int N) const {
  for (const auto& cell : cells) {
    if (cell.system == system && cell.kind == kind && cell.N == N) return &cell;
  }
  return nullptr;
}

ComparisonTable compare_dictionaries(const CompareConfig& cfg) {
  cfg.train.validate();
  ComparisonTable table;
  for (const auto& name : cfg.systems) {
    const SystemDef system = make_system(name);
    const Dataset data = make_dataset(system, cfg.simulation, cfg.threads);
    const double dmd_error =
        five_step_error(dmd_fit(data.snapshots, cfg.train.ridge), data.test, cfg.train.eval_steps).mean_5step;
    const Box range = data_range(data.snapshots);

    std::vector<CompareCell> cells;
    for (const DictKind kind : cfg.kinds) {
      for (const int N : cfg.sizes) cells.push_back({name, kind, N, {}, kNaN, dmd_error, {}});
    }
    parallel_for(cells.size(), cfg.threads, [&](std::size_t i) {
      CompareCell& cell = cells[i];
      try {
        const Dictionary init = initial_dictionary(cell.kind, system.n, cell.N, range, cfg.train.seed,
                                                   cfg.scale_polynomials);
        const KoopmanModel model = sgd_train(init, data.snapshots, data.test, cfg.train);
        cell.trace = model.meta.trace;
        cell.final_5step = five_step_error(model, data.test, cfg.train.eval_steps).mean_5step;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    });
    for (auto& cell : cells) table.cells.push_back(std::move(cell));
  }
  return table;
}

void write_comparison_csv(const ComparisonTable& table, const std::filesystem::path& path) {
  auto field = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
  std::string text = "system,kind,N,epoch,train_loss,test_5step\n";
  for (const auto& cell : table.cells) {
    const std::string prefix = cell.system + "," + std::string(to_string(cell.kind)) + "," + std::to_string(cell.N) + ",";
    for (const auto& row : cell.trace) {
      text += prefix + std::to_string(row.epoch) + "," + field(row.train_loss) + "," + field(row.test_5step) + "\n";
    }
  }
  write_text_file(path, text);
}

std::vector<std::filesystem::path> write_comparison_svgs(const ComparisonTable& table,
                                                         const std::filesystem::path& dir) {
  std::map<std::string, std::vector<PlotSeries>> by_system;
  std::vector<std::string> order;
  for (const auto& cell : table.cells) {
    if (!by_system.count(cell.system)) order.push_back(cell.system);
    auto& series = by_system[cell.system];
    PlotSeries s;
    s.label = std::string(to_string(cell.kind)) + " N=" + std::to_string(cell.N);
    for (const auto& row : cell.trace) {
      if (std::isnan(row.test_5step)) continue;
      s.x.push_back(row.epoch);
      s.y.push_back(row.test_5step);
    }
    series.push_back(std::move(s));
  }
  std::vector<std::filesystem::path> written;
  for (const auto& system : order) {
    PlotSpec spec;
    spec.title = system + ": 5-step test error";
    spec.x_label = "epoch";
    spec.y_label = "mean squared error";
    spec.log_y = true;
    const auto path = dir / (system + "_5step.svg");
    write_text_file(path, render_line_plot(spec, by_system[system]));
    written.push_back(path);
  }
  return written;
}

void write_trace_csv(const std::vector<TraceRow>& trace, const std::filesystem::path& path) {
  auto field = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
  std::string text = "epoch,train_loss,test_5step\n";
  for (const auto& row : trace) {
    text += std::to_string(row.epoch) + "," + field(row.train_loss) + "," + field(row.test_5step) + "\n";
  }
  write_text_file(path, text);
}

}  // namespace klift
