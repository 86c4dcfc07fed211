#include "koopman_lift/dataset_io.hpp"

#include <cstdio>

#include "koopman_lift/report_io.hpp"

namespace klift {

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  std::vector<std::string> header{"t"};
  for (Index i = 0; i < traj.states.cols(); ++i) header.push_back("x" + std::to_string(i + 1));
  Mat rows(traj.length(), traj.states.cols() + 1);
  rows << traj.times, traj.states;
  write_csv(path, header, rows);
}

Trajectory read_trajectory_csv(const std::filesystem::path& path, const std::string& system_name) {
  std::vector<std::string> header;
  const Mat rows = read_csv(path, &header);
  if (header.size() < 2 || header[0] != "t") throw DomainError(path.string() + ": expected header t,x1..xn");
  Trajectory traj;
  traj.system_name = system_name;
  traj.times = rows.col(0);
  traj.states = rows.rightCols(rows.cols() - 1);
  return traj;
}

void write_dataset(const Dataset& data, const std::filesystem::path& dir, const nlohmann::json& extra) {
  std::filesystem::create_directories(dir);
  nlohmann::json files = nlohmann::json::array();
  int index = 0;
  auto emit = [&](const std::vector<Trajectory>& trajs, const char* split) {
    for (const auto& t : trajs) {
      char name[32];
      std::snprintf(name, sizeof name, "traj_%03d.csv", index++);
      write_trajectory_csv(t, dir / name);
      files.push_back({{"file", name}, {"split", split}, {"rows", t.length()}, {"truncated", t.truncated}});
    }
  };
  emit(data.train, "train");
  emit(data.test, "test");
  const Trajectory* any = !data.train.empty() ? &data.train.front() : (!data.test.empty() ? &data.test.front() : nullptr);
  nlohmann::json manifest = {{"system", data.system_name},
                             {"n", any ? any->states.cols() : 0},
                             {"dt", any ? any->dt() : 0.0},
                             {"files", files}};
  if (extra.is_object()) manifest.update(extra);
  write_json_file(dir / "manifest.json", manifest);
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) {
    throw std::runtime_error("dataset manifest missing: " + manifest_path.string());
  }
  const auto manifest = read_json_file(manifest_path);
  Dataset data;
  data.system_name = manifest.value("system", "");
  for (const auto& f : manifest.at("files")) {
    Trajectory t = read_trajectory_csv(dir / f.at("file").get<std::string>(), data.system_name);
    t.truncated = f.value("truncated", false);
    (f.value("split", "train") == "test" ? data.test : data.train).push_back(std::move(t));
  }
  data.snapshots = snapshots_of(data.train);
  return data;
}

nlohmann::json simulation_config_to_json(const SimulationConfig& cfg) {
  return {{"dt", cfg.dt},
          {"steps", cfg.steps},
          {"substeps", cfg.substeps},
          {"train_trajectories", cfg.train_trajectories},
          {"test_trajectories", cfg.test_trajectories},
          {"seed", cfg.seed}};
}

SimulationConfig simulation_config_from_json(const nlohmann::json& j, SimulationConfig base) {
  base.dt = j.value("dt", base.dt);
  base.steps = j.value("steps", base.steps);
  base.substeps = j.value("substeps", base.substeps);
  base.train_trajectories = j.value("train_trajectories", base.train_trajectories);
  base.test_trajectories = j.value("test_trajectories", base.test_trajectories);
  base.seed = j.value("seed", base.seed);
  if (!(base.dt > 0.0)) throw DomainError("simulation: dt must be > 0");
  if (base.steps < 1 || base.substeps < 1) throw DomainError("simulation: steps and substeps must be >= 1");
  if (base.train_trajectories < 0 || base.test_trajectories < 0) {
    throw DomainError("simulation: trajectory counts must be >= 0");
  }
  return base;
}

}  // namespace klift
