#pragma once

// On-disk datasets: one CSV per trajectory (`t,x1..xn`) plus manifest.json.

#include <filesystem>

#include <nlohmann/json.hpp>

#include "koopman_lift/simulate.hpp"

namespace klift {

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);
[[nodiscard]] Trajectory read_trajectory_csv(const std::filesystem::path& path, const std::string& system_name = {});

/// Writes traj_000.csv, traj_001.csv, ... (train first, then test) and
/// manifest.json. `extra` is merged into the manifest.
void write_dataset(const Dataset& data, const std::filesystem::path& dir, const nlohmann::json& extra = {});

/// Throws std::runtime_error if the manifest is missing.
[[nodiscard]] Dataset load_dataset(const std::filesystem::path& dir);

[[nodiscard]] nlohmann::json simulation_config_to_json(const SimulationConfig& cfg);
[[nodiscard]] SimulationConfig simulation_config_from_json(const nlohmann::json& j, SimulationConfig base = {});

}  // namespace klift
