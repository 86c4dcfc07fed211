#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "koopman_lift/types.hpp"

namespace klift {

/// "%.17g"; non-finite values print as "nan", "inf", "-inf".
[[nodiscard]] std::string format_double(double v);

/// Creates parent directories as needed.
void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
[[nodiscard]] nlohmann::json read_json_file(const std::filesystem::path& path);

/// Numeric CSV with a header row.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const Mat& rows);
/// Numeric CSV with a header row; throws DomainError on malformed input.
[[nodiscard]] Mat read_csv(const std::filesystem::path& path, std::vector<std::string>* header = nullptr);

}  // namespace klift
