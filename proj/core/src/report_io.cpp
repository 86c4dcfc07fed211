#include "koopman_lift/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace klift {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError(path.string() + ": " + e.what());
  }
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const Mat& rows) {
  require_dim(rows.cols(), static_cast<Index>(header.size()), "write_csv columns");
  std::string text;
  for (std::size_t c = 0; c < header.size(); ++c) text += (c ? "," : "") + header[c];
  text += "\n";
  for (Index r = 0; r < rows.rows(); ++r) {
    for (Index c = 0; c < rows.cols(); ++c) text += (c ? "," : "") + format_double(rows(r, c));
    text += "\n";
  }
  write_text_file(path, text);
}

Mat read_csv(const std::filesystem::path& path, std::vector<std::string>* header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DomainError(path.string() + ": empty CSV");
  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) names.push_back(cell);
  }
  std::vector<std::vector<double>> data;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw DomainError(path.string() + ": bad number '" + cell + "'");
      }
    }
    if (row.size() != names.size()) throw DomainError(path.string() + ": ragged row");
    data.push_back(std::move(row));
  }
  Mat out(static_cast<Index>(data.size()), static_cast<Index>(names.size()));
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (std::size_t c = 0; c < names.size(); ++c) out(static_cast<Index>(r), static_cast<Index>(c)) = data[r][c];
  }
  if (header) *header = std::move(names);
  return out;
}

}  // namespace klift
