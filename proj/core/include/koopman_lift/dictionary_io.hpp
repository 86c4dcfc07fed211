#pragma once

#include <nlohmann/json.hpp>

#include "koopman_lift/lifting.hpp"

namespace klift {

/// {kind, m, logistic_terms: [{mu, alpha}], rbf_terms: [...],
///  poly_degree_indices: [[...]]} plus, for polynomial kinds,
/// poly_domain {center, half_width} and hermite_convention.
[[nodiscard]] nlohmann::json dictionary_to_json(const Dictionary& d);
/// Parses and validates; throws nlohmann::json::exception or DimensionError.
[[nodiscard]] Dictionary dictionary_from_json(const nlohmann::json& j);

[[nodiscard]] nlohmann::json vec_to_json(const Vec& v);
[[nodiscard]] Vec vec_from_json(const nlohmann::json& j);
/// Row-major nested arrays.
[[nodiscard]] nlohmann::json mat_to_json(const Mat& m);
[[nodiscard]] Mat mat_from_json(const nlohmann::json& j);

}  // namespace klift
