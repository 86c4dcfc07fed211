#include "koopman_lift/dictionary_io.hpp"

namespace klift {

using nlohmann::json;

json vec_to_json(const Vec& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vec vec_from_json(const json& j) {
  Vec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
  return v;
}

json mat_to_json(const Mat& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) out.push_back(vec_to_json(m.row(r).transpose()));
  return out;
}

Mat mat_from_json(const json& j) {
  const auto rows = static_cast<Index>(j.size());
  const Index cols = rows == 0 ? 0 : static_cast<Index>(j[0].size());
  Mat m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    require_dim(static_cast<Index>(row.size()), cols, "mat_from_json row");
    for (Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

namespace {

json terms_to_json(const std::vector<DictParams>& terms) {
  json out = json::array();
  for (const auto& t : terms) out.push_back({{"mu", vec_to_json(t.mu)}, {"alpha", vec_to_json(t.alpha)}});
  return out;
}

std::vector<DictParams> terms_from_json(const json& j) {
  std::vector<DictParams> out;
  for (const auto& t : j) out.emplace_back(vec_from_json(t.at("mu")), vec_from_json(t.at("alpha")));
  return out;
}

}  // namespace

json dictionary_to_json(const Dictionary& d) {
  json j;
  j["kind"] = std::string(to_string(d.kind));
  j["m"] = d.m;
  j["logistic_terms"] = terms_to_json(d.logistic_terms);
  j["rbf_terms"] = terms_to_json(d.rbf_terms);
  j["poly_degree_indices"] = d.poly_degree_indices;
  if (is_polynomial(d.kind)) {
    if (d.poly_domain.center.size() != 0) {
      j["poly_domain"] = {{"center", vec_to_json(d.poly_domain.center)},
                          {"half_width", vec_to_json(d.poly_domain.half_width)}};
    }
    if (d.kind == DictKind::Hermite) j["hermite_convention"] = "probabilists";
  }
  return j;
}

Dictionary dictionary_from_json(const json& j) {
  Dictionary d;
  d.kind = parse_dict_kind(j.at("kind").get<std::string>());
  d.m = j.at("m").get<int>();
  if (j.contains("logistic_terms")) d.logistic_terms = terms_from_json(j["logistic_terms"]);
  if (j.contains("rbf_terms")) d.rbf_terms = terms_from_json(j["rbf_terms"]);
  if (j.contains("poly_degree_indices")) {
    d.poly_degree_indices = j["poly_degree_indices"].get<std::vector<std::vector<int>>>();
  }
  if (j.contains("poly_domain")) {
    d.poly_domain.center = vec_from_json(j["poly_domain"].at("center"));
    d.poly_domain.half_width = vec_from_json(j["poly_domain"].at("half_width"));
  }
  if (j.contains("hermite_convention") && j["hermite_convention"] != "probabilists") {
    throw UnsupportedKindError("only probabilists' Hermite polynomials are supported");
  }
  d.validate();
  return d;
}

}  // namespace klift
