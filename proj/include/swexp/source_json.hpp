#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "swexp/prob.hpp"

namespace swexp {

namespace detail {

inline std::vector<double> json_vector(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array()) throw Error(ErrorKind::InvalidInput, path + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorKind::InvalidInput, path + "[" + std::to_string(i) + "]: expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

}  // namespace detail

/// Parses {"px": [...], "pygx": [[...], ...]}.
inline Source parse_source(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::InvalidInput, std::string("source: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::InvalidInput, "source: expected an object");
  if (!j.contains("px")) throw Error(ErrorKind::InvalidInput, "px: missing");
  if (!j.contains("pygx")) throw Error(ErrorKind::InvalidInput, "pygx: missing");
  Pmf px(detail::json_vector(j["px"], "px"), "px");
  const auto& w = j["pygx"];
  if (!w.is_array() || w.empty()) throw Error(ErrorKind::InvalidInput, "pygx: expected a non-empty array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t x = 0; x < w.size(); ++x) rows.push_back(detail::json_vector(w[x], "pygx[" + std::to_string(x) + "]"));
  return Source(std::move(px), CondPmf(rows, "pygx"));
}

inline Source load_source(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "source: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_source(ss.str());
}

inline nlohmann::json source_to_json(const Source& s) {
  nlohmann::json j;
  j["px"] = s.px.values();
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t x = 0; x < s.nx(); ++x) {
    auto r = s.pygx.row(x);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j["pygx"] = rows;
  return j;
}

}  // namespace swexp
