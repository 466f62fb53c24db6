#ifndef RELSIFTER_META_JSON_HPP
#define RELSIFTER_META_JSON_HPP

// Internal: FeatureMeta <-> JSON, shared by the matrix sidecar and the
// model file.

#include <json.hpp>

#include "relsifter/errors.hpp"
#include "relsifter/features.hpp"

namespace relsifter::detail {

inline nlohmann::json meta_to_json(const FeatureMeta& meta) {
  nlohmann::json j;
  j["version"] = meta.version;
  j["relation"] = meta.relation_name;
  j["predicate"] = meta.predicate_iri;
  j["mode"] = meta.mode;
  j["k"] = meta.k;
  j["log_base"] = meta.log_base;
  j["swap_counters"] = meta.swap_counters;
  j["columns"] = meta.columns;
  j["norm_lo"] = meta.norm_lo;
  j["norm_hi"] = meta.norm_hi;
  j["degenerate"] = meta.degenerate;
  if (!meta.idf.empty()) j["idf"] = meta.idf;
  return j;
}

inline FeatureMeta meta_from_json(const nlohmann::json& j) {
  FeatureMeta meta;
  meta.version = j.at("version").get<int>();
  if (meta.version != 1) throw format_error("unsupported feature metadata version");
  meta.relation_name = j.at("relation").get<std::string>();
  meta.predicate_iri = j.at("predicate").get<std::string>();
  meta.mode = j.at("mode").get<std::string>();
  meta.k = j.at("k").get<std::uint32_t>();
  meta.log_base = j.at("log_base").get<double>();
  meta.swap_counters = j.at("swap_counters").get<bool>();
  meta.columns = j.at("columns").get<std::vector<std::string>>();
  meta.norm_lo = j.at("norm_lo").get<double>();
  meta.norm_hi = j.at("norm_hi").get<double>();
  meta.degenerate = j.at("degenerate").get<bool>();
  if (j.contains("idf")) meta.idf = j.at("idf").get<std::vector<double>>();
  return meta;
}

}  // namespace relsifter::detail

#endif
