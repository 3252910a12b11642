#pragma once

// Document formats ("fcm/1"), indicator ingestion and trajectory export.
//
// Maps, registries and scenario sets are JSON documents; indicator series
// and tabular trajectories are comma-separated text. Serialization is
// deterministic: object keys keep a fixed order and reals use the shortest
// representation that reads back to the same double.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "fcm/analysis.hpp"
#include "fcm/dynamics.hpp"
#include "fcm/error.hpp"
#include "fcm/knowledge.hpp"
#include "fcm/map.hpp"
#include "fcm/scenario.hpp"

namespace fcm::io {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kFormatVersion = "fcm/1";

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

/// Parses JSON text, reporting syntax errors with line and column.
inline Json parse_document(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(ErrorCode::parse_error, "parse error at line " + std::to_string(line) + ", column " +
                                            std::to_string(column) + ": " + e.what());
  }
}

namespace detail {

inline const Json& field(const Json& obj, std::string_view path, const char* key) {
  if (!obj.is_object()) throw Error(ErrorCode::schema_error, std::string(path) + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::schema_error, std::string(path) + "." + key + ": missing");
  return *it;
}

inline std::string string_field(const Json& obj, std::string_view path, const char* key) {
  const Json& v = field(obj, path, key);
  if (!v.is_string()) throw Error(ErrorCode::schema_error, std::string(path) + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline double number_field(const Json& obj, std::string_view path, const char* key) {
  const Json& v = field(obj, path, key);
  if (!v.is_number()) throw Error(ErrorCode::schema_error, std::string(path) + "." + key + ": expected a number");
  return v.get<double>();
}

inline const Json& array_field(const Json& obj, std::string_view path, const char* key) {
  const Json& v = field(obj, path, key);
  if (!v.is_array()) throw Error(ErrorCode::schema_error, std::string(path) + "." + key + ": expected an array");
  return v;
}

inline std::vector<std::string> string_list(const Json& arr, const std::string& path) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_string())
      throw Error(ErrorCode::schema_error, path + "[" + std::to_string(i) + "]: expected a string");
    out.push_back(arr[i].get<std::string>());
  }
  return out;
}

inline void check_version(const Json& doc) {
  const std::string v = string_field(doc, "document", "formatVersion");
  if (v != kFormatVersion) throw Error(ErrorCode::unsupported, "unsupported version: " + v);
}

}  // namespace detail

/// Twelve significant digits; used for tabular output.
inline std::string format_real(double v) {
  if (v == 0.0) return "0";  // no "-0"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Writes to a temporary sibling, then renames over the destination.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::invalid_argument, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::invalid_argument, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::invalid_argument, "cannot rename " + tmp.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::not_found, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Maps
// ---------------------------------------------------------------------------

inline Json map_to_json(const CognitiveMap& map) {
  Json doc;
  doc["formatVersion"] = kFormatVersion;
  Json meta;
  meta["name"] = map.metadata().name;
  meta["version"] = map.metadata().version;
  if (const auto& t = map.metadata().municipality_type; t && t->size() == 3)
    meta["municipalityType"] = {{"climate", (*t)[0]}, {"populationClass", (*t)[1]}, {"specialization", (*t)[2]}};
  doc["metadata"] = std::move(meta);
  Json factors = Json::array();
  for (const auto& f : map.factors()) {
    Json jf;
    jf["id"] = f.id;
    jf["name"] = f.name;
    jf["kind"] = to_string(f.kind);
    if (f.parent) jf["parent"] = *f.parent;
    factors.push_back(std::move(jf));
  }
  doc["factors"] = std::move(factors);
  Json edges = Json::array();
  for (const auto& e : map.edges()) edges.push_back({{"source", e.source}, {"target", e.target}, {"weight", e.weight}});
  doc["edges"] = std::move(edges);
  return doc;
}

inline CognitiveMap map_from_json(const Json& doc) {
  detail::check_version(doc);
  MapMetadata meta;
  if (auto it = doc.find("metadata"); it != doc.end()) {
    if (!it->is_object()) throw Error(ErrorCode::schema_error, "metadata: expected an object");
    if (it->contains("name")) meta.name = detail::string_field(*it, "metadata", "name");
    if (it->contains("version")) meta.version = detail::string_field(*it, "metadata", "version");
    if (auto t = it->find("municipalityType"); t != it->end() && !t->is_null()) {
      const std::string p = "metadata.municipalityType";
      meta.municipality_type = std::vector<std::string>{detail::string_field(*t, p, "climate"),
                                                        detail::string_field(*t, p, "populationClass"),
                                                        detail::string_field(*t, p, "specialization")};
    }
  }

  std::vector<Factor> factors;
  const Json& jfactors = detail::array_field(doc, "document", "factors");
  for (std::size_t i = 0; i < jfactors.size(); ++i) {
    const std::string p = "factors[" + std::to_string(i) + "]";
    Factor f;
    f.id = detail::string_field(jfactors[i], p, "id");
    f.name = jfactors[i].contains("name") ? detail::string_field(jfactors[i], p, "name") : f.id;
    const std::string kind = jfactors[i].contains("kind") ? detail::string_field(jfactors[i], p, "kind") : "general";
    auto k = parse_factor_kind(kind);
    if (!k) throw Error(ErrorCode::schema_error, p + ".kind: unknown kind " + kind);
    f.kind = *k;
    if (auto par = jfactors[i].find("parent"); par != jfactors[i].end() && !par->is_null())
      f.parent = detail::string_field(jfactors[i], p, "parent");
    factors.push_back(std::move(f));
  }

  std::vector<WeightedEdge> edges;
  const Json& jedges = detail::array_field(doc, "document", "edges");
  for (std::size_t i = 0; i < jedges.size(); ++i) {
    const std::string p = "edges[" + std::to_string(i) + "]";
    edges.push_back({detail::string_field(jedges[i], p, "source"), detail::string_field(jedges[i], p, "target"),
                     detail::number_field(jedges[i], p, "weight")});
  }
  return build_map(std::move(factors), std::move(edges), std::move(meta));
}

inline CognitiveMap load_map(std::string_view text) { return map_from_json(parse_document(text)); }

inline std::string save_map(const CognitiveMap& map) { return dump(map_to_json(map)); }

// ---------------------------------------------------------------------------
// Registry: typology, indicator template, semantic network
// ---------------------------------------------------------------------------

inline Json type_to_json(const MunicipalityType& t) {
  return {{"climate", t.climate}, {"populationClass", t.population_class}, {"specialization", t.specialization}};
}

inline MunicipalityType type_from_json(const Json& j, const std::string& path) {
  return {detail::string_field(j, path, "climate"), detail::string_field(j, path, "populationClass"),
          detail::string_field(j, path, "specialization")};
}

inline KnowledgeBase knowledge_from_json(const Json& doc) {
  detail::check_version(doc);
  KnowledgeBase kb;
  auto& reg = kb.registry;
  reg.climate_zones = detail::string_list(detail::array_field(doc, "registry", "climateZones"), "climateZones");
  reg.specializations =
      detail::string_list(detail::array_field(doc, "registry", "specializations"), "specializations");
  const Json& classes = detail::array_field(doc, "registry", "populationClasses");
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const std::string p = "populationClasses[" + std::to_string(i) + "]";
    PopulationClass c;
    c.label = detail::string_field(classes[i], p, "label");
    const Json& lower = detail::field(classes[i], p, "lower");
    if (!lower.is_number_unsigned() && !(lower.is_number_integer() && lower.get<long long>() >= 0))
      throw Error(ErrorCode::schema_error, p + ".lower: expected a non-negative integer");
    c.lower = lower.get<std::uint64_t>();
    if (auto up = classes[i].find("upper"); up != classes[i].end() && !up->is_null()) {
      if (!up->is_number_integer() || up->get<long long>() < 0)
        throw Error(ErrorCode::schema_error, p + ".upper: expected a non-negative integer or null");
      c.upper = up->get<std::uint64_t>();
    }
    reg.population_classes.push_back(std::move(c));
  }
  const Json& supported = detail::field(doc, "registry", "supported");
  if (supported.is_string() && supported.get<std::string>() == "all") {
    for (const auto& k : reg.climate_zones)
      for (const auto& p : reg.population_classes)
        for (const auto& a : reg.specializations) reg.supported.insert({k, p.label, a});
  } else if (supported.is_array()) {
    for (std::size_t i = 0; i < supported.size(); ++i)
      reg.supported.insert(type_from_json(supported[i], "supported[" + std::to_string(i) + "]"));
  } else {
    throw Error(ErrorCode::schema_error, "registry.supported: expected an array or \"all\"");
  }
  if (auto problems = validate_registry(reg); !problems.empty())
    throw Error(ErrorCode::schema_error, "invalid registry: " + problems.front());

  if (auto ind = doc.find("indicators"); ind != doc.end()) {
    auto general = detail::string_list(detail::array_field(*ind, "indicators", "general"), "indicators.general");
    kb.indicators.general.insert(general.begin(), general.end());
    if (auto sp = ind->find("special"); sp != ind->end()) {
      if (!sp->is_object()) throw Error(ErrorCode::schema_error, "indicators.special: expected an object");
      for (const auto& [key, list] : sp->items()) {
        auto ids = detail::string_list(list, "indicators.special." + key);
        kb.indicators.special[key].insert(ids.begin(), ids.end());
      }
    }
    if (auto ov = ind->find("overrides"); ov != ind->end()) {
      for (std::size_t i = 0; i < ov->size(); ++i) {
        const std::string p = "indicators.overrides[" + std::to_string(i) + "]";
        auto ids = detail::string_list(detail::array_field((*ov)[i], p, "indicators"), p + ".indicators");
        kb.indicators.overrides[type_from_json(detail::field((*ov)[i], p, "type"), p + ".type")].insert(
            ids.begin(), ids.end());
      }
    }
    auto non_empty = [](const std::set<std::string>& s) {
      return std::none_of(s.begin(), s.end(), [](const auto& id) { return id.empty(); });
    };
    bool ok = non_empty(kb.indicators.general);
    for (const auto& [_, s] : kb.indicators.special) ok = ok && non_empty(s);
    for (const auto& [_, s] : kb.indicators.overrides) ok = ok && non_empty(s);
    if (!ok) throw Error(ErrorCode::schema_error, "indicators: empty indicator id");
  }

  if (auto net = doc.find("semanticNetwork"); net != doc.end()) {
    for (const auto& node : detail::string_list(detail::array_field(*net, "semanticNetwork", "nodes"),
                                                "semanticNetwork.nodes"))
      kb.network.add_node(node);
    const Json& edges = detail::array_field(*net, "semanticNetwork", "edges");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const std::string p = "semanticNetwork.edges[" + std::to_string(i) + "]";
      auto t = detail::string_list(edges[i], p);
      if (t.size() != 3) throw Error(ErrorCode::schema_error, p + ": expected [subject, relation, object]");
      kb.network.add_edge({t[0], t[1], t[2]});
    }
  }
  return kb;
}

inline KnowledgeBase load_knowledge(std::string_view text) { return knowledge_from_json(parse_document(text)); }

inline Json knowledge_to_json(const KnowledgeBase& kb) {
  Json doc;
  doc["formatVersion"] = kFormatVersion;
  doc["climateZones"] = kb.registry.climate_zones;
  Json classes = Json::array();
  for (const auto& c : kb.registry.population_classes) {
    Json jc{{"label", c.label}, {"lower", c.lower}};
    jc["upper"] = c.upper ? Json(*c.upper) : Json(nullptr);
    classes.push_back(std::move(jc));
  }
  doc["populationClasses"] = std::move(classes);
  doc["specializations"] = kb.registry.specializations;
  Json supported = Json::array();
  for (const auto& t : kb.registry.supported) supported.push_back(type_to_json(t));
  doc["supported"] = std::move(supported);
  Json ind;
  ind["general"] = kb.indicators.general;
  Json special = Json::object();
  for (const auto& [k, v] : kb.indicators.special) special[k] = v;
  ind["special"] = std::move(special);
  Json overrides = Json::array();
  for (const auto& [t, v] : kb.indicators.overrides) overrides.push_back({{"type", type_to_json(t)}, {"indicators", v}});
  ind["overrides"] = std::move(overrides);
  doc["indicators"] = std::move(ind);
  Json net;
  net["nodes"] = kb.network.nodes();
  Json edges = Json::array();
  for (const auto& t : kb.network.edges()) edges.push_back({t.subject, t.relation, t.object});
  net["edges"] = std::move(edges);
  doc["semanticNetwork"] = std::move(net);
  return doc;
}

// ---------------------------------------------------------------------------
// Schedules, base states and scenarios
// ---------------------------------------------------------------------------

/// `[{"t": 0, "impulses": {"p": 1.0}}, ...]`
inline std::map<int, std::map<FactorId, double>> named_schedule_from_json(const Json& arr, const std::string& path) {
  if (!arr.is_array()) throw Error(ErrorCode::schema_error, path + ": expected an array");
  std::map<int, std::map<FactorId, double>> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const Json& jt = detail::field(arr[i], p, "t");
    if (!jt.is_number_integer()) throw Error(ErrorCode::schema_error, p + ".t: expected an integer");
    const int t = jt.get<int>();
    const Json& imp = detail::field(arr[i], p, "impulses");
    if (!imp.is_object()) throw Error(ErrorCode::schema_error, p + ".impulses: expected an object");
    for (const auto& [id, v] : imp.items()) {
      if (!v.is_number()) throw Error(ErrorCode::schema_error, p + ".impulses." + id + ": expected a number");
      out[t][id] += v.get<double>();
    }
  }
  return out;
}

inline Json named_schedule_to_json(const std::map<int, std::map<FactorId, double>>& schedule) {
  Json arr = Json::array();
  for (const auto& [t, values] : schedule) {
    Json imp = Json::object();
    for (const auto& [id, v] : values) imp[id] = v;
    arr.push_back({{"t", t}, {"impulses", std::move(imp)}});
  }
  return arr;
}

inline ImpulseSchedule resolve_schedule(const CognitiveMap& map,
                                        const std::map<int, std::map<FactorId, double>>& named) {
  ImpulseSchedule out;
  for (const auto& [t, values] : named) {
    ImpulseVector o = zero_impulse(map.size());
    for (const auto& [id, v] : values) o[map.require_index(id)] = v;
    out[t] = std::move(o);
  }
  return out;
}

/// Base state: absent -> zeros; object -> by factor id (others zero);
/// array -> positional.
inline StateVector base_from_json(const CognitiveMap& map, const Json* j) {
  StateVector base{std::vector<double>(map.size(), 0.0)};
  if (!j || j->is_null()) return base;
  if (j->is_object()) {
    for (const auto& [id, v] : j->items()) {
      if (!v.is_number()) throw Error(ErrorCode::schema_error, "base." + id + ": expected a number");
      base[map.require_index(id)] = v.get<double>();
    }
    return base;
  }
  if (j->is_array()) {
    require_aligned(map, j->size(), "base state");
    for (std::size_t i = 0; i < j->size(); ++i) {
      if (!(*j)[i].is_number()) throw Error(ErrorCode::schema_error, "base[" + std::to_string(i) + "]: expected a number");
      base[i] = (*j)[i].get<double>();
    }
    return base;
  }
  throw Error(ErrorCode::schema_error, "base: expected an object or array");
}

inline Scenario scenario_from_json(const Json& j, const std::string& path) {
  Scenario s;
  s.name = detail::string_field(j, path, "name");
  const Json& h = detail::field(j, path, "horizon");
  if (!h.is_number_integer()) throw Error(ErrorCode::schema_error, path + ".horizon: expected an integer");
  s.horizon = h.get<int>();
  if (auto c = j.find("clamp"); c != j.end()) {
    if (!c->is_boolean()) throw Error(ErrorCode::schema_error, path + ".clamp: expected a boolean");
    s.clamp = c->get<bool>();
  }
  s.schedule = named_schedule_from_json(detail::field(j, path, "schedule"), path + ".schedule");
  if (auto c = j.find("controls"); c != j.end()) {
    auto ids = detail::string_list(*c, path + ".controls");
    s.controls.insert(ids.begin(), ids.end());
  } else {
    for (const auto& [t, values] : s.schedule)
      for (const auto& [id, v] : values) s.controls.insert(id);
  }
  return s;
}

inline Json scenario_to_json(const Scenario& s) {
  Json j;
  j["name"] = s.name;
  j["horizon"] = s.horizon;
  j["clamp"] = s.clamp;
  j["controls"] = s.controls;
  j["schedule"] = named_schedule_to_json(s.schedule);
  return j;
}

inline TargetSpec target_from_json(const Json& j, const std::string& path) {
  TargetSpec spec;
  spec.target = detail::string_field(j, path, "factor");
  spec.desired_delta = j.contains("desiredDelta") ? detail::number_field(j, path, "desiredDelta") : 0.0;
  const Json& h = detail::field(j, path, "horizon");
  if (!h.is_number_integer()) throw Error(ErrorCode::schema_error, path + ".horizon: expected an integer");
  spec.horizon = h.get<int>();
  return spec;
}

struct InversionRequest {
  std::vector<FactorId> controls;
  double ridge = 0.0;
};

/// A scenario file: target, optional base state, scenarios, and optional
/// inversion settings.
struct ScenarioSet {
  TargetSpec target;
  Json base;  // raw; resolved against a map by base_from_json
  std::vector<Scenario> scenarios;
  std::optional<InversionRequest> inversion;
};

inline InversionRequest inversion_from_json(const Json& j, const std::string& path) {
  InversionRequest req;
  req.controls = detail::string_list(detail::array_field(j, path, "controls"), path + ".controls");
  if (j.contains("ridge")) req.ridge = detail::number_field(j, path, "ridge");
  return req;
}

inline ScenarioSet scenario_set_from_json(const Json& doc) {
  detail::check_version(doc);
  ScenarioSet set;
  set.target = target_from_json(detail::field(doc, "document", "target"), "target");
  if (auto b = doc.find("base"); b != doc.end()) set.base = *b;
  if (auto arr = doc.find("scenarios"); arr != doc.end()) {
    if (!arr->is_array()) throw Error(ErrorCode::schema_error, "scenarios: expected an array");
    for (std::size_t i = 0; i < arr->size(); ++i)
      set.scenarios.push_back(scenario_from_json((*arr)[i], "scenarios[" + std::to_string(i) + "]"));
  }
  if (auto inv = doc.find("invert"); inv != doc.end()) set.inversion = inversion_from_json(*inv, "invert");
  return set;
}

inline ScenarioSet load_scenario_set(std::string_view text) { return scenario_set_from_json(parse_document(text)); }

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

inline Json factor_ids(const CognitiveMap& map) {
  Json ids = Json::array();
  for (const auto& f : map.factors()) ids.push_back(f.id);
  return ids;
}

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (double v : m.row(i)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json trajectory_to_json(const CognitiveMap& map, const Trajectory& traj) {
  Json doc;
  doc["formatVersion"] = kFormatVersion;
  doc["factors"] = factor_ids(map);
  doc["horizon"] = traj.horizon;
  Json states = Json::array();
  for (const auto& y : traj.states) states.push_back(y.values);
  Json impulses = Json::array();
  for (const auto& o : traj.impulses) impulses.push_back(o.values);
  doc["states"] = std::move(states);
  doc["impulses"] = std::move(impulses);
  return doc;
}

enum class TrajectoryFormat { tabular, document };

/// Tabular: header `t,<factor ids>` then Y(t) per row. Document: both the Y
/// and O series.
inline std::string export_trajectory(const CognitiveMap& map, const Trajectory& traj, TrajectoryFormat format) {
  if (format == TrajectoryFormat::document) return dump(trajectory_to_json(map, traj));
  std::string out = "t";
  for (const auto& f : map.factors()) out += "," + f.id;
  out += "\n";
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    out += std::to_string(t);
    for (double v : traj.states[t].values) out += "," + format_real(v);
    out += "\n";
  }
  return out;
}

inline Json stability_to_json(const StabilityReport& r) {
  return {{"spectralRadius", r.spectral_radius},
          {"classification", to_string(r.classification)},
          {"tolerance", r.tolerance},
          {"converged", r.converged}};
}

struct AnalysisResult {
  ClosurePair closure;
  InfluenceReport influence;
  StabilityReport stability;
};

inline AnalysisResult analyze(const CognitiveMap& map, double tol) {
  auto closure = transitive_closure(map);
  auto influence = influence_report(closure);
  return {std::move(closure), std::move(influence), stability_report(map, tol)};
}

inline Json analysis_to_json(const CognitiveMap& map, const AnalysisResult& a) {
  Json doc;
  doc["formatVersion"] = kFormatVersion;
  doc["factors"] = factor_ids(map);
  doc["closure"] = {{"positive", matrix_to_json(a.closure.positive)}, {"negative", matrix_to_json(a.closure.negative)}};
  Json perf = Json::array();
  for (std::size_t i = 0; i < map.size(); ++i) {
    const auto& f = a.influence.per_factor[i];
    perf.push_back({{"factor", map.factors()[i].id},
                    {"influenceOnSystem", f.influence_on_system},
                    {"susceptibility", f.susceptibility},
                    {"consonanceOnSystem", f.consonance_on_system}});
  }
  doc["influence"] = {{"influence", matrix_to_json(a.influence.influence)},
                      {"consonance", matrix_to_json(a.influence.consonance)},
                      {"dissonance", matrix_to_json(a.influence.dissonance)},
                      {"perFactor", std::move(perf)}};
  doc["stability"] = stability_to_json(a.stability);
  return doc;
}

inline Json plan_to_json(const StabilizationPlan& plan) {
  Json mods = Json::array();
  for (const auto& m : plan.modifications)
    mods.push_back({{"source", m.source}, {"target", m.target}, {"oldWeight", m.old_weight}, {"newWeight", m.new_weight}});
  return {{"formatVersion", kFormatVersion},
          {"modifications", std::move(mods)},
          {"resultingRadius", plan.resulting_radius},
          {"success", plan.success}};
}

inline Json scenario_result_to_json(const CognitiveMap& map, const std::string& name, const ScenarioResult& r) {
  Json doc;
  doc["formatVersion"] = kFormatVersion;
  doc["name"] = name;
  doc["targetDelta"] = r.target_delta;
  Json summary = Json::object();
  for (std::size_t i = 0; i < map.size(); ++i) summary[map.factors()[i].id] = r.final_delta[i];
  doc["finalDelta"] = std::move(summary);
  doc["trajectory"] = trajectory_to_json(map, r.trajectory);
  return doc;
}

inline Json ranking_to_json(const std::vector<RankedScenario>& ranking) {
  Json arr = Json::array();
  for (const auto& r : ranking)
    arr.push_back({{"name", r.name}, {"targetDelta", r.target_delta}, {"distance", r.distance}});
  return {{"formatVersion", kFormatVersion}, {"ranking", std::move(arr)}};
}

inline Json inversion_to_json(const Inversion& inv) {
  Json impulse = Json::object();
  Json gains = Json::object();
  for (std::size_t k = 0; k < inv.controls.size(); ++k) {
    impulse[inv.controls[k]] = inv.impulse[k];
    gains[inv.controls[k]] = inv.gains[k];
  }
  return {{"formatVersion", kFormatVersion},
          {"impulse", std::move(impulse)},
          {"gains", std::move(gains)},
          {"achievedDelta", inv.achieved_delta},
          {"residual", inv.residual}};
}

inline Json violations_to_json(const ValidationReport& report) {
  Json arr = Json::array();
  for (const auto& v : report) arr.push_back({{"invariant", v.invariant}, {"element", v.element}});
  return arr;
}

// ---------------------------------------------------------------------------
// Indicator ingestion
// ---------------------------------------------------------------------------

struct IndicatorRow {
  std::string municipality;
  FactorId factor;
  std::string period;
  double value = 0.0;
  double min = 0.0;
  double max = 1.0;
};

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

inline double parse_real(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::parse_error, where + ": not a number: '" + s + "'");
  }
}

/// CSV with header `municipality,factor,period,value,min,max`.
inline std::vector<IndicatorRow> parse_indicator_series(std::string_view text) {
  std::vector<IndicatorRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (header) {
      header = false;
      if (cells.size() != 6 || cells[0] != "municipality" || cells[1] != "factor")
        throw Error(ErrorCode::schema_error, "indicator series header must be municipality,factor,period,value,min,max");
      continue;
    }
    const std::string where = "line " + std::to_string(line_no);
    if (cells.size() != 6) throw Error(ErrorCode::parse_error, where + ": expected 6 columns");
    rows.push_back({cells[0], cells[1], cells[2], parse_real(cells[3], where), parse_real(cells[4], where),
                    parse_real(cells[5], where)});
  }
  return rows;
}

struct IngestOptions {
  std::optional<std::string> municipality;  // filter; all rows when unset
  double default_value = 0.5;
  std::map<FactorId, double> default_overrides;
};

struct IngestResult {
  StateVector state;
  std::vector<std::string> warnings;
};

/// Min-max normalises each factor's value for `period` against its stated
/// bounds. Out-of-bound values clip to [0, 1] with a warning; factors with no
/// row take the configured default.
inline IngestResult ingest_indicators(const std::vector<IndicatorRow>& series, const CognitiveMap& map,
                                      std::string_view period, const IngestOptions& options = {}) {
  IngestResult result;
  result.state.values.assign(map.size(), 0.0);
  std::vector<char> seen(map.size(), 0);
  for (const auto& row : series) {
    if (row.period != period) continue;
    if (options.municipality && row.municipality != *options.municipality) continue;
    if (!(row.max > row.min))
      throw Error(ErrorCode::invalid_argument, "bounds max <= min for " + row.factor + " in " + row.period);
    auto idx = map.index_of(row.factor);
    if (!idx) {
      result.warnings.push_back("row for unknown factor " + row.factor + " ignored");
      continue;
    }
    if (seen[*idx]) throw Error(ErrorCode::invalid_argument, "duplicate row for (" + row.factor + ", " + row.period + ")");
    seen[*idx] = 1;
    double y = (row.value - row.min) / (row.max - row.min);
    if (y < 0.0 || y > 1.0) {
      result.warnings.push_back(row.factor + ": value " + format_real(row.value) + " outside [" +
                                format_real(row.min) + ", " + format_real(row.max) + "], clipped");
      y = std::clamp(y, 0.0, 1.0);
    }
    result.state[*idx] = y;
  }
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (seen[i]) continue;
    const auto& id = map.factors()[i].id;
    auto it = options.default_overrides.find(id);
    result.state[i] = it != options.default_overrides.end() ? it->second : options.default_value;
  }
  return result;
}

}  // namespace fcm::io
