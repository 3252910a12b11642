#pragma once

// Municipality typology, indicator templates and the semantic network of
// strategy determinants.
//
// A municipality type is one cell (climate zone, population class,
// specialization) of the product K x P x A. Population classes partition
// [0, inf) with inclusive lower bounds.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "fcm/error.hpp"

namespace fcm {

struct PopulationClass {
  std::string label;
  std::uint64_t lower = 0;                 // inclusive
  std::optional<std::uint64_t> upper;      // exclusive; nullopt = unbounded

  bool contains(std::uint64_t population) const {
    return population >= lower && (!upper || population < *upper);
  }

  friend bool operator==(const PopulationClass&, const PopulationClass&) = default;
};

struct MunicipalityType {
  std::string climate;
  std::string population_class;
  std::string specialization;

  friend auto operator<=>(const MunicipalityType&, const MunicipalityType&) = default;
};

inline std::string to_string(const MunicipalityType& t) {
  return "(" + t.climate + ", " + t.population_class + ", " + t.specialization + ")";
}

struct TypologyRegistry {
  std::vector<std::string> climate_zones;
  std::vector<PopulationClass> population_classes;  // ordered by lower bound
  std::vector<std::string> specializations;
  std::set<MunicipalityType> supported;

  friend bool operator==(const TypologyRegistry&, const TypologyRegistry&) = default;
};

/// Structural problems with a registry; empty when valid.
inline std::vector<std::string> validate_registry(const TypologyRegistry& reg) {
  std::vector<std::string> problems;
  auto unique_labels = [&](const std::vector<std::string>& labels, const char* what) {
    std::set<std::string> seen;
    for (const auto& l : labels) {
      if (l.empty()) problems.push_back(std::string("empty ") + what + " label");
      if (!seen.insert(l).second) problems.push_back(std::string("duplicate ") + what + " label: " + l);
    }
  };
  unique_labels(reg.climate_zones, "climate zone");
  unique_labels(reg.specializations, "specialization");
  std::vector<std::string> class_labels;
  for (const auto& c : reg.population_classes) class_labels.push_back(c.label);
  unique_labels(class_labels, "population class");

  const auto& classes = reg.population_classes;
  if (classes.empty()) {
    problems.push_back("no population classes");
  } else {
    if (classes.front().lower != 0) problems.push_back("population classes must start at 0");
    for (std::size_t i = 0; i < classes.size(); ++i) {
      const auto& c = classes[i];
      const bool last = i + 1 == classes.size();
      if (last) {
        if (c.upper) problems.push_back("last population class must be unbounded: " + c.label);
      } else if (!c.upper || *c.upper != classes[i + 1].lower) {
        problems.push_back("population classes not contiguous at " + c.label);
      }
      if (c.upper && *c.upper <= c.lower) problems.push_back("empty population interval: " + c.label);
    }
  }

  auto has = [](const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
  };
  for (const auto& t : reg.supported) {
    const bool pop_ok = std::any_of(classes.begin(), classes.end(),
                                    [&](const auto& c) { return c.label == t.population_class; });
    if (!has(reg.climate_zones, t.climate) || !pop_ok || !has(reg.specializations, t.specialization))
      problems.push_back("supported triple outside K x P x A: " + to_string(t));
  }
  return problems;
}

inline const PopulationClass& classify_population(const TypologyRegistry& reg, std::uint64_t population) {
  for (const auto& c : reg.population_classes)
    if (c.contains(population)) return c;
  throw Error(ErrorCode::invalid_argument,
              "population " + std::to_string(population) + " matches no class (corrupt registry)");
}

inline MunicipalityType resolve_type(const TypologyRegistry& reg, std::string_view climate,
                                     std::uint64_t population, std::string_view specialization) {
  if (std::find(reg.climate_zones.begin(), reg.climate_zones.end(), climate) == reg.climate_zones.end())
    throw Error(ErrorCode::not_found, "unknown climate zone: " + std::string(climate));
  if (std::find(reg.specializations.begin(), reg.specializations.end(), specialization) ==
      reg.specializations.end())
    throw Error(ErrorCode::not_found, "unknown specialization: " + std::string(specialization));
  MunicipalityType t{std::string(climate), classify_population(reg, population).label,
                     std::string(specialization)};
  if (!reg.supported.contains(t))
    throw Error(ErrorCode::unsupported, "unsupported municipality type: " + to_string(t));
  return t;
}

/// General indicators apply to every type; special ones are keyed by
/// specialization, with full-triple overrides taking precedence.
struct IndicatorTemplate {
  std::set<std::string> general;
  std::map<std::string, std::set<std::string>> special;
  std::map<MunicipalityType, std::set<std::string>> overrides;

  friend bool operator==(const IndicatorTemplate&, const IndicatorTemplate&) = default;
};

inline std::set<std::string> indicators_for_type(const IndicatorTemplate& tpl, const MunicipalityType& type) {
  std::set<std::string> out = tpl.general;
  if (auto it = tpl.overrides.find(type); it != tpl.overrides.end()) {
    out.insert(it->second.begin(), it->second.end());
  } else if (auto sp = tpl.special.find(type.specialization); sp != tpl.special.end()) {
    out.insert(sp->second.begin(), sp->second.end());
  }
  return out;
}

namespace relation {
inline constexpr std::string_view depends_on = "depends-on";
inline constexpr std::string_view is_a = "is-a";
inline constexpr std::string_view part_of = "part-of";
inline constexpr std::string_view assessed_by = "assessed-by";
}  // namespace relation

inline bool is_known_relation(std::string_view r) {
  return r == relation::depends_on || r == relation::is_a || r == relation::part_of ||
         r == relation::assessed_by;
}

struct Triple {
  std::string subject;
  std::string relation;
  std::string object;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

class SemanticNetwork {
 public:
  void add_node(std::string node) { nodes_.insert(std::move(node)); }

  void add_edge(Triple t) {
    if (!nodes_.contains(t.subject)) throw Error(ErrorCode::not_found, "unknown node: " + t.subject);
    if (!nodes_.contains(t.object)) throw Error(ErrorCode::not_found, "unknown node: " + t.object);
    if (!is_known_relation(t.relation)) throw Error(ErrorCode::invalid_argument, "unknown relation: " + t.relation);
    if (!edges_.insert(t).second)
      throw Error(ErrorCode::invalid_argument,
                  "duplicate triple: " + t.subject + " " + t.relation + " " + t.object);
  }

  const std::set<std::string>& nodes() const noexcept { return nodes_; }
  const std::set<Triple>& edges() const noexcept { return edges_; }

  friend bool operator==(const SemanticNetwork&, const SemanticNetwork&) = default;

 private:
  std::set<std::string> nodes_;
  std::set<Triple> edges_;
};

inline std::set<std::string> semantic_query(const SemanticNetwork& net, std::string_view subject,
                                            std::string_view relation) {
  std::set<std::string> out;
  for (const auto& t : net.edges())
    if (t.subject == subject && t.relation == relation) out.insert(t.object);
  return out;
}

/// Registry, indicator template and determinant network loaded together.
struct KnowledgeBase {
  TypologyRegistry registry;
  IndicatorTemplate indicators;
  SemanticNetwork network;
};

/// The determinants of a municipal development strategy: what the strategy
/// depends on, and what the municipality type is made of.
inline SemanticNetwork strategy_determinant_network() {
  SemanticNetwork net;
  for (const char* node : {"SED-strategy", "municipality-type", "current-SED-level",
                           "rural-settlement-count", "climate-zone", "population-class",
                           "specialization", "general-indicators", "special-indicators",
                           "demographics", "quality-of-life", "production"})
    net.add_node(node);
  net.add_edge({"SED-strategy", "depends-on", "municipality-type"});
  net.add_edge({"SED-strategy", "depends-on", "current-SED-level"});
  net.add_edge({"SED-strategy", "depends-on", "rural-settlement-count"});
  net.add_edge({"municipality-type", "depends-on", "climate-zone"});
  net.add_edge({"municipality-type", "depends-on", "population-class"});
  net.add_edge({"municipality-type", "depends-on", "specialization"});
  net.add_edge({"current-SED-level", "assessed-by", "general-indicators"});
  net.add_edge({"current-SED-level", "assessed-by", "special-indicators"});
  net.add_edge({"special-indicators", "depends-on", "specialization"});
  net.add_edge({"demographics", "part-of", "general-indicators"});
  net.add_edge({"quality-of-life", "part-of", "general-indicators"});
  net.add_edge({"production", "part-of", "special-indicators"});
  return net;
}

}  // namespace fcm
