#pragma once

// Cognitive maps: factors connected by signed fuzzy weights in [-1, 1].
//
// A map is an immutable value. Factor order is fixed at construction and
// defines the coordinate order of every vector and matrix derived from it.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fcm/error.hpp"
#include "fcm/matrix.hpp"

namespace fcm {

using FactorId = std::string;

enum class FactorKind { target, control, general, special };

inline const char* to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::target: return "target";
    case FactorKind::control: return "control";
    case FactorKind::general: return "general";
    case FactorKind::special: return "special";
  }
  return "general";
}

inline std::optional<FactorKind> parse_factor_kind(std::string_view s) {
  if (s == "target") return FactorKind::target;
  if (s == "control") return FactorKind::control;
  if (s == "general") return FactorKind::general;
  if (s == "special") return FactorKind::special;
  return std::nullopt;
}

struct Factor {
  FactorId id;
  std::string name;
  FactorKind kind = FactorKind::general;
  std::optional<FactorId> parent;

  friend bool operator==(const Factor&, const Factor&) = default;
};

/// Directed causal link: a change in `source` changes `target`.
struct WeightedEdge {
  FactorId source;
  FactorId target;
  double weight = 0.0;

  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

struct MapMetadata {
  std::string name;
  std::string version;
  // (climate, population class, specialization) labels, when the map is
  // bound to a typology cell.
  std::optional<std::vector<std::string>> municipality_type;

  friend bool operator==(const MapMetadata&, const MapMetadata&) = default;
};

struct Violation {
  std::string invariant;
  std::string element;

  friend bool operator==(const Violation&, const Violation&) = default;
};

using ValidationReport = std::vector<Violation>;

class CognitiveMap;
ValidationReport validate_map(const CognitiveMap& map);

class CognitiveMap {
 public:
  CognitiveMap() = default;

  const std::vector<Factor>& factors() const noexcept { return factors_; }
  const std::vector<WeightedEdge>& edges() const noexcept { return edges_; }
  const MapMetadata& metadata() const noexcept { return metadata_; }
  std::size_t size() const noexcept { return factors_.size(); }

  std::optional<std::size_t> index_of(std::string_view id) const {
    for (std::size_t i = 0; i < factors_.size(); ++i)
      if (factors_[i].id == id) return i;
    return std::nullopt;
  }

  std::size_t require_index(std::string_view id) const {
    if (auto i = index_of(id)) return *i;
    throw Error(ErrorCode::not_found, "unknown factor: " + std::string(id));
  }

  const Factor& factor(std::string_view id) const { return factors_[require_index(id)]; }

  std::optional<double> weight(std::string_view source, std::string_view target) const {
    for (const auto& e : edges_)
      if (e.source == source && e.target == target) return e.weight;
    return std::nullopt;
  }

  /// The first factor of kind target, if any.
  std::optional<std::size_t> target_index() const {
    for (std::size_t i = 0; i < factors_.size(); ++i)
      if (factors_[i].kind == FactorKind::target) return i;
    return std::nullopt;
  }

  /// Weight matrix W with W(i, j) = w(e_i -> e_j).
  Matrix weight_matrix() const {
    Matrix w(size(), size());
    for (const auto& e : edges_) w(require_index(e.source), require_index(e.target)) = e.weight;
    return w;
  }

  /// Propagation operator M = W^T, so that O'(j) = sum_i w(e_i -> e_j) O(i)
  /// is the matrix-vector product M * O.
  Matrix propagation_operator() const { return weight_matrix().transposed(); }

  /// Same factors and metadata, edge weights replaced. Unchecked: callers
  /// keep every weight in [-1, 1].
  CognitiveMap with_edges(std::vector<WeightedEdge> edges) const {
    CognitiveMap copy = *this;
    copy.edges_ = std::move(edges);
    return copy;
  }

  /// Builds a map without validation. Use `build_map` for user input.
  static CognitiveMap unchecked(std::vector<Factor> factors, std::vector<WeightedEdge> edges,
                                MapMetadata metadata) {
    CognitiveMap m;
    m.factors_ = std::move(factors);
    m.edges_ = std::move(edges);
    m.metadata_ = std::move(metadata);
    return m;
  }

  friend bool operator==(const CognitiveMap&, const CognitiveMap&) = default;

 private:
  std::vector<Factor> factors_;
  std::vector<WeightedEdge> edges_;
  MapMetadata metadata_;
};

inline bool is_valid_factor_id(std::string_view id) {
  if (id.empty()) return false;
  return std::none_of(id.begin(), id.end(),
                      [](unsigned char c) { return std::isspace(c) != 0; });
}

inline bool weight_in_range(double w) { return w >= -1.0 && w <= 1.0; }

inline ValidationReport validate_map(const CognitiveMap& map) {
  ValidationReport report;
  std::set<FactorId> ids;
  for (const auto& f : map.factors()) {
    if (!is_valid_factor_id(f.id)) report.push_back({"invalid factor id", f.id});
    if (!ids.insert(f.id).second) report.push_back({"duplicate factor id", f.id});
  }

  std::size_t targets = 0;
  for (const auto& f : map.factors()) {
    if (f.kind == FactorKind::target) ++targets;
    if (f.parent && !ids.contains(*f.parent))
      report.push_back({"unknown parent factor", f.id + " -> " + *f.parent});
  }
  if (targets > 1) report.push_back({"multiple target factors", std::to_string(targets)});

  // Lineage cycles: follow parent links from each factor.
  std::map<FactorId, FactorId> parent_of;
  for (const auto& f : map.factors())
    if (f.parent) parent_of[f.id] = *f.parent;
  std::set<FactorId> reported;
  for (const auto& [start, _] : parent_of) {
    std::set<FactorId> seen{start};
    FactorId cur = start;
    while (parent_of.contains(cur)) {
      cur = parent_of.at(cur);
      if (!seen.insert(cur).second) {
        if (reported.insert(cur).second) report.push_back({"lineage cycle", cur});
        break;
      }
    }
  }

  std::set<std::pair<FactorId, FactorId>> pairs;
  for (const auto& e : map.edges()) {
    const std::string label = e.source + "->" + e.target;
    if (!ids.contains(e.source) || !ids.contains(e.target))
      report.push_back({"dangling edge endpoint", label});
    if (!weight_in_range(e.weight)) report.push_back({"weight outside [-1,1]", label});
    if (!pairs.insert({e.source, e.target}).second) report.push_back({"duplicate edge", label});
  }
  return report;
}

inline std::string describe(const ValidationReport& report) {
  std::string out;
  for (const auto& v : report) {
    if (!out.empty()) out += "; ";
    out += v.invariant + " (" + v.element + ")";
  }
  return out;
}

/// Raised by `build_map`; carries every violation found.
class ValidationFailed : public Error {
 public:
  explicit ValidationFailed(ValidationReport report)
      : Error(ErrorCode::invalid_map, describe(report)), report_(std::move(report)) {}

  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

/// Validating constructor: the result satisfies every map invariant.
inline CognitiveMap build_map(std::vector<Factor> factors, std::vector<WeightedEdge> edges,
                              MapMetadata metadata = {}) {
  auto map = CognitiveMap::unchecked(std::move(factors), std::move(edges), std::move(metadata));
  if (auto report = validate_map(map); !report.empty()) throw ValidationFailed(std::move(report));
  return map;
}

struct ChildFactor {
  Factor factor;
  double aggregation_weight = 1.0;
};

/// Breaks `parent` into sub-factors. The parent stays in the map as an
/// aggregate node; each child gets `parent` lineage and one child->parent
/// edge. Existing factors and edges are untouched.
inline CognitiveMap decompose_factor(const CognitiveMap& map, std::string_view parent,
                                     const std::vector<ChildFactor>& children) {
  if (!map.index_of(parent)) throw Error(ErrorCode::not_found, "unknown factor: " + std::string(parent));
  auto factors = map.factors();
  auto edges = map.edges();
  std::set<FactorId> ids;
  for (const auto& f : factors) ids.insert(f.id);
  for (const auto& child : children) {
    if (!ids.insert(child.factor.id).second)
      throw Error(ErrorCode::invalid_map, "id collision: " + child.factor.id);
    if (!weight_in_range(child.aggregation_weight))
      throw Error(ErrorCode::invalid_map, "weight outside [-1,1]: " + child.factor.id + "->" + std::string(parent));
    Factor f = child.factor;
    f.parent = FactorId(parent);
    factors.push_back(std::move(f));
    edges.push_back({child.factor.id, FactorId(parent), child.aggregation_weight});
  }
  return build_map(std::move(factors), std::move(edges), map.metadata());
}

}  // namespace fcm
