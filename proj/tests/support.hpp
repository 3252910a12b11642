#pragma once

// Seeded generators and fixtures shared by the unit and acceptance suites.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fcm/fcm.hpp"

namespace fcm::testing {

inline std::string data_path(const std::string& rel) { return std::string(FCM_DATA_DIR) + "/" + rel; }

/// p (control) -> q (target), weight 0.5.
inline CognitiveMap chain_fixture() {
  return build_map({{"p", "production", FactorKind::control, {}}, {"q", "quality of life", FactorKind::target, {}}},
                   {{"p", "q", 0.5}}, {"chain", "1", {}});
}

inline CognitiveMap self_loop(double w) {
  return build_map({{"a", "a", FactorKind::target, {}}}, {{"a", "a", w}});
}

inline CognitiveMap two_cycle(double ab, double ba) {
  return build_map({{"a", "a", FactorKind::general, {}}, {"b", "b", FactorKind::general, {}}},
                   {{"a", "b", ab}, {"b", "a", ba}});
}

struct RandomMapOptions {
  std::size_t min_factors = 1;
  std::size_t max_factors = 8;
  double edge_probability = 0.35;
  std::size_t controls = 1;  // leading factors after the target
};

/// Factor 0 is the target, the next `controls` factors are controls, the
/// rest general. Every ordered pair (self loops included) carries an edge
/// with the given probability, weight uniform in [-1, 1].
inline CognitiveMap random_map(std::mt19937_64& rng, const RandomMapOptions& opt = {}) {
  std::uniform_int_distribution<std::size_t> size(opt.min_factors, opt.max_factors);
  std::uniform_real_distribution<double> weight(-1.0, 1.0);
  std::bernoulli_distribution has_edge(opt.edge_probability);
  const std::size_t n = size(rng);
  std::vector<Factor> factors;
  for (std::size_t i = 0; i < n; ++i) {
    FactorKind kind = FactorKind::general;
    if (i == 0) kind = FactorKind::target;
    else if (i <= opt.controls) kind = FactorKind::control;
    factors.push_back({"f" + std::to_string(i), "factor " + std::to_string(i), kind, {}});
  }
  std::vector<WeightedEdge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (has_edge(rng)) edges.push_back({factors[i].id, factors[j].id, weight(rng)});
  return build_map(std::move(factors), std::move(edges), {"random", "1", {}});
}

inline ImpulseVector random_impulse(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> v(-1.0, 1.0);
  ImpulseVector o = zero_impulse(n);
  for (auto& x : o.values) x = v(rng);
  return o;
}

inline ImpulseVector unit_impulse(std::size_t n, std::size_t i) {
  ImpulseVector o = zero_impulse(n);
  o[i] = 1.0;
  return o;
}

/// Forward rounding-error scale for sum_t M^t o: the same sum with |M| and
/// |o|. Differences between two evaluation orders of the recurrence are
/// bounded by a small multiple of eps times this.
inline std::vector<double> magnitude_scale(const CognitiveMap& map, const ImpulseVector& o, int horizon) {
  Matrix abs_m = map.propagation_operator();
  for (std::size_t i = 0; i < abs_m.rows(); ++i)
    for (std::size_t j = 0; j < abs_m.cols(); ++j) abs_m(i, j) = std::abs(abs_m(i, j));
  std::vector<double> cur(o.size()), total(o.size());
  for (std::size_t i = 0; i < o.size(); ++i) total[i] = cur[i] = std::abs(o[i]);
  for (int t = 1; t <= horizon; ++t) {
    cur = abs_m * std::span<const double>(cur);
    for (std::size_t i = 0; i < cur.size(); ++i) total[i] += cur[i];
  }
  return total;
}

/// |a - b| <= tol * max(1, scale).
inline bool close_scaled(double a, double b, double tol, double scale) {
  return std::abs(a - b) <= tol * std::max(1.0, scale);
}

}  // namespace fcm::testing
