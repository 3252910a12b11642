#pragma once

// Static analysis of a cognitive map: path-influence closure, consonance and
// dissonance indicators, stability of the impulse process, and a greedy
// search for weight reductions that make the map stable.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fcm/error.hpp"
#include "fcm/map.hpp"
#include "fcm/matrix.hpp"

namespace fcm {

// ---------------------------------------------------------------------------
// Closure
// ---------------------------------------------------------------------------

/// Strongest positive and strongest negative path influence between every
/// ordered pair of factors. Entries are magnitudes in [0, 1]; the diagonal
/// holds the strongest simple cycles through each factor.
struct ClosurePair {
  Matrix positive;
  Matrix negative;
};

/// Strongest path magnitude |prod w| over all walks i -> j, by iterated
/// max-product composition of |W| to a fixpoint. Since every |w| <= 1 a
/// repeated vertex never increases the magnitude, so this is also the best
/// simple-path magnitude.
inline Matrix magnitude_closure(const CognitiveMap& map) {
  const std::size_t n = map.size();
  Matrix abs_w = map.weight_matrix();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) abs_w(i, j) = std::abs(abs_w(i, j));

  Matrix closure = abs_w;
  for (std::size_t round = 0; round < n + 1; ++round) {
    bool changed = false;
    Matrix next = closure;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const double ik = closure(i, k);
        if (ik == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
          const double cand = ik * abs_w(k, j);
          if (cand > next(i, j)) {
            next(i, j) = cand;
            changed = true;
          }
        }
      }
    closure = std::move(next);
    if (!changed) break;
  }
  return closure;
}

namespace detail {

struct ClosureSearch {
  struct Arc {
    std::size_t to;
    double weight;
  };

  std::size_t n;
  std::vector<std::vector<Arc>> out;
  const Matrix& bound;
  std::size_t source = 0;
  std::vector<double> best_pos{};
  std::vector<double> best_neg{};
  std::vector<char> on_path{};

  void record(std::size_t j, double product) {
    if (product > 0.0)
      best_pos[j] = std::max(best_pos[j], product);
    else if (product < 0.0)
      best_neg[j] = std::max(best_neg[j], -product);
  }

  // Whether some extension from `v` carrying |product| could still improve
  // any endpoint's best value of either sign.
  bool promising(std::size_t v, double magnitude) const {
    for (std::size_t j = 0; j < n; ++j) {
      const double reach = magnitude * bound(v, j);
      if (reach > 0.0 && reach > std::min(best_pos[j], best_neg[j])) return true;
    }
    return false;
  }

  void extend(std::size_t v, double product) {
    for (const Arc& arc : out[v]) {
      const double next = product * arc.weight;
      if (next == 0.0) continue;
      if (arc.to == source) {
        record(source, next);
        continue;
      }
      if (on_path[arc.to]) continue;
      record(arc.to, next);
      if (!promising(arc.to, std::abs(next))) continue;
      on_path[arc.to] = 1;
      extend(arc.to, next);
      on_path[arc.to] = 0;
    }
  }
};

}  // namespace detail

/// Signed max-product closure over simple paths.
///
/// positive(i, j) is the largest positive product along a simple path
/// i -> j, negative(i, j) the largest magnitude among negative products; 0
/// where no such path exists. Depth-first branch and bound, pruned with the
/// magnitude closure as an upper bound on any extension.
inline ClosurePair transitive_closure(const CognitiveMap& map) {
  const std::size_t n = map.size();
  const Matrix bound = magnitude_closure(map);
  detail::ClosureSearch search{n, std::vector<std::vector<detail::ClosureSearch::Arc>>(n), bound};
  for (const auto& e : map.edges())
    if (e.weight != 0.0)
      search.out[map.require_index(e.source)].push_back({map.require_index(e.target), e.weight});
  for (auto& arcs : search.out)
    std::stable_sort(arcs.begin(), arcs.end(),
                     [](const auto& a, const auto& b) { return std::abs(a.weight) > std::abs(b.weight); });

  ClosurePair result{Matrix(n, n), Matrix(n, n)};
  for (std::size_t s = 0; s < n; ++s) {
    search.source = s;
    search.best_pos.assign(n, 0.0);
    search.best_neg.assign(n, 0.0);
    search.on_path.assign(n, 0);
    search.on_path[s] = 1;
    search.extend(s, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
      result.positive(s, j) = search.best_pos[j];
      result.negative(s, j) = search.best_neg[j];
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Influence indicators
// ---------------------------------------------------------------------------

struct FactorAggregate {
  double influence_on_system = 0.0;
  double susceptibility = 0.0;
  double consonance_on_system = 0.0;
};

struct InfluenceReport {
  Matrix influence;    // P, in [-1, 1]
  Matrix consonance;   // C, in [0, 1]
  Matrix dissonance;   // D = 1 - C
  std::vector<FactorAggregate> per_factor;
};

inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

inline InfluenceReport influence_report(const ClosurePair& closure) {
  const std::size_t n = closure.positive.rows();
  if (closure.positive.cols() != n || closure.negative.rows() != n || closure.negative.cols() != n)
    throw Error(ErrorCode::invalid_argument, "closure matrices differ in shape");

  InfluenceReport r{Matrix(n, n), Matrix(n, n), Matrix(n, n), std::vector<FactorAggregate>(n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double pos = closure.positive(i, j);
      const double neg = closure.negative(i, j);
      r.influence(i, j) = sign_of(pos - neg) * std::max(pos, neg);
      const double total = pos + neg;
      r.consonance(i, j) = total == 0.0 ? 1.0 : std::abs(pos - neg) / total;
      r.dissonance(i, j) = 1.0 - r.consonance(i, j);
    }
  if (n == 0) return r;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double row_p = 0.0, col_p = 0.0, row_c = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row_p += r.influence(i, j);
      col_p += r.influence(j, i);
      row_c += r.consonance(i, j);
    }
    r.per_factor[i] = {row_p * inv_n, col_p * inv_n, row_c * inv_n};
  }
  return r;
}

// ---------------------------------------------------------------------------
// Stability
// ---------------------------------------------------------------------------

struct SpectralEstimate {
  double radius = 0.0;
  int doublings = 0;
  bool converged = true;
};

inline constexpr int kMaxDoublings = 64;

/// Spectral radius by the Gelfand formula rho = lim ||M^k||_2^(1/k), with k
/// doubling by repeated squaring until the relative change of the estimate
/// drops below tol/2. Powers are renormalised after every squaring; the
/// scale is carried in log space. The estimate approaches rho from above.
inline SpectralEstimate spectral_radius(const Matrix& m, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::invalid_argument, "tolerance must be positive");
  if (m.rows() == 0 || m.is_zero()) return {0.0, 0, true};

  Matrix power = m;
  double log_scale = 0.0;
  double k = 1.0;
  double estimate = norm2(power);
  for (int d = 1; d <= kMaxDoublings; ++d) {
    power = power * power;
    log_scale *= 2.0;
    k *= 2.0;
    const double peak = power.max_abs();
    if (peak == 0.0) return {0.0, d, true};
    power *= 1.0 / peak;
    log_scale += std::log(peak);
    const double next = std::exp((std::log(norm2(power)) + log_scale) / k);
    const double change = std::abs(next - estimate) / estimate;
    estimate = next;
    if (change < tol / 2.0) return {estimate, d, true};
  }
  return {estimate, kMaxDoublings, false};
}

enum class Stability { stable, marginal, unstable };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::marginal: return "marginal";
    case Stability::unstable: return "unstable";
  }
  return "marginal";
}

struct StabilityReport {
  double spectral_radius = 0.0;
  Stability classification = Stability::stable;
  double tolerance = 1e-6;
  bool converged = true;
};

inline Stability classify(double rho, double tol) {
  if (rho < 1.0 - tol) return Stability::stable;
  if (rho > 1.0 + tol) return Stability::unstable;
  return Stability::marginal;
}

inline StabilityReport stability_report(const CognitiveMap& map, double tol) {
  const auto est = spectral_radius(map.propagation_operator(), tol);
  return {est.radius, classify(est.radius, tol), tol, est.converged};
}

/// Number of steps after which every unit impulse has decayed below
/// `threshold` in the sup norm, for a map with rho < 1.
///
/// Finds the first k with q = ||M^k||_2 < 1 and B = max_{r<k} ||M^r||_2;
/// then ||M^t||_2 <= B q^floor(t/k). nullopt when no such k is found within
/// `max_power` steps.
inline std::optional<long> decay_step_bound(const CognitiveMap& map, double threshold, int max_power = 10000) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::invalid_argument, "threshold must be positive");
  const Matrix m = map.propagation_operator();
  Matrix power = Matrix::identity(map.size());
  double worst = 1.0;
  for (int k = 1; k <= max_power; ++k) {
    power = m * power;
    if (power.is_zero()) return k;
    const double q = norm2(power);
    if (q < 1.0) {
      if (worst < threshold) return k;
      const double blocks = std::floor(std::log(threshold / worst) / std::log(q)) + 1.0;
      return static_cast<long>(blocks) * k;
    }
    worst = std::max(worst, q);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Stabilization
// ---------------------------------------------------------------------------

/// Strongly connected components (Tarjan), each a list of factor indices.
inline std::vector<std::vector<std::size_t>> strongly_connected_components(const Matrix& adjacency) {
  const std::size_t n = adjacency.rows();
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> components;
  int counter = 0;

  auto connect = [&](auto&& self, std::size_t v) -> void {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = 1;
    for (std::size_t w = 0; w < n; ++w) {
      if (adjacency(v, w) == 0.0) continue;
      if (index[w] < 0) {
        self(self, w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> comp;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = 0;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      components.push_back(std::move(comp));
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] < 0) connect(connect, v);
  return components;
}

struct EdgeModification {
  FactorId source;
  FactorId target;
  double old_weight = 0.0;
  double new_weight = 0.0;
};

struct StabilizationPlan {
  std::vector<EdgeModification> modifications;
  double resulting_radius = 0.0;
  bool success = false;
};

/// Magnitudes below this after halving snap to zero, which bounds the
/// number of moves per edge.
inline constexpr double kWeightFloor = 1e-3;

inline double halved(double w) {
  const double h = 0.5 * w;
  return std::abs(h) < kWeightFloor ? 0.0 : h;
}

/// Applies a plan's modifications in order.
inline CognitiveMap apply_plan(const CognitiveMap& map, const StabilizationPlan& plan) {
  auto edges = map.edges();
  for (const auto& mod : plan.modifications) {
    auto it = std::find_if(edges.begin(), edges.end(),
                           [&](const auto& e) { return e.source == mod.source && e.target == mod.target; });
    if (it == edges.end()) throw Error(ErrorCode::not_found, "plan edge not in map: " + mod.source + "->" + mod.target);
    it->weight = mod.new_weight;
  }
  return build_map(map.factors(), std::move(edges), map.metadata());
}

using EdgeKey = std::pair<FactorId, FactorId>;

/// Greedy weight-halving search for a stable structure.
///
/// Each round halves the one unlocked edge that most lowers the spectral
/// radius. Only edges inside a strongly connected component can change the
/// radius, so the radius is evaluated per component; when the largest
/// component radius cannot be lowered by a single move the round falls back
/// to the move that most lowers the sum of component radii. Stops at
/// rho < 1 - tol or when no move lowers either score.
inline StabilizationPlan stabilize_search(const CognitiveMap& map, const std::set<EdgeKey>& locked, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::invalid_argument, "tolerance must be positive");
  for (const auto& key : locked)
    if (!map.weight(key.first, key.second))
      throw Error(ErrorCode::not_found, "locked edge not in map: " + key.first + "->" + key.second);

  StabilizationPlan plan;
  const auto initial = stability_report(map, tol);
  if (initial.classification == Stability::stable) {
    plan.resulting_radius = initial.spectral_radius;
    plan.success = true;
    return plan;
  }
  const bool any_free = std::any_of(map.edges().begin(), map.edges().end(), [&](const auto& e) {
    return !locked.contains({e.source, e.target});
  });
  if (!any_free) throw Error(ErrorCode::locked, "all edges locked");

  const std::size_t n = map.size();
  Matrix w = map.weight_matrix();
  const auto components = strongly_connected_components(w);
  std::vector<std::size_t> component_of(n);
  for (std::size_t c = 0; c < components.size(); ++c)
    for (std::size_t v : components[c]) component_of[v] = c;

  auto component_radius = [&](const Matrix& weights, std::size_t c) {
    const auto& members = components[c];
    Matrix block(members.size(), members.size());
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = 0; b < members.size(); ++b) block(b, a) = weights(members[a], members[b]);
    return spectral_radius(block, tol).radius;
  };

  std::vector<double> radii(components.size());
  for (std::size_t c = 0; c < components.size(); ++c) radii[c] = component_radius(w, c);
  auto score = [](const std::vector<double>& r) {
    double top = 0.0, sum = 0.0;
    for (double x : r) {
      top = std::max(top, x);
      sum += x;
    }
    return std::pair{top, sum};
  };

  struct Candidate {
    std::size_t i, j;
    std::string source, target;
  };
  std::vector<Candidate> candidates;
  for (const auto& e : map.edges()) {
    if (locked.contains({e.source, e.target})) continue;
    const std::size_t i = map.require_index(e.source), j = map.require_index(e.target);
    if (component_of[i] != component_of[j]) continue;
    candidates.push_back({i, j, e.source, e.target});
  }

  auto current = score(radii);
  while (current.first >= 1.0 - tol) {
    std::optional<std::size_t> best;
    std::pair<double, double> best_score = current;
    double best_component_radius = 0.0;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      const auto& cand = candidates[k];
      const double old = w(cand.i, cand.j);
      if (old == 0.0) continue;
      w(cand.i, cand.j) = halved(old);
      const std::size_t c = component_of[cand.i];
      auto trial = radii;
      trial[c] = component_radius(w, c);
      w(cand.i, cand.j) = old;
      const auto s = score(trial);
      const bool lowers_top = s.first < best_score.first;
      const bool lowers_sum = s.first == best_score.first && s.second < best_score.second;
      if (lowers_top || lowers_sum) {
        best = k;
        best_score = s;
        best_component_radius = trial[c];
      }
    }
    if (!best) break;
    const auto& cand = candidates[*best];
    const double old = w(cand.i, cand.j);
    w(cand.i, cand.j) = halved(old);
    radii[component_of[cand.i]] = best_component_radius;
    plan.modifications.push_back({cand.source, cand.target, old, w(cand.i, cand.j)});
    current = best_score;
  }

  const auto final_report = stability_report(apply_plan(map, plan), tol);
  plan.resulting_radius = final_report.spectral_radius;
  plan.success = final_report.classification == Stability::stable;
  return plan;
}

}  // namespace fcm
