#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "strongfaith/errors.hpp"
#include "strongfaith/rng.hpp"

namespace strongfaith {

// Vertices are labeled 1..p and every edge points from the smaller label to
// the larger one, so the identity order is always topological. Vertex sets are
// bitmasks (bit v-1 stands for vertex v), which caps p at 64.

using VertexSet = std::uint64_t;

inline constexpr int kMaxVertices = 64;

inline VertexSet vertex_bit(int v) { return VertexSet{1} << (v - 1); }
inline bool set_contains(VertexSet s, int v) { return (s >> (v - 1)) & 1u; }
inline int set_size(VertexSet s) { return std::popcount(s); }

inline VertexSet make_set(const std::vector<int>& vs) {
  VertexSet s = 0;
  for (int v : vs) s |= vertex_bit(v);
  return s;
}

inline std::vector<int> set_to_vector(VertexSet s) {
  std::vector<int> out;
  while (s) {
    int b = std::countr_zero(s);
    out.push_back(b + 1);
    s &= s - 1;
  }
  return out;
}

struct Edge {
  int i;
  int j;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class Dag {
 public:
  Dag(int p, std::vector<Edge> edges) : p_(p), edges_(std::move(edges)) {
    if (p < 1 || p > kMaxVertices)
      throw InvalidArgument("vertex count must be in 1..64, got " + std::to_string(p));
    std::sort(edges_.begin(), edges_.end());
    parents_.assign(p + 1, {});
    children_.assign(p + 1, {});
    adj_.assign(p + 1, 0);
    parent_set_.assign(p + 1, 0);
    const Edge* prev = nullptr;
    for (const Edge& e : edges_) {
      if (e.i < 1 || e.j > p || e.i >= e.j)
        throw InvalidArgument("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                              ") violates 1 <= i < j <= p");
      if (prev && *prev == e)
        throw InvalidArgument("duplicate edge (" + std::to_string(e.i) + "," +
                              std::to_string(e.j) + ")");
      prev = &e;
      parents_[e.j].push_back(e.i);
      children_[e.i].push_back(e.j);
      adj_[e.i] |= vertex_bit(e.j);
      adj_[e.j] |= vertex_bit(e.i);
      parent_set_[e.j] |= vertex_bit(e.i);
    }
    // Ancestor masks, excluding the vertex itself. Increasing label order is
    // topological, so one pass suffices.
    anc_.assign(p + 1, 0);
    for (int v = 1; v <= p; ++v)
      for (int u : parents_[v]) anc_[v] |= anc_[u] | vertex_bit(u);
  }

  int p() const { return p_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  bool has_edge(int i, int j) const {
    return i < j && set_contains(adj_[i], j);
  }

  // Index of edge (i,j) in the sorted edge list; this is also the polynomial
  // variable index for the edge weight a_ij. -1 when absent.
  int edge_index(int i, int j) const {
    auto it = std::lower_bound(edges_.begin(), edges_.end(), Edge{i, j});
    if (it == edges_.end() || !(*it == Edge{i, j})) return -1;
    return static_cast<int>(it - edges_.begin());
  }

  const std::vector<int>& parents(int v) const { return parents_[v]; }
  const std::vector<int>& children(int v) const { return children_[v]; }
  VertexSet parent_set(int v) const { return parent_set_[v]; }
  VertexSet adjacent_set(int v) const { return adj_[v]; }
  VertexSet ancestors(int v) const { return anc_[v]; }
  VertexSet all_vertices() const {
    return p_ == kMaxVertices ? ~VertexSet{0} : (vertex_bit(p_ + 1) - 1);
  }

  int degree(int v) const { return set_size(adj_[v]); }

 private:
  int p_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> parents_, children_;
  std::vector<VertexSet> adj_, parent_set_, anc_;
};

// Maximal total degree (in + out) over all vertices.
inline int max_degree(const Dag& g) {
  int d = 0;
  for (int v = 1; v <= g.p(); ++v) d = std::max(d, g.degree(v));
  return d;
}

namespace detail {

inline void check_dsep_args(const Dag& g, int i, int j, VertexSet s) {
  if (i < 1 || i > g.p() || j < 1 || j > g.p() || i == j)
    throw InvalidArgument("d-separation query needs distinct vertices in 1..p");
  if (set_contains(s, i) || set_contains(s, j))
    throw InvalidArgument("conditioning set must not contain i or j");
  if (s & ~g.all_vertices())
    throw InvalidArgument("conditioning set contains vertices beyond p");
}

}  // namespace detail

// Bayes-ball reachability. The ball starts at i as if it came from a child;
// at a vertex reached from a child it passes to parents and children unless
// the vertex is in s; at a vertex reached from a parent it passes to children
// when outside s and bounces back to the parents when inside s (an observed
// collider opens the path).
inline bool d_separated(const Dag& g, int i, int j, VertexSet s) {
  detail::check_dsep_args(g, i, j, s);
  VertexSet seen_up = 0, seen_down = 0;
  // (vertex, from-child?) work stack; 2p slots suffice since each state is
  // pushed at most once.
  std::vector<std::pair<int, bool>> stack;
  stack.reserve(2 * g.p());
  stack.emplace_back(i, true);
  seen_up |= vertex_bit(i);
  while (!stack.empty()) {
    auto [v, from_child] = stack.back();
    stack.pop_back();
    if (v == j) return false;
    if (from_child) {
      if (set_contains(s, v)) continue;
      for (int u : g.parents(v))
        if (!set_contains(seen_up, u)) {
          seen_up |= vertex_bit(u);
          stack.emplace_back(u, true);
        }
      for (int u : g.children(v))
        if (!set_contains(seen_down, u)) {
          seen_down |= vertex_bit(u);
          stack.emplace_back(u, false);
        }
    } else if (set_contains(s, v)) {
      for (int u : g.parents(v))
        if (!set_contains(seen_up, u)) {
          seen_up |= vertex_bit(u);
          stack.emplace_back(u, true);
        }
    } else {
      for (int u : g.children(v))
        if (!set_contains(seen_down, u)) {
          seen_down |= vertex_bit(u);
          stack.emplace_back(u, false);
        }
    }
  }
  return true;
}

// Independent implementation used to cross-check d_separated: restrict to the
// ancestral closure of {i,j} u s, moralize, drop s, test undirected
// connectivity.
inline bool d_separated_moral(const Dag& g, int i, int j, VertexSet s) {
  detail::check_dsep_args(g, i, j, s);
  VertexSet an = vertex_bit(i) | vertex_bit(j) | g.ancestors(i) | g.ancestors(j) | s;
  for (int v : set_to_vector(s)) an |= g.ancestors(v);

  std::vector<VertexSet> und(g.p() + 1, 0);
  for (const Edge& e : g.edges()) {
    if (!set_contains(an, e.i) || !set_contains(an, e.j)) continue;
    und[e.i] |= vertex_bit(e.j);
    und[e.j] |= vertex_bit(e.i);
  }
  for (int v : set_to_vector(an)) {
    const auto& par = g.parents(v);
    for (size_t a = 0; a < par.size(); ++a)
      for (size_t b = a + 1; b < par.size(); ++b) {
        und[par[a]] |= vertex_bit(par[b]);
        und[par[b]] |= vertex_bit(par[a]);
      }
  }
  VertexSet frontier = vertex_bit(i), visited = vertex_bit(i);
  VertexSet blocked = s;
  while (frontier) {
    int v = std::countr_zero(frontier) + 1;
    frontier &= frontier - 1;
    if (v == j) return false;
    VertexSet nxt = und[v] & an & ~blocked & ~visited;
    visited |= nxt;
    frontier |= nxt;
  }
  return true;
}

// ---- generators ----------------------------------------------------------

namespace detail {

// Shared by make_tree and make_tree_with_levels: distribute the p-1 non-root
// nodes over levels 2..levels (at least one per level, uniform over
// compositions via a uniform choice of cut positions), then give each node a
// uniform parent on the previous level. Ids are assigned level by level in
// ascending order, so edges automatically satisfy i < j.
inline Dag build_tree(int p, int levels, CounterRng& rng) {
  std::vector<int> part_sizes;
  int slots = p - 2;        // gaps between the p-1 non-root nodes
  int cuts = levels - 2;    // chosen gaps split them into levels-1 parts
  int run = 1;
  for (int pos = 0; pos < slots; ++pos) {
    if (rng.below(static_cast<std::uint64_t>(slots - pos)) <
        static_cast<std::uint64_t>(cuts)) {
      part_sizes.push_back(run);
      run = 1;
      --cuts;
    } else {
      ++run;
    }
  }
  part_sizes.push_back(run);

  std::vector<Edge> edges;
  edges.reserve(p - 1);
  std::vector<int> prev_level{1};
  int next_id = 2;
  for (int size : part_sizes) {
    std::vector<int> level;
    level.reserve(size);
    for (int n = 0; n < size; ++n) {
      int parent = prev_level[rng.below(prev_level.size())];
      edges.push_back({parent, next_id});
      level.push_back(next_id);
      ++next_id;
    }
    prev_level = std::move(level);
  }
  return Dag(p, std::move(edges));
}

}  // namespace detail

// Random connected tree, edges directed away from the root (vertex 1). The
// level count is drawn uniformly from {2..p}; two levels give a star, p levels
// give a directed path.
inline Dag make_tree(int p, std::uint64_t seed) {
  if (p < 2) throw InvalidArgument("tree needs p >= 2, got " + std::to_string(p));
  CounterRng rng(seed, kStructureStream);
  int levels = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(p - 1)));
  return detail::build_tree(p, levels, rng);
}

inline Dag make_tree_with_levels(int p, int levels, std::uint64_t seed) {
  if (p < 2) throw InvalidArgument("tree needs p >= 2, got " + std::to_string(p));
  if (levels < 2 || levels > p)
    throw InvalidArgument("level count must be in 2..p, got " + std::to_string(levels));
  CounterRng rng(seed, kStructureStream);
  return detail::build_tree(p, levels, rng);
}

// Directed cycle on the skeleton: 1 -> 2 -> ... -> p plus 1 -> p, so vertex p
// is the unique collider.
inline Dag make_cycle(int p) {
  if (p < 3) throw InvalidArgument("cycle needs p >= 3, got " + std::to_string(p));
  std::vector<Edge> edges;
  edges.reserve(p);
  for (int v = 1; v < p; ++v) edges.push_back({v, v + 1});
  edges.push_back({1, p});
  return Dag(p, std::move(edges));
}

// Complete bipartite skeleton between {1} u {p} and the middle vertices:
// 1 -> j -> p for j = 2..p-1, hence 2(p-2) edges and p-2 colliders at p.
inline Dag make_bipartite(int p) {
  if (p < 4) throw InvalidArgument("bipartite family needs p >= 4, got " + std::to_string(p));
  std::vector<Edge> edges;
  edges.reserve(2 * (p - 2));
  for (int j = 2; j < p; ++j) {
    edges.push_back({1, j});
    edges.push_back({j, p});
  }
  return Dag(p, std::move(edges));
}

namespace detail {

// Pair-lexicographic Bernoulli draws; also used by the ensemble sampler so a
// DAG drawn inside a Monte Carlo stream matches make_random's convention.
inline Dag draw_random_dag(int p, double edge_prob, CounterRng& rng) {
  std::vector<Edge> edges;
  for (int i = 1; i < p; ++i)
    for (int j = i + 1; j <= p; ++j)
      if (rng.next_unit() < edge_prob) edges.push_back({i, j});
  return Dag(p, std::move(edges));
}

}  // namespace detail

// Erdos-Renyi style DAG over the identity topological order: each pair i < j
// gets an edge independently with probability en/(p-1), so en is the expected
// neighborhood size.
inline Dag make_random(int p, double en, std::uint64_t seed) {
  if (p < 2) throw InvalidArgument("random DAG needs p >= 2, got " + std::to_string(p));
  if (!(en >= 0.0) || en > static_cast<double>(p - 1))
    throw InvalidArgument("expected neighborhood size must be in [0, p-1]");
  CounterRng rng(seed, kStructureStream);
  return detail::draw_random_dag(p, en / (p - 1), rng);
}

// ---- triple enumeration --------------------------------------------------

// Conditional-independence test spaces. Full is every pair with every
// conditioning set; Restricted keeps |S| <= deg(G) and pairs that are either
// adjacent or non-adjacent with a common neighbor (an unshielded triple);
// Adjacent keeps only adjacent pairs with |S| <= deg(G).
enum class TripleClass { Full, Restricted, Adjacent };

inline const char* to_string(TripleClass c) {
  switch (c) {
    case TripleClass::Full: return "full";
    case TripleClass::Restricted: return "restricted";
    case TripleClass::Adjacent: return "adjacent";
  }
  return "?";
}

inline TripleClass triple_class_from_string(const std::string& s) {
  if (s == "full" || s == "M") return TripleClass::Full;
  if (s == "restricted" || s == "N1") return TripleClass::Restricted;
  if (s == "adjacent" || s == "N2") return TripleClass::Adjacent;
  throw InvalidArgument("unknown triple class '" + s +
                        "' (full|restricted|adjacent, aliases M|N1|N2)");
}

struct Triple {
  int i;
  int j;
  VertexSet s;
  bool dsep;  // always false for enumerated triples; kept for audit reports
  bool in_full;
  bool in_restricted;
  bool in_adjacent;
};

inline constexpr std::uint64_t kDefaultTripleBudget = 1'000'000;
inline constexpr int kMaxFullEnumeration = 25;

namespace detail {

inline std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = a + b;
  return r < a ? ~std::uint64_t{0} : r;
}

inline std::uint64_t binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (int t = 1; t <= k; ++t) r = r * static_cast<unsigned>(n - k + t) / static_cast<unsigned>(t);
  return r > ~std::uint64_t{0} ? ~std::uint64_t{0} : static_cast<std::uint64_t>(r);
}

// Number of (i,j,S) candidates the enumeration would have to examine. This is
// the honest work measure: in Full mode d-separated candidates are tested and
// discarded, but they are still tested.
inline std::uint64_t count_candidates(const Dag& g, TripleClass cls) {
  int p = g.p();
  if (cls == TripleClass::Full) {
    if (p > kMaxFullEnumeration)
      throw BudgetError("full triple space needs p <= 25, got p = " + std::to_string(p));
    std::uint64_t pairs = static_cast<std::uint64_t>(p) * (p - 1) / 2;
    return pairs << (p - 2);
  }
  int d = std::min(max_degree(g), p - 2);
  std::uint64_t per_pair = 0;
  for (int k = 0; k <= d; ++k) per_pair = sat_add(per_pair, binom(p - 2, k));
  std::uint64_t pairs = 0;
  for (int i = 1; i < p; ++i)
    for (int j = i + 1; j <= p; ++j) {
      if (g.has_edge(i, j))
        ++pairs;
      else if (cls == TripleClass::Restricted && (g.adjacent_set(i) & g.adjacent_set(j)))
        ++pairs;
    }
  unsigned __int128 total = static_cast<unsigned __int128>(pairs) * per_pair;
  return total > ~std::uint64_t{0} ? ~std::uint64_t{0} : static_cast<std::uint64_t>(total);
}

// Visit subsets of `univ` of size 0..max_size, sizes ascending, each size in
// lexicographic order. F: (VertexSet) -> bool, false stops the walk.
template <class F>
bool for_each_subset(const std::vector<int>& univ, int max_size, F&& fn) {
  int n = static_cast<int>(univ.size());
  max_size = std::min(max_size, n);
  for (int k = 0; k <= max_size; ++k) {
    std::vector<int> idx(k);
    for (int t = 0; t < k; ++t) idx[t] = t;
    while (true) {
      VertexSet s = 0;
      for (int t : idx) s |= vertex_bit(univ[t]);
      if (!fn(s)) return false;
      // next combination
      int t = k - 1;
      while (t >= 0 && idx[t] == n - k + t) --t;
      if (t < 0) break;
      ++idx[t];
      for (int u = t + 1; u < k; ++u) idx[u] = idx[u - 1] + 1;
    }
    if (k == 0 && n == 0) break;
  }
  return true;
}

}  // namespace detail

// Walk the test space of `cls` in canonical order: pairs (i,j) lexicographic,
// conditioning sets by size then lexicographic. Only members are visited
// (d-separated candidates are filtered out). F: (const Triple&) -> bool,
// return false to stop early. Throws BudgetError before visiting anything if
// the candidate count exceeds `budget`.
template <class F>
void for_each_triple(const Dag& g, TripleClass cls, std::uint64_t budget, F&& fn) {
  std::uint64_t candidates = detail::count_candidates(g, cls);
  if (candidates > budget)
    throw BudgetError("triple enumeration needs " + std::to_string(candidates) +
                      " candidates, budget is " + std::to_string(budget));
  int p = g.p();
  int d = std::min(max_degree(g), p - 2);
  for (int i = 1; i < p; ++i) {
    for (int j = i + 1; j <= p; ++j) {
      bool edge = g.has_edge(i, j);
      bool unshielded = !edge && (g.adjacent_set(i) & g.adjacent_set(j)) != 0;
      if (cls == TripleClass::Adjacent && !edge) continue;
      if (cls == TripleClass::Restricted && !edge && !unshielded) continue;
      std::vector<int> univ;
      univ.reserve(p - 2);
      for (int v = 1; v <= p; ++v)
        if (v != i && v != j) univ.push_back(v);
      int max_size = cls == TripleClass::Full ? p - 2 : d;
      bool keep_going = detail::for_each_subset(univ, max_size, [&](VertexSet s) {
        bool dsep = edge ? false : d_separated(g, i, j, s);
        if (dsep) return true;  // not a member of any class
        Triple t;
        t.i = i;
        t.j = j;
        t.s = s;
        t.dsep = false;
        t.in_full = true;
        int ssize = set_size(s);
        t.in_adjacent = edge && ssize <= d;
        t.in_restricted = ssize <= d && (edge || unshielded);
        switch (cls) {
          case TripleClass::Full: break;
          case TripleClass::Restricted:
            if (!t.in_restricted) return true;
            break;
          case TripleClass::Adjacent:
            if (!t.in_adjacent) return true;
            break;
        }
        return fn(t);
      });
      if (!keep_going) return;
    }
  }
}

inline std::vector<Triple> enumerate_triples(const Dag& g, TripleClass cls,
                                             std::uint64_t budget = kDefaultTripleBudget) {
  std::vector<Triple> out;
  for_each_triple(g, cls, budget, [&](const Triple& t) {
    out.push_back(t);
    return true;
  });
  return out;
}

}  // namespace strongfaith
