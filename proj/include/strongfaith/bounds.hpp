#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "strongfaith/dag.hpp"
#include "strongfaith/errors.hpp"
#include "strongfaith/symbolic.hpp"

namespace strongfaith {

enum class GraphFamily { Tree, Cycle, Bipartite };

inline const char* to_string(GraphFamily f) {
  switch (f) {
    case GraphFamily::Tree: return "tree";
    case GraphFamily::Cycle: return "cycle";
    case GraphFamily::Bipartite: return "bipartite";
  }
  return "?";
}

inline GraphFamily graph_family_from_string(const std::string& s) {
  if (s == "tree") return GraphFamily::Tree;
  if (s == "cycle") return GraphFamily::Cycle;
  if (s == "bipartite") return GraphFamily::Bipartite;
  throw InvalidArgument("unknown family '" + s + "' (tree|cycle|bipartite)");
}

// Exponent E of the closed-form lower bound 1 - (1 - lambda/r)^E on the
// unfaithful volume fraction. Trees and the bipartite family use one exponent
// for all three classes; cycles distinguish them.
inline std::uint64_t bound_exponent(GraphFamily f, int p, TripleClass cls) {
  switch (f) {
    case GraphFamily::Tree:
      if (p < 2) throw InvalidArgument("tree bound needs p >= 2");
      return static_cast<std::uint64_t>(p) - 1;
    case GraphFamily::Cycle:
      if (p < 3) throw InvalidArgument("cycle bound needs p >= 3");
      switch (cls) {
        case TripleClass::Full:
          return static_cast<std::uint64_t>(p) + detail::binom(p - 1, 2);
        case TripleClass::Restricted: return 3ULL * p - 2;
        case TripleClass::Adjacent: return 2ULL * p - 1;
      }
      throw InvalidArgument("unknown triple class");
    case GraphFamily::Bipartite: {
      if (p < 3) throw InvalidArgument("bipartite bound needs p >= 3");
      if (p > 61) throw InvalidArgument("bipartite exponent overflows for p > 61");
      return static_cast<std::uint64_t>(p - 2) * ((1ULL << (p - 3)) + 1);
    }
  }
  throw InvalidArgument("unknown family");
}

// 1 - (1 - lambda/r)^E: a lower bound on the fraction of weight vectors on
// the cube [-r,r]^E that are lambda-strong-unfaithful for the class.
inline double lower_bound(GraphFamily f, int p, double lambda, TripleClass cls,
                          double r = 1.0) {
  if (!(r > 0.0)) throw InvalidArgument("cube radius must be positive");
  double x = lambda / r;
  if (!(x > 0.0 && x < 1.0))
    throw InvalidArgument("lambda/r must lie in (0,1), got " + std::to_string(x));
  std::uint64_t e = bound_exponent(f, p, cls);
  return 1.0 - std::pow(1.0 - x, static_cast<double>(e));
}

struct BoundRow {
  GraphFamily family = GraphFamily::Tree;
  int p = 0;
  double lambda = 0.0;
  TripleClass cls = TripleClass::Full;
  double bound = 0.0;
  std::uint64_t exponent = 0;
  double r = 1.0;
};

inline std::vector<BoundRow> bound_table(const std::vector<GraphFamily>& families,
                                         const std::vector<int>& ps,
                                         const std::vector<double>& lambdas,
                                         const std::vector<TripleClass>& classes,
                                         double r = 1.0) {
  std::vector<BoundRow> rows;
  for (GraphFamily f : families)
    for (int p : ps)
      for (TripleClass cls : classes)
        for (double l : lambdas) {
          BoundRow row;
          row.family = f;
          row.p = p;
          row.lambda = l;
          row.cls = cls;
          row.exponent = bound_exponent(f, p, cls);
          row.bound = lower_bound(f, p, l, cls, r);
          row.r = r;
          rows.push_back(row);
        }
  return rows;
}

// Degree-sum factor of the hypersurface-volume upper bound. The remaining
// constants have no known bounds, so no numeric upper bound is ever printed;
// callers get the factor and a formula string instead.
inline std::uint64_t upper_bound_degree_term(const Dag& g, TripleClass cls,
                                             std::uint64_t budget = kDefaultTripleBudget,
                                             int max_qc = kDefaultQcBound) {
  return degree_sum(g, cls, budget, max_qc);
}

inline std::string upper_bound_formula(const Dag& g, TripleClass cls,
                                       std::uint64_t budget = kDefaultTripleBudget,
                                       int max_qc = kDefaultQcBound) {
  std::uint64_t d = upper_bound_degree_term(g, cls, budget, max_qc);
  std::string e = std::to_string(g.edge_count());
  return "volume fraction <= C(" + e + ") * c * kappa^k * lambda^k * " +
         std::to_string(d) + " / 2^(" + e +
         "/2)  [degree sum = " + std::to_string(d) +
         "; constants C, c, k, kappa have no computable bounds]";
}

}  // namespace strongfaith
