#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "strongfaith/dag.hpp"
#include "strongfaith/errors.hpp"
#include "strongfaith/gaussian.hpp"
#include "strongfaith/rng.hpp"
#include "strongfaith/symbolic.hpp"

namespace strongfaith {

struct VerifyCheck {
  std::string name;
  std::uint64_t assertions = 0;
  bool ok = true;
  std::string detail;  // first failing identity: DAG and triple
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool ok = true;
};

namespace detail {

struct LabeledDag {
  std::string label;
  Dag dag;
};

inline std::string edges_string(const Dag& g) {
  std::string s = "[";
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    if (e) s += ",";
    s += "(" + std::to_string(g.edges()[e].i) + "," + std::to_string(g.edges()[e].j) + ")";
  }
  return s + "]";
}

inline std::string set_string(VertexSet s) {
  std::string out = "{";
  bool first = true;
  for (int v : set_to_vector(s)) {
    if (!first) out += ",";
    out += std::to_string(v);
    first = false;
  }
  return out + "}";
}

inline std::string triple_string(int i, int j, VertexSet s) {
  return "(i=" + std::to_string(i) + ", j=" + std::to_string(j) +
         ", S=" + set_string(s) + ")";
}

inline std::vector<LabeledDag> verification_zoo(int p_max) {
  std::vector<LabeledDag> out;
  out.push_back({"empty(p=3)", Dag(3, {})});
  for (int p = 2; p <= p_max; ++p) {
    std::string ps = std::to_string(p);
    for (std::uint64_t seed : {1ULL, 9ULL})
      out.push_back({"tree(p=" + ps + ",seed=" + std::to_string(seed) + ")",
                     make_tree(p, seed)});
    out.push_back({"line(p=" + ps + ")", make_tree_with_levels(p, p, 0)});
    out.push_back({"star(p=" + ps + ")", make_tree_with_levels(p, 2, 0)});
    if (p >= 3) out.push_back({"cycle(p=" + ps + ")", make_cycle(p)});
    if (p >= 4) out.push_back({"bipartite(p=" + ps + ")", make_bipartite(p)});
    double en = std::min(2.0, p - 1.0);
    for (std::uint64_t seed : {11ULL, 12ULL})
      out.push_back({"random(p=" + ps + ",en=" + std::to_string(en).substr(0, 3) +
                         ",seed=" + std::to_string(seed) + ")",
                     make_random(p, en, seed)});
  }
  return out;
}

template <class F>
void every_pair_subset(const Dag& g, F&& fn) {
  int p = g.p();
  for (int i = 1; i < p; ++i)
    for (int j = i + 1; j <= p; ++j) {
      VertexSet univ = g.all_vertices() & ~vertex_bit(i) & ~vertex_bit(j);
      std::vector<int> rest = set_to_vector(univ);
      for (VertexSet mask = 0; mask < (VertexSet{1} << rest.size()); ++mask) {
        VertexSet s = 0;
        for (std::size_t t = 0; t < rest.size(); ++t)
          if (mask & (VertexSet{1} << t)) s |= vertex_bit(rest[t]);
        fn(i, j, s);
      }
    }
}

inline PolyMatrix restrict_matrix(const PolyMatrix& m, const std::vector<int>& verts) {
  int n = static_cast<int>(verts.size());
  PolyMatrix out(n, n, m.nvars());
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out.at(r, c) = m.at(verts[r] - 1, verts[c] - 1);
  return out;
}

inline SparsePoly matrix_cofactor(const PolyMatrix& m, int r, int c) {
  int n = m.rows();
  PolyMatrix sub(n - 1, n - 1, m.nvars());
  for (int a = 0, ra = 0; a < n; ++a) {
    if (a == r) continue;
    for (int b = 0, cb = 0; b < n; ++b) {
      if (b == c) continue;
      sub.at(ra, cb) = m.at(a, b);
      ++cb;
    }
    ++ra;
  }
  SparsePoly d = symbolic_det(sub);
  return (r + c) % 2 == 0 ? d : -d;
}

inline std::vector<double> random_weights(const Dag& g, CounterRng& rng) {
  std::vector<double> a(g.edge_count());
  for (double& x : a) x = 2.0 * rng.next_unit() - 1.0;
  return a;
}

}  // namespace detail

// Cross-checks every structural identity the engine relies on over a fixed
// family zoo, stopping at the first failure. corrupt_k injects a wrong
// concentration-matrix entry so callers can watch the first check catch it.
inline VerifyReport run_verification(int p_max = 5, bool corrupt_k = false) {
  if (p_max < 2 || p_max > 8)
    throw InvalidArgument("verification wants p_max in 2..8, got " + std::to_string(p_max));
  VerifyReport report;
  std::vector<detail::LabeledDag> zoo = detail::verification_zoo(p_max);

  auto finish = [&](VerifyCheck check) {
    report.checks.push_back(std::move(check));
    if (!report.checks.back().ok) report.ok = false;
    return report.ok;
  };

  {
    VerifyCheck check{"sigma_times_k_is_identity"};
    for (const auto& [label, g] : zoo) {
      int n = g.edge_count();
      PolyMatrix sigma = symbolic_sigma(g);
      PolyMatrix k = symbolic_k(g);
      if (corrupt_k) k.at(0, 0) += SparsePoly::constant(n, 1);
      PolyMatrix product = sigma * k;
      PolyMatrix identity = PolyMatrix::identity(g.p(), n);
      for (int r = 0; r < g.p() && check.ok; ++r)
        for (int c = 0; c < g.p() && check.ok; ++c) {
          ++check.assertions;
          if (!(product.at(r, c) == identity.at(r, c))) {
            check.ok = false;
            check.detail = "sigma*k differs from identity at entry (" +
                           std::to_string(r + 1) + "," + std::to_string(c + 1) +
                           ") on " + label + " edges " + detail::edges_string(g);
          }
        }
      if (!check.ok) break;
    }
    if (!finish(std::move(check))) return report;
  }

  {
    VerifyCheck check{"dsep_rules_agree"};
    for (const auto& [label, g] : zoo) {
      detail::every_pair_subset(g, [&](int i, int j, VertexSet s) {
        if (!check.ok) return;
        ++check.assertions;
        if (d_separated(g, i, j, s) != d_separated_moral(g, i, j, s)) {
          check.ok = false;
          check.detail = "ball-pass and moralized closure disagree on " + label +
                         " at " + detail::triple_string(i, j, s);
        }
      });
      if (!check.ok) break;
    }
    if (!finish(std::move(check))) return report;
  }

  {
    VerifyCheck check{"dsep_iff_zero_numerator"};
    for (const auto& [label, g] : zoo) {
      if (g.p() > 6) continue;
      detail::every_pair_subset(g, [&](int i, int j, VertexSet s) {
        if (!check.ok) return;
        ++check.assertions;
        bool zero = partial_cov_poly(g, i, j, s).is_zero();
        if (zero != d_separated(g, i, j, s)) {
          check.ok = false;
          check.detail = std::string("numerator ") + (zero ? "vanishes" : "persists") +
                         " against d-separation on " + label + " at " +
                         detail::triple_string(i, j, s);
        }
      });
      if (!check.ok) break;
    }
    if (!finish(std::move(check))) return report;
  }

  {
    VerifyCheck check{"cycle_expansion_matches_determinant"};
    for (const auto& [label, g] : zoo) {
      if (g.p() > 6) continue;
      PolyMatrix k = symbolic_k(g);
      for (VertexSet u = 1; u <= g.all_vertices() && check.ok; ++u) {
        if ((u & ~g.all_vertices()) || set_size(u) > 4) continue;
        std::vector<int> verts = set_to_vector(u);
        PolyMatrix kuu = detail::restrict_matrix(k, verts);
        ++check.assertions;
        if (!(ponstein_det(g, u) == symbolic_det(kuu))) {
          check.ok = false;
          check.detail = "cycle-expansion determinant mismatch on " + label +
                         " for subset " + detail::set_string(u);
          break;
        }
        int n = static_cast<int>(verts.size());
        for (int r = 0; r < n && check.ok; ++r)
          for (int c = 0; c < n && check.ok; ++c) {
            ++check.assertions;
            if (!(ponstein_cofactor(g, u, verts[r], verts[c]) ==
                  detail::matrix_cofactor(kuu, r, c))) {
              check.ok = false;
              check.detail = "cycle-expansion cofactor mismatch on " + label +
                             " subset of size " + std::to_string(n) + " entry (" +
                             std::to_string(verts[r]) + "," + std::to_string(verts[c]) +
                             ")";
            }
          }
      }
      if (!check.ok) break;
    }
    if (!finish(std::move(check))) return report;
  }

  {
    VerifyCheck check{"parcorr_matches_polynomials"};
    CounterRng rng(2024, 1);
    ParcorrScratch ws;
    for (const auto& [label, g] : zoo) {
      if (g.p() > 6) continue;
      for (const Triple& t : enumerate_triples(g, TripleClass::Full)) {
        ParcorrPolys pp = parcorr_polys(g, t.i, t.j, t.s);
        for (int pt = 0; pt < 3 && check.ok; ++pt) {
          std::vector<double> a = detail::random_weights(g, rng);
          GaussianModel m = build_model(make_weights(g, a));
          double lhs = std::fabs(partial_correlation(m, t.i, t.j, t.s, ws));
          double rhs = std::fabs(pp.pij.evaluate(a)) /
                       std::sqrt(pp.pii.evaluate(a) * pp.pjj.evaluate(a));
          ++check.assertions;
          if (!(std::fabs(lhs - rhs) <= 1e-9)) {
            check.ok = false;
            check.detail = "numeric parcorr and polynomial ratio differ by " +
                           std::to_string(std::fabs(lhs - rhs)) + " on " + label +
                           " at " + detail::triple_string(t.i, t.j, t.s);
          }
        }
        if (!check.ok) break;
      }
      if (!check.ok) break;
    }
    if (!finish(std::move(check))) return report;
  }

  {
    VerifyCheck check{"parcorr_routes_agree"};
    CounterRng rng(2024, 2);
    ParcorrScratch ws1, ws2;
    for (const auto& [label, g] : zoo) {
      for (int draw = 0; draw < 3 && check.ok; ++draw) {
        std::vector<double> a = detail::random_weights(g, rng);
        GaussianModel m = build_model(make_weights(g, a));
        detail::every_pair_subset(g, [&](int i, int j, VertexSet s) {
          if (!check.ok) return;
          double v1 = parcorr_via_sigma(m, i, j, s, ws1);
          double v2 = parcorr_via_schur(m, i, j, s, ws2);
          ++check.assertions;
          if (!(std::fabs(v1 - v2) <= 1e-10)) {
            check.ok = false;
            check.detail = "covariance and concentration routes differ by " +
                           std::to_string(std::fabs(v1 - v2)) + " on " + label +
                           " at " + detail::triple_string(i, j, s);
          }
        });
      }
      if (!check.ok) break;
    }
    if (!finish(std::move(check))) return report;
  }

  {
    VerifyCheck check{"unit_determinant"};
    CounterRng rng(2024, 3);
    for (const auto& [label, g] : zoo) {
      for (int draw = 0; draw < 5 && check.ok; ++draw) {
        std::vector<double> a = detail::random_weights(g, rng);
        GaussianModel m = build_model(make_weights(g, a));
        double det = m.k.determinant();
        ++check.assertions;
        if (!(std::fabs(det - 1.0) <= 1e-8)) {
          check.ok = false;
          check.detail = "det(K) = " + std::to_string(det) + " on " + label;
        }
      }
      if (!check.ok) break;
    }
    finish(std::move(check));
  }

  return report;
}

}  // namespace strongfaith
