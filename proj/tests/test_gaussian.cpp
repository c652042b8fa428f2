#include <catch2/catch_amalgamated.hpp>

#include "strongfaith/gaussian.hpp"
#include "strongfaith/polynomial.hpp"
#include "strongfaith/rng.hpp"
#include "strongfaith/symbolic.hpp"

using namespace strongfaith;

namespace {

std::vector<double> random_point(const Dag& g, CounterRng& rng) {
  std::vector<double> a(g.edge_count());
  for (double& v : a) v = 2.0 * rng.next_unit() - 1.0;
  return a;
}

// Reference implementation: invert the Sigma submatrix on Q = S u {i,j} with
// Eigen and read the normalized off-diagonal entry.
double oracle_parcorr(const GaussianModel& m, int i, int j, VertexSet s) {
  std::vector<int> q = set_to_vector(s | vertex_bit(i) | vertex_bit(j));
  int n = static_cast<int>(q.size());
  Eigen::MatrixXd sq(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) sq(r, c) = m.sigma(q[r] - 1, q[c] - 1);
  Eigen::MatrixXd theta = sq.fullPivLu().inverse();
  int pi = 0, pj = 0;
  for (int t = 0; t < n; ++t) {
    if (q[t] == i) pi = t;
    if (q[t] == j) pj = t;
  }
  return -theta(pi, pj) / std::sqrt(theta(pi, pi) * theta(pj, pj));
}

}  // namespace

TEST_CASE("model construction on the 3-chain") {
  Dag chain(3, {{1, 2}, {2, 3}});
  GaussianModel m = build_model(make_weights(chain, {0.5, 0.5}));
  REQUIRE(m.sigma(0, 2) == Catch::Approx(0.25));
  REQUIRE(m.sigma(2, 2) == Catch::Approx(1.3125));
  REQUIRE(m.sigma(0, 0) == Catch::Approx(1.0));
  REQUIRE((m.k * m.sigma - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);
  REQUIRE(m.k.determinant() == Catch::Approx(1.0));
  REQUIRE(m.sigma.determinant() == Catch::Approx(1.0));
}

TEST_CASE("weight validation") {
  Dag chain(3, {{1, 2}, {2, 3}});
  REQUIRE_THROWS_AS(make_weights(chain, {0.5}), InvalidArgument);
  REQUIRE_THROWS_AS(make_weights(chain, {0.5, std::nan("")}), InvalidArgument);
}

TEST_CASE("worked partial correlation") {
  Dag g(3, {{1, 2}, {1, 3}, {2, 3}});
  GaussianModel m = build_model(make_weights(g, {0.5, 0.5, 0.5}));
  double r = partial_correlation(m, 2, 3, make_set({1}));
  REQUIRE(r == Catch::Approx(0.5 / std::sqrt(1.25)).epsilon(1e-12));
  REQUIRE_THROWS_AS(partial_correlation(m, 2, 2, 0), InvalidArgument);
  REQUIRE_THROWS_AS(partial_correlation(m, 1, 2, make_set({2})), InvalidArgument);
}

TEST_CASE("routes agree with each other and the dense oracle") {
  CounterRng rng(2024, 0);
  ParcorrScratch ws;
  for (int trial = 0; trial < 40; ++trial) {
    int p = 4 + static_cast<int>(rng.below(5));  // 4..8
    Dag g = make_random(p, 2.0, 1000 + trial);
    GaussianModel m = build_model(make_weights(g, random_point(g, rng)));
    for (int i = 1; i < p; ++i)
      for (int j = i + 1; j <= p; ++j) {
        std::vector<int> univ;
        for (int v = 1; v <= p; ++v)
          if (v != i && v != j) univ.push_back(v);
        for (int mask = 0; mask < (1 << univ.size()); ++mask) {
          VertexSet s = 0;
          for (std::size_t t = 0; t < univ.size(); ++t)
            if (mask & (1 << t)) s |= vertex_bit(univ[t]);
          double a = parcorr_via_sigma(m, i, j, s, ws);
          double b = parcorr_via_schur(m, i, j, s, ws);
          double c = partial_correlation(m, i, j, s, ws);
          double o = oracle_parcorr(m, i, j, s);
          REQUIRE(a == Catch::Approx(b).margin(1e-10));
          REQUIRE(c == Catch::Approx(o).margin(1e-9));
          REQUIRE(std::fabs(c) <= 1.0);
        }
      }
  }
}

TEST_CASE("vanishing on d-separated triples") {
  CounterRng rng(7, 0);
  ParcorrScratch ws;
  for (int trial = 0; trial < 30; ++trial) {
    Dag g = make_random(6, 2.0, 50 + trial);
    GaussianModel m = build_model(make_weights(g, random_point(g, rng)));
    for (int i = 1; i < 6; ++i)
      for (int j = i + 1; j <= 6; ++j) {
        std::vector<int> univ;
        for (int v = 1; v <= 6; ++v)
          if (v != i && v != j) univ.push_back(v);
        for (int mask = 0; mask < (1 << univ.size()); ++mask) {
          VertexSet s = 0;
          for (std::size_t t = 0; t < univ.size(); ++t)
            if (mask & (1 << t)) s |= vertex_bit(univ[t]);
          if (d_separated(g, i, j, s))
            REQUIRE(std::fabs(partial_correlation(m, i, j, s, ws)) < 1e-12);
        }
      }
  }
}

TEST_CASE("partial correlation matches the exact numerator ratio") {
  CounterRng rng(99, 1);
  ParcorrScratch ws;
  for (int trial = 0; trial < 10; ++trial) {
    Dag g = make_random(5, 1.8, 300 + trial);
    for (const Triple& t : enumerate_triples(g, TripleClass::Full)) {
      ParcorrPolys pp = parcorr_polys(g, t.i, t.j, t.s);
      REQUIRE(pp.pij == partial_cov_poly(g, t.i, t.j, t.s));
      for (int pt = 0; pt < 20; ++pt) {
        std::vector<double> a = random_point(g, rng);
        GaussianModel m = build_model(make_weights(g, a));
        double lhs = std::fabs(partial_correlation(m, t.i, t.j, t.s, ws));
        double rhs = std::fabs(pp.pij.evaluate(a)) /
                     std::sqrt(pp.pii.evaluate(a) * pp.pjj.evaluate(a));
        REQUIRE(lhs == Catch::Approx(rhs).margin(1e-9));
      }
    }
  }
}

TEST_CASE("minimum absolute partial correlation") {
  Dag pair(2, {{1, 2}});
  GaussianModel m = build_model(make_weights(pair, {0.3}));
  auto triples = enumerate_triples(pair, TripleClass::Full);
  MinParcorr r = min_abs_parcorr(m, triples);
  REQUIRE(r.any);
  // corr(X1, X2) = a / sqrt(1 + a^2) since var(X2) = 1 + a^2
  REQUIRE(r.value == Catch::Approx(0.3 / std::sqrt(1.09)));
  REQUIRE(r.argmin.i == 1);
  REQUIRE(r.argmin.j == 2);

  // all structural zeroes: empty graph has an empty full class
  Dag empty(3, {});
  GaussianModel me = build_model(make_weights(empty, {}));
  auto none = enumerate_triples(empty, TripleClass::Full);
  REQUIRE(none.empty());
  MinParcorr re = min_abs_parcorr(me, none);
  REQUIRE_FALSE(re.any);
  REQUIRE(std::isinf(re.value));

  // threshold discards tiny values
  GaussianModel mt = build_model(make_weights(pair, {1e-13}));
  MinParcorr rt = min_abs_parcorr(mt, triples);
  REQUIRE_FALSE(rt.any);
}
