#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "strongfaith/dag.hpp"
#include "strongfaith/montecarlo.hpp"
#include "strongfaith/rng.hpp"

using namespace strongfaith;

namespace {

const SweepRow& find_row(const std::vector<SweepRow>& rows, double lambda, double c,
                         TripleClass cls) {
  for (const SweepRow& r : rows)
    if (r.lambda == lambda && r.c == c && r.cls == cls) return r;
  throw std::runtime_error("row not found");
}

}  // namespace

TEST_CASE("weight sampler hits the slab and balances signs") {
  Dag chain = make_tree_with_levels(11, 11, 0);
  struct Case { double c, r; };
  for (Case tc : {Case{0.0, 1.0}, Case{0.5, 1.0}, Case{0.75, 1.0}, Case{0.0, 2.0}}) {
    double sum_abs = 0.0;
    int neg = 0, n = 0;
    for (int k = 0; k < 3000; ++k) {
      CounterRng rng(42, sample_stream(0, k));
      Weights w = sample_weights(chain, tc.c, tc.r, rng);
      for (double x : w.a) {
        REQUIRE(std::fabs(x) >= tc.c);
        REQUIRE(std::fabs(x) <= tc.r);
        sum_abs += std::fabs(x);
        neg += x < 0.0;
        ++n;
      }
    }
    REQUIRE(sum_abs / n == Catch::Approx((tc.c + tc.r) / 2.0).margin(0.01));
    REQUIRE(static_cast<double>(neg) / n == Catch::Approx(0.5).margin(0.02));
  }

  CounterRng rng(7, 3);
  REQUIRE_THROWS_AS(sample_weights(chain, -0.1, 1.0, rng), InvalidArgument);
  REQUIRE_THROWS_AS(sample_weights(chain, 1.0, 1.0, rng), InvalidArgument);
  REQUIRE_THROWS_AS(sample_weights(chain, 2.0, 1.0, rng), InvalidArgument);

  CounterRng r1(9, sample_stream(1, 4)), r2(9, sample_stream(1, 4));
  REQUIRE(sample_weights(chain, 0.0, 1.0, r1).a == sample_weights(chain, 0.0, 1.0, r2).a);
}

TEST_CASE("single edge estimates match the exact slab volume") {
  // |corr| = |a|/sqrt(1+a^2) <= lambda iff |a| <= lambda/sqrt(1-lambda^2), so
  // the unfaithful proportion on [-r,r] is that cutoff over r.
  Dag g(2, {{1, 2}});
  int pair = 0;
  for (double lambda : {0.15, 0.1, 0.05, 0.01, 0.005}) {
    for (double r : {0.5, 1.0, 2.0, 3.0}) {
      SweepConfig cfg;
      cfg.lambdas = {lambda};
      cfg.cs = {0.0};
      cfg.r = r;
      cfg.samples = 10000;
      cfg.seed = 100 + pair;
      cfg.classes = {TripleClass::Full};
      std::vector<SweepRow> rows = estimate_fixed_dag(g, "edge", cfg);
      REQUIRE(rows.size() == 1);
      double q = lambda / std::sqrt(1.0 - lambda * lambda) / r;
      double sigma = std::sqrt(q * (1.0 - q) / 10000.0);
      REQUIRE(rows[0].proportion == Catch::Approx(q).margin(4.0 * sigma));
      REQUIRE(rows[0].ci95 ==
              Catch::Approx(ci95_radius(rows[0].proportion, 10000)).epsilon(1e-12));
      ++pair;
    }
  }
  REQUIRE(pair == 20);
}

TEST_CASE("fixed DAG estimates do not depend on the worker count") {
  Dag g = make_tree(8, 2);
  SweepConfig base;
  base.lambdas = {0.1, 0.01};
  base.cs = {0.0, 0.5};
  base.samples = 2000;
  base.seed = 31;

  std::vector<std::vector<SweepRow>> runs;
  for (int workers : {1, 3, 16}) {
    SweepConfig cfg = base;
    cfg.workers = workers;
    runs.push_back(estimate_fixed_dag(g, "tree", cfg));
  }
  REQUIRE(runs[0].size() == 12);
  for (std::size_t t = 0; t < runs[0].size(); ++t) {
    REQUIRE(runs[0][t].proportion == runs[1][t].proportion);
    REQUIRE(runs[0][t].proportion == runs[2][t].proportion);
    REQUIRE(runs[0][t].family == "tree");
    REQUIRE(runs[0][t].p == 8);
    REQUIRE(runs[0][t].density_or_en == Catch::Approx(7.0 / 28.0));
    REQUIRE(runs[0][t].samples == 2000);
    REQUIRE(runs[0][t].seed == 31);
    REQUIRE(runs[0][t].available);
  }
}

TEST_CASE("proportions are monotone in lambda and nested across classes") {
  Dag g = make_random(9, 2.5, 17);
  SweepConfig cfg;
  cfg.lambdas = {0.001, 0.01, 0.1};
  cfg.samples = 1500;
  cfg.seed = 5;
  std::vector<SweepRow> rows = estimate_fixed_dag(g, "random", cfg);
  for (TripleClass cls : {TripleClass::Full, TripleClass::Restricted, TripleClass::Adjacent}) {
    REQUIRE(find_row(rows, 0.001, 0.0, cls).proportion <=
            find_row(rows, 0.01, 0.0, cls).proportion);
    REQUIRE(find_row(rows, 0.01, 0.0, cls).proportion <=
            find_row(rows, 0.1, 0.0, cls).proportion);
  }
  for (double lambda : cfg.lambdas) {
    REQUIRE(find_row(rows, lambda, 0.0, TripleClass::Adjacent).proportion <=
            find_row(rows, lambda, 0.0, TripleClass::Restricted).proportion);
    REQUIRE(find_row(rows, lambda, 0.0, TripleClass::Restricted).proportion <=
            find_row(rows, lambda, 0.0, TripleClass::Full).proportion);
  }
}

TEST_CASE("keeping tree weights away from zero shrinks the unfaithful volume") {
  Dag g = make_tree_with_levels(10, 5, 3);
  SweepConfig cfg;
  cfg.lambdas = {0.01};
  cfg.cs = {0.0, 0.75};
  cfg.samples = 2000;
  cfg.seed = 12;
  cfg.classes = {TripleClass::Restricted, TripleClass::Adjacent};
  std::vector<SweepRow> rows = estimate_fixed_dag(g, "tree", cfg);
  for (TripleClass cls : cfg.classes) {
    const SweepRow& loose = find_row(rows, 0.01, 0.0, cls);
    const SweepRow& tight = find_row(rows, 0.01, 0.75, cls);
    REQUIRE(loose.proportion - tight.proportion > 3.0 * (loose.ci95 + tight.ci95));
  }
}

TEST_CASE("full class cell is reported unavailable beyond the cap") {
  SweepConfig cfg;
  cfg.lambdas = {0.1};
  cfg.samples = 50;
  cfg.max_full_p = 8;
  Dag small = make_tree(8, 1);
  for (const SweepRow& r : estimate_fixed_dag(small, "tree", cfg)) REQUIRE(r.available);

  Dag big = make_tree(9, 1);
  std::vector<SweepRow> rows = estimate_fixed_dag(big, "tree", cfg);
  for (const SweepRow& r : rows) {
    if (r.cls == TripleClass::Full) {
      REQUIRE_FALSE(r.available);
      REQUIRE(r.reason.find("capped") != std::string::npos);
    } else {
      REQUIRE(r.available);
    }
  }
}

TEST_CASE("full class budget overflow falls back to the restricted enumeration") {
  Dag g = make_tree(12, 4);
  SweepConfig cfg;
  cfg.lambdas = {0.1};
  cfg.samples = 40;
  cfg.triple_budget = 5000;
  std::vector<SweepRow> rows = estimate_fixed_dag(g, "tree", cfg);
  for (const SweepRow& r : rows) {
    if (r.cls == TripleClass::Full) {
      REQUIRE_FALSE(r.available);
      REQUIRE(r.reason.find("budget") != std::string::npos);
    } else {
      REQUIRE(r.available);
    }
  }
}

TEST_CASE("ensemble runs are deterministic and respect the cap") {
  SweepConfig cfg;
  cfg.lambdas = {0.1, 0.01};
  cfg.samples = 400;
  cfg.seed = 77;
  std::vector<SweepRow> a = estimate_random_ensemble(10, {1.0, 2.0}, cfg);
  cfg.workers = 5;
  std::vector<SweepRow> b = estimate_random_ensemble(10, {1.0, 2.0}, cfg);
  REQUIRE(a.size() == 12);
  for (std::size_t t = 0; t < a.size(); ++t) {
    REQUIRE(a[t].proportion == b[t].proportion);
    REQUIRE(a[t].family == "random");
    REQUIRE((a[t].density_or_en == 1.0 || a[t].density_or_en == 2.0));
  }

  cfg.workers = 1;
  cfg.samples = 30;
  std::vector<SweepRow> capped = estimate_random_ensemble(16, {1.0}, cfg);
  for (const SweepRow& r : capped)
    REQUIRE(r.available == (r.cls != TripleClass::Full));

  // en = 0 draws edgeless DAGs; with no triples nothing can be unfaithful.
  std::vector<SweepRow> empty = estimate_random_ensemble(6, {0.0}, cfg);
  for (const SweepRow& r : empty) REQUIRE(r.proportion == 0.0);
}

TEST_CASE("ensemble propagates a per-sample budget overflow") {
  SweepConfig cfg;
  cfg.lambdas = {0.1};
  cfg.samples = 20;
  cfg.triple_budget = 10;
  REQUIRE_THROWS_AS(estimate_random_ensemble(7, {6.0}, cfg), BudgetError);
}

TEST_CASE("sweep configuration is validated") {
  Dag g(2, {{1, 2}});
  SweepConfig cfg;
  auto expect_throw = [&](auto mutate) {
    SweepConfig bad = cfg;
    mutate(bad);
    REQUIRE_THROWS_AS(estimate_fixed_dag(g, "edge", bad), InvalidArgument);
  };
  expect_throw([](SweepConfig& c) { c.lambdas = {}; });
  expect_throw([](SweepConfig& c) { c.lambdas = {1.5}; });
  expect_throw([](SweepConfig& c) { c.cs = {}; });
  expect_throw([](SweepConfig& c) { c.cs = {1.0}; });
  expect_throw([](SweepConfig& c) { c.r = 0.0; });
  expect_throw([](SweepConfig& c) { c.samples = 0; });
  expect_throw([](SweepConfig& c) { c.classes = {}; });
  expect_throw([](SweepConfig& c) { c.workers = 0; });
  expect_throw([](SweepConfig& c) { c.zero_threshold = -1.0; });
  REQUIRE_THROWS_AS(estimate_random_ensemble(1, {0.0}, cfg), InvalidArgument);
  REQUIRE_THROWS_AS(estimate_random_ensemble(5, {}, cfg), InvalidArgument);
  REQUIRE_THROWS_AS(estimate_random_ensemble(5, {4.5}, cfg), InvalidArgument);
  REQUIRE_THROWS_AS(estimate_random_ensemble(5, {-1.0}, cfg), InvalidArgument);
}

TEST_CASE("sample streams separate cubes from sample indices") {
  REQUIRE(sample_stream(0, 5) == 5);
  REQUIRE(sample_stream(2, 3) == (std::uint64_t{2} << 40) + 3);
  REQUIRE(sample_stream(1, 0) != sample_stream(0, 1));
}
