#include <catch2/catch_amalgamated.hpp>

#include "strongfaith/polynomial.hpp"

using namespace strongfaith;

namespace {

SparsePoly var(int n, int v) { return SparsePoly::variable(n, v); }

}  // namespace

TEST_CASE("construction and queries") {
  SparsePoly z = SparsePoly::zero(3);
  REQUIRE(z.is_zero());
  REQUIRE(z.total_degree() == 0);
  REQUIRE(z.constant_term() == 0);

  SparsePoly c = SparsePoly::constant(3, 7);
  REQUIRE_FALSE(c.is_zero());
  REQUIRE(c.constant_term() == 7);
  REQUIRE(c.total_degree() == 0);
  REQUIRE(SparsePoly::constant(3, 0).is_zero());

  SparsePoly x = var(3, 1);
  REQUIRE(x.total_degree() == 1);
  REQUIRE(x.degree_in(1) == 1);
  REQUIRE(x.degree_in(0) == 0);
  REQUIRE_THROWS_AS(SparsePoly::variable(3, 3), InvalidArgument);
}

TEST_CASE("ring identities") {
  SparsePoly x = var(2, 0), y = var(2, 1);
  REQUIRE((x + y) * (x + y) == x * x + SparsePoly::constant(2, 2) * x * y + y * y);
  REQUIRE((x - x).is_zero());
  REQUIRE((x + y) * (x - y) == x * x - y * y);
  SparsePoly p = (x + y) * (x + SparsePoly::constant(2, 3));
  SparsePoly q = x * x + SparsePoly::constant(2, 3) * x + x * y + SparsePoly::constant(2, 3) * y;
  REQUIRE(p == q);
  REQUIRE(-(x - y) == y - x);
  SparsePoly mismatched = var(3, 0);
  REQUIRE_THROWS_AS(x + mismatched, InvalidArgument);
}

TEST_CASE("cancellation removes terms") {
  SparsePoly x = var(1, 0);
  SparsePoly p = x * x + x;
  p -= x * x;
  REQUIRE(p == x);
  REQUIRE(p.term_count() == 1);
}

TEST_CASE("big coefficients stay exact") {
  // central binomial coefficient of (1 + x)^64
  SparsePoly p = SparsePoly::constant(1, 1);
  SparsePoly onepx = SparsePoly::constant(1, 1) + var(1, 0);
  for (int k = 0; k < 64; ++k) p *= onepx;
  Exponents e{32};
  REQUIRE(p.coefficient(e) == Coeff("1832624140942590534"));
  REQUIRE(p.total_degree() == 64);
}

TEST_CASE("evaluation") {
  SparsePoly x = var(2, 0), y = var(2, 1);
  SparsePoly p = x * x * y - SparsePoly::constant(2, 3) * y + SparsePoly::constant(2, 1);
  REQUIRE(p.evaluate({2.0, 0.5}) == Catch::Approx(2.0 - 1.5 + 1.0));
  REQUIRE(p.evaluate({0.0, 0.0}) == 1.0);
  REQUIRE_THROWS_AS(p.evaluate({1.0}), InvalidArgument);
}

TEST_CASE("exponent gcd and monomial division") {
  SparsePoly x = var(2, 0), y = var(2, 1);
  SparsePoly p = x * x * y + x * y * y;  // gcd monomial x*y
  REQUIRE(p.exponent_gcd() == Exponents{1, 1});
  SparsePoly q = p.divide_monomial({1, 1});
  REQUIRE(q == x + y);
  REQUIRE_THROWS_AS(p.divide_monomial(Exponents{2, 0}), InvalidArgument);
  REQUIRE(SparsePoly::zero(2).exponent_gcd() == Exponents{0, 0});
}

TEST_CASE("printing") {
  std::vector<std::string> names{"a_1_2", "a_2_3"};
  SparsePoly x = var(2, 0), y = var(2, 1);
  REQUIRE(SparsePoly::zero(2).to_string(names) == "0");
  REQUIRE(SparsePoly::constant(2, -4).to_string(names) == "-4");
  REQUIRE((x * y - SparsePoly::constant(2, 2) * x + SparsePoly::constant(2, 1))
              .to_string(names) == "a_1_2*a_2_3 - 2*a_1_2 + 1");
  REQUIRE((-(x * x)).to_string(names) == "-a_1_2^2");
  // graded order: degree decides before lexicographic position
  REQUIRE((y * y + x).to_string(names) == "a_2_3^2 + a_1_2");
}

TEST_CASE("variable names follow the edge list") {
  Dag g(3, {{2, 3}, {1, 2}});
  REQUIRE(variable_names(g) == std::vector<std::string>{"a_1_2", "a_2_3"});
}
