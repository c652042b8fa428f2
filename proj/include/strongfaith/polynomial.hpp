#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "strongfaith/dag.hpp"
#include "strongfaith/errors.hpp"

namespace strongfaith {

// Multivariate polynomials over the edge-weight variables of a DAG, with
// exact integer coefficients. One variable per edge, indexed like
// Dag::edges(). Coefficients are arbitrary precision: determinant expansions
// stay exact no matter how the terms pile up.

using Coeff = boost::multiprecision::cpp_int;
using Exponents = std::vector<std::uint8_t>;

inline int exponents_degree(const Exponents& e) {
  return std::accumulate(e.begin(), e.end(), 0);
}

// Graded lexicographic term order: total degree first, then the exponent
// vector itself. Any fixed total order would do; this one prints nicely.
struct GradedLexLess {
  bool operator()(const Exponents& a, const Exponents& b) const {
    int da = exponents_degree(a), db = exponents_degree(b);
    if (da != db) return da < db;
    return a < b;
  }
};

class SparsePoly {
 public:
  explicit SparsePoly(int nvars = 0) : nvars_(nvars) {}

  static SparsePoly zero(int nvars) { return SparsePoly(nvars); }

  static SparsePoly constant(int nvars, Coeff c) {
    SparsePoly p(nvars);
    if (c != 0) p.terms_[Exponents(nvars, 0)] = std::move(c);
    return p;
  }

  static SparsePoly variable(int nvars, int var) {
    if (var < 0 || var >= nvars) throw InvalidArgument("variable index out of range");
    SparsePoly p(nvars);
    Exponents e(nvars, 0);
    e[var] = 1;
    p.terms_[std::move(e)] = 1;
    return p;
  }

  static SparsePoly monomial(int nvars, Exponents e, Coeff c = 1) {
    if (static_cast<int>(e.size()) != nvars)
      throw InvalidArgument("exponent vector length mismatch");
    SparsePoly p(nvars);
    if (c != 0) p.terms_[std::move(e)] = std::move(c);
    return p;
  }

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }
  const std::map<Exponents, Coeff, GradedLexLess>& terms() const { return terms_; }

  // Degree conventions: the zero polynomial reports 0 (callers that need the
  // -infinity convention check is_zero() first).
  int total_degree() const {
    return terms_.empty() ? 0 : exponents_degree(terms_.rbegin()->first);
  }

  int degree_in(int var) const {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max<int>(d, e[var]);
    return d;
  }

  Coeff constant_term() const {
    auto it = terms_.find(Exponents(nvars_, 0));
    return it == terms_.end() ? Coeff(0) : it->second;
  }

  Coeff coefficient(const Exponents& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Coeff(0) : it->second;
  }

  SparsePoly& operator+=(const SparsePoly& o) {
    check_same(o);
    for (const auto& [e, c] : o.terms_) {
      auto [it, fresh] = terms_.try_emplace(e, c);
      if (!fresh) {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
      }
    }
    return *this;
  }

  SparsePoly& operator-=(const SparsePoly& o) {
    check_same(o);
    for (const auto& [e, c] : o.terms_) {
      auto [it, fresh] = terms_.try_emplace(e, Coeff(-c));
      if (!fresh) {
        it->second -= c;
        if (it->second == 0) terms_.erase(it);
      }
    }
    return *this;
  }

  friend SparsePoly operator+(SparsePoly a, const SparsePoly& b) { return a += b; }
  friend SparsePoly operator-(SparsePoly a, const SparsePoly& b) { return a -= b; }

  SparsePoly operator-() const {
    SparsePoly r(nvars_);
    for (const auto& [e, c] : terms_) r.terms_[e] = Coeff(-c);
    return r;
  }

  friend SparsePoly operator*(const SparsePoly& a, const SparsePoly& b) {
    a.check_same(b);
    SparsePoly r(a.nvars_);
    Exponents e(a.nvars_);
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        for (int v = 0; v < a.nvars_; ++v) e[v] = static_cast<std::uint8_t>(ea[v] + eb[v]);
        auto [it, fresh] = r.terms_.try_emplace(e, 0);
        it->second += ca * cb;
        if (it->second == 0) r.terms_.erase(it);
      }
    return r;
  }

  SparsePoly& operator*=(const SparsePoly& o) { return *this = *this * o; }

  SparsePoly& operator*=(const Coeff& c) {
    if (c == 0) {
      terms_.clear();
    } else {
      for (auto& [e, v] : terms_) v *= c;
    }
    return *this;
  }

  friend bool operator==(const SparsePoly& a, const SparsePoly& b) {
    return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
  }

  double evaluate(const std::vector<double>& a) const {
    if (static_cast<int>(a.size()) != nvars_)
      throw InvalidArgument("evaluation point has wrong dimension");
    double sum = 0.0;
    for (const auto& [e, c] : terms_) {
      double t = static_cast<double>(c);
      for (int v = 0; v < nvars_; ++v)
        for (int k = 0; k < e[v]; ++k) t *= a[v];
      sum += t;
    }
    return sum;
  }

  // Componentwise minimum of all exponent vectors: the largest monomial
  // dividing every term. Zero polynomial maps to the empty monomial.
  Exponents exponent_gcd() const {
    Exponents g(nvars_, 0);
    if (terms_.empty()) return g;
    bool first = true;
    for (const auto& [e, c] : terms_) {
      if (first) {
        g = e;
        first = false;
      } else {
        for (int v = 0; v < nvars_; ++v) g[v] = std::min(g[v], e[v]);
      }
    }
    return g;
  }

  // Exact division by a monomial; every term must be divisible.
  SparsePoly divide_monomial(const Exponents& m) const {
    if (static_cast<int>(m.size()) != nvars_)
      throw InvalidArgument("monomial has wrong dimension");
    SparsePoly r(nvars_);
    for (const auto& [e, c] : terms_) {
      Exponents q(nvars_);
      for (int v = 0; v < nvars_; ++v) {
        if (e[v] < m[v]) throw InvalidArgument("monomial does not divide every term");
        q[v] = static_cast<std::uint8_t>(e[v] - m[v]);
      }
      r.terms_[std::move(q)] = c;
    }
    return r;
  }

  // Deterministic rendering, leading term first: "a_1_2*a_2_3 - 2*a_1_3 + 1".
  std::string to_string(const std::vector<std::string>& names) const {
    if (static_cast<int>(names.size()) != nvars_)
      throw InvalidArgument("name list has wrong dimension");
    if (terms_.empty()) return "0";
    std::string out;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      const auto& [e, c] = *it;
      bool neg = c < 0;
      Coeff mag = neg ? Coeff(-c) : c;
      if (out.empty()) {
        if (neg) out += "-";
      } else {
        out += neg ? " - " : " + ";
      }
      bool has_vars = exponents_degree(e) > 0;
      if (mag != 1 || !has_vars) out += mag.str();
      bool star = mag != 1 && has_vars;
      for (int v = 0; v < nvars_; ++v) {
        if (e[v] == 0) continue;
        if (star) out += "*";
        out += names[v];
        if (e[v] > 1) out += "^" + std::to_string(e[v]);
        star = true;
      }
    }
    return out;
  }

 private:
  void check_same(const SparsePoly& o) const {
    if (nvars_ != o.nvars_)
      throw InvalidArgument("polynomials live over different variable sets");
  }

  int nvars_;
  std::map<Exponents, Coeff, GradedLexLess> terms_;
};

// Edge-weight variable names in edge order: "a_i_j".
inline std::vector<std::string> variable_names(const Dag& g) {
  std::vector<std::string> out;
  out.reserve(g.edges().size());
  for (const Edge& e : g.edges())
    out.push_back("a_" + std::to_string(e.i) + "_" + std::to_string(e.j));
  return out;
}

}  // namespace strongfaith
