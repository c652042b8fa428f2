#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "strongfaith/dag.hpp"
#include "strongfaith/errors.hpp"
#include "strongfaith/gaussian.hpp"

namespace strongfaith {

inline void check_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw InvalidArgument("lambda must lie in (0,1), got " + std::to_string(lambda));
}

struct ClassMinimum {
  TripleClass cls = TripleClass::Full;
  bool enumerated = false;  // false when the class was skipped (budget fallback)
  MinParcorr min;
};

// Point-level verdicts for one weight vector: the smallest surviving
// |partial correlation| per triple class, and faithfulness verdicts per
// (class, lambda). A class minimum at +inf (min.any == false) means every
// candidate was a structural zero or the class is empty; such a point is
// faithful at every lambda.
struct AuditReport {
  std::vector<double> lambdas;
  double zero_threshold = kDefaultZeroThreshold;
  bool full_skipped = false;  // full class dropped because of the budget
  std::string full_skip_reason;
  ClassMinimum full, restricted, adjacent;

  const ClassMinimum& for_class(TripleClass cls) const {
    switch (cls) {
      case TripleClass::Full: return full;
      case TripleClass::Restricted: return restricted;
      case TripleClass::Adjacent: return adjacent;
    }
    throw InvalidArgument("unknown triple class");
  }

  // true = faithful at this lambda: every surviving |parcorr| exceeds lambda.
  bool faithful(TripleClass cls, double lambda) const {
    const ClassMinimum& cm = for_class(cls);
    if (!cm.enumerated)
      throw InvalidArgument("class " + std::string(to_string(cls)) +
                            " was not enumerated in this report");
    return cm.min.value > lambda;
  }
  bool unfaithful(TripleClass cls, double lambda) const { return !faithful(cls, lambda); }

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (double l : lambdas)
      for (const ClassMinimum* cm : {&full, &restricted, &adjacent}) {
        if (!cm->enumerated) continue;
        nlohmann::json row;
        row["lambda"] = l;
        row["class"] = to_string(cm->cls);
        if (cm->min.any) {
          row["min_parcorr"] = cm->min.value;
          row["argmin"] = {{"i", cm->min.argmin.i},
                           {"j", cm->min.argmin.j},
                           {"s", set_to_vector(cm->min.argmin.s)}};
        } else {
          row["min_parcorr"] = nullptr;
          row["argmin"] = nullptr;
        }
        row["verdict"] = cm->min.value > l;
        rows.push_back(std::move(row));
      }
    nlohmann::json out;
    out["lambda_values"] = lambdas;
    out["zero_threshold"] = zero_threshold;
    out["full_class_skipped"] = full_skipped;
    if (full_skipped) out["full_class_skip_reason"] = full_skip_reason;
    out["rows"] = std::move(rows);
    return out;
  }
};

// Enumerate the full class once (its triples carry restricted/adjacency
// flags), taking all three minima in one pass. If the full class exceeds the
// budget, fall back to the restricted enumeration and flag the report.
inline AuditReport audit(const Weights& w, const std::vector<double>& lambdas,
                         double zero_threshold = kDefaultZeroThreshold,
                         std::uint64_t budget = kDefaultTripleBudget) {
  for (double l : lambdas) check_lambda(l);
  if (!(zero_threshold >= 0.0))
    throw InvalidArgument("zero threshold must be nonnegative");
  AuditReport rep;
  rep.lambdas = lambdas;
  rep.zero_threshold = zero_threshold;
  rep.full.cls = TripleClass::Full;
  rep.restricted.cls = TripleClass::Restricted;
  rep.adjacent.cls = TripleClass::Adjacent;

  GaussianModel m = build_model(w);
  ParcorrScratch ws;
  bool include_full = true;
  auto absorb = [&](const Triple& t) {
    double v = std::fabs(partial_correlation(m, t.i, t.j, t.s, ws));
    if (v < zero_threshold) return true;
    auto update = [&](ClassMinimum& cm) {
      if (v < cm.min.value) {
        cm.min.value = v;
        cm.min.argmin = t;
        cm.min.any = true;
      }
    };
    if (include_full) update(rep.full);
    if (t.in_restricted) update(rep.restricted);
    if (t.in_adjacent) update(rep.adjacent);
    return true;
  };

  try {
    for_each_triple(*w.dag, TripleClass::Full, budget, absorb);
    rep.full.enumerated = true;
  } catch (const BudgetError& e) {
    rep.full_skipped = true;
    rep.full_skip_reason = e.what();
    rep.restricted.min = MinParcorr{};
    rep.adjacent.min = MinParcorr{};
    include_full = false;
    for_each_triple(*w.dag, TripleClass::Restricted, budget, absorb);
  }
  rep.restricted.enumerated = true;
  rep.adjacent.enumerated = true;
  return rep;
}

// true iff some triple of the class has zero_threshold <= |parcorr| <= lambda,
// i.e. the point is lambda-strong-unfaithful for that class. Stops at the
// first witness.
inline bool early_exit_membership(const Weights& w, double lambda, TripleClass cls,
                                  double zero_threshold = kDefaultZeroThreshold,
                                  std::uint64_t budget = kDefaultTripleBudget) {
  check_lambda(lambda);
  if (!(zero_threshold >= 0.0))
    throw InvalidArgument("zero threshold must be nonnegative");
  GaussianModel m = build_model(w);
  ParcorrScratch ws;
  bool found = false;
  for_each_triple(*w.dag, cls, budget, [&](const Triple& t) {
    double v = std::fabs(partial_correlation(m, t.i, t.j, t.s, ws));
    if (v >= zero_threshold && v <= lambda) {
      found = true;
      return false;
    }
    return true;
  });
  return found;
}

}  // namespace strongfaith
