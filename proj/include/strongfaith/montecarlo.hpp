#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "strongfaith/audit.hpp"
#include "strongfaith/dag.hpp"
#include "strongfaith/errors.hpp"
#include "strongfaith/gaussian.hpp"
#include "strongfaith/rng.hpp"

namespace strongfaith {

// Stream layout: sample k of sampling cell `cube` (one cube per sampling
// distribution, e.g. per c value) draws weights from stream (cube << 40) + k;
// structure draws for random-DAG ensembles use the same index with the top
// bit set. Every sample owns its streams, so results do not depend on how
// samples are partitioned across workers.
inline std::uint64_t sample_stream(std::uint64_t cube, std::uint64_t k) {
  return (cube << 40) + k;
}

// One weight per edge, uniform on [-r,-c] u [c,r] (the full cube when c=0):
// first draw picks the magnitude, second the sign.
inline Weights sample_weights(const Dag& g, double c, double r, CounterRng& rng) {
  if (!(c >= 0.0 && c < r))
    throw InvalidArgument("restricted cube needs 0 <= c < r, got c=" +
                          std::to_string(c) + ", r=" + std::to_string(r));
  std::vector<double> a(g.edge_count());
  for (double& x : a) {
    double mag = c + rng.next_unit() * (r - c);
    x = rng.next_unit() < 0.5 ? -mag : mag;
  }
  return make_weights(g, std::move(a));
}

inline constexpr int kDefaultMaxFullP = 15;

struct SweepConfig {
  std::vector<double> lambdas{0.1, 0.01, 0.001};
  std::vector<double> cs{0.0};
  double r = 1.0;
  std::uint64_t samples = 10000;
  std::uint64_t seed = 0;
  std::vector<TripleClass> classes{TripleClass::Full, TripleClass::Restricted,
                                   TripleClass::Adjacent};
  double zero_threshold = kDefaultZeroThreshold;
  int workers = 1;
  std::uint64_t triple_budget = kDefaultTripleBudget;
  int max_full_p = kDefaultMaxFullP;
};

inline void validate_sweep_config(const SweepConfig& cfg) {
  if (cfg.lambdas.empty()) throw InvalidArgument("need at least one lambda");
  for (double l : cfg.lambdas) check_lambda(l);
  if (!(cfg.r > 0.0)) throw InvalidArgument("cube radius must be positive");
  if (cfg.cs.empty()) throw InvalidArgument("need at least one c value");
  for (double c : cfg.cs)
    if (!(c >= 0.0 && c < cfg.r))
      throw InvalidArgument("restricted cube needs 0 <= c < r, got c=" + std::to_string(c));
  if (cfg.samples < 1) throw InvalidArgument("need at least one sample");
  if (cfg.classes.empty()) throw InvalidArgument("need at least one triple class");
  if (cfg.workers < 1) throw InvalidArgument("need at least one worker");
  if (!(cfg.zero_threshold >= 0.0))
    throw InvalidArgument("zero threshold must be nonnegative");
}

struct SweepRow {
  std::string family;
  int p = 0;
  double density_or_en = 0.0;  // expected neighborhood size, or |E|/C(p,2)
  double lambda = 0.0;
  double c = 0.0;
  TripleClass cls = TripleClass::Full;
  std::uint64_t samples = 0;
  double proportion = 0.0;
  double ci95 = 0.0;
  std::uint64_t seed = 0;
  bool available = true;   // false: cell skipped, see reason; CSV prints NA
  std::string reason;
  double elapsed_seconds = 0.0;
};

inline double ci95_radius(double phat, std::uint64_t n) {
  return 1.96 * std::sqrt(phat * (1.0 - phat) / static_cast<double>(n));
}

namespace detail {

// Running per-class minima of surviving |parcorr| values over one sample's
// triples. Once every wanted class is at or below lambda_min no counter can
// change, so the scan stops.
struct MinScanner {
  const GaussianModel* m = nullptr;
  ParcorrScratch* ws = nullptr;
  double zero_threshold = 0.0;
  double lambda_min = 0.0;
  bool want_full = false, want_restricted = false, want_adjacent = false;
  double min_full = 0.0, min_restricted = 0.0, min_adjacent = 0.0;
  bool done_full = false, done_restricted = false, done_adjacent = false;

  void reset() {
    double inf = std::numeric_limits<double>::infinity();
    min_full = min_restricted = min_adjacent = inf;
    done_full = !want_full;
    done_restricted = !want_restricted;
    done_adjacent = !want_adjacent;
  }

  bool operator()(const Triple& t) {
    bool relevant = !done_full || (!done_restricted && t.in_restricted) ||
                    (!done_adjacent && t.in_adjacent);
    if (!relevant) return true;
    double v = std::fabs(partial_correlation(*m, t.i, t.j, t.s, *ws));
    if (v >= zero_threshold) {
      if (want_full && v < min_full) {
        min_full = v;
        done_full = min_full <= lambda_min;
      }
      if (want_restricted && t.in_restricted && v < min_restricted) {
        min_restricted = v;
        done_restricted = min_restricted <= lambda_min;
      }
      if (want_adjacent && t.in_adjacent && v < min_adjacent) {
        min_adjacent = v;
        done_adjacent = min_adjacent <= lambda_min;
      }
    }
    return !(done_full && done_restricted && done_adjacent);
  }

  double min_for(TripleClass cls) const {
    switch (cls) {
      case TripleClass::Full: return min_full;
      case TripleClass::Restricted: return min_restricted;
      case TripleClass::Adjacent: return min_adjacent;
    }
    return std::numeric_limits<double>::infinity();
  }
};

// counts is [class][lambda] flattened; a sample hits (cls, lambda) when its
// class minimum is at or below lambda.
inline void tally(const MinScanner& sc, const std::vector<TripleClass>& classes,
                  const std::vector<double>& lambdas, std::vector<std::uint64_t>& counts) {
  std::size_t nl = lambdas.size();
  for (std::size_t ci = 0; ci < classes.size(); ++ci) {
    double mn = sc.min_for(classes[ci]);
    for (std::size_t li = 0; li < nl; ++li)
      if (mn <= lambdas[li]) ++counts[ci * nl + li];
  }
}

// Contiguous sample ranges per worker; counts merge by addition, so the
// partition never changes the totals.
template <class Body>
void run_partitioned(std::uint64_t n, int workers, Body&& body) {
  int w = std::max(1, std::min<int>(workers, static_cast<int>(std::min<std::uint64_t>(
                                        n, std::numeric_limits<int>::max()))));
  if (w == 1) {
    body(0, std::uint64_t{0}, n);
    return;
  }
  std::vector<std::thread> threads;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  threads.reserve(w);
  for (int t = 0; t < w; ++t) {
    std::uint64_t begin = n * static_cast<std::uint64_t>(t) / w;
    std::uint64_t end = n * static_cast<std::uint64_t>(t + 1) / w;
    threads.emplace_back([&, t, begin, end] {
      try {
        body(t, begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (std::thread& th : threads) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline bool wants(const std::vector<TripleClass>& classes, TripleClass cls) {
  return std::find(classes.begin(), classes.end(), cls) != classes.end();
}

// Full-cube candidate count C(p,2) * 2^(p-2); every class enumeration on p
// vertices visits at most this many candidates.
inline std::uint64_t full_candidates(int p) {
  std::uint64_t pairs = static_cast<std::uint64_t>(p) * (p - 1) / 2;
  if (p - 2 >= 64) return ~std::uint64_t{0};
  unsigned __int128 total = static_cast<unsigned __int128>(pairs) << (p - 2);
  return total > ~std::uint64_t{0} ? ~std::uint64_t{0} : static_cast<std::uint64_t>(total);
}

inline std::vector<SweepRow> assemble_rows(
    const std::string& family, int p, double density_or_en, const SweepConfig& cfg,
    double c, const std::vector<std::uint64_t>& counts, bool full_ok,
    const std::string& full_reason, double elapsed) {
  std::vector<SweepRow> rows;
  std::size_t nl = cfg.lambdas.size();
  for (std::size_t ci = 0; ci < cfg.classes.size(); ++ci)
    for (std::size_t li = 0; li < nl; ++li) {
      SweepRow row;
      row.family = family;
      row.p = p;
      row.density_or_en = density_or_en;
      row.lambda = cfg.lambdas[li];
      row.c = c;
      row.cls = cfg.classes[ci];
      row.samples = cfg.samples;
      row.seed = cfg.seed;
      row.elapsed_seconds = elapsed;
      if (cfg.classes[ci] == TripleClass::Full && !full_ok) {
        row.available = false;
        row.reason = full_reason;
      } else {
        double phat = static_cast<double>(counts[ci * nl + li]) /
                      static_cast<double>(cfg.samples);
        row.proportion = phat;
        row.ci95 = ci95_radius(phat, cfg.samples);
      }
      rows.push_back(std::move(row));
    }
  return rows;
}

}  // namespace detail

// Proportion of weight draws on the (restricted) cube that are
// lambda-strong-unfaithful, per (lambda, c, class), for one fixed DAG. The
// triple list is enumerated once; samples share one weight draw across every
// lambda and class.
inline std::vector<SweepRow> estimate_fixed_dag(const Dag& g, const std::string& family,
                                                const SweepConfig& cfg) {
  validate_sweep_config(cfg);
  bool want_full = detail::wants(cfg.classes, TripleClass::Full);
  bool want_restricted = detail::wants(cfg.classes, TripleClass::Restricted);
  bool want_adjacent = detail::wants(cfg.classes, TripleClass::Adjacent);

  bool full_ok = want_full;
  std::string full_reason;
  std::vector<Triple> triples;
  bool enumerated = false;
  if (want_full) {
    if (g.p() > cfg.max_full_p) {
      full_ok = false;
      full_reason = "full class capped at p <= " + std::to_string(cfg.max_full_p) +
                    ", got p = " + std::to_string(g.p());
    } else {
      try {
        triples = enumerate_triples(g, TripleClass::Full, cfg.triple_budget);
        enumerated = true;
      } catch (const BudgetError& e) {
        full_ok = false;
        full_reason = e.what();
      }
    }
  }
  if (!enumerated) triples = enumerate_triples(g, TripleClass::Restricted, cfg.triple_budget);

  double density = g.p() < 2 ? 0.0
                             : static_cast<double>(g.edge_count()) /
                                   (static_cast<double>(g.p()) * (g.p() - 1) / 2.0);
  double lambda_min = *std::min_element(cfg.lambdas.begin(), cfg.lambdas.end());
  std::size_t nl = cfg.lambdas.size();

  std::vector<SweepRow> rows;
  for (std::size_t cube = 0; cube < cfg.cs.size(); ++cube) {
    double c = cfg.cs[cube];
    auto start = std::chrono::steady_clock::now();
    std::vector<std::vector<std::uint64_t>> local(
        cfg.workers, std::vector<std::uint64_t>(cfg.classes.size() * nl, 0));
    detail::run_partitioned(cfg.samples, cfg.workers,
                            [&](int worker, std::uint64_t begin, std::uint64_t end) {
      GaussianModel model;
      ParcorrScratch ws;
      detail::MinScanner scan;
      scan.m = &model;
      scan.ws = &ws;
      scan.zero_threshold = cfg.zero_threshold;
      scan.lambda_min = lambda_min;
      scan.want_full = want_full && full_ok;
      scan.want_restricted = want_restricted;
      scan.want_adjacent = want_adjacent;
      for (std::uint64_t k = begin; k < end; ++k) {
        CounterRng rng(cfg.seed, sample_stream(cube, k));
        Weights w = sample_weights(g, c, cfg.r, rng);
        build_model_into(w, model);
        scan.reset();
        for (const Triple& t : triples)
          if (!scan(t)) break;
        detail::tally(scan, cfg.classes, cfg.lambdas, local[worker]);
      }
    });
    std::vector<std::uint64_t> counts(cfg.classes.size() * nl, 0);
    for (const auto& part : local)
      for (std::size_t idx = 0; idx < counts.size(); ++idx) counts[idx] += part[idx];
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                         .count();
    std::vector<SweepRow> cube_rows = detail::assemble_rows(
        family, g.p(), density, cfg, c, counts, full_ok, full_reason, elapsed);
    rows.insert(rows.end(), cube_rows.begin(), cube_rows.end());
  }
  return rows;
}

// Random-DAG ensemble: sample k of each cell draws a fresh DAG (structure
// stream) and fresh weights (weight stream), then scans its triples lazily.
// One cube per (expected neighborhood size, c) pair, in that nesting order.
inline std::vector<SweepRow> estimate_random_ensemble(int p,
                                                      const std::vector<double>& en_list,
                                                      const SweepConfig& cfg) {
  validate_sweep_config(cfg);
  if (p < 2) throw InvalidArgument("ensemble needs p >= 2, got " + std::to_string(p));
  if (en_list.empty()) throw InvalidArgument("need at least one neighborhood size");
  for (double en : en_list)
    if (!(en >= 0.0) || en > static_cast<double>(p - 1))
      throw InvalidArgument("expected neighborhood size must be in [0, p-1]");

  bool want_full = detail::wants(cfg.classes, TripleClass::Full);
  bool want_restricted = detail::wants(cfg.classes, TripleClass::Restricted);
  bool want_adjacent = detail::wants(cfg.classes, TripleClass::Adjacent);

  // The full-class candidate count depends only on p, so its feasibility is
  // decided once. A restricted enumeration varies with the drawn DAG's degree
  // and is budget-checked per sample (a violation aborts deterministically).
  std::uint64_t worst = detail::full_candidates(p);
  bool full_ok = want_full;
  std::string full_reason;
  if (want_full && p > cfg.max_full_p) {
    full_ok = false;
    full_reason = "full class capped at p <= " + std::to_string(cfg.max_full_p) +
                  ", got p = " + std::to_string(p);
  } else if (want_full && worst > cfg.triple_budget) {
    full_ok = false;
    full_reason = "triple enumeration needs " + std::to_string(worst) +
                  " candidates, budget is " + std::to_string(cfg.triple_budget);
  }

  TripleClass base = full_ok ? TripleClass::Full : TripleClass::Restricted;
  std::uint64_t sample_budget = full_ok ? ~std::uint64_t{0} : cfg.triple_budget;
  double lambda_min = *std::min_element(cfg.lambdas.begin(), cfg.lambdas.end());
  std::size_t nl = cfg.lambdas.size();

  std::vector<SweepRow> rows;
  for (std::size_t ei = 0; ei < en_list.size(); ++ei) {
    double en = en_list[ei];
    double edge_prob = en / (p - 1);
    for (std::size_t ci_cube = 0; ci_cube < cfg.cs.size(); ++ci_cube) {
      double c = cfg.cs[ci_cube];
      std::uint64_t cube = ei * cfg.cs.size() + ci_cube;
      auto start = std::chrono::steady_clock::now();
      std::vector<std::vector<std::uint64_t>> local(
          cfg.workers, std::vector<std::uint64_t>(cfg.classes.size() * nl, 0));
      detail::run_partitioned(cfg.samples, cfg.workers,
                              [&](int worker, std::uint64_t begin, std::uint64_t end) {
        GaussianModel model;
        ParcorrScratch ws;
        detail::MinScanner scan;
        scan.m = &model;
        scan.ws = &ws;
        scan.zero_threshold = cfg.zero_threshold;
        scan.lambda_min = lambda_min;
        scan.want_full = full_ok;
        scan.want_restricted = want_restricted;
        scan.want_adjacent = want_adjacent;
        for (std::uint64_t k = begin; k < end; ++k) {
          CounterRng structure_rng(cfg.seed, kStructureStream | sample_stream(cube, k));
          Dag g = detail::draw_random_dag(p, edge_prob, structure_rng);
          CounterRng rng(cfg.seed, sample_stream(cube, k));
          Weights w = sample_weights(g, c, cfg.r, rng);
          build_model_into(w, model);
          scan.reset();
          for_each_triple(g, base, sample_budget,
                          [&](const Triple& t) { return scan(t); });
          detail::tally(scan, cfg.classes, cfg.lambdas, local[worker]);
        }
      });
      std::vector<std::uint64_t> counts(cfg.classes.size() * nl, 0);
      for (const auto& part : local)
        for (std::size_t idx = 0; idx < counts.size(); ++idx) counts[idx] += part[idx];
      double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::vector<SweepRow> cube_rows = detail::assemble_rows(
          "random", p, en, cfg, c, counts, full_ok, full_reason, elapsed);
      rows.insert(rows.end(), cube_rows.begin(), cube_rows.end());
    }
  }
  return rows;
}

}  // namespace strongfaith
