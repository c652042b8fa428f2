#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "strongfaith/audit.hpp"
#include "strongfaith/bounds.hpp"
#include "strongfaith/dag.hpp"
#include "strongfaith/errors.hpp"
#include "strongfaith/gaussian.hpp"
#include "strongfaith/io.hpp"
#include "strongfaith/montecarlo.hpp"
#include "strongfaith/rng.hpp"
#include "strongfaith/verify.hpp"

namespace sf = strongfaith;

namespace {

// Exit codes: 0 success, 1 usage or domain error, 2 input parse error,
// 3 enumeration budget exceeded, 4 verification failure.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitBudget = 3;
constexpr int kExitVerify = 4;

int default_workers() {
  const char* env = std::getenv("STRONGFAITH_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024)
    throw sf::InvalidArgument(std::string("STRONGFAITH_THREADS must be a positive "
                                          "integer, got '") + env + "'");
  return static_cast<int>(v);
}

std::vector<sf::TripleClass> parse_classes(const std::vector<std::string>& names) {
  std::vector<sf::TripleClass> out;
  for (const std::string& n : names) out.push_back(sf::triple_class_from_string(n));
  return out;
}

// Writes `content` to `out_path` plus a replay manifest, or to stdout when no
// path was given.
void emit_output(const std::string& command, const std::vector<std::string>& argv,
                 std::uint64_t seed, const std::string& out_path,
                 const std::string& content, double wall_seconds) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  sf::write_text_file(out_path, content);
  sf::RunManifest manifest;
  manifest.command = command;
  manifest.argv = argv;
  manifest.seed = seed;
  manifest.wall_time_seconds = wall_seconds;
  manifest.outputs = {out_path};
  sf::write_manifest_file(out_path + ".manifest.json", manifest);
}

int dispatch(const std::vector<std::string>& args, bool allow_rerun);

int cmd_rerun(const std::string& manifest_path) {
  sf::RunManifest manifest = sf::read_manifest_file(manifest_path);
  if (manifest.argv.empty() || manifest.argv.front() == "rerun")
    throw sf::ParseError(manifest_path + ": manifest does not describe a replayable run");
  return dispatch(manifest.argv, false);
}

int dispatch(const std::vector<std::string>& args, bool allow_rerun) {
  CLI::App app{"lambda-strong-faithfulness geometry toolkit", "strongfaith"};
  app.require_subcommand(1);
  int rc = kExitOk;
  auto started = std::chrono::steady_clock::now();
  auto wall = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
        .count();
  };

  // gen -- write a DAG (optionally with sampled weights)
  auto* gen = app.add_subcommand("gen", "generate a DAG file");
  std::string gen_family, gen_out;
  int gen_p = 0, gen_levels = 0;
  double gen_en = -1.0, gen_c = 0.0, gen_r = 1.0;
  std::uint64_t gen_seed = 0;
  bool gen_weights = false;
  gen->add_option("--family", gen_family, "tree|cycle|bipartite|random")->required();
  gen->add_option("--p", gen_p, "vertex count")->required();
  gen->add_option("--en", gen_en, "expected neighborhood size (random family)");
  gen->add_option("--levels", gen_levels, "force the tree level count");
  gen->add_option("--seed", gen_seed, "structure seed");
  gen->add_flag("--with-weights", gen_weights, "sample edge weights");
  gen->add_option("--c", gen_c, "restricted cube threshold for weights");
  gen->add_option("--r", gen_r, "cube radius for weights");
  gen->add_option("--out", gen_out, "output path (default stdout)");
  gen->callback([&] {
    sf::Dag g = [&]() -> sf::Dag {
      if (gen_family == "tree")
        return gen_levels > 0 ? sf::make_tree_with_levels(gen_p, gen_levels, gen_seed)
                              : sf::make_tree(gen_p, gen_seed);
      if (gen_family == "cycle") return sf::make_cycle(gen_p);
      if (gen_family == "bipartite") return sf::make_bipartite(gen_p);
      if (gen_family == "random") {
        if (gen_en < 0.0)
          throw sf::InvalidArgument("--family random needs --en");
        return sf::make_random(gen_p, gen_en, gen_seed);
      }
      throw sf::InvalidArgument("unknown family '" + gen_family +
                                "' (tree|cycle|bipartite|random)");
    }();
    std::ostringstream os;
    if (gen_weights) {
      sf::CounterRng rng(gen_seed, 0);
      sf::Weights w = sf::sample_weights(g, gen_c, gen_r, rng);
      sf::write_weighted_dag(os, g, w.a);
    } else {
      sf::write_dag(os, g);
    }
    emit_output("gen", args, gen_seed, gen_out, os.str(), wall());
  });

  // audit -- point-level faithfulness verdicts
  auto* aud = app.add_subcommand("audit", "audit one weighted DAG");
  std::string aud_dag, aud_weights, aud_out;
  std::vector<double> aud_lambdas{0.1, 0.01, 0.001};
  double aud_zero = sf::kDefaultZeroThreshold;
  std::uint64_t aud_budget = sf::kDefaultTripleBudget;
  aud->add_option("--dag", aud_dag, "DAG file (structure)");
  aud->add_option("--weights", aud_weights, "weighted DAG file");
  aud->add_option("--lambda", aud_lambdas, "lambda thresholds")->delimiter(',');
  aud->add_option("--zero-threshold", aud_zero, "structural-zero cutoff");
  aud->add_option("--budget", aud_budget, "triple enumeration budget");
  aud->add_option("--out", aud_out, "output path (default stdout)");
  aud->callback([&] {
    if (aud_dag.empty() && aud_weights.empty())
      throw sf::InvalidArgument("audit needs --weights (and optionally --dag)");
    sf::ParsedDag source = sf::read_dag_file(aud_weights.empty() ? aud_dag : aud_weights);
    if (!source.weights)
      throw sf::ParseError((aud_weights.empty() ? aud_dag : aud_weights) +
                           ": no weight column");
    if (!aud_dag.empty() && !aud_weights.empty()) {
      sf::ParsedDag structure = sf::read_dag_file(aud_dag);
      if (structure.dag.p() != source.dag.p() ||
          structure.dag.edges() != source.dag.edges())
        throw sf::ParseError(aud_weights + ": edges do not match " + aud_dag);
    }
    sf::Weights w = sf::make_weights(source.dag, *source.weights);
    sf::AuditReport report = sf::audit(w, aud_lambdas, aud_zero, aud_budget);
    emit_output("audit", args, 0, aud_out, report.to_json().dump(2) + "\n", wall());
  });

  // sweep -- Monte Carlo volume estimation
  auto* sw = app.add_subcommand("sweep", "estimate unfaithful volume proportions");
  std::string sw_family, sw_dag, sw_out;
  int sw_p = 0;
  double sw_en = -1.0;
  std::vector<double> sw_en_list;
  std::vector<std::string> sw_class_names{"full", "restricted", "adjacent"};
  sf::SweepConfig cfg;
  cfg.workers = 0;  // resolved after parsing so the env var is read lazily
  sw->add_option("--family", sw_family, "tree|cycle|bipartite|random");
  sw->add_option("--dag", sw_dag, "fixed DAG file (overrides --family)");
  sw->add_option("--p", sw_p, "vertex count");
  sw->add_option("--en", sw_en, "neighborhood size for one fixed random DAG");
  sw->add_option("--en-list", sw_en_list, "neighborhood sizes (random ensemble)")
      ->delimiter(',');
  sw->add_option("--lambda-list", cfg.lambdas, "lambda thresholds")->delimiter(',');
  sw->add_option("--c-list", cfg.cs, "restricted cube thresholds")->delimiter(',');
  sw->add_option("--r", cfg.r, "cube radius");
  sw->add_option("--samples", cfg.samples, "samples per cell");
  sw->add_option("--classes", sw_class_names, "triple classes")->delimiter(',');
  sw->add_option("--seed", cfg.seed, "master seed");
  sw->add_option("--budget", cfg.triple_budget, "triple enumeration budget");
  sw->add_option("--max-full-p", cfg.max_full_p, "full-class vertex cap");
  sw->add_option("--zero-threshold", cfg.zero_threshold, "structural-zero cutoff");
  sw->add_option("--workers", cfg.workers, "worker threads (default STRONGFAITH_THREADS or 1)");
  sw->add_option("--out", sw_out, "output path (default stdout)");
  sw->callback([&] {
    cfg.classes = parse_classes(sw_class_names);
    if (cfg.workers <= 0) cfg.workers = default_workers();
    std::vector<sf::SweepRow> rows;
    if (!sw_dag.empty()) {
      sf::ParsedDag pd = sf::read_dag_file(sw_dag);
      rows = sf::estimate_fixed_dag(pd.dag, "custom", cfg);
    } else if (sw_family == "random" && !sw_en_list.empty()) {
      rows = sf::estimate_random_ensemble(sw_p, sw_en_list, cfg);
    } else if (sw_family == "random") {
      if (sw_en < 0.0)
        throw sf::InvalidArgument("--family random needs --en or --en-list");
      rows = sf::estimate_fixed_dag(sf::make_random(sw_p, sw_en, cfg.seed), "random", cfg);
    } else if (sw_family == "tree") {
      rows = sf::estimate_fixed_dag(sf::make_tree(sw_p, cfg.seed), "tree", cfg);
    } else if (sw_family == "cycle") {
      rows = sf::estimate_fixed_dag(sf::make_cycle(sw_p), "cycle", cfg);
    } else if (sw_family == "bipartite") {
      rows = sf::estimate_fixed_dag(sf::make_bipartite(sw_p), "bipartite", cfg);
    } else {
      throw sf::InvalidArgument(sw_family.empty()
                                    ? "sweep needs --dag or --family"
                                    : "unknown family '" + sw_family + "'");
    }
    std::vector<std::string> noted;
    for (const sf::SweepRow& row : rows)
      if (!row.available &&
          std::find(noted.begin(), noted.end(), row.reason) == noted.end()) {
        std::cerr << "note: " << sf::to_string(row.cls)
                  << " cells unavailable: " << row.reason << "\n";
        noted.push_back(row.reason);
      }
    std::ostringstream os;
    sf::write_sweep_csv(os, rows);
    emit_output("sweep", args, cfg.seed, sw_out, os.str(), wall());
  });

  // bounds -- closed-form lower bound table
  auto* bn = app.add_subcommand("bounds", "closed-form lower bounds");
  std::vector<std::string> bn_families{"tree", "cycle", "bipartite"};
  std::vector<int> bn_ps;
  std::vector<double> bn_lambdas{0.1, 0.01, 0.001};
  std::vector<std::string> bn_class_names{"full", "restricted", "adjacent"};
  double bn_r = 1.0;
  std::string bn_out;
  bn->add_option("--families,--family", bn_families, "tree|cycle|bipartite")
      ->delimiter(',');
  bn->add_option("--p-list", bn_ps, "vertex counts")->delimiter(',')->required();
  bn->add_option("--lambda-list", bn_lambdas, "lambda thresholds")->delimiter(',');
  bn->add_option("--classes", bn_class_names, "triple classes")->delimiter(',');
  bn->add_option("--r", bn_r, "cube radius");
  bn->add_option("--out", bn_out, "output path (default stdout)");
  bn->callback([&] {
    std::vector<sf::GraphFamily> families;
    for (const std::string& f : bn_families)
      families.push_back(sf::graph_family_from_string(f));
    std::vector<sf::BoundRow> rows =
        sf::bound_table(families, bn_ps, bn_lambdas, parse_classes(bn_class_names), bn_r);
    std::ostringstream os;
    sf::write_bounds_csv(os, rows);
    emit_output("bounds", args, 0, bn_out, os.str(), wall());
  });

  // verify -- structural identity cross-checks
  auto* vf = app.add_subcommand("verify", "run the identity cross-check suite");
  int vf_pmax = 5;
  bool vf_corrupt = false;
  vf->add_option("--p-max", vf_pmax, "largest vertex count to check");
  vf->add_flag("--inject-k-corruption", vf_corrupt, "")->group("");
  vf->callback([&] {
    sf::VerifyReport report = sf::run_verification(vf_pmax, vf_corrupt);
    for (const sf::VerifyCheck& check : report.checks) {
      if (check.ok)
        std::cout << "ok   " << check.name << " (" << check.assertions
                  << " assertions)\n";
      else
        std::cout << "FAIL " << check.name << ": " << check.detail << "\n";
    }
    if (!report.ok) {
      std::cout << "verification failed\n";
      rc = kExitVerify;
    } else {
      std::cout << "all identities verified\n";
    }
  });

  // rerun -- replay a manifest
  auto* rr = app.add_subcommand("rerun", "replay a run manifest");
  std::string rr_manifest;
  rr->add_option("--manifest", rr_manifest, "manifest path")->required();
  rr->callback([&] {
    if (!allow_rerun) throw sf::ParseError("nested rerun is not allowed");
    rc = cmd_rerun(rr_manifest);
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(args, true);
  } catch (const sf::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const sf::BudgetError& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const sf::NumericError& e) {
    std::cerr << "numeric check failed: " << e.what() << "\n";
    return kExitVerify;
  } catch (const sf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
