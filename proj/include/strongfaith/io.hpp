#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "strongfaith/bounds.hpp"
#include "strongfaith/dag.hpp"
#include "strongfaith/errors.hpp"
#include "strongfaith/montecarlo.hpp"

namespace strongfaith {

inline constexpr const char* kArtifactVersion = "1.0.0";

// ---- number formatting -----------------------------------------------------

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Fixed CSV form: 6 significant digits.
inline std::string format_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::string(buf);
}

namespace detail {

inline double parse_double(const std::string& tok, const std::string& where) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw ParseError(where + ": expected a number, got '" + tok + "'");
  return v;
}

inline long parse_int(const std::string& tok, const std::string& where) {
  long v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw ParseError(where + ": expected an integer, got '" + tok + "'");
  return v;
}

}  // namespace detail

// ---- DAG text format ---------------------------------------------------------
// Line-oriented: '#' starts a comment, blank lines are skipped. The first data
// line is "p N"; every following data line is an edge "i j" (1-based, i < j),
// optionally "i j w" with its weight. A file mixes weighted and unweighted
// edge lines never.

inline void write_dag(std::ostream& os, const Dag& g) {
  os << "p " << g.p() << "\n";
  for (const Edge& e : g.edges()) os << e.i << " " << e.j << "\n";
}

inline void write_weighted_dag(std::ostream& os, const Dag& g,
                               const std::vector<double>& a) {
  if (a.size() != g.edges().size())
    throw InvalidArgument("weight count does not match edge count");
  os << "p " << g.p() << "\n";
  for (std::size_t e = 0; e < g.edges().size(); ++e)
    os << g.edges()[e].i << " " << g.edges()[e].j << " " << format_double(a[e]) << "\n";
}

struct ParsedDag {
  Dag dag;
  std::optional<std::vector<double>> weights;
};

inline ParsedDag read_dag_text(std::istream& is, const std::string& name = "<input>") {
  std::string line;
  int lineno = 0;
  bool saw_header = false;
  int p = 0;
  std::vector<std::pair<Edge, double>> weighted;
  std::vector<Edge> plain;
  while (std::getline(is, line)) {
    ++lineno;
    std::string where = name + ":" + std::to_string(lineno);
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> toks;
    for (std::string tok; ls >> tok;) toks.push_back(tok);
    if (toks.empty()) continue;
    if (!saw_header) {
      if (toks.size() != 2 || toks[0] != "p")
        throw ParseError(where + ": expected header 'p N'");
      long n = detail::parse_int(toks[1], where);
      if (n < 1 || n > 64) throw ParseError(where + ": vertex count must be in 1..64");
      p = static_cast<int>(n);
      saw_header = true;
      continue;
    }
    if (toks.size() != 2 && toks.size() != 3)
      throw ParseError(where + ": expected 'i j' or 'i j weight'");
    long i = detail::parse_int(toks[0], where);
    long j = detail::parse_int(toks[1], where);
    if (i < 1 || j < 1 || i > p || j > p || i >= j)
      throw ParseError(where + ": edge needs 1 <= i < j <= p");
    Edge e{static_cast<int>(i), static_cast<int>(j)};
    if (toks.size() == 3) {
      if (!plain.empty()) throw ParseError(where + ": mixed weighted and plain edges");
      weighted.push_back({e, detail::parse_double(toks[2], where)});
    } else {
      if (!weighted.empty()) throw ParseError(where + ": mixed weighted and plain edges");
      plain.push_back(e);
    }
  }
  if (!saw_header) throw ParseError(name + ": missing header 'p N'");
  try {
    if (!weighted.empty()) {
      std::sort(weighted.begin(), weighted.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      std::vector<Edge> edges;
      std::vector<double> a;
      for (const auto& [e, w] : weighted) {
        edges.push_back(e);
        a.push_back(w);
      }
      return {Dag(p, std::move(edges)), std::move(a)};
    }
    std::sort(plain.begin(), plain.end());
    return {Dag(p, std::move(plain)), std::nullopt};
  } catch (const InvalidArgument& e) {
    throw ParseError(name + ": " + e.what());
  }
}

// ---- files -------------------------------------------------------------------

inline std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open '" + path + "' for reading");
  std::ostringstream out;
  out << is.rdbuf();
  return std::move(out).str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParseError("cannot open '" + path + "' for writing");
  os << content;
  if (!os) throw ParseError("failed writing '" + path + "'");
}

inline ParsedDag read_dag_file(const std::string& path) {
  std::istringstream is(read_text_file(path));
  return read_dag_text(is, path);
}

// ---- CSV ---------------------------------------------------------------------
// One fixed header per table; unavailable numeric cells print NA. The bounds
// table reuses the sweep schema (join on family,p,lambda,class) and appends
// bound and exponent columns.

inline constexpr const char* kSweepCsvHeader =
    "family,p,density_or_en,lambda,c,class,samples,proportion,ci95,seed";
inline constexpr const char* kBoundsCsvHeader =
    "family,p,density_or_en,lambda,c,class,samples,proportion,ci95,seed,bound,exponent";

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kSweepCsvHeader << "\n";
  for (const SweepRow& r : rows) {
    os << r.family << "," << r.p << "," << format_g6(r.density_or_en) << ","
       << format_g6(r.lambda) << "," << format_g6(r.c) << "," << to_string(r.cls) << ","
       << r.samples << ",";
    if (r.available)
      os << format_g6(r.proportion) << "," << format_g6(r.ci95);
    else
      os << "NA,NA";
    os << "," << r.seed << "\n";
  }
}

inline void write_bounds_csv(std::ostream& os, const std::vector<BoundRow>& rows) {
  os << kBoundsCsvHeader << "\n";
  for (const BoundRow& r : rows) {
    os << to_string(r.family) << "," << r.p << ",NA," << format_g6(r.lambda) << ",NA,"
       << to_string(r.cls) << ",NA,NA,NA,NA," << format_g6(r.bound) << "," << r.exponent
       << "\n";
  }
}

// ---- run manifest --------------------------------------------------------------
// Everything needed to replay a command bit-exactly: the argv it ran with.

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::uint64_t seed = 0;
  std::string version = kArtifactVersion;
  double wall_time_seconds = 0.0;
  std::vector<std::string> outputs;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["argv"] = argv;
    j["seed"] = seed;
    j["version"] = version;
    j["wall_time_seconds"] = wall_time_seconds;
    j["outputs"] = outputs;
    return j;
  }

  static RunManifest from_json(const nlohmann::json& j, const std::string& name) {
    RunManifest m;
    try {
      m.command = j.at("command").get<std::string>();
      m.argv = j.at("argv").get<std::vector<std::string>>();
      m.seed = j.at("seed").get<std::uint64_t>();
      m.version = j.at("version").get<std::string>();
      m.wall_time_seconds = j.value("wall_time_seconds", 0.0);
      m.outputs = j.value("outputs", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(name + ": bad manifest: " + e.what());
    }
    return m;
  }
};

inline RunManifest read_manifest_file(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw ParseError(path + ": not valid JSON");
  return RunManifest::from_json(j, path);
}

inline void write_manifest_file(const std::string& path, const RunManifest& m) {
  write_text_file(path, m.to_json().dump(2) + "\n");
}

}  // namespace strongfaith
