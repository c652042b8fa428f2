#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "strongfaith/io.hpp"

using namespace strongfaith;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int status = -1;
  std::string out;
};

// Runs the installed binary through the shell; stderr is merged unless the
// caller wants it dropped to keep CSV output clean.
CmdResult run(const std::string& args, bool merge_stderr = true,
              const std::string& env = "") {
  std::string cmd = (env.empty() ? "" : env + " ") + std::string(STRONGFAITH_CLI_PATH) +
                    " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int rc = pclose(pipe);
  r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::path("cli_scratch") / std::to_string(::getpid())) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all("cli_scratch"); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("gen is deterministic and writes canonical families") {
  CmdResult a = run("gen --family tree --p 7 --seed 5");
  CmdResult b = run("gen --family tree --p 7 --seed 5");
  REQUIRE(a.status == 0);
  REQUIRE(a.out == b.out);
  REQUIRE(a.out.rfind("p 7\n", 0) == 0);

  CmdResult bp = run("gen --family bipartite --p 6");
  REQUIRE(bp.status == 0);
  int edges = -1;  // subtract the header line
  for (char ch : bp.out) edges += ch == '\n';
  REQUIRE(edges == 8);

  REQUIRE(run("gen --family random --p 5").status == 1);
  REQUIRE(run("gen --family pentagon --p 5").status == 1);
}

TEST_CASE("gen writes a file plus a replayable manifest") {
  TempDir tmp;
  std::string dag = tmp.file("w.dag");
  CmdResult r = run("gen --family tree --p 5 --seed 1 --with-weights --c 0.25 --out " + dag);
  REQUIRE(r.status == 0);
  REQUIRE(r.out.empty());
  ParsedDag pd = read_dag_file(dag);
  REQUIRE(pd.weights.has_value());
  for (double w : *pd.weights) REQUIRE(std::fabs(w) >= 0.25);

  RunManifest m = read_manifest_file(dag + ".manifest.json");
  REQUIRE(m.command == "gen");
  REQUIRE(m.argv.front() == "gen");
  REQUIRE(m.outputs == std::vector<std::string>{dag});
  REQUIRE(m.version == kArtifactVersion);
}

TEST_CASE("audit emits the documented JSON report") {
  TempDir tmp;
  std::string dag = tmp.file("a.dag");
  write_text_file(dag, "p 2\n1 2 0.05\n");
  CmdResult r = run("audit --weights " + dag + " --lambda 0.1,0.01");
  REQUIRE(r.status == 0);
  nlohmann::json j = nlohmann::json::parse(r.out);
  REQUIRE(j["lambda_values"].size() == 2);
  REQUIRE(j["full_class_skipped"] == false);
  REQUIRE(j["rows"].size() == 6);
  REQUIRE(j["rows"][0]["class"] == "full");
  REQUIRE(j["rows"][0]["verdict"] == false);
  REQUIRE(j["rows"][0]["min_parcorr"].get<double>() ==
          Catch::Approx(0.05 / std::sqrt(1.0025)));

  // Structure/weights consistency check.
  std::string other = tmp.file("b.dag");
  write_text_file(other, "p 2\n1 2\n");
  REQUIRE(run("audit --dag " + other + " --weights " + dag).status == 0);
  std::string bigger = tmp.file("c.dag");
  write_text_file(bigger, "p 3\n1 2\n2 3\n");
  REQUIRE(run("audit --dag " + bigger + " --weights " + dag).status == 2);
  REQUIRE(run("audit --weights " + other).status == 2);  // no weight column
  REQUIRE(run("audit").status == 1);
}

TEST_CASE("sweep prints the frozen CSV schema") {
  CmdResult r = run("sweep --family tree --p 5 --samples 50 --seed 2", false);
  REQUIRE(r.status == 0);
  REQUIRE(r.out.rfind(std::string(kSweepCsvHeader) + "\n", 0) == 0);
  int lines = 0;
  for (char ch : r.out) lines += ch == '\n';
  REQUIRE(lines == 10);  // header + 3 lambdas x 3 classes

  REQUIRE(run("sweep --family tree --p 5 --classes M,N1,N2 --samples 20", false).out ==
          run("sweep --family tree --p 5 --classes full,restricted,adjacent --samples 20",
              false).out);
  REQUIRE(run("sweep --family tree --p 5 --classes bogus --samples 20").status == 1);
  REQUIRE(run("sweep --family tree --p 5 --lambda-list 1.5 --samples 20").status == 1);
  REQUIRE(run("sweep").status == 1);
  REQUIRE(run("sweep --dag cli_no_such_file.dag --samples 10").status == 2);
  REQUIRE(run("sweep --family random --p 20 --en 19 --samples 5").status == 3);
}

TEST_CASE("sweep respects the worker thread environment variable") {
  std::string args = "sweep --family tree --p 6 --samples 300 --seed 9";
  CmdResult one = run(args + " --workers 1", false);
  CmdResult four = run(args + " --workers 4", false);
  REQUIRE(one.status == 0);
  REQUIRE(one.out == four.out);

  CmdResult via_env = run(args, false, "STRONGFAITH_THREADS=3");
  REQUIRE(via_env.status == 0);
  REQUIRE(via_env.out == one.out);
  REQUIRE(run(args, true, "STRONGFAITH_THREADS=zz").status == 1);
  REQUIRE(run(args, true, "STRONGFAITH_THREADS=0").status == 1);
}

TEST_CASE("bounds emits the overlay table") {
  CmdResult r = run("bounds --families tree --p-list 10 --lambda-list 0.1 --classes full");
  REQUIRE(r.status == 0);
  REQUIRE(r.out == std::string(kBoundsCsvHeader) + "\n" +
                       "tree,10,NA,0.1,NA,full,NA,NA,NA,NA,0.61258,9\n");
  REQUIRE(run("bounds --p-list 2 --families cycle").status == 1);
  REQUIRE(run("bounds").status == 1);
}

TEST_CASE("verify reports identities and fails loudly when sabotaged") {
  CmdResult ok = run("verify --p-max 4");
  REQUIRE(ok.status == 0);
  REQUIRE(ok.out.find("all identities verified") != std::string::npos);
  REQUIRE(ok.out.find("sigma_times_k_is_identity") != std::string::npos);

  CmdResult bad = run("verify --p-max 3 --inject-k-corruption");
  REQUIRE(bad.status == 4);
  REQUIRE(bad.out.find("FAIL sigma_times_k_is_identity") != std::string::npos);
}

TEST_CASE("rerun replays a sweep byte for byte") {
  TempDir tmp;
  std::string csv = tmp.file("s.csv");
  CmdResult first =
      run("sweep --family cycle --p 5 --samples 200 --seed 6 --out " + csv, false);
  REQUIRE(first.status == 0);
  std::string original = read_text_file(csv);
  write_text_file(csv, "clobbered\n");

  CmdResult again = run("rerun --manifest " + csv + ".manifest.json", false);
  REQUIRE(again.status == 0);
  REQUIRE(read_text_file(csv) == original);

  REQUIRE(run("rerun --manifest cli_no_such.json").status == 2);
  std::string fake = tmp.file("fake.manifest.json");
  write_text_file(fake,
                  "{\"command\":\"rerun\",\"argv\":[\"rerun\"],\"seed\":0,"
                  "\"version\":\"1.0.0\"}");
  REQUIRE(run("rerun --manifest " + fake).status == 2);
}

TEST_CASE("help exits cleanly") {
  CmdResult r = run("--help");
  REQUIRE(r.status == 0);
  REQUIRE(r.out.find("Subcommands") != std::string::npos);
  REQUIRE(run("").status == 1);
  REQUIRE(run("definitely-not-a-command").status == 1);
}
