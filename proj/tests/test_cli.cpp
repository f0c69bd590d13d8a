// End-to-end tests for the scalent CLI binary and the public C API surface.
// The path to the CLI executable is passed as the last command-line argument.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "scalent.h"

namespace fs = std::filesystem;

namespace {

std::string g_cli;    // path to the scalent executable
fs::path g_scratch;   // per-run temp directory

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE_MESSAGE(bool(f), "cannot read " << p.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  REQUIRE(bool(f));
  f << s;
}

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

// Run the CLI through /bin/sh. `env_prefix` may hold VAR=value assignments.
RunResult run(const std::string& args, const std::string& env_prefix = "") {
  static int counter = 0;
  fs::path so = g_scratch / ("stdout." + std::to_string(counter));
  fs::path se = g_scratch / ("stderr." + std::to_string(counter));
  ++counter;
  std::string cmd = env_prefix + (env_prefix.empty() ? "" : " ") + "'" + g_cli + "' " + args +
                    " >'" + so.string() + "' 2>'" + se.string() + "'";
  int rc = std::system(cmd.c_str());
  RunResult r;
  r.code = (rc < 0) ? rc : WEXITSTATUS(rc);
  r.out = slurp(so);
  r.err = slurp(se);
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

const char* kValidTriple =
    "3\n"
    "0 1 2\n"
    "1 0 1\n"
    "2 1 0\n"
    "weights:\n"
    "0.5 0.25 0.25\n";

// d(0,2) = 5 > d(0,1) + d(1,2) = 2 violates the triangle inequality
const char* kBrokenTriple =
    "3\n"
    "0 1 5\n"
    "1 0 1\n"
    "5 1 0\n";

}  // namespace

TEST_CASE("cli: triple validate exit codes and report") {
  fs::path good = g_scratch / "good.triple";
  fs::path bad = g_scratch / "bad.triple";
  spit(good, kValidTriple);
  spit(bad, kBrokenTriple);

  auto ok = run("triple validate " + q(good));
  CHECK(ok.code == 0);
  CHECK(ok.out.find("\"valid\": true") != std::string::npos);
  CHECK(ok.out.find("scalent-report-v1") != std::string::npos);

  fs::path rep = g_scratch / "validate.json";
  auto notok = run("triple validate " + q(bad) + " --out " + q(rep));
  CHECK(notok.code == 1);
  CHECK(slurp(rep).find("\"valid\": false") != std::string::npos);

  // an unreadable path is a usage error, not an invalid triple
  auto missing = run("triple validate " + q(g_scratch / "nope.triple"));
  CHECK(missing.code == 64);

  // structurally malformed file (weights do not sum to 1)
  fs::path mangled = g_scratch / "mangled.triple";
  spit(mangled, "2\n0 1\n1 0\nweights:\n0.9 0.9\n");
  auto bad2 = run("triple validate " + q(mangled));
  CHECK(bad2.code == 1);
}

TEST_CASE("cli: entropy eps trivial threshold and bits flag") {
  fs::path good = g_scratch / "ent.triple";
  spit(good, kValidTriple);

  auto r = run("entropy eps --triple " + q(good) + " --eps 1.0,2.5");
  CHECK(r.code == 0);
  // eps >= 1 always gives H = 0 (one part covers everything)
  CHECK(r.out.find("\"H\": 0.0") != std::string::npos);
  CHECK(r.out.find("\"k\": 1") != std::string::npos);

  auto nats = run("entropy eps --triple " + q(good) + " --eps 0.4");
  auto bits = run("--bits entropy eps --triple " + q(good) + " --eps 0.4");
  CHECK(nats.code == 0);
  CHECK(bits.code == 0);
  CHECK(nats.out != bits.out);

  auto kant = run("entropy kantorovich --triple " + q(good) + " --eps 0.2");
  CHECK(kant.code == 0);
  CHECK(kant.out.find("\"H\"") != std::string::npos);
}

TEST_CASE("cli: usage errors exit 64") {
  CHECK(run("triple validate somefile --bogus-flag").code == 64);
  CHECK(run("frobnicate").code == 64);
  CHECK(run("entropy eps --eps 0.5").code == 64);  // missing required --triple
}

TEST_CASE("cli: manifest and rerun verify bytes across thread counts") {
  fs::path grid = g_scratch / "grid.csv";
  auto r = run("--seed 7 --threads 1 scale grid --system bernoulli:0.5 --eps 0.25,0.5 --n 2,3,4 --out " +
               q(grid));
  REQUIRE(r.code == 0);
  std::string grid_bytes = slurp(grid);
  CHECK(grid_bytes.find("eps") != std::string::npos);

  fs::path manifest = grid;
  manifest += ".manifest.json";
  REQUIRE(fs::exists(manifest));
  std::string m = slurp(manifest);
  CHECK(m.find("scalent-manifest-v1") != std::string::npos);
  CHECK(m.find("\"seed\": 7") != std::string::npos);

  // re-running with a different thread count must reproduce identical bytes
  auto rr = run("rerun --manifest " + q(manifest) + " --threads 8");
  CHECK(rr.code == 0);
  CHECK(rr.out.find("rerun: outputs byte-identical") != std::string::npos);
  CHECK(slurp(grid) == grid_bytes);

  // corrupt the recorded hash: rerun must report a mismatch and exit 1
  auto pos = m.find("\"hash\": \"");
  REQUIRE(pos != std::string::npos);
  pos += 9;
  std::string tampered = m;
  for (int i = 0; i < 16; ++i) tampered[pos + i] = (tampered[pos + i] == '0') ? '1' : '0';
  fs::path bad_manifest = g_scratch / "tampered.manifest.json";
  spit(bad_manifest, tampered);
  auto rbad = run("rerun --manifest " + q(bad_manifest));
  CHECK(rbad.code == 1);
  CHECK(rbad.out.find("rerun: outputs differ") != std::string::npos);
}

TEST_CASE("cli: system realize cache hit, miss, and corruption recovery") {
  fs::path cache = g_scratch / "cache";
  fs::create_directories(cache);
  std::string env = "SCALENT_CACHE_DIR='" + cache.string() + "'";
  std::string base = "system realize --system bernoulli:0.5 --n 3 --out ";

  fs::path a = g_scratch / "a.triple", b = g_scratch / "b.triple", c = g_scratch / "c.triple";
  auto cold = run("--seed 3 " + base + q(a), env);
  REQUIRE(cold.code == 0);
  CHECK(cold.err.find("cache hit") == std::string::npos);

  // exactly one entry (+ its .check file) was written
  int entries = 0;
  fs::path key;
  for (auto& e : fs::directory_iterator(cache))
    if (e.path().extension() == ".triple") {
      key = e.path();
      ++entries;
    }
  REQUIRE(entries == 1);
  CHECK(fs::exists(key.string() + ".check"));

  auto warm = run("--seed 3 " + base + q(b), env);
  REQUIRE(warm.code == 0);
  CHECK(warm.err.find("cache hit") != std::string::npos);
  CHECK(slurp(a) == slurp(b));

  // corrupt the cached payload: the CLI must detect it, recompute, and repair
  std::string cached = slurp(key);
  spit(key, cached + "garbage\n");
  auto fix = run("--seed 3 " + base + q(c), env);
  REQUIRE(fix.code == 0);
  CHECK(fix.err.find("cache entry corrupt, recomputing") != std::string::npos);
  CHECK(slurp(c) == slurp(a));
  CHECK(slurp(key) == cached);  // repaired in place

  // a different seed is a different cache key
  auto other = run("--seed 4 " + base + q(g_scratch / "d.triple"), env);
  REQUIRE(other.code == 0);
  CHECK(other.err.find("cache hit") == std::string::npos);
  entries = 0;
  for (auto& e : fs::directory_iterator(cache))
    if (e.path().extension() == ".triple") ++entries;
  CHECK(entries == 2);
}

TEST_CASE("cli: svg plot is produced, deterministic, and rejects empty profiles") {
  fs::path grid = g_scratch / "plot_grid.csv";
  REQUIRE(run("scale grid --system cube:2 --eps 0.3,0.6 --n 1,2 --out " + q(grid)).code == 0);

  fs::path s1 = g_scratch / "p1.svg", s2 = g_scratch / "p2.svg";
  REQUIRE(run("plot --profile " + q(grid) + " --out " + q(s1)).code == 0);
  REQUIRE(run("plot --profile " + q(grid) + " --out " + q(s2)).code == 0);
  std::string svg = slurp(s1);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg == slurp(s2));

  // a --svg companion written alongside a grid matches the standalone plot
  fs::path grid2 = g_scratch / "plot_grid2.csv";
  fs::path s3 = g_scratch / "p3.svg";
  REQUIRE(run("scale grid --system cube:2 --eps 0.3,0.6 --n 1,2 --out " + q(grid2) +
              " --svg " + q(s3)).code == 0);
  CHECK(slurp(s3) == svg);

  fs::path empty = g_scratch / "empty.csv";
  spit(empty, "eps,n,H,lo,hi,method\n");
  auto fail = run("plot --profile " + q(empty) + " --out " + q(g_scratch / "nope.svg"));
  CHECK(fail.code == 1);
  CHECK(fail.err.find("empty profile") != std::string::npos);
}

TEST_CASE("cli: config file fills unset flags and explicit flags win") {
  fs::path cfg = g_scratch / "scalent.cfg";
  spit(cfg, "# sampling defaults\nseed = 5\nthreads = 2\n");
  std::string common = "mdist sample --system cube:2 --realize-n 4 --n 3 --replicas 2";

  auto via_cfg = run("--config " + q(cfg) + " " + common);
  auto direct5 = run("--seed 5 " + common);
  auto direct9 = run("--seed 9 " + common);
  REQUIRE(via_cfg.code == 0);
  CHECK(via_cfg.out == direct5.out);
  CHECK(direct5.out != direct9.out);

  // an explicit --seed overrides the config value
  auto both = run("--config " + q(cfg) + " --seed 9 " + common);
  CHECK(both.out == direct9.out);

  auto broken = run("--config " + q(g_scratch / "broken.cfg") + " " + common);
  CHECK(broken.code == 1);  // unreadable config file
  fs::path badcfg = g_scratch / "bad.cfg";
  spit(badcfg, "seed 5\n");
  CHECK(run("--config " + q(badcfg) + " " + common).code == 64);
}

TEST_CASE("c api: parse, validate, entropy, and error reporting round trip") {
  slt_triple* t = nullptr;
  REQUIRE(slt_triple_parse(kValidTriple, &t) == 0);

  char* text = nullptr;
  REQUIRE(slt_triple_format(t, &text) == 0);
  slt_triple* t2 = nullptr;
  REQUIRE(slt_triple_parse(text, &t2) == 0);
  char* text2 = nullptr;
  REQUIRE(slt_triple_format(t2, &text2) == 0);
  CHECK(std::string(text) == text2);  // format/parse round trip is stable
  slt_string_free(text);
  slt_string_free(text2);
  slt_triple_free(t2);

  int valid = -1;
  char* rep = nullptr;
  REQUIRE(slt_triple_validate(t, 1, &valid, &rep) == 0);
  CHECK(valid == 1);
  CHECK(std::string(rep).find("scalent-report-v1") != std::string::npos);
  slt_string_free(rep);

  rep = nullptr;
  REQUIRE(slt_entropy_eps(t, 2.0, "exact", 0, &rep) == 0);
  CHECK(std::string(rep).find("\"k\": 1") != std::string::npos);
  slt_string_free(rep);
  slt_triple_free(t);

  slt_triple* broken = nullptr;
  CHECK(slt_triple_parse("2\n0 1\n", &broken) == 1);
  CHECK(std::string(slt_last_error()).size() > 0);

  rep = nullptr;
  CHECK(slt_system_invariants("tent:2", &rep) == 64);  // unknown descriptor is a usage error
  CHECK(std::string(slt_last_error()).size() > 0);

  CHECK(std::string(slt_version()).size() > 0);
}

int main(int argc, char** argv) {
  // the harness appends the scalent executable path as the last argument
  std::vector<const char*> rest;
  for (int i = 0; i < argc; ++i) {
    if (i > 0 && argv[i][0] != '-' && g_cli.empty() && fs::exists(argv[i])) {
      g_cli = fs::absolute(argv[i]).string();
      continue;
    }
    rest.push_back(argv[i]);
  }
  if (g_cli.empty()) {
    std::fprintf(stderr, "usage: test_cli <path-to-scalent-binary> [doctest args]\n");
    return 2;
  }
  g_scratch = fs::temp_directory_path() /
              ("scalent_cli_test_" + std::to_string(::getpid()));
  fs::remove_all(g_scratch);
  fs::create_directories(g_scratch);
  doctest::Context ctx((int)rest.size(), const_cast<char**>(rest.data()));
  int rc = ctx.run();
  fs::remove_all(g_scratch);
  return rc;
}
