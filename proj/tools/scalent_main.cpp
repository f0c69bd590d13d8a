// scalent command-line front end. Links only the public C API; manifests,
// caching, config, and SVG plotting are CLI-side plumbing.
#include <CLI11.hpp>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "scalent.h"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliError {
  int code;
  std::string msg;
};
[[noreturn]] void die(int code, const std::string& msg) { throw CliError{code, msg}; }

uint64_t fnv64(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) die(1, "cannot read file: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) die(1, "cannot write file: " + path);
  f << content;
}

// API-result ownership helper
std::string take(char* s) {
  std::string out = s ? s : "";
  slt_string_free(s);
  return out;
}

void check(int rc) {
  if (rc != 0) die(rc, slt_last_error());
}

struct TripleHandle {
  slt_triple* t = nullptr;
  ~TripleHandle() { slt_triple_free(t); }
};

// Outputs written during one dispatch, for the manifest.
struct RunRecord {
  std::vector<std::pair<std::string, std::string>> outputs;  // path, fnv64 hex
};

void emit(RunRecord& rec, const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  spit(path, content);
  rec.outputs.emplace_back(path, hex64(fnv64(content)));
}

std::map<std::string, std::string> load_config(const std::string& path) {
  std::map<std::string, std::string> cfg;
  if (path.empty()) return cfg;
  std::istringstream is(slurp(path));
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto s = line.find_first_not_of(" \t\r");
    if (s == std::string::npos) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      die(64, "config: expected key=value at line " + std::to_string(lineno));
    auto trim = [](std::string x) {
      auto a = x.find_first_not_of(" \t\r");
      auto b = x.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : x.substr(a, b - a + 1);
    };
    cfg[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return cfg;
}

std::string svg_plot(const std::string& profile_csv, const std::string& base_tag) {
  // group (n, H) points per eps; log-log axes, H clamped below at 1e-6
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  std::istringstream is(profile_csv);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    if (++lineno == 1 || line.empty()) continue;
    std::vector<std::string> f;
    std::string cur;
    for (char c : line)
      if (c == ',') {
        f.push_back(cur);
        cur.clear();
      } else
        cur.push_back(c);
    f.push_back(cur);
    if (f.size() < 3) continue;
    try {
      double n = std::stod(f[1]), H = std::stod(f[2]);
      if (std::isnan(H)) continue;
      series[f[0]].push_back({std::log10(n), std::log10(std::max(H, 1e-6))});
    } catch (const std::exception&) {
      continue;
    }
  }
  if (series.empty()) die(1, "plot: empty profile");
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (auto& [eps, pts] : series)
    for (auto& [x, y] : pts) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (xmax - xmin < 1e-9) xmax = xmin + 1;
  if (ymax - ymin < 1e-9) ymax = ymin + 1;
  const double W = 640, Hh = 480, pad = 60;
  auto X = [&](double x) { return pad + (x - xmin) / (xmax - xmin) * (W - 2 * pad); };
  auto Y = [&](double y) { return Hh - pad - (y - ymin) / (ymax - ymin) * (Hh - 2 * pad); };
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Hh
     << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << Hh - 12
     << "\" text-anchor=\"middle\" font-size=\"13\">log10 n</text>\n";
  os << "<text x=\"16\" y=\"" << Hh / 2 << "\" font-size=\"13\" transform=\"rotate(-90 16 "
     << Hh / 2 << ")\" text-anchor=\"middle\">log10 H [" << base_tag << "]</text>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << Hh - pad << "\" x2=\"" << W - pad << "\" y2=\""
     << Hh - pad << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\""
     << Hh - pad << "\" stroke=\"black\"/>\n";
  int ci = 0;
  for (auto& [eps, pts] : series) {
    const char* col = colors[ci % 8];
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (auto& [x, y] : pts) os << X(x) << "," << Y(y) << " ";
    os << "\"/>\n";
    for (auto& [x, y] : pts)
      os << "<circle cx=\"" << X(x) << "\" cy=\"" << Y(y) << "\" r=\"2.5\" fill=\"" << col
         << "\"/>\n";
    os << "<text x=\"" << W - pad + 4 << "\" y=\"" << pad + 16 * ci << "\" font-size=\"12\" fill=\""
       << col << "\">eps=" << eps << "</text>\n";
    ++ci;
  }
  os << "</svg>\n";
  return os.str();
}

int dispatch(std::vector<std::string> args, bool write_manifest);

int do_rerun(const std::string& manifest_path, int threads_override) {
  json m = json::parse(slurp(manifest_path));
  std::vector<std::string> argv = m.at("argv").get<std::vector<std::string>>();
  if (threads_override > 0) {
    bool found = false;
    for (size_t i = 0; i + 1 < argv.size(); ++i)
      if (argv[i] == "--threads") {
        argv[i + 1] = std::to_string(threads_override);
        found = true;
      }
    if (!found) {
      argv.push_back("--threads");
      argv.push_back(std::to_string(threads_override));
    }
  }
  int rc = dispatch(argv, false);
  if (rc != 0) return rc;
  bool identical = true;
  for (const auto& o : m.at("outputs")) {
    std::string path = o.at("path");
    std::string want = o.at("hash");
    std::string have = hex64(fnv64(slurp(path)));
    if (have != want) {
      std::cerr << "rerun: output " << path << " differs (" << have << " != " << want << ")\n";
      identical = false;
    }
  }
  std::cout << (identical ? "rerun: outputs byte-identical\n" : "rerun: outputs differ\n");
  return identical ? 0 : 1;
}

int dispatch(std::vector<std::string> args, bool write_manifest) {
  CLI::App app{"scalent: scaling entropy of metric measure triples"};
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed = 0;
  int threads = 1;
  bool bits = false;
  long long exact_cap = 4096;
  app.add_option("--config", config_path, "flat key=value config file");
  auto* seed_opt = app.add_option("--seed", seed, "master seed");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads");
  auto* bits_opt = app.add_flag("--bits", bits, "report entropies in bits");
  auto* cap_opt = app.add_option("--exact-cap", exact_cap, "exact window cap");

  // triple
  auto* triple = app.add_subcommand("triple", "triple operations");
  auto* tval = triple->add_subcommand("validate", "validate a triple/matrix file");
  std::string tval_file, tval_out = "-";
  bool tval_strict = false;
  tval->add_option("file", tval_file)->required();
  tval->add_flag("--strict", tval_strict);
  tval->add_option("--out", tval_out);

  // entropy
  auto* entropy = app.add_subcommand("entropy", "epsilon-entropy");
  auto* eeps = entropy->add_subcommand("eps", "covering eps-entropy");
  std::string eeps_triple, eeps_eps, eeps_method = "exact", eeps_out = "-";
  eeps->add_option("--triple", eeps_triple)->required();
  eeps->add_option("--eps", eeps_eps)->required();
  eeps->add_option("--method", eeps_method);
  eeps->add_option("--out", eeps_out);
  auto* ek = entropy->add_subcommand("kantorovich", "Kantorovich eps-entropy");
  std::string ek_triple, ek_eps, ek_mode = "exact", ek_out = "-";
  ek->add_option("--triple", ek_triple)->required();
  ek->add_option("--eps", ek_eps)->required();
  ek->add_option("--mode", ek_mode);
  ek->add_option("--out", ek_out);

  // system
  auto* system = app.add_subcommand("system", "dynamical systems");
  auto* sreal = system->add_subcommand("realize", "realize an averaged triple");
  std::string sreal_desc, sreal_out = "-";
  int sreal_n = 1, sreal_mc = 512;
  sreal->add_option("--system", sreal_desc)->required();
  sreal->add_option("--n", sreal_n)->required();
  sreal->add_option("--mc", sreal_mc);
  sreal->add_option("--out", sreal_out);
  auto* sinv = system->add_subcommand("invariants", "substitution invariants");
  std::string sinv_desc, sinv_out = "-";
  sinv->add_option("--system", sinv_desc)->required();
  sinv->add_option("--out", sinv_out);

  // scale
  auto* scale = app.add_subcommand("scale", "scaling entropy grids");
  auto* sgrid = scale->add_subcommand("grid", "compute a Phi(eps, n) grid");
  std::string sg_desc, sg_eps, sg_n, sg_method = "exact", sg_out = "-", sg_svg;
  sgrid->add_option("--system", sg_desc)->required();
  sgrid->add_option("--eps", sg_eps)->required();
  sgrid->add_option("--n", sg_n)->required();
  sgrid->add_option("--method", sg_method);
  sgrid->add_option("--out", sg_out);
  sgrid->add_option("--svg", sg_svg);
  auto* sfit = scale->add_subcommand("fit", "fit asymptotic classes");
  std::string sf_profile, sf_sigma, sf_out = "-", sf_classes = "auto";
  int sf_nmin = 2;
  sfit->add_option("--profile", sf_profile)->required();
  sfit->add_option("--nmin", sf_nmin);
  sfit->add_option("--sigma", sf_sigma);
  sfit->add_option("--classes", sf_classes);
  sfit->add_option("--out", sf_out);

  // mdist (matrix distributions)
  auto* mdist = app.add_subcommand("mdist", "matrix distributions");
  std::string md_desc, md_out = "-", md_sizes, md_stat = "spectral";
  int md_n = 5, md_replicas = 30, md_realize = 4;
  for (auto* sub : {mdist->add_subcommand("sample", "sample empirical D_n"),
                    mdist->add_subcommand("spectra", "minor spectra CSV"),
                    mdist->add_subcommand("invariance", "permutation-invariance test"),
                    mdist->add_subcommand("project", "projectivity check")}) {
    sub->add_option("--system", md_desc)->required();
    sub->add_option("--n", md_n);
    sub->add_option("--replicas", md_replicas);
    sub->add_option("--realize-n", md_realize);
    sub->add_option("--out", md_out);
    if (sub->get_name() == "spectra") sub->add_option("--sizes", md_sizes);
    if (sub->get_name() == "invariance") sub->add_option("--statistic", md_stat);
  }

  // dist
  auto* dist = app.add_subcommand("dist", "distances between triples");
  auto* dpair = dist->add_subcommand("pair", "Dist_m / Dist_K of two triples");
  std::string dp_a, dp_b, dp_metric = "distm", dp_mode = "exact", dp_out = "-";
  long long dp_budget = 200000;
  dpair->add_option("--a", dp_a)->required();
  dpair->add_option("--b", dp_b)->required();
  dpair->add_option("--metric", dp_metric);
  dpair->add_option("--mode", dp_mode);
  dpair->add_option("--budget", dp_budget);
  dpair->add_option("--out", dp_out);

  // omega
  auto* omega = app.add_subcommand("omega", "partition-function metric");
  auto* oreal = omega->add_subcommand("realize", "realize an Omega triple");
  std::string or_desc, or_out = "-", or_triple_out;
  double or_z = 0.5, or_tol = 1e-6;
  int or_mc = 512;
  oreal->add_option("--system", or_desc)->required();
  oreal->add_option("--z", or_z)->required();
  oreal->add_option("--tol", or_tol);
  oreal->add_option("--mc", or_mc);
  oreal->add_option("--out", or_out);
  oreal->add_option("--triple-out", or_triple_out);

  // plot
  auto* plot = app.add_subcommand("plot", "SVG log-log chart of a profile");
  std::string pl_profile, pl_out;
  plot->add_option("--profile", pl_profile)->required();
  plot->add_option("--out", pl_out)->required();

  // rerun
  auto* rerun = app.add_subcommand("rerun", "re-run a manifest and verify bytes");
  std::string rr_manifest;
  int rr_threads = 0;
  rerun->add_option("--manifest", rr_manifest)->required();
  rerun->add_option("--threads", rr_threads);

  std::vector<const char*> cargs;
  cargs.push_back("scalent");
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse((int)cargs.size(), cargs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 64;
  }

  // config file values fill in flags the user did not pass
  auto cfg = load_config(config_path);
  auto cfg_fill = [&](const char* key, auto& var, CLI::Option* opt) {
    auto it = cfg.find(key);
    if (it != cfg.end() && opt->count() == 0) {
      std::istringstream is(it->second);
      is >> var;
    }
  };
  cfg_fill("seed", seed, seed_opt);
  cfg_fill("threads", threads, threads_opt);
  cfg_fill("exact-cap", exact_cap, cap_opt);
  if (cfg.count("bits") && bits_opt->count() == 0) bits = cfg["bits"] == "1" || cfg["bits"] == "true";

  RunRecord rec;
  int exit_code = 0;

  if (tval->parsed()) {
    TripleHandle h;
    int rc = slt_triple_load(tval_file.c_str(), &h.t);
    if (rc != 0) {
      // structural failure: emit a minimal report and exit 1
      json j{{"schema", "scalent-report-v1"}, {"valid", false},
             {"summary", slt_last_error()}};
      emit(rec, tval_out, j.dump(2) + "\n");
      exit_code = rc;
    } else {
      int valid = 0;
      char* rep = nullptr;
      check(slt_triple_validate(h.t, tval_strict ? 1 : 0, &valid, &rep));
      emit(rec, tval_out, take(rep) + "\n");
      exit_code = valid ? 0 : 1;
    }
  } else if (eeps->parsed() || ek->parsed()) {
    TripleHandle h;
    check(slt_triple_load((eeps->parsed() ? eeps_triple : ek_triple).c_str(), &h.t));
    std::istringstream is(eeps->parsed() ? eeps_eps : ek_eps);
    std::string tok;
    json rows = json::array();
    while (std::getline(is, tok, ',')) {
      char* rep = nullptr;
      if (eeps->parsed())
        check(slt_entropy_eps(h.t, std::stod(tok), eeps_method.c_str(), bits ? 1 : 0, &rep));
      else
        check(slt_entropy_kantorovich(h.t, std::stod(tok), ek_mode.c_str(), bits ? 1 : 0, &rep));
      rows.push_back(json::parse(take(rep)));
    }
    json j{{"schema", "scalent-report-v1"}, {"results", rows}};
    emit(rec, eeps->parsed() ? eeps_out : ek_out, j.dump(2) + "\n");
  } else if (sreal->parsed()) {
    // content-hash cache keyed by (system, n, cap, mc, seed)
    std::string key;
    const char* cache_dir = std::getenv("SCALENT_CACHE_DIR");
    if (cache_dir && *cache_dir) {
      std::ostringstream ks;
      ks << sreal_desc << "|" << sreal_n << "|" << exact_cap << "|" << sreal_mc << "|" << seed;
      key = (fs::path(cache_dir) / (hex64(fnv64(ks.str())) + ".triple")).string();
    }
    std::string text;
    bool hit = false;
    if (!key.empty() && fs::exists(key) && fs::exists(key + ".check")) {
      text = slurp(key);
      std::string want = slurp(key + ".check");
      if (hex64(fnv64(text)) == want) {
        hit = true;
        std::cerr << "cache hit: " << key << "\n";
      } else {
        std::cerr << "cache entry corrupt, recomputing: " << key << "\n";
        text.clear();
      }
    }
    if (!hit) {
      TripleHandle h;
      check(slt_triple_from_system(sreal_desc.c_str(), sreal_n, exact_cap, sreal_mc, seed, &h.t));
      char* txt = nullptr;
      check(slt_triple_format(h.t, &txt));
      text = take(txt);
      if (!key.empty()) {
        fs::create_directories(fs::path(key).parent_path());
        spit(key, text);
        spit(key + ".check", hex64(fnv64(text)));
      }
    }
    emit(rec, sreal_out, text);
  } else if (sinv->parsed()) {
    char* rep = nullptr;
    check(slt_system_invariants(sinv_desc.c_str(), &rep));
    emit(rec, sinv_out, take(rep) + "\n");
  } else if (sgrid->parsed()) {
    char* csv = nullptr;
    check(slt_phi_grid(sg_desc.c_str(), sg_eps.c_str(), sg_n.c_str(), sg_method.c_str(), seed,
                       threads, &csv));
    std::string profile = take(csv);
    emit(rec, sg_out, profile);
    if (!sg_svg.empty()) emit(rec, sg_svg, svg_plot(profile, bits ? "bits" : "nats"));
  } else if (sfit->parsed()) {
    char* rep = nullptr;
    check(slt_fit_class(slurp(sf_profile).c_str(), sf_nmin,
                        sf_sigma.empty() ? nullptr : sf_sigma.c_str(), &rep));
    emit(rec, sf_out, take(rep) + "\n");
  } else if (app.get_subcommand("mdist")->parsed()) {
    auto* md = app.get_subcommand("mdist");
    char* out = nullptr;
    if (md->get_subcommand("sample")->parsed())
      check(slt_matrix_sample(md_desc.c_str(), md_realize, md_n, md_replicas, seed, &out));
    else if (md->get_subcommand("spectra")->parsed()) {
      std::string sizes = md_sizes.empty() ? std::to_string(md_n) : md_sizes;
      check(slt_matrix_spectra(md_desc.c_str(), md_realize, md_n, md_replicas, seed,
                               sizes.c_str(), &out));
    } else if (md->get_subcommand("invariance")->parsed())
      check(slt_matrix_invariance(md_desc.c_str(), md_realize, md_n, md_replicas, seed,
                                  md_stat.c_str(), &out));
    else
      check(slt_projectivity(md_desc.c_str(), md_realize, md_n, seed, &out));
    std::string text = take(out);
    if (text.empty() || text.back() != '\n') text += "\n";
    emit(rec, md_out, text);
  } else if (dpair->parsed()) {
    TripleHandle a, b;
    check(slt_triple_load(dp_a.c_str(), &a.t));
    check(slt_triple_load(dp_b.c_str(), &b.t));
    char* rep = nullptr;
    check(slt_dist(a.t, b.t, dp_metric.c_str(), dp_mode.c_str(), dp_budget, seed, &rep));
    emit(rec, dp_out, take(rep) + "\n");
  } else if (oreal->parsed()) {
    char* rep = nullptr;
    TripleHandle h;
    check(slt_omega(or_desc.c_str(), or_z, or_tol, exact_cap, or_mc, seed, &rep, &h.t));
    emit(rec, or_out, take(rep) + "\n");
    if (!or_triple_out.empty()) {
      char* txt = nullptr;
      check(slt_triple_format(h.t, &txt));
      emit(rec, or_triple_out, take(txt));
    }
  } else if (plot->parsed()) {
    emit(rec, pl_out, svg_plot(slurp(pl_profile), bits ? "bits" : "nats"));
  } else if (rerun->parsed()) {
    return do_rerun(rr_manifest, rr_threads);
  }

  if (write_manifest && !rec.outputs.empty()) {
    json outs = json::array();
    for (auto& [p, h] : rec.outputs) outs.push_back({{"path", p}, {"hash", h}});
    json cfgj = json::object();
    for (auto& [k, v] : cfg) cfgj[k] = v;
    json m{{"schema", "scalent-manifest-v1"},
           {"version", slt_version()},
           {"argv", args},
           {"config", cfgj},
           {"seed", seed},
           {"threads", threads},
           {"outputs", outs}};
    spit(rec.outputs.front().first + ".manifest.json", m.dump(2) + "\n");
  }
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(args, true);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.msg << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
