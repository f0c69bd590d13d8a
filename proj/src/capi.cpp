#include "scalent.h"

#include <cstring>
#include <json.hpp>
#include <sstream>
#include <string>

#include "scalent/core.hpp"
#include "scalent/entropy.hpp"
#include "scalent/matrixdist.hpp"
#include "scalent/scaling.hpp"
#include "scalent/systems.hpp"
#include "scalent/transport.hpp"

using nlohmann::json;
using namespace scalent;

struct slt_triple {
  FiniteMetricTriple t;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = (char*)std::malloc(s.size() + 1);
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

int run(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const Error& e) {
    g_last_error = e.what();
    return (int)e.code;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return (int)ErrorCode::validation;
  }
}

json report_header() {
  return json{{"schema", "scalent-report-v1"}, {"version", slt_version()}};
}

std::vector<double> parse_double_csv(const char* s) {
  std::vector<double> out;
  if (!s) return out;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  return out;
}

std::vector<int> parse_int_csv(const char* s) {
  std::vector<int> out;
  for (double x : parse_double_csv(s)) out.push_back((int)llround(x));
  return out;
}

CoverMethod parse_method(const std::string& m) {
  if (m == "exact") return CoverMethod::exact;
  if (m == "greedy") return CoverMethod::greedy;
  if (m == "pack_lb") return CoverMethod::pack_lb;
  fail(ErrorCode::usage, "unknown method: " + m);
}

FiniteMetricTriple realize(const char* descriptor, int n, long long cap, int mc_samples,
                           uint64_t seed) {
  auto spec = parse_system(descriptor);
  if (spec.kind == SystemSpec::Kind::symbolic && mc_samples > 0) {
    try {
      return averaged_triple_exact(spec.symbolic, n, cap);
    } catch (const Error& e) {
      if (e.code != ErrorCode::cap) throw;
      return averaged_triple_mc(spec.symbolic, n, mc_samples, seed);
    }
  }
  if (spec.kind == SystemSpec::Kind::circle) {
    if (mc_samples <= 0) fail(ErrorCode::usage, "circle needs mc_samples > 0");
    return subsample(circle_sampleable(), mc_samples, seed);
  }
  return spec_triple(spec, n, cap);
}

json cover_json(const CoverSolution& c, double scale) {
  json parts = json::array();
  for (const auto& p : c.parts) parts.push_back(p);
  return json{{"eps", c.eps},
              {"delta", c.delta},
              {"k", c.k},
              {"parts", parts},
              {"removed", c.removed},
              {"removed_mass", c.removed_mass},
              {"exact", c.exact},
              {"certificate", c.certificate},
              {"lower_bound_k", c.lower_bound_k * scale}};
}

}  // namespace

extern "C" {

const char* slt_version(void) { return "scalent 1.0.0"; }
const char* slt_last_error(void) { return g_last_error.c_str(); }
void slt_string_free(char* s) { std::free(s); }
void slt_triple_free(slt_triple* t) { delete t; }

int slt_triple_parse(const char* text, slt_triple** out) {
  return run([&] {
    auto t = parse_triple(text);
    validate_triple(t);
    *out = new slt_triple{std::move(t)};
  });
}

int slt_triple_load(const char* path, slt_triple** out) {
  return run([&] {
    auto t = load_triple(path);
    validate_triple(t);
    *out = new slt_triple{std::move(t)};
  });
}

int slt_triple_format(const slt_triple* t, char** out_text) {
  return run([&] { *out_text = dup_string(format_triple(t->t)); });
}

int slt_triple_validate(const slt_triple* t, int strict, int* valid, char** report_json) {
  return run([&] {
    auto rep = validate(t->t.dist, strict != 0);
    json j = report_header();
    j["valid"] = rep.ok();
    j["summary"] = rep.summary();
    json vs = json::array();
    for (const auto& v : rep.violations)
      vs.push_back({{"kind", v.kind}, {"i", v.i}, {"j", v.j}, {"k", v.k}, {"amount", v.amount}});
    j["violations"] = vs;
    if (valid) *valid = rep.ok() ? 1 : 0;
    if (report_json) *report_json = dup_string(j.dump(2));
  });
}

int slt_triple_from_system(const char* descriptor, int n, long long cap, int mc_samples,
                           uint64_t seed, slt_triple** out) {
  return run([&] { *out = new slt_triple{realize(descriptor, n, cap, mc_samples, seed)}; });
}

int slt_triple_subsample(const slt_triple* t, int n, uint64_t seed, slt_triple** out) {
  return run([&] { *out = new slt_triple{subsample(t->t, n, seed)}; });
}

int slt_entropy_eps(const slt_triple* t, double eps, const char* method, int bits,
                    char** report_json) {
  return run([&] {
    auto r = eps_entropy(t->t, eps, parse_method(method));
    double scale = bits ? 1.0 / std::log(2.0) : 1.0;
    json j = report_header();
    j["op"] = "eps_entropy";
    j["eps"] = eps;
    j["method"] = method;
    j["base"] = bits ? "bits" : "nats";
    j["H"] = r.H * scale;
    j["cover"] = cover_json(r.cover, 1.0);
    *report_json = dup_string(j.dump(2));
  });
}

int slt_entropy_kantorovich(const slt_triple* t, double eps, const char* mode, int bits,
                            char** report_json) {
  return run([&] {
    HkMode m;
    std::string ms = mode;
    if (ms == "exact")
      m = HkMode::exact_tiny;
    else if (ms == "greedy")
      m = HkMode::greedy;
    else
      fail(ErrorCode::usage, "unknown mode: " + ms);
    DiscreteApproximation w;
    auto r = hk_entropy_result(t->t, eps, m, &w);
    double scale = bits ? 1.0 / std::log(2.0) : 1.0;
    json j = report_header();
    j["op"] = "hK_entropy";
    j["eps"] = eps;
    j["mode"] = ms;
    j["base"] = bits ? "bits" : "nats";
    j["feasible"] = w.feasible;
    j["H"] = w.feasible ? r.H * scale : -1.0;
    j["support"] = w.support;
    j["nu"] = w.nu;
    j["transport_cost"] = w.transport_cost;
    *report_json = dup_string(j.dump(2));
  });
}

int slt_omega(const char* descriptor, double z, double tolerance, long long cap,
              int mc_samples, uint64_t seed, char** report_json, slt_triple** out_triple) {
  return run([&] {
    auto spec = parse_system(descriptor);
    if (spec.kind != SystemSpec::Kind::symbolic)
      fail(ErrorCode::usage, "omega realization needs a symbolic system");
    OmegaRealization om;
    std::string mode;
    try {
      om = omega_triple_exact(spec.symbolic, z, tolerance, cap);
      mode = "exact";
    } catch (const Error& e) {
      if (e.code != ErrorCode::cap || mc_samples <= 0) throw;
      om = omega_triple_mc(spec.symbolic, z, tolerance, mc_samples, seed);
      mode = "montecarlo";
    }
    json j = report_header();
    j["op"] = "omega";
    j["z"] = z;
    j["truncation"] = om.truncation;
    j["tail_bound"] = om.tail_bound;
    j["mode"] = mode;
    j["points"] = om.t.n();
    if (report_json) *report_json = dup_string(j.dump(2));
    if (out_triple) *out_triple = new slt_triple{std::move(om.t)};
  });
}

int slt_dist(const slt_triple* a, const slt_triple* b, const char* metric, const char* mode,
             long long budget, uint64_t seed, char** report_json) {
  return run([&] {
    std::string mm = metric, md = mode;
    DistMode dm;
    if (md == "exact")
      dm = DistMode::exact_tiny;
    else if (md == "heur")
      dm = DistMode::heuristic;
    else
      fail(ErrorCode::usage, "unknown mode: " + md);
    DistResult r;
    if (mm == "distm")
      r = dist_m(a->t, b->t, dm, budget, seed);
    else if (mm == "distk")
      r = dist_K(a->t, b->t, dm, budget, seed);
    else
      fail(ErrorCode::usage, "unknown metric: " + mm);
    json j = report_header();
    j["op"] = mm;
    j["mode"] = md;
    j["value"] = r.value;
    j["certified"] = r.certified;
    j["converged"] = r.converged;
    j["plan"] = r.plan.g;
    j["plan_shape"] = {r.plan.n1, r.plan.n2};
    *report_json = dup_string(j.dump(2));
  });
}

int slt_phi_grid(const char* descriptor, const char* eps_csv, const char* n_csv,
                 const char* method, uint64_t seed, int threads, char** profile_csv) {
  return run([&] {
    auto spec = parse_system(descriptor);
    PhiGridOptions opt;
    opt.method = parse_method(method);
    opt.seed = seed;
    opt.threads = threads;
    auto p = phi_grid(spec, parse_double_csv(eps_csv), parse_int_csv(n_csv), opt);
    *profile_csv = dup_string(profile_to_csv(p));
  });
}

int slt_fit_class(const char* profile_csv, int n_min, const char* sigma_csv,
                  char** report_json) {
  return run([&] {
    auto p = profile_from_csv(profile_csv);
    std::vector<int> sigma;
    if (sigma_csv && *sigma_csv) sigma = parse_int_csv(sigma_csv);
    auto rep = fit_class(p, n_min, sigma.empty() ? nullptr : &sigma);
    json j = report_header();
    j["op"] = "fit_class";
    j["n_min"] = n_min;
    j["verdict"] = rep.verdict;
    json rows = json::array();
    for (const auto& f : rep.per_eps)
      rows.push_back({{"eps", f.eps},
                      {"label", f.label},
                      {"tie_label", f.tie_label},
                      {"residual", f.residual},
                      {"params", f.params}});
    j["per_eps"] = rows;
    *report_json = dup_string(j.dump(2));
  });
}

int slt_matrix_sample(const char* descriptor, int realize_n, int n, int replicas,
                      uint64_t seed, char** matrices_text) {
  return run([&] {
    auto spec = parse_system(descriptor);
    MatrixSampleSet set;
    if (spec.kind == SystemSpec::Kind::circle)
      set = sample_dn(circle_sampleable(), n, replicas, seed);
    else
      set = sample_dn(spec_triple(spec, realize_n, tol().window_cap_default), n, replicas, seed);
    std::string out;
    for (const auto& m : set.matrices) out += format_matrix(m);
    *matrices_text = dup_string(out);
  });
}

int slt_matrix_spectra(const char* descriptor, int realize_n, int n, int replicas,
                       uint64_t seed, const char* sizes_csv, char** spectra_csv) {
  return run([&] {
    auto spec = parse_system(descriptor);
    MatrixSampleSet set;
    if (spec.kind == SystemSpec::Kind::circle)
      set = sample_dn(circle_sampleable(), n, replicas, seed);
    else
      set = sample_dn(spec_triple(spec, realize_n, tol().window_cap_default), n, replicas, seed);
    auto sizes = parse_int_csv(sizes_csv);
    auto rep = minor_spectra(set, sizes);
    std::ostringstream os;
    os << "replica,size,index,eigenvalue\n";
    for (int r = 0; r < replicas; ++r)
      for (size_t si = 0; si < sizes.size(); ++si)
        for (size_t i = 0; i < rep.eigenvalues[(size_t)r][si].size(); ++i) {
          char buf[64];
          std::snprintf(buf, sizeof buf, "%.17g", rep.eigenvalues[(size_t)r][si][i]);
          os << r << "," << sizes[si] << "," << i << "," << buf << "\n";
        }
    *spectra_csv = dup_string(os.str());
  });
}

int slt_matrix_invariance(const char* descriptor, int realize_n, int n, int replicas,
                          uint64_t seed, const char* statistic, char** report_json) {
  return run([&] {
    auto spec = parse_system(descriptor);
    MatrixSampleSet set;
    if (spec.kind == SystemSpec::Kind::circle)
      set = sample_dn(circle_sampleable(), n, replicas, seed);
    else
      set = sample_dn(spec_triple(spec, realize_n, tol().window_cap_default), n, replicas, seed);
    auto rep = permutation_invariance_test(set, statistic, seed + 1);
    json j = report_header();
    j["op"] = "permutation_invariance";
    j["statistic"] = rep.statistic;
    j["ks_stat"] = rep.ks_stat;
    j["p_value"] = rep.p_value;
    j["gross_failure"] = rep.gross_failure;
    j["replicas"] = rep.replicas;
    *report_json = dup_string(j.dump(2));
  });
}

int slt_projectivity(const char* descriptor, int realize_n, int n, uint64_t seed,
                     char** report_json) {
  return run([&] {
    auto spec = parse_system(descriptor);
    bool flag;
    if (spec.kind == SystemSpec::Kind::circle)
      flag = projectivity_check(circle_sampleable(), n, seed);
    else
      flag = projectivity_check(spec_triple(spec, realize_n, tol().window_cap_default), n, seed);
    json j = report_header();
    j["op"] = "projectivity";
    j["n"] = n;
    j["seed"] = seed;
    j["projective"] = flag;
    *report_json = dup_string(j.dump(2));
  });
}

int slt_system_invariants(const char* descriptor, char** report_json) {
  return run([&] {
    auto spec = parse_system(descriptor);
    if (spec.kind != SystemSpec::Kind::symbolic ||
        spec.symbolic.kind != SymbolicSystem::Kind::substitution)
      fail(ErrorCode::usage, "invariants are defined for substitution systems");
    auto inv = substitution_invariants(spec.symbolic);
    json j = report_header();
    j["op"] = "substitution_invariants";
    j["primitive"] = inv.primitive;
    j["constant_length"] = inv.constant_length;
    j["length"] = inv.length;
    if (inv.constant_length) {
      j["height"] = inv.height;
      j["column_number"] = inv.column_number;
    }
    *report_json = dup_string(j.dump(2));
  });
}

}  // extern "C"
