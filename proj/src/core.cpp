#include "scalent/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace scalent {

std::string ValidationReport::summary() const {
  if (violations.empty()) return "valid";
  std::ostringstream os;
  os << violations.size() << " violation(s); worst: ";
  const Violation* worst = &violations[0];
  for (const auto& v : violations)
    if (v.amount > worst->amount) worst = &v;
  os << worst->kind << " at (" << worst->i << "," << worst->j;
  if (worst->k >= 0) os << "," << worst->k;
  os << ") amount " << worst->amount;
  return os.str();
}

ValidationReport validate(const DistanceMatrix& m, bool strict_metric) {
  if (m.n <= 0 || m.a.size() != (size_t)m.n * m.n)
    fail(ErrorCode::validation, "distance matrix is not square");
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) {
      double v = m.at(i, j);
      if (std::isnan(v)) fail(ErrorCode::validation, "NaN distance entry");
      if (v < 0) fail(ErrorCode::validation, "negative distance entry");
    }
  ValidationReport r;
  const double ts = tol().symmetry, tt = tol().triangle;
  for (int i = 0; i < m.n; ++i)
    if (m.at(i, i) != 0.0) r.violations.push_back({"diagonal", i, i, -1, std::abs(m.at(i, i))});
  for (int i = 0; i < m.n; ++i)
    for (int j = i + 1; j < m.n; ++j) {
      double s = std::abs(m.at(i, j) - m.at(j, i));
      if (s > ts) r.violations.push_back({"symmetry", i, j, -1, s});
      if (strict_metric && m.at(i, j) <= 0.0)
        r.violations.push_back({"zero-offdiag", i, j, -1, 0.0});
    }
  // triangle: track only the worst offending triple per (i,k) to keep reports small
  for (int i = 0; i < m.n; ++i)
    for (int k = 0; k < m.n; ++k) {
      if (i == k) continue;
      double worst = 0;
      int wj = -1;
      for (int j = 0; j < m.n; ++j) {
        if (j == i || j == k) continue;
        double excess = m.at(i, k) - m.at(i, j) - m.at(j, k);
        if (excess > worst) { worst = excess; wj = j; }
      }
      if (wj >= 0 && worst > tt) r.violations.push_back({"triangle", i, k, wj, worst});
    }
  return r;
}

double FiniteMetricTriple::mean_distance() const {
  double s = 0;
  for (int i = 0; i < n(); ++i)
    for (int j = 0; j < n(); ++j) s += w[i] * w[j] * dist.at(i, j);
  return s;
}

void validate_triple(const FiniteMetricTriple& t) {
  auto rep = validate(t.dist, false);
  if (!rep.ok()) fail(ErrorCode::validation, "distance matrix: " + rep.summary());
  if ((int)t.w.size() != t.n()) fail(ErrorCode::validation, "weights length mismatch");
  if (!t.labels.empty() && (int)t.labels.size() != t.n())
    fail(ErrorCode::validation, "labels length mismatch");
  double s = 0;
  for (double p : t.w) {
    if (std::isnan(p) || p < 0) fail(ErrorCode::validation, "weights must be nonnegative");
    if (p == 0 && !t.allow_zero_weights)
      fail(ErrorCode::validation, "zero weight without degenerate-support flag");
    s += p;
  }
  if (std::abs(s - 1.0) > tol().weights)
    fail(ErrorCode::validation, "weights do not sum to 1");
}

FiniteMetricTriple quotient_zero_blocks(const FiniteMetricTriple& t) {
  validate_triple(t);
  int n = t.n();
  std::vector<int> rep(n, -1);
  std::vector<int> reps;
  for (int i = 0; i < n; ++i) {
    for (int r : reps)
      if (t.dist.at(i, r) == 0.0) { rep[i] = r; break; }
    if (rep[i] < 0) { rep[i] = i; reps.push_back(i); }
  }
  int m = (int)reps.size();
  FiniteMetricTriple out;
  out.dist = DistanceMatrix(m);
  out.w.assign(m, 0.0);
  out.allow_zero_weights = t.allow_zero_weights;
  std::vector<int> idx(n);
  for (int i = 0; i < m; ++i) idx[reps[i]] = i;
  for (int i = 0; i < n; ++i) out.w[idx[rep[i]]] += t.w[i];
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) out.dist.at(i, j) = t.dist.at(reps[i], reps[j]);
  if (!t.labels.empty()) {
    out.labels.resize(m);
    for (int i = 0; i < m; ++i) out.labels[i] = t.labels[reps[i]];
  }
  return out;
}

FiniteMetricTriple normalize_mean(const FiniteMetricTriple& t) {
  double mu = t.mean_distance();
  if (mu <= 0) fail(ErrorCode::validation, "normalize_mean: zero mean distance");
  FiniteMetricTriple out = t;
  for (double& v : out.dist.a) v /= mu;
  return out;
}

FiniteMetricTriple subsample(const FiniteMetricTriple& t, int n, uint64_t seed) {
  if (n < 1) fail(ErrorCode::validation, "subsample: n >= 1 required");
  validate_triple(t);
  Rng rng(seed, "subsample.finite");
  // inverse-CDF draw against cumulative weights
  std::vector<double> cum(t.n());
  std::partial_sum(t.w.begin(), t.w.end(), cum.begin());
  std::vector<int> pick(n);
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform() * cum.back();
    pick[i] = (int)(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
    if (pick[i] >= t.n()) pick[i] = t.n() - 1;
  }
  FiniteMetricTriple out;
  out.dist = DistanceMatrix(n);
  out.w.assign(n, 1.0 / n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.dist.at(i, j) = t.dist.at(pick[i], pick[j]);
  return out;
}

FiniteMetricTriple subsample(const SampleableTriple& t, int n, uint64_t seed) {
  if (n < 1) fail(ErrorCode::validation, "subsample: n >= 1 required");
  Rng rng(seed, "subsample.oracle");
  std::vector<std::vector<double>> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = t.sample_point(rng);
  FiniteMetricTriple out;
  out.dist = DistanceMatrix(n);
  out.w.assign(n, 1.0 / n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      out.dist.at(i, j) = out.dist.at(j, i) = t.metric(pts[i], pts[j]);
  return out;
}

// ---------------- text formats ----------------

namespace {

struct LineReader {
  std::istringstream in;
  int lineno = 0;
  explicit LineReader(const std::string& s) : in(s) {}
  // next non-empty line with comments stripped; false at eof
  bool next(std::string& out) {
    std::string line;
    while (std::getline(in, line)) {
      ++lineno;
      auto h = line.find('#');
      if (h != std::string::npos) line.erase(h);
      size_t b = line.find_first_not_of(" \t\r\n");
      if (b == std::string::npos) continue;
      out = line;
      return true;
    }
    return false;
  }
  [[noreturn]] void err(const std::string& msg) {
    fail(ErrorCode::validation, "parse error at line " + std::to_string(lineno) + ": " + msg);
  }
};

std::vector<double> parse_numbers(LineReader& lr, const std::string& line, size_t expect) {
  std::istringstream is(line);
  std::vector<double> out;
  double v;
  while (is >> v) out.push_back(v);
  std::string rest;
  if (is.fail() && !is.eof() && is >> rest) lr.err("not a number: '" + rest + "'");
  if (out.size() != expect)
    lr.err("expected " + std::to_string(expect) + " numbers, got " + std::to_string(out.size()));
  return out;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

DistanceMatrix parse_matrix(const std::string& text) {
  LineReader lr(text);
  std::string line;
  if (!lr.next(line)) lr.err("missing point count");
  long n = 0;
  {
    std::istringstream is(line);
    if (!(is >> n) || n <= 0) lr.err("bad point count '" + line + "'");
    std::string extra;
    if (is >> extra) lr.err("trailing tokens after point count");
  }
  DistanceMatrix m((int)n);
  for (int i = 0; i < n; ++i) {
    if (!lr.next(line)) lr.err("row " + std::to_string(i) + " missing (header n mismatch?)");
    auto row = parse_numbers(lr, line, (size_t)n);
    for (int j = 0; j < n; ++j) m.at(i, j) = row[j];
  }
  return m;
}

FiniteMetricTriple parse_triple(const std::string& text) {
  // split off the optional weights section first
  auto pos = text.find("weights:");
  FiniteMetricTriple t;
  t.dist = parse_matrix(pos == std::string::npos ? text : text.substr(0, pos));
  if (pos == std::string::npos) {
    t.w.assign(t.n(), 1.0 / t.n());
  } else {
    LineReader lr(text.substr(pos + 8));
    std::string line, all;
    while (lr.next(line)) all += line + " ";
    std::istringstream is(all);
    double v;
    while (is >> v) t.w.push_back(v);
    if ((int)t.w.size() != t.n())
      fail(ErrorCode::validation, "parse error: weights count " + std::to_string(t.w.size()) +
                                      " != n " + std::to_string(t.n()));
  }
  return t;
}

std::string format_matrix(const DistanceMatrix& m) {
  std::ostringstream os;
  os << m.n << "\n";
  for (int i = 0; i < m.n; ++i) {
    for (int j = 0; j < m.n; ++j) os << (j ? " " : "") << fmt17(m.at(i, j));
    os << "\n";
  }
  return os.str();
}

std::string format_triple(const FiniteMetricTriple& t) {
  std::string s = format_matrix(t.dist);
  s += "weights:\n";
  for (int i = 0; i < t.n(); ++i) s += (i ? " " : "") + fmt17(t.w[i]);
  s += "\n";
  return s;
}

namespace {
std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::usage, "cannot open file: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}
void spit(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::usage, "cannot write file: " + path);
  f << data;
}
}  // namespace

DistanceMatrix load_matrix(const std::string& path) { return parse_matrix(slurp(path)); }
void save_matrix(const DistanceMatrix& m, const std::string& path) { spit(path, format_matrix(m)); }
FiniteMetricTriple load_triple(const std::string& path) { return parse_triple(slurp(path)); }
void save_triple(const FiniteMetricTriple& t, const std::string& path) { spit(path, format_triple(t)); }

}  // namespace scalent
