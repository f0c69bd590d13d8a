#include "scalent/systems.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace scalent {
namespace {

long long ipow_capped(long long base, int exp, long long cap) {
  long long v = 1;
  for (int i = 0; i < exp; ++i) {
    if (v > cap / base + 1) return cap + 1;
    v *= base;
    if (v > cap) return cap + 1;
  }
  return v;
}

std::vector<int> apply_rules(const std::vector<std::vector<int>>& rules,
                             const std::vector<int>& w, size_t max_len) {
  std::vector<int> out;
  out.reserve(std::min(max_len, w.size() * 4));
  for (int a : w) {
    for (int b : rules[(size_t)a]) {
      out.push_back(b);
      if (out.size() >= max_len) return out;
    }
  }
  return out;
}

// Fixed-point seed letter: prefer a with rules[a][0]==a and |rules[a]|>1.
int fixed_point_letter(const std::vector<std::vector<int>>& rules) {
  for (size_t a = 0; a < rules.size(); ++a)
    if (!rules[a].empty() && rules[a][0] == (int)a && rules[a].size() > 1) return (int)a;
  for (size_t a = 0; a < rules.size(); ++a)
    if (!rules[a].empty() && rules[a][0] == (int)a) return (int)a;
  fail(ErrorCode::validation, "substitution has no fixed-point letter (no rule a -> a...)");
}

// Long prefix of the one-sided fixed point starting at the seed letter.
std::vector<int> fixed_point_prefix(const std::vector<std::vector<int>>& rules,
                                    size_t target_len) {
  std::vector<int> w{fixed_point_letter(rules)};
  size_t prev = 0;
  while (w.size() < target_len) {
    if (w.size() == prev)
      fail(ErrorCode::validation, "substitution fixed point does not grow");
    prev = w.size();
    w = apply_rules(rules, w, target_len);
  }
  return w;
}

// Letter incidence matrix M[b][a] = multiplicity of b in rules[a].
std::vector<std::vector<long long>> letter_matrix(const std::vector<std::vector<int>>& rules) {
  int A = (int)rules.size();
  std::vector<std::vector<long long>> M((size_t)A, std::vector<long long>((size_t)A, 0));
  for (int a = 0; a < A; ++a)
    for (int b : rules[(size_t)a]) M[(size_t)b][(size_t)a]++;
  return M;
}

bool matrix_primitive(const std::vector<std::vector<long long>>& M) {
  int A = (int)M.size();
  // (I+M)^(A-1) > 0 iff irreducible; then check aperiodicity via a high power.
  std::vector<std::vector<double>> P((size_t)A, std::vector<double>((size_t)A, 0));
  for (int i = 0; i < A; ++i)
    for (int j = 0; j < A; ++j) P[(size_t)i][(size_t)j] = (double)M[(size_t)i][(size_t)j];
  auto mul = [&](const std::vector<std::vector<double>>& X,
                 const std::vector<std::vector<double>>& Y) {
    std::vector<std::vector<double>> Z((size_t)A, std::vector<double>((size_t)A, 0));
    for (int i = 0; i < A; ++i)
      for (int k = 0; k < A; ++k) {
        if (X[(size_t)i][(size_t)k] == 0) continue;
        for (int j = 0; j < A; ++j)
          if (Y[(size_t)k][(size_t)j] != 0) Z[(size_t)i][(size_t)j] = 1;
      }
    return Z;
  };
  // primitive iff M^k > 0 for some k <= (A-1)^2 + 1 (Wielandt)
  auto cur = P;
  int bound = (A - 1) * (A - 1) + 1;
  for (int k = 1; k <= bound; ++k) {
    bool allpos = true;
    for (int i = 0; i < A && allpos; ++i)
      for (int j = 0; j < A; ++j)
        if (cur[(size_t)i][(size_t)j] == 0) { allpos = false; break; }
    if (allpos) return true;
    cur = mul(cur, P);
  }
  return false;
}


// Exact stationary frequencies of the length-n factors via the induced
// n-block substitution: theta_n(w) = the first |theta(w_0)| length-n windows
// of theta(w); the frequency vector is the normalized Perron right
// eigenvector of the induced incidence matrix (shared Perron value with the
// letter matrix).
struct FactorAnalysis {
  std::vector<std::vector<int>> factors;  // sorted
  std::vector<double> freq;
  bool exact = true;
};

FactorAnalysis substitution_factors(const std::vector<std::vector<int>>& rules, int n,
                                    long long cap) {
  size_t base_len = std::max<size_t>(1 << 16, (size_t)n * 128);
  std::vector<int> u;
  std::set<std::vector<int>> fs;
  // grow the prefix until the factor set stabilizes across a doubling
  for (int round = 0; round < 8; ++round) {
    u = fixed_point_prefix(rules, base_len << round);
    std::set<std::vector<int>> cur;
    if ((int)u.size() < n)
      fail(ErrorCode::validation, "substitution fixed point shorter than window");
    for (size_t i = 0; i + (size_t)n <= u.size(); ++i)
      cur.insert(std::vector<int>(u.begin() + (long)i, u.begin() + (long)i + n));
    if ((long long)cur.size() > cap)
      fail(ErrorCode::cap, "substitution window count exceeds cap");
    bool stable = round > 0 && cur == fs;
    fs = std::move(cur);
    if (stable) break;
  }
  FactorAnalysis out;
  out.factors.assign(fs.begin(), fs.end());
  std::map<std::vector<int>, int> index;
  for (size_t i = 0; i < out.factors.size(); ++i) index[out.factors[i]] = (int)i;

  size_t F = out.factors.size();
  // induced incidence matrix, columns indexed by source factor
  std::vector<std::vector<double>> A(F, std::vector<double>(F, 0.0));
  bool complete = true;
  for (size_t c = 0; c < F && complete; ++c) {
    const auto& w = out.factors[c];
    size_t first_len = rules[(size_t)w[0]].size();
    auto img = apply_rules(rules, w, first_len + (size_t)n);
    if (img.size() < first_len + (size_t)n - 1) {
      complete = false;
      break;
    }
    for (size_t off = 0; off < first_len; ++off) {
      std::vector<int> blk(img.begin() + (long)off, img.begin() + (long)off + n);
      auto it = index.find(blk);
      if (it == index.end()) { complete = false; break; }
      A[(size_t)it->second][c] += 1.0;
    }
  }
  if (complete) {
    std::vector<double> v(F, 1.0 / (double)F), nv(F);
    for (int it = 0; it < 20000; ++it) {
      double sum = 0;
      for (size_t i = 0; i < F; ++i) {
        double s = 0;
        for (size_t j = 0; j < F; ++j) s += A[i][j] * v[j];
        nv[i] = s;
        sum += s;
      }
      if (sum <= 0) { complete = false; break; }
      double delta = 0;
      for (size_t i = 0; i < F; ++i) {
        nv[i] /= sum;
        delta = std::max(delta, std::fabs(nv[i] - v[i]));
      }
      v = nv;
      if (delta < 1e-16) break;
    }
    if (complete) {
      out.freq = v;
      return out;
    }
  }
  // fall back to empirical counts over the long prefix (marked inexact)
  out.exact = false;
  out.freq.assign(F, 0.0);
  double total = (double)(u.size() - (size_t)n + 1);
  for (size_t i = 0; i + (size_t)n <= u.size(); ++i) {
    std::vector<int> blk(u.begin() + (long)i, u.begin() + (long)i + n);
    out.freq[(size_t)index[blk]] += 1.0 / total;
  }
  return out;
}

}  // namespace

int SymbolicSystem::letter_count() const {
  switch (kind) {
    case Kind::bernoulli: return (int)p.size();
    case Kind::substitution: return (int)rules.size();
    case Kind::adic: return 2;
    case Kind::product: {
      long long c = 1;
      for (const auto& ch : children) c *= ch.letter_count();
      return (int)c;
    }
  }
  return 0;
}

double SymbolicSystem::letter_dist(int a, int b) const {
  if (kind != Kind::product) return a == b ? 0.0 : 1.0;
  double s = 0;
  int ra = a, rb = b;
  for (const auto& ch : children) {
    int m = ch.letter_count();
    s += ch.letter_dist(ra % m, rb % m);
    ra /= m;
    rb /= m;
  }
  return s / (double)children.size();
}

std::vector<Window> SymbolicSystem::windows_exact(int n, long long cap,
                                                  bool* exact_probs) const {
  if (n < 1) fail(ErrorCode::validation, "window length must be >= 1");
  if (exact_probs) *exact_probs = true;
  std::vector<Window> out;
  switch (kind) {
    case Kind::bernoulli: {
      int A = (int)p.size();
      long long total = ipow_capped(A, n, cap);
      if (total > cap) fail(ErrorCode::cap, "bernoulli window count exceeds cap");
      out.reserve((size_t)total);
      std::vector<int> sym((size_t)n, 0);
      for (long long code = 0; code < total; ++code) {
        long long c = code;
        double pr = 1.0;
        for (int i = 0; i < n; ++i) {
          sym[(size_t)i] = (int)(c % A);
          pr *= p[(size_t)sym[(size_t)i]];
          c /= A;
        }
        out.push_back({sym, pr});
      }
      return out;
    }
    case Kind::substitution: {
      auto fa = substitution_factors(rules, n, cap);
      if (exact_probs) *exact_probs = fa.exact;
      out.reserve(fa.factors.size());
      for (size_t i = 0; i < fa.factors.size(); ++i)
        out.push_back({fa.factors[i], fa.freq[i]});
      return out;
    }
    case Kind::adic: {
      int level = 0;
      while ((1 << level) < n) ++level;
      auto words = adic_level_words(sigma, level);
      if ((long long)words.size() > cap) fail(ErrorCode::cap, "adic word count exceeds cap");
      std::map<std::vector<int>, double> agg;
      double pr = 1.0 / (double)words.size();
      for (auto& w : words) {
        w.resize((size_t)n);
        agg[w] += pr;
      }
      for (auto& [sym, q] : agg) out.push_back({sym, q});
      return out;
    }
    case Kind::product: {
      std::vector<std::vector<Window>> parts;
      long long total = 1;
      for (const auto& ch : children) {
        bool ex = true;
        parts.push_back(ch.windows_exact(n, cap, &ex));
        if (exact_probs && !ex) *exact_probs = false;
        total *= (long long)parts.back().size();
        if (total > cap) fail(ErrorCode::cap, "product window count exceeds cap");
      }
      std::vector<size_t> idx(parts.size(), 0);
      std::vector<int> radix;
      for (const auto& ch : children) radix.push_back(ch.letter_count());
      out.reserve((size_t)total);
      while (true) {
        Window w;
        w.sym.assign((size_t)n, 0);
        w.prob = 1.0;
        int mult = 1;
        for (size_t c = 0; c < parts.size(); ++c) {
          const Window& pw = parts[c][idx[c]];
          for (int i = 0; i < n; ++i) w.sym[(size_t)i] += mult * pw.sym[(size_t)i];
          w.prob *= pw.prob;
          mult *= radix[c];
        }
        out.push_back(std::move(w));
        size_t c = 0;
        while (c < idx.size() && ++idx[c] == parts[c].size()) idx[c++] = 0;
        if (c == idx.size()) break;
      }
      return out;
    }
  }
  return out;
}

std::vector<int> SymbolicSystem::sample_window(int n, Rng& rng) const {
  switch (kind) {
    case Kind::bernoulli: {
      std::vector<int> w((size_t)n);
      for (int i = 0; i < n; ++i) {
        double u = rng.uniform(), acc = 0;
        int a = (int)p.size() - 1;
        for (size_t j = 0; j < p.size(); ++j) {
          acc += p[j];
          if (u < acc) { a = (int)j; break; }
        }
        w[(size_t)i] = a;
      }
      return w;
    }
    case Kind::substitution: {
      // stationary sampling: uniform window position in a long fixed-point
      // prefix (unique ergodicity makes empirical window statistics converge)
      size_t L = std::max<size_t>(1 << 20, (size_t)n * 4096);
      static thread_local std::vector<int> cache;
      static thread_local std::string cache_key;
      std::string key = descriptor + "#" + std::to_string(L);
      if (cache_key != key) {
        cache = fixed_point_prefix(rules, L);
        cache_key = key;
      }
      size_t pos = (size_t)rng.below(cache.size() - (size_t)n + 1);
      return std::vector<int>(cache.begin() + (long)pos, cache.begin() + (long)pos + n);
    }
    case Kind::adic: {
      int level = 0;
      while ((1 << level) < n) ++level;
      // recursive uniform sampler over V_level
      std::vector<int> w = [&]() {
        std::function<std::vector<int>(int)> rec = [&](int k) -> std::vector<int> {
          if (k == 0) return std::vector<int>{(int)rng.below(2)};
          int sk = k <= (int)sigma.size() ? sigma[(size_t)k - 1] : 0;
          auto a = rec(k - 1);
          auto b = sk == 1 ? rec(k - 1) : a;
          a.insert(a.end(), b.begin(), b.end());
          return a;
        };
        return rec(level);
      }();
      w.resize((size_t)n);
      return w;
    }
    case Kind::product: {
      std::vector<int> w((size_t)n, 0);
      int mult = 1;
      for (const auto& ch : children) {
        auto cw = ch.sample_window(n, rng);
        for (int i = 0; i < n; ++i) w[(size_t)i] += mult * cw[(size_t)i];
        mult *= ch.letter_count();
      }
      return w;
    }
  }
  return {};
}

SymbolicSystem make_bernoulli(const std::vector<double>& p) {
  if (p.size() < 2) fail(ErrorCode::validation, "bernoulli needs at least 2 letters");
  double s = std::accumulate(p.begin(), p.end(), 0.0);
  if (std::fabs(s - 1.0) > 1e-9) fail(ErrorCode::validation, "bernoulli weights must sum to 1");
  for (double x : p)
    if (!(x > 0)) fail(ErrorCode::validation, "bernoulli weights must be positive");
  SymbolicSystem sys;
  sys.kind = SymbolicSystem::Kind::bernoulli;
  sys.p = p;
  std::ostringstream d;
  d << "bernoulli:";
  for (size_t i = 0; i < p.size(); ++i) d << (i ? "," : "") << p[i];
  sys.descriptor = d.str();
  return sys;
}

SymbolicSystem make_substitution(const std::vector<std::vector<int>>& rules) {
  if (rules.size() < 2) fail(ErrorCode::validation, "substitution needs at least 2 letters");
  for (const auto& r : rules) {
    if (r.empty()) fail(ErrorCode::validation, "substitution rule must be nonempty");
    for (int b : r)
      if (b < 0 || b >= (int)rules.size())
        fail(ErrorCode::validation, "substitution rule letter out of range");
  }
  SymbolicSystem sys;
  sys.kind = SymbolicSystem::Kind::substitution;
  sys.rules = rules;
  std::ostringstream d;
  d << "subst:";
  for (size_t a = 0; a < rules.size(); ++a) {
    d << (a ? "," : "") << a << "=";
    for (int b : rules[a]) d << b;
  }
  sys.descriptor = d.str();
  fixed_point_letter(rules);  // validate a fixed point exists
  return sys;
}

SymbolicSystem make_adic(const std::vector<int>& sigma) {
  for (int s : sigma)
    if (s != 0 && s != 1) fail(ErrorCode::validation, "adic schedule entries must be 0/1");
  SymbolicSystem sys;
  sys.kind = SymbolicSystem::Kind::adic;
  sys.sigma = sigma;
  std::ostringstream d;
  d << "adic:";
  for (size_t i = 0; i < sigma.size(); ++i) d << (i ? "," : "") << sigma[i];
  sys.descriptor = d.str();
  return sys;
}

SymbolicSystem make_product(const std::vector<SymbolicSystem>& children) {
  if (children.empty()) fail(ErrorCode::validation, "product needs at least one factor");
  SymbolicSystem sys;
  sys.kind = SymbolicSystem::Kind::product;
  sys.children = children;
  std::ostringstream d;
  d << "product:(";
  for (size_t i = 0; i < children.size(); ++i) d << (i ? ";" : "") << children[i].descriptor;
  d << ")";
  sys.descriptor = d.str();
  return sys;
}

SymbolicSystem make_morse() { return make_substitution({{0, 1}, {1, 0}}); }
SymbolicSystem make_chacon() { return make_substitution({{0, 0, 1, 0}, {1}}); }

SubstInvariants substitution_invariants(const SymbolicSystem& s, int k_max) {
  if (s.kind != SymbolicSystem::Kind::substitution)
    fail(ErrorCode::validation, "substitution invariants need a substitution system");
  SubstInvariants out;
  auto M = letter_matrix(s.rules);
  out.primitive = matrix_primitive(M);
  size_t q = s.rules[0].size();
  out.constant_length = std::all_of(s.rules.begin(), s.rules.end(),
                                    [&](const auto& r) { return r.size() == q; });
  if (!out.constant_length)
    fail(ErrorCode::validation,
         "height/column number require a constant-length substitution");
  out.length = (int)q;

  // column number c = min over powers k and positions i of the number of
  // distinct letters in column i of {theta^k(a) : a}
  int A = (int)s.rules.size();
  int best = A;
  std::vector<std::vector<int>> imgs(s.rules.begin(), s.rules.end());
  for (int k = 1; k <= k_max; ++k) {
    size_t len = imgs[0].size();
    for (size_t i = 0; i < len; ++i) {
      std::set<int> col;
      for (int a = 0; a < A; ++a) col.insert(imgs[(size_t)a][i]);
      best = std::min(best, (int)col.size());
    }
    if (best == 1 || len > (1u << 16)) break;
    for (auto& im : imgs) im = apply_rules(s.rules, im, len * q);
  }
  out.column_number = best;

  // height h = largest divisor of gcd{j > 0 : u_j = u_0} coprime with q
  auto u = fixed_point_prefix(s.rules, 1 << 16);
  long long g = 0;
  for (size_t j = 1; j < u.size(); ++j)
    if (u[j] == u[0]) {
      g = std::gcd(g, (long long)j);
      if (g == 1) break;
    }
  if (g == 0) g = 1;
  int h = 1;
  for (int d = 1; d <= (int)g; ++d)
    if (g % d == 0 && std::gcd((long long)d, (long long)q) == 1) h = std::max(h, d);
  out.height = h;
  return out;
}

std::vector<std::vector<int>> adic_level_words(const std::vector<int>& sigma, int level) {
  if (level < 0) fail(ErrorCode::validation, "adic level must be >= 0");
  std::vector<std::vector<int>> words{{0}, {1}};
  for (int k = 1; k <= level; ++k) {
    int sk = k <= (int)sigma.size() ? sigma[(size_t)k - 1] : 0;
    std::vector<std::vector<int>> next;
    if (sk == 1) {
      if ((long long)words.size() * (long long)words.size() > (long long)tol().adic_cap)
        fail(ErrorCode::cap, "adic word count exceeds cap");
      next.reserve(words.size() * words.size());
      for (const auto& a : words)
        for (const auto& b : words) {
          auto w = a;
          w.insert(w.end(), b.begin(), b.end());
          next.push_back(std::move(w));
        }
    } else {
      next.reserve(words.size());
      for (const auto& a : words) {
        auto w = a;
        w.insert(w.end(), a.begin(), a.end());
        next.push_back(std::move(w));
      }
    }
    words = std::move(next);
  }
  return words;
}

bool adic_successor(std::vector<int>& path) {
  for (auto& c : path) {
    if (c == 0) {
      c = 1;
      return true;
    }
    c = 0;
  }
  return false;  // wrapped from the maximal path to the minimal one
}

FiniteMetricTriple RotationTriple::triple(int) const {
  if (m < 2) fail(ErrorCode::validation, "rotation discretization must be >= 2");
  FiniteMetricTriple t;
  t.dist = DistanceMatrix(m);
  t.w.assign((size_t)m, 1.0 / (double)m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double d = std::fabs((double)(i - j)) / (double)m;
      t.dist.at(i, j) = std::min(d, 1.0 - d);
    }
  return t;
}

namespace {

FiniteMetricTriple triple_from_windows(const SymbolicSystem& s, const std::vector<Window>& ws,
                                       int n) {
  int N = (int)ws.size();
  FiniteMetricTriple t;
  t.dist = DistanceMatrix(N);
  t.w.resize((size_t)N);
  for (int i = 0; i < N; ++i) t.w[(size_t)i] = ws[(size_t)i].prob;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      double d = 0;
      for (int k = 0; k < n; ++k)
        d += s.letter_dist(ws[(size_t)i].sym[(size_t)k], ws[(size_t)j].sym[(size_t)k]);
      d /= (double)n;
      t.dist.at(i, j) = t.dist.at(j, i) = d;
    }
  return t;
}

FiniteMetricTriple omega_from_windows(const SymbolicSystem& s, const std::vector<Window>& ws,
                                      int trunc, double z) {
  int N = (int)ws.size();
  FiniteMetricTriple t;
  t.dist = DistanceMatrix(N);
  t.w.resize((size_t)N);
  for (int i = 0; i < N; ++i) t.w[(size_t)i] = ws[(size_t)i].prob;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      double d = 0, zk = 1.0;
      for (int k = 0; k < trunc; ++k) {
        d += zk * s.letter_dist(ws[(size_t)i].sym[(size_t)k], ws[(size_t)j].sym[(size_t)k]);
        zk *= z;
      }
      d *= (1.0 - z);
      t.dist.at(i, j) = t.dist.at(j, i) = d;
    }
  return t;
}

int omega_truncation(double z, double tolerance) {
  if (!(z >= 0 && z < 1)) fail(ErrorCode::validation, "omega parameter z must be in [0,1)");
  if (!(tolerance > 0)) fail(ErrorCode::validation, "omega tail tolerance must be positive");
  if (z == 0) return 1;
  // tail of (1-z) sum_{k>=N} z^k * rho(...) with rho <= 1 is z^N
  int N = (int)std::ceil(std::log(tolerance) / std::log(z));
  return std::max(N, 1);
}

std::vector<Window> sampled_windows(const SymbolicSystem& s, int n, int m, uint64_t seed) {
  if (m < 2) fail(ErrorCode::validation, "monte carlo sample size must be >= 2");
  Rng rng(seed, "systems.window", 0);
  std::vector<Window> ws;
  ws.reserve((size_t)m);
  for (int i = 0; i < m; ++i) ws.push_back({s.sample_window(n, rng), 1.0 / (double)m});
  return ws;
}

}  // namespace

FiniteMetricTriple averaged_triple_exact(const SymbolicSystem& s, int n, long long cap) {
  auto ws = s.windows_exact(n, cap);
  return triple_from_windows(s, ws, n);
}

FiniteMetricTriple averaged_triple_mc(const SymbolicSystem& s, int n, int m, uint64_t seed) {
  return triple_from_windows(s, sampled_windows(s, n, m, seed), n);
}

OmegaRealization omega_triple_exact(const SymbolicSystem& s, double z, double tolerance,
                                    long long cap) {
  int N = omega_truncation(z, tolerance);
  OmegaRealization out;
  out.truncation = N;
  out.tail_bound = z == 0 ? 0 : std::pow(z, N);
  out.t = omega_from_windows(s, s.windows_exact(N, cap), N, z);
  return out;
}

OmegaRealization omega_triple_mc(const SymbolicSystem& s, double z, double tolerance, int m,
                                 uint64_t seed) {
  int N = omega_truncation(z, tolerance);
  OmegaRealization out;
  out.truncation = N;
  out.tail_bound = z == 0 ? 0 : std::pow(z, N);
  out.t = omega_from_windows(s, sampled_windows(s, N, m, seed), N, z);
  return out;
}

std::pair<OmegaRealization, FiniteMetricTriple> paired_omega_average(
    const SymbolicSystem& s, int n, double z, double tolerance, int m, uint64_t seed) {
  int N = omega_truncation(z, tolerance);
  auto ws = sampled_windows(s, std::max(N, n), m, seed);
  OmegaRealization om;
  om.truncation = N;
  om.tail_bound = z == 0 ? 0 : std::pow(z, N);
  om.t = omega_from_windows(s, ws, N, z);
  return {std::move(om), triple_from_windows(s, ws, n)};
}

SampleableTriple circle_sampleable() {
  SampleableTriple t;
  t.descriptor = "circle";
  t.sample_point = [](Rng& rng) { return std::vector<double>{rng.uniform()}; };
  t.metric = [](const std::vector<double>& a, const std::vector<double>& b) {
    double d = std::fabs(a[0] - b[0]);
    return std::min(d, 1.0 - d);
  };
  return t;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_num(const std::string& s) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::usage, "cannot parse number: " + s);
  }
}

}  // namespace

SystemSpec parse_system(const std::string& descriptor) {
  SystemSpec spec;
  spec.descriptor = descriptor;
  auto colon = descriptor.find(':');
  std::string head = descriptor.substr(0, colon);
  std::string body = colon == std::string::npos ? "" : descriptor.substr(colon + 1);
  if (head == "bernoulli") {
    std::vector<double> p;
    if (body.find(',') == std::string::npos) {
      double q = parse_num(body);
      p = {q, 1.0 - q};
    } else {
      for (const auto& s : split(body, ',')) p.push_back(parse_num(s));
    }
    spec.kind = SystemSpec::Kind::symbolic;
    spec.symbolic = make_bernoulli(p);
  } else if (head == "subst" || head == "substitution") {
    std::vector<std::vector<int>> rules;
    for (const auto& part : split(body, ',')) {
      auto eq = part.find('=');
      if (eq == std::string::npos) fail(ErrorCode::usage, "bad substitution rule: " + part);
      int a = (int)parse_num(part.substr(0, eq));
      if (a != (int)rules.size()) fail(ErrorCode::usage, "substitution rules must list letters in order");
      std::vector<int> img;
      for (char c : part.substr(eq + 1)) {
        if (c < '0' || c > '9') fail(ErrorCode::usage, "bad substitution image: " + part);
        img.push_back(c - '0');
      }
      rules.push_back(img);
    }
    spec.kind = SystemSpec::Kind::symbolic;
    spec.symbolic = make_substitution(rules);
  } else if (head == "morse") {
    spec.kind = SystemSpec::Kind::symbolic;
    spec.symbolic = make_morse();
  } else if (head == "chacon") {
    spec.kind = SystemSpec::Kind::symbolic;
    spec.symbolic = make_chacon();
  } else if (head == "adic") {
    std::vector<int> sigma;
    if (!body.empty())
      for (const auto& s : split(body, ',')) sigma.push_back((int)parse_num(s));
    spec.kind = SystemSpec::Kind::symbolic;
    spec.symbolic = make_adic(sigma);
  } else if (head == "product") {
    std::string inner = body;
    if (inner.size() >= 2 && inner.front() == '(' && inner.back() == ')')
      inner = inner.substr(1, inner.size() - 2);
    std::vector<SymbolicSystem> children;
    for (const auto& part : split(inner, ';')) {
      auto child = parse_system(part);
      if (child.kind != SystemSpec::Kind::symbolic)
        fail(ErrorCode::usage, "product factors must be symbolic systems");
      children.push_back(child.symbolic);
    }
    spec.kind = SystemSpec::Kind::symbolic;
    spec.symbolic = make_product(children);
  } else if (head == "rotation") {
    auto parts = split(body, ',');
    spec.kind = SystemSpec::Kind::rotation;
    spec.rotation_alpha = parse_num(parts[0]);
    if (parts.size() > 1) spec.rotation_m = (int)parse_num(parts[1]);
  } else if (head == "cube") {
    spec.kind = SystemSpec::Kind::cube;
    spec.cube_dim = (int)parse_num(body);
    if (spec.cube_dim < 1 || spec.cube_dim > 24)
      fail(ErrorCode::usage, "cube dimension out of range");
  } else if (head == "circle") {
    spec.kind = SystemSpec::Kind::circle;
  } else {
    fail(ErrorCode::usage, "unknown system descriptor: " + descriptor);
  }
  return spec;
}

FiniteMetricTriple spec_triple(const SystemSpec& spec, int n, long long cap) {
  switch (spec.kind) {
    case SystemSpec::Kind::symbolic: return averaged_triple_exact(spec.symbolic, n, cap);
    case SystemSpec::Kind::rotation: {
      RotationTriple r{spec.rotation_alpha, spec.rotation_m};
      return r.triple(n);
    }
    case SystemSpec::Kind::cube:
      return averaged_triple_exact(make_bernoulli({0.5, 0.5}), spec.cube_dim, cap);
    case SystemSpec::Kind::circle:
      fail(ErrorCode::usage, "circle is sampleable only; use subsampling");
  }
  fail(ErrorCode::usage, "unhandled system kind");
}

}  // namespace scalent
