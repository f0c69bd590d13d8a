#include "scalent/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "scalent/rng.hpp"

namespace scalent {

namespace {

// ---------- bitset helpers (dynamic, word-based) ----------
struct Bits {
  int n = 0, words = 0;
  std::vector<uint64_t> b;
  Bits() = default;
  explicit Bits(int n_) : n(n_), words((n_ + 63) / 64), b(words, 0) {}
  void set(int i) { b[i >> 6] |= 1ull << (i & 63); }
  void clear(int i) { b[i >> 6] &= ~(1ull << (i & 63)); }
  bool get(int i) const { return (b[i >> 6] >> (i & 63)) & 1; }
  int count() const {
    int c = 0;
    for (uint64_t w : b) c += __builtin_popcountll(w);
    return c;
  }
  template <typename F>
  void for_each(F f) const {
    for (int w = 0; w < words; ++w) {
      uint64_t x = b[w];
      while (x) {
        int i = __builtin_ctzll(x);
        f(w * 64 + i);
        x &= x - 1;
      }
    }
  }
};

int and_count(const Bits& a, const Bits& b) {
  int c = 0;
  for (int w = 0; w < a.words; ++w) c += __builtin_popcountll(a.b[w] & b.b[w]);
  return c;
}

// compatibility instance: edge iff d <= eps - strict (same part allowed)
struct Inst {
  int n = 0;
  std::vector<double> w;
  double total = 0;
  std::vector<Bits> adj;  // includes self-loop bit
  double eps, budget;     // removal mass budget (delta - strict)
};

Inst build_inst(const FiniteMetricTriple& t, double eps, double delta) {
  Inst in;
  in.n = t.n();
  in.w = t.w;
  in.total = std::accumulate(t.w.begin(), t.w.end(), 0.0);
  in.eps = eps;
  in.budget = delta - tol().strict;
  double thr = eps - tol().strict;
  in.adj.assign(in.n, Bits(in.n));
  for (int i = 0; i < in.n; ++i) {
    in.adj[i].set(i);
    for (int j = i + 1; j < in.n; ++j)
      if (t.dist.at(i, j) <= thr) { in.adj[i].set(j); in.adj[j].set(i); }
  }
  return in;
}

double mass_of(const Inst& in, const Bits& s) {
  double m = 0;
  s.for_each([&](int i) { m += in.w[i]; });
  return m;
}

// ---------- max-weight clique (exact, budgeted DFS) ----------
// Branch-and-bound with two pruning rules: candidate mass (cheap) and a
// weighted greedy-coloring bound (a clique takes at most one vertex from each
// independent set, so the sum of per-set maxima bounds the remaining mass).
// `best` is seeded with deterministic greedy cliques so both bounds prune
// from the first node; this is what makes uniform-weight instances tractable.
struct CliqueSearch {
  const Inst& in;
  long long nodes = 0, node_cap;
  double best = 0;
  std::vector<int> best_set, cur;
  bool capped = false;
  CliqueSearch(const Inst& i, long long cap) : in(i), node_cap(cap) { seed_greedy(); }

  // deterministic maximal clique grown from `seed` by weight, then by
  // candidate retention
  void grow_from(int seed) {
    std::vector<int> clique{seed};
    double w = in.w[seed];
    Bits cand = in.adj[seed];
    cand.clear(seed);
    for (;;) {
      int pick = -1;
      double bw = -1;
      int bs = -1;
      cand.for_each([&](int u) {
        if (in.w[u] < bw - 1e-18) return;
        int s = and_count(cand, in.adj[u]);
        if (in.w[u] > bw + 1e-18 || s > bs) { bw = in.w[u]; bs = s; pick = u; }
      });
      if (pick < 0) break;
      clique.push_back(pick);
      w += in.w[pick];
      for (int k = 0; k < cand.words; ++k) cand.b[k] &= in.adj[pick].b[k];
      cand.clear(pick);
    }
    if (w > best) { best = w; best_set = std::move(clique); }
  }

  void seed_greedy() {
    // all vertices on small instances, the heaviest 512 on large ones
    std::vector<int> seeds(in.n);
    std::iota(seeds.begin(), seeds.end(), 0);
    if (in.n > 1024) {
      std::sort(seeds.begin(), seeds.end(), [&](int a, int b) {
        return in.w[a] != in.w[b] ? in.w[a] > in.w[b] : a < b;
      });
      seeds.resize(512);
    }
    for (int s : seeds) grow_from(s);
  }

  // greedy partition of `cand` into independent sets; returns the bound
  double color_bound(const Bits& cand) {
    std::vector<Bits> sets;
    std::vector<double> setmax;
    cand.for_each([&](int v) {
      ++nodes;
      for (size_t s = 0; s < sets.size(); ++s) {
        bool indep = true;
        for (int k = 0; k < sets[s].words && indep; ++k)
          if (in.adj[v].b[k] & sets[s].b[k]) indep = false;
        if (indep) {
          sets[s].set(v);
          setmax[s] = std::max(setmax[s], in.w[v]);
          return;
        }
      }
      sets.emplace_back(in.n);
      sets.back().set(v);
      setmax.push_back(in.w[v]);
    });
    double bound = 0;
    for (double m : setmax) bound += m;
    return bound;
  }

  void dfs(Bits cand, double cur_w) {
    if (++nodes > node_cap) { capped = true; return; }
    double rest = mass_of(in, cand);
    if (cur_w + rest <= best + 1e-15) return;
    if (rest == 0) {
      if (cur_w > best) { best = cur_w; best_set = cur; }
      return;
    }
    if (cur_w + color_bound(cand) <= best + 1e-15) return;
    // pick heaviest candidate
    int pick = -1;
    double pw = -1;
    cand.for_each([&](int i) { if (in.w[i] > pw) { pw = in.w[i]; pick = i; } });
    // branch 1: include pick
    Bits c2 = cand;
    for (int w = 0; w < c2.words; ++w) c2.b[w] &= in.adj[pick].b[w];
    c2.clear(pick);
    cur.push_back(pick);
    dfs(c2, cur_w + in.w[pick]);
    cur.pop_back();
    if (capped) return;
    // branch 2: exclude pick
    cand.clear(pick);
    dfs(cand, cur_w);
  }
};

// ---------- greedy separated set (pack bound) ----------
// Returns best proven lower bound on k: |I| minus the removable light prefix.
double pack_bound(const Inst& in, std::vector<int>* witness) {
  // vertices pairwise NOT compatible form a separated set
  std::vector<int> order(in.n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return in.w[a] > in.w[b]; });
  std::vector<int> I;
  for (int v : order) {
    bool ok = true;
    for (int u : I)
      if (in.adj[v].get(u)) { ok = false; break; }
    if (ok) I.push_back(v);
  }
  std::vector<double> ws;
  for (int v : I) ws.push_back(in.w[v]);
  std::sort(ws.begin(), ws.end());
  double acc = 0;
  int removable = 0;
  for (double x : ws) {
    if (acc + x <= in.budget) { acc += x; ++removable; }
    else break;
  }
  if (witness) *witness = I;
  return (double)((int)I.size() - removable);
}

// ---------- greedy clique coverage (deterministic upper bound) ----------
// Grows a clique from the heaviest-uncovered seed, preferring uncovered
// candidates, then candidate-preserving ones; repeats until the uncovered
// mass fits the removal budget.
std::vector<int> grow_clique(const Inst& in, int seed, const std::vector<int>& cnt,
                             Rng* rng) {
  std::vector<int> clique{seed};
  Bits cand = in.adj[seed];
  cand.clear(seed);
  for (;;) {
    int pick = -1;
    double best_primary = -1;
    int best_secondary = -1;
    uint64_t best_tie = 0;
    cand.for_each([&](int u) {
      double prim = cnt[u] == 0 ? in.w[u] : -1;  // only uncovered extensions help
      if (prim < 0) return;
      int sec = and_count(cand, in.adj[u]);
      uint64_t tie = rng ? rng->u64() : (uint64_t)(in.n - u);
      if (prim > best_primary + 1e-18 ||
          (prim > best_primary - 1e-18 &&
           (sec > best_secondary || (sec == best_secondary && tie > best_tie)))) {
        best_primary = prim;
        best_secondary = sec;
        best_tie = tie;
        pick = u;
      }
    });
    if (pick < 0) break;
    clique.push_back(pick);
    for (int w = 0; w < cand.words; ++w) cand.b[w] &= in.adj[pick].b[w];
    cand.clear(pick);
  }
  return clique;
}

int greedy_clique_cover(const Inst& in, std::vector<std::vector<int>>* parts_out) {
  std::vector<int> cnt(in.n, 0);
  double uncovered = in.total;
  int k = 0;
  std::vector<std::vector<int>> parts;
  while (uncovered > in.budget + 1e-15) {
    int seed = -1;
    double bw = -1;
    for (int i = 0; i < in.n; ++i)
      if (cnt[i] == 0 && in.w[i] > bw) { bw = in.w[i]; seed = i; }
    if (seed < 0) break;
    auto cl = grow_clique(in, seed, cnt, nullptr);
    for (int v : cl)
      if (cnt[v]++ == 0) uncovered -= in.w[v];
    parts.push_back(std::move(cl));
    ++k;
  }
  if (parts_out) *parts_out = std::move(parts);
  return k;
}

// ---------- upper-bound search: cover with exactly k cliques ----------
// Two complementary strategies split the budget. Both are deterministic
// (fixed internal seeds) and both either certify success or give up.
//
// Strategy 1 — min-conflict packing. Place k centers, drive the number of
// adjacent center pairs to (near) zero by always rehoming a conflicted
// center to a least-conflicted vertex, and realize each center as the
// clique grown by ascending distance to it (a metric ball). This is the
// right tool when the optimum is a tight packing of equal balls, where
// neighbourhood-by-neighbourhood search cannot line up the centers.

// clique around c grown by ascending distance to c (then weight, then
// index), restricted to uncovered vertices; reconstructs metric balls.
std::vector<int> center_clique(const Inst& in, const FiniteMetricTriple& q, int c,
                               const std::vector<int>& cnt) {
  std::vector<int> clique{c};
  Bits cand = in.adj[c];
  cand.clear(c);
  for (int v = 0; v < in.n; ++v)
    if (cnt[v] != 0) cand.clear(v);
  for (;;) {
    int pick = -1;
    double bd = 0, bw = -1;
    cand.for_each([&](int u) {
      double d = q.dist.at(c, u);
      if (pick < 0 || d < bd - 1e-18 || (d < bd + 1e-18 && in.w[u] > bw + 1e-18)) {
        bd = d;
        bw = in.w[u];
        pick = u;
      }
    });
    if (pick < 0) break;
    clique.push_back(pick);
    for (int w = 0; w < cand.words; ++w) cand.b[w] &= in.adj[pick].b[w];
    cand.clear(pick);
  }
  return clique;
}

bool pack_cover(const Inst& in, const FiniteMetricTriple& q, int k, long long budget,
                std::vector<std::vector<int>>* parts_out) {
  Rng rng(0, "cover.pack");
  const int n = in.n;
  if (k >= n) return false;  // packing view is pointless; leave it to the LNS
  std::vector<Bits> adj(n);
  for (int v = 0; v < n; ++v) {
    adj[v] = in.adj[v];
    adj[v].clear(v);
  }
  std::vector<char> sel(n, 0);
  std::vector<int> conf(n, 0);  // # selected neighbours of v
  std::vector<int> centers;
  auto addc = [&](int v) {
    sel[v] = 1;
    centers.push_back(v);
    adj[v].for_each([&](int u) { ++conf[u]; });
  };
  auto delc = [&](int idx) {
    int v = centers[idx];
    sel[v] = 0;
    centers[idx] = centers.back();
    centers.pop_back();
    adj[v].for_each([&](int u) { --conf[u]; });
  };
  for (int i = 0; i < k; ++i) {
    int v;
    do { v = (int)rng.below(n); } while (sel[v]);
    addc(v);
  }
  auto energy = [&]() {
    long long e = 0;
    for (int c : centers) e += conf[c];
    return e / 2;
  };
  long long spent = 0;
  // realize the current centers as balls, heaviest center first
  auto realize = [&]() -> bool {
    std::vector<int> cnt(n, 0);
    std::vector<int> order = centers;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return in.w[a] > in.w[b] || (in.w[a] == in.w[b] && a < b);
    });
    std::vector<std::vector<int>> parts;
    double unc = in.total;
    for (int c : order) {
      int seed = c;
      if (cnt[c] != 0) {
        // center already swallowed: reseed at the heaviest uncovered vertex
        seed = -1;
        double bw = -1;
        for (int i = 0; i < n; ++i)
          if (cnt[i] == 0 && in.w[i] > bw) { bw = in.w[i]; seed = i; }
        if (seed < 0) break;
      }
      auto cl = center_clique(in, q, seed, cnt);
      for (int v : cl)
        if (cnt[v]++ == 0) unc -= in.w[v];
      parts.push_back(std::move(cl));
    }
    spent += n;
    if (unc <= in.budget + 1e-15) {
      if (parts_out) *parts_out = std::move(parts);
      return true;
    }
    return false;
  };
  long long best = energy();
  if (realize()) return true;
  while (spent < budget) {
    // pick a random conflicted center
    int idx = -1;
    for (int tr = 0; tr < 200; ++tr) {
      int j = (int)rng.below((uint64_t)centers.size());
      if (conf[centers[j]] > 0) { idx = j; break; }
    }
    if (idx < 0) return realize();  // conflict-free packing reached
    delc(idx);
    // rehome to a least-conflicted vertex, uniform among ties
    int bestv = -1, bestc = 1 << 30;
    uint64_t ties = 0;
    for (int v = 0; v < n; ++v) {
      if (sel[v]) continue;
      if (conf[v] < bestc) {
        bestc = conf[v];
        bestv = v;
        ties = 1;
      } else if (conf[v] == bestc && rng.below(++ties) == 0) {
        bestv = v;
      }
    }
    addc(bestv);
    spent += n;
    long long e = energy();
    if (e < best) {
      best = e;
      if (realize()) return true;
    }
  }
  return false;
}

// Strategy 2 — large-neighbourhood search. Maintain k greedily grown parts,
// repeatedly ruin a few random ones and rebuild from the uncovered vertex
// whose closed neighbourhood has the most uncovered vertices. Handles
// uneven weights and irregular part shapes that the packing view misses.
bool lns_cover(const Inst& in, int k, long long budget,
               std::vector<std::vector<int>>* parts_out) {
  Rng rng(0, "cover.lns");
  std::vector<int> cnt(in.n, 0);
  // ucount[v] = number of uncovered vertices in the closed neighbourhood of v
  std::vector<int> ucount(in.n, 0);
  std::vector<std::vector<int>> nbr(in.n);
  for (int v = 0; v < in.n; ++v)
    in.adj[v].for_each([&](int u) { nbr[v].push_back(u); });
  for (int v = 0; v < in.n; ++v) ucount[v] = (int)nbr[v].size();
  auto cover_one = [&](int v) {
    if (cnt[v]++ == 0)
      for (int u : nbr[v]) --ucount[u];
  };
  auto uncover_one = [&](int v) {
    if (--cnt[v] == 0)
      for (int u : nbr[v]) ++ucount[u];
  };
  std::vector<std::vector<int>> parts;
  parts.reserve((size_t)k);
  auto uncovered_mass = [&]() {
    double u = 0;
    for (int i = 0; i < in.n; ++i)
      if (cnt[i] == 0) u += in.w[i];
    return u;
  };
  // seed choice: uncovered vertex with the most uncovered neighbours,
  // picking randomly among near-ties
  auto pick_seed = [&]() -> int {
    int best = -1, bestc = -1;
    for (int v = 0; v < in.n; ++v) {
      if (cnt[v] != 0) continue;
      int c = ucount[v];
      if (c > bestc || (c == bestc && rng.uniform() < 0.3)) {
        bestc = c;
        best = v;
      }
    }
    return best;
  };
  long long spent = 0;
  auto add_from = [&](int seed) {
    auto cl = grow_clique(in, seed, cnt, &rng);
    for (int v : cl) cover_one(v);
    parts.push_back(std::move(cl));
    spent += in.n;
  };
  while ((int)parts.size() < k) {
    int s = pick_seed();
    if (s < 0) break;
    add_from(s);
  }
  double unc = uncovered_mass();
  double best_unc = unc;
  auto best_parts = parts;
  long long stagnant = 0;
  while (spent < budget) {
    if (best_unc <= in.budget + 1e-15) break;
    int r = 1 + (int)rng.below(3);
    for (int q = 0; q < r && !parts.empty(); ++q) {
      size_t idx = rng.below((uint64_t)parts.size());
      for (int v : parts[idx]) uncover_one(v);
      parts[idx] = std::move(parts.back());
      parts.pop_back();
    }
    while ((int)parts.size() < k) {
      int s = (rng.uniform() < 0.95) ? pick_seed() : (int)rng.below(in.n);
      if (s < 0) s = (int)rng.below(in.n);
      add_from(s);
    }
    unc = uncovered_mass();
    spent += in.n;
    if (unc < best_unc - 1e-15) {
      best_unc = unc;
      best_parts = parts;
      stagnant = 0;
    }
    if (++stagnant > 2000) {  // restart from the incumbent
      parts = best_parts;
      std::fill(cnt.begin(), cnt.end(), 0);
      for (int v = 0; v < in.n; ++v) ucount[v] = (int)nbr[v].size();
      for (auto& p : parts)
        for (int v : p) cover_one(v);
      unc = best_unc;
      stagnant = 0;
    }
  }
  if (best_unc <= in.budget + 1e-15) {
    if (parts_out) *parts_out = best_parts;
    return true;
  }
  return false;
}

bool local_search_cover(const Inst& in, const FiniteMetricTriple& q, int k,
                        long long budget, std::vector<std::vector<int>>* parts_out) {
  if (pack_cover(in, q, k, budget / 2, parts_out)) return true;
  return lns_cover(in, k, budget / 2, parts_out);
}

// ---------- exact branch-and-bound for n <= 20 ----------
struct Bnb {
  const Inst& in;
  uint32_t full;
  std::vector<uint32_t> adj;
  double wmax_clique;  // global max clique mass (upper bound for pruning)
  explicit Bnb(const Inst& i) : in(i) {
    full = (in.n == 32) ? 0xffffffffu : ((1u << in.n) - 1);
    adj.assign(in.n, 0);
    for (int a = 0; a < in.n; ++a)
      for (int b = 0; b < in.n; ++b)
        if (b != a && in.adj[a].get(b)) adj[a] |= 1u << b;
  }
  double mass(uint32_t s) const {
    double m = 0;
    while (s) { int i = __builtin_ctz(s); m += in.w[i]; s &= s - 1; }
    return m;
  }
  // enumerate maximal cliques containing pivot inside mask
  void max_cliques(uint32_t R, uint32_t P, uint32_t X, std::vector<uint32_t>& out) {
    if (!P && !X) { out.push_back(R); return; }
    if (!P) return;
    // pivot on the vertex of P|X with most neighbours in P
    uint32_t px = P | X;
    int piv = -1, bestd = -1;
    while (px) {
      int v = __builtin_ctz(px);
      px &= px - 1;
      int d = __builtin_popcount(P & adj[v]);
      if (d > bestd) { bestd = d; piv = v; }
    }
    uint32_t ext = P & ~adj[piv];
    uint32_t e = ext;
    while (e) {
      int v = __builtin_ctz(e);
      e &= e - 1;
      max_cliques(R | (1u << v), P & adj[v], X & adj[v], out);
      P &= ~(1u << v);
      X |= 1u << v;
    }
  }
  bool feasible(uint32_t uncovered, double budget, int parts_left,
                std::vector<uint32_t>& solution) {
    double um = mass(uncovered);
    if (um <= budget + 1e-15) return true;
    if (parts_left == 0) return false;
    if (um > budget + parts_left * wmax_clique + 1e-15) return false;
    // pivot: heaviest uncovered point
    int piv = -1;
    double pw = -1;
    uint32_t s = uncovered;
    while (s) {
      int i = __builtin_ctz(s);
      s &= s - 1;
      if (in.w[i] > pw) { pw = in.w[i]; piv = i; }
    }
    // branch: cover pivot by each maximal clique containing it
    std::vector<uint32_t> cls;
    max_cliques(1u << piv, uncovered & adj[piv], 0, cls);
    // try big cliques first
    std::sort(cls.begin(), cls.end(), [&](uint32_t a, uint32_t b) { return mass(a) > mass(b); });
    for (uint32_t c : cls) {
      solution.push_back(c);
      if (feasible(uncovered & ~c, budget, parts_left - 1, solution)) return true;
      solution.pop_back();
    }
    // or remove pivot
    if (in.w[piv] <= budget + 1e-15)
      return feasible(uncovered & ~(1u << piv), budget - in.w[piv], parts_left, solution);
    return false;
  }
};

// members[q] = original indices merged into quotient point q
CoverSolution finish_cover(const Inst& in, std::vector<std::vector<int>> parts,
                           double eps, double delta, bool exact, std::string cert,
                           double lb, const std::vector<std::vector<int>>& members) {
  // make parts disjoint, compute removed set
  std::vector<int> owner(in.n, -1);
  for (size_t p = 0; p < parts.size(); ++p)
    for (int v : parts[p])
      if (owner[v] < 0) owner[v] = (int)p;
  CoverSolution c;
  c.eps = eps;
  c.delta = delta;
  c.exact = exact;
  c.certificate = std::move(cert);
  c.lower_bound_k = lb;
  std::vector<std::vector<int>> dp(parts.size());
  for (int v = 0; v < in.n; ++v) {
    auto& dst = owner[v] >= 0 ? dp[owner[v]] : c.removed;
    for (int o : members[v]) dst.push_back(o);
    if (owner[v] < 0) c.removed_mass += in.w[v];
  }
  for (auto& p : dp)
    if (!p.empty()) c.parts.push_back(std::move(p));
  c.k = (int)c.parts.size();
  return c;
}

}  // namespace

EntropyResult mm_entropy(const FiniteMetricTriple& t, double eps, double delta,
                         CoverMethod method) {
  validate_triple(t);
  if (eps <= 0 || delta <= 0) fail(ErrorCode::validation, "entropy: thresholds must be > 0");
  if (eps >= 1.0) {
    CoverSolution c;
    c.eps = eps;
    c.delta = delta;
    c.k = 1;
    c.parts.push_back(std::vector<int>(t.n()));
    std::iota(c.parts[0].begin(), c.parts[0].end(), 0);
    c.exact = true;
    c.certificate = "eps>=1 convention";
    return {0.0, c};
  }
  // collapse zero-distance blocks first (lossless for covering); mirror the
  // representative selection of quotient_zero_blocks
  FiniteMetricTriple q = quotient_zero_blocks(t);
  std::vector<std::vector<int>> members;
  {
    std::vector<int> reps;
    for (int i = 0; i < t.n(); ++i) {
      int at = -1;
      for (size_t r = 0; r < reps.size(); ++r)
        if (t.dist.at(i, reps[r]) == 0.0) { at = (int)r; break; }
      if (at < 0) { reps.push_back(i); members.push_back({i}); }
      else members[at].push_back(i);
    }
  }
  Inst in = build_inst(q, eps, delta);

  if (method == CoverMethod::greedy) {
    // documented greedy: balls of radius (eps - strict)/2 by uncovered mass
    double r = (eps - tol().strict) / 2.0;
    std::vector<int> cnt(in.n, 0);
    double uncovered = in.total;
    std::vector<std::vector<int>> parts;
    while (uncovered > in.budget + 1e-15) {
      int best = -1;
      double bm = -1;
      for (int c = 0; c < in.n; ++c) {
        double m = 0;
        for (int j = 0; j < in.n; ++j)
          if (cnt[j] == 0 && q.dist.at(c, j) <= r) m += in.w[j];
        if (m > bm + 1e-18) { bm = m; best = c; }
      }
      if (best < 0 || bm <= 0) break;
      std::vector<int> part;
      for (int j = 0; j < in.n; ++j)
        if (cnt[j] == 0 && q.dist.at(best, j) <= r) {
          part.push_back(j);
          uncovered -= in.w[j];
        }
      for (int j : part) ++cnt[j];
      parts.push_back(std::move(part));
    }
    auto c = finish_cover(in, parts, eps, delta, false, "greedy eps/2-ball upper bound",
                          0, members);
    return {std::log((double)std::max(1, c.k)), c};
  }

  if (method == CoverMethod::pack_lb) {
    std::vector<int> I;
    double lb = pack_bound(in, &I);
    if (in.n <= tol().exact_cover_cap) {
      // exact max separated set via complement-graph clique search
      Inst sep = in;
      for (int i = 0; i < in.n; ++i) {
        for (int w = 0; w < sep.adj[i].words; ++w) sep.adj[i].b[w] = ~in.adj[i].b[w];
        for (int j = in.n; j < sep.adj[i].words * 64; ++j) sep.adj[i].clear(j);
        sep.adj[i].set(i);
      }
      CliqueSearch cs(sep, 4000000);
      Bits all(in.n);
      for (int i = 0; i < in.n; ++i) all.set(i);
      cs.dfs(all, 0);
      if (!cs.capped) {
        std::vector<double> ws;
        for (int v : cs.best_set) ws.push_back(in.w[v]);
        std::sort(ws.begin(), ws.end());
        double acc = 0;
        int removable = 0;
        for (double x : ws)
          if (acc + x <= in.budget) { acc += x; ++removable; }
          else break;
        lb = std::max(lb, (double)((int)cs.best_set.size() - removable));
        I = cs.best_set;
      }
    }
    CoverSolution c;
    c.eps = eps;
    c.delta = delta;
    c.k = (int)std::max(1.0, lb);
    c.exact = false;
    c.certificate = "packing lower bound";
    c.lower_bound_k = std::max(1.0, lb);
    for (int v : I) c.parts.push_back(members[v]);
    return {std::log(std::max(1.0, lb)), c};
  }

  // ---- exact mode ----
  if (in.n > tol().exact_cover_extended_cap)
    fail(ErrorCode::cap, "eps_entropy exact: cap " +
                             std::to_string(tol().exact_cover_extended_cap) +
                             " points exceeded (n=" + std::to_string(in.n) + ")");
  // lower bounds: capacity (needed mass / max clique mass) and packing
  CliqueSearch cs(in, 20000000);
  {
    Bits all(in.n);
    for (int i = 0; i < in.n; ++i) all.set(i);
    cs.dfs(all, 0);
  }
  if (cs.capped && in.n > tol().exact_cover_cap)
    fail(ErrorCode::cap, "eps_entropy exact: max-clique bound budget exceeded");
  double needed = in.total - in.budget;
  int lb_cap = cs.capped ? 1 : (int)std::ceil(needed / cs.best - 1e-12);
  int lb = std::max({1, lb_cap, (int)pack_bound(in, nullptr)});
  // upper bound: deterministic greedy clique coverage
  std::vector<std::vector<int>> parts;
  int ub = greedy_clique_cover(in, &parts);
  std::string cert = "greedy-cover == lower bound";
  if (ub > lb && in.n > tol().exact_cover_cap) {
    std::vector<std::vector<int>> ls_parts;
    if (local_search_cover(in, q, lb, tol().cover_search_budget, &ls_parts)) {
      parts = std::move(ls_parts);
      ub = lb;
      cert = "local-search cover == lower bound";
    }
  }
  if (ub > lb) {
    if (in.n <= tol().exact_cover_cap) {
      Bnb bnb(in);
      bnb.wmax_clique = cs.capped ? in.total : cs.best;
      for (int k = lb; k < ub; ++k) {
        std::vector<uint32_t> sol;
        if (bnb.feasible(bnb.full, in.budget, k, sol)) {
          parts.clear();
          for (uint32_t msk : sol) {
            std::vector<int> p;
            uint32_t s = msk;
            while (s) { p.push_back(__builtin_ctz(s)); s &= s - 1; }
            parts.push_back(std::move(p));
          }
          ub = k;
          break;
        }
        lb = k + 1;
      }
      cert = "branch-and-bound";
    } else {
      fail(ErrorCode::cap,
           "eps_entropy exact: certificate did not close (lb=" + std::to_string(lb) +
               ", ub=" + std::to_string(ub) + ", n=" + std::to_string(in.n) +
               " > bnb cap " + std::to_string(tol().exact_cover_cap) + ")");
    }
  }
  auto c = finish_cover(in, parts, eps, delta, true, cert, lb, members);
  return {std::log((double)std::max(1, c.k)), c};
}

EntropyResult eps_entropy(const FiniteMetricTriple& t, double eps, CoverMethod method) {
  return mm_entropy(t, eps, eps, method);
}

double shannon(const std::vector<double>& p) {
  double h = 0;
  for (double x : p) {
    if (x < 0) fail(ErrorCode::validation, "shannon: negative probability");
    if (x > 0) h -= x * std::log(x);
  }
  return h;
}

std::vector<int> tail_support(const std::vector<double>& p, double delta) {
  if (!(delta > 0 && delta < 1)) fail(ErrorCode::validation, "tail_support: delta in (0,1)");
  std::vector<int> idx(p.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (p[a] != p[b]) return p[a] > p[b];
    return a < b;
  });
  std::vector<int> J;
  double acc = 0;
  for (int i : idx) {
    if (acc >= 1 - delta - tol().strict) break;
    J.push_back(i);
    acc += p[i];
  }
  return J;
}

EntropyResult hk_entropy_result(const FiniteMetricTriple& t, double eps, HkMode mode,
                                DiscreteApproximation* witness) {
  validate_triple(t);
  if (eps <= 0) fail(ErrorCode::validation, "hk_entropy: eps > 0 required");
  int n = t.n();
  double thr = eps - tol().strict;
  auto eval_support = [&](const std::vector<int>& S, DiscreteApproximation& d) {
    // pushforward under nearest-center assignment (lowest-index tie break);
    // its transport cost to mu is exactly sum_i mu_i * dist(i, S)
    d.support = S;
    d.nu.assign(S.size(), 0.0);
    d.transport_cost = 0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      for (size_t s = 1; s < S.size(); ++s)
        if (t.dist.at(i, S[s]) < t.dist.at(i, S[best])) best = (int)s;
      d.nu[best] += t.w[i];
      d.transport_cost += t.w[i] * t.dist.at(i, S[best]);
    }
    d.H = shannon(d.nu);
    d.feasible = d.transport_cost <= thr;
  };
  DiscreteApproximation best;
  best.H = std::numeric_limits<double>::infinity();
  if (mode == HkMode::exact_tiny) {
    if (n > tol().exact_support_cap)
      fail(ErrorCode::cap, "hk_entropy exact-tiny: support cap " +
                               std::to_string(tol().exact_support_cap) + " exceeded");
    for (uint32_t msk = 1; msk < (1u << n); ++msk) {
      std::vector<int> S;
      for (int i = 0; i < n; ++i)
        if (msk & (1u << i)) S.push_back(i);
      DiscreteApproximation d;
      eval_support(S, d);
      if (d.feasible && d.H < best.H) best = d;
    }
  } else {
    // k-median style growth: add the center reducing cost the most
    std::vector<int> S;
    std::vector<bool> used(n, false);
    while ((int)S.size() < n) {
      int pick = -1;
      double bc = std::numeric_limits<double>::infinity();
      for (int c = 0; c < n; ++c) {
        if (used[c]) continue;
        std::vector<int> S2 = S;
        S2.push_back(c);
        DiscreteApproximation d;
        eval_support(S2, d);
        if (d.transport_cost < bc) { bc = d.transport_cost; pick = c; }
      }
      S.push_back(pick);
      used[pick] = true;
      DiscreteApproximation d;
      eval_support(S, d);
      if (d.feasible) {
        if (d.H < best.H) best = d;
        break;  // first feasible support; further greedy growth only adds entropy
      }
    }
  }
  if (witness) *witness = best;
  EntropyResult r;
  r.H = best.H;
  r.cover.certificate = best.feasible || std::isinf(best.H)
                            ? (mode == HkMode::exact_tiny ? "support enumeration" : "k-median greedy")
                            : "infeasible";
  return r;
}

double hk_entropy(const FiniteMetricTriple& t, double eps, HkMode mode) {
  return hk_entropy_result(t, eps, mode).H;
}

AdmissibilityEvent admissibility_event(const DistanceMatrix& m,
                                       const std::vector<double>* w, double eps) {
  if (eps <= 0) fail(ErrorCode::validation, "admissibility_event: eps > 0 required");
  auto rep = validate(m);
  if (!rep.ok()) fail(ErrorCode::validation, "admissibility_event: " + rep.summary());
  int n = m.n;
  // separation graph: d > eps (strictly)
  Inst in;
  in.n = n;
  in.w.assign(n, 1.0 / n);
  if (w) in.w = *w;
  in.total = 1;
  in.adj.assign(n, Bits(n));
  for (int i = 0; i < n; ++i) {
    in.adj[i].set(i);
    for (int j = i + 1; j < n; ++j)
      if (m.at(i, j) >= eps + tol().strict) { in.adj[i].set(j); in.adj[j].set(i); }
  }
  AdmissibilityEvent ev;
  if (n <= tol().exact_cover_cap) {
    CliqueSearch cs(in, 4000000);
    Bits all(n);
    for (int i = 0; i < n; ++i) all.set(i);
    cs.dfs(all, 0);
    if (!cs.capped) {
      ev.separated = cs.best_set;
      ev.exact = true;
    }
  }
  if (!ev.exact) {
    // greedy: repeatedly take the vertex with most separated neighbors
    Bits live(n);
    for (int i = 0; i < n; ++i) live.set(i);
    for (;;) {
      int pick = -1, bd = -1;
      live.for_each([&](int v) {
        int d = and_count(live, in.adj[v]);
        if (d > bd) { bd = d; pick = v; }
      });
      if (pick < 0) break;
      ev.separated.push_back(pick);
      Bits nl(n);
      for (int ww = 0; ww < nl.words; ++ww) nl.b[ww] = live.b[ww] & in.adj[pick].b[ww];
      nl.clear(pick);
      live = nl;
    }
  }
  std::sort(ev.separated.begin(), ev.separated.end());
  ev.flag = (double)ev.separated.size() >= eps * n;
  return ev;
}

SubsampleBounds subsample_entropy_bounds(const FiniteMetricTriple& t, double eps,
                                         const std::vector<int>& n_list, int replicas,
                                         uint64_t seed) {
  SubsampleBounds out;
  try {
    out.full_H = eps_entropy(t, eps, CoverMethod::exact).H;
    out.full_H_plus = eps_entropy(t, eps * (1 + tol().right_limit), CoverMethod::exact).H;
  } catch (const Error&) {
    // full space too large for the exact oracle; report subsample stats only
  }
  for (int n : n_list) {
    SubsampleRow row;
    row.n = n;
    row.min = std::numeric_limits<double>::infinity();
    row.max = -row.min;
    row.method = "exact";
    for (int r = 0; r < replicas; ++r) {
      auto sub = subsample(t, n, mix64(seed ^ (uint64_t)r * 0x51ull));
      double H;
      try {
        H = eps_entropy(sub, eps, CoverMethod::exact).H;
      } catch (const Error&) {
        H = eps_entropy(sub, eps, CoverMethod::greedy).H;
        row.method = "greedy";
      }
      row.mean += H / replicas;
      row.min = std::min(row.min, H);
      row.max = std::max(row.max, H);
    }
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace scalent
