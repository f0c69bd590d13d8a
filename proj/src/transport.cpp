#include "scalent/transport.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <limits>
#include <numeric>

#include "scalent/lp.hpp"
#include "scalent/rng.hpp"

namespace scalent {

namespace {
double checked_mass(const std::vector<double>& v, const char* what) {
  double s = 0;
  for (double x : v) {
    if (x < 0) fail(ErrorCode::validation, std::string(what) + ": negative mass");
    s += x;
  }
  return s;
}
}  // namespace

std::pair<double, TransportPlan> kantorovich(const CostMatrix& cost,
                                             const std::vector<double>& mu,
                                             const std::vector<double>& nu) {
  int n1 = (int)mu.size(), n2 = (int)nu.size();
  if (cost.n1 != n1 || cost.n2 != n2)
    fail(ErrorCode::validation, "kantorovich: dimension mismatch");
  double m1 = checked_mass(mu, "mu"), m2 = checked_mass(nu, "nu");
  if (std::abs(m1 - m2) > 1e-9)
    fail(ErrorCode::validation, "kantorovich: marginal masses differ");
  LpProblem p;
  p.num_vars = n1 * n2;
  p.c.assign(p.num_vars, 0.0);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) p.c[i * n2 + j] = cost.at(i, j);
  // row marginals + column marginals (last column constraint is redundant; keep
  // it anyway — the phase-1 handles redundancy and instances are tiny)
  for (int i = 0; i < n1; ++i) {
    LpRow r{std::vector<double>(p.num_vars, 0.0), '=', mu[i]};
    for (int j = 0; j < n2; ++j) r.a[i * n2 + j] = 1.0;
    p.rows.push_back(std::move(r));
  }
  for (int j = 0; j < n2 - 1; ++j) {
    LpRow r{std::vector<double>(p.num_vars, 0.0), '=', nu[j]};
    for (int i = 0; i < n1; ++i) r.a[i * n2 + j] = 1.0;
    p.rows.push_back(std::move(r));
  }
  auto res = solve_lp(p);
  if (res.status != LpStatus::optimal)
    fail(ErrorCode::validation, "kantorovich: transport LP infeasible");
  TransportPlan plan(n1, n2);
  plan.g = res.x;
  for (double& g : plan.g)
    if (g < 0 && g > -1e-12) g = 0;
  return {res.objective, plan};
}

std::pair<double, TransportPlan> kantorovich(const DistanceMatrix& cost,
                                             const std::vector<double>& mu,
                                             const std::vector<double>& nu) {
  CostMatrix c(cost.n, cost.n);
  c.c = cost.a;
  return kantorovich(c, mu, nu);
}

std::pair<double, DistanceMatrix> m_norm(const DistanceMatrix& f,
                                         const std::vector<double>& w) {
  int n = f.n;
  if (n > tol().lp_point_cap)
    fail(ErrorCode::cap, "m_norm: point cap " + std::to_string(tol().lp_point_cap) + " exceeded");
  if ((int)w.size() != n) fail(ErrorCode::validation, "m_norm: weights length mismatch");
  for (int i = 0; i < n; ++i) {
    if (f.at(i, i) != 0) fail(ErrorCode::validation, "m_norm: nonzero diagonal");
    for (int j = 0; j < n; ++j) {
      if (f.at(i, j) < 0) fail(ErrorCode::validation, "m_norm: negative entry");
      if (std::abs(f.at(i, j) - f.at(j, i)) > tol().symmetry)
        fail(ErrorCode::validation, "m_norm: asymmetric input");
    }
  }
  if (n == 1) return {0.0, f};
  // variables E_pq >= 0 over pairs p<q; D = |f| + E; cutting planes on triangles
  int P = n * (n - 1) / 2;
  std::vector<std::vector<int>> pid(n, std::vector<int>(n, -1));
  {
    int k = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) pid[i][j] = pid[j][i] = k++;
  }
  LpProblem p;
  p.num_vars = P;
  p.c.assign(P, 0.0);
  double base = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      p.c[pid[i][j]] = 2.0 * w[i] * w[j];
      base += 2.0 * w[i] * w[j] * f.at(i, j);
    }
  DistanceMatrix D = f;
  for (int round = 0; round < 400; ++round) {
    // collect most-violated triangle cuts of the current D
    struct Cut { double excess; int i, j, k; };
    std::vector<Cut> cuts;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          if (k == i || k == j) continue;
          double e = D.at(i, j) - D.at(i, k) - D.at(k, j);
          if (e > tol().lp_gap) cuts.push_back({e, i, j, k});
        }
    if (cuts.empty()) break;
    std::sort(cuts.begin(), cuts.end(), [](const Cut& a, const Cut& b) { return a.excess > b.excess; });
    size_t add = std::min<size_t>(cuts.size(), 100);
    for (size_t t = 0; t < add; ++t) {
      const Cut& c = cuts[t];
      // E_ij - E_ik - E_kj <= f_ik + f_kj - f_ij
      LpRow r{std::vector<double>(P, 0.0), '<',
              f.at(c.i, c.k) + f.at(c.k, c.j) - f.at(c.i, c.j)};
      r.a[pid[c.i][c.j]] += 1.0;
      r.a[pid[c.i][c.k]] -= 1.0;
      r.a[pid[c.k][c.j]] -= 1.0;
      p.rows.push_back(std::move(r));
    }
    auto res = solve_lp(p);
    if (res.status != LpStatus::optimal)
      fail(ErrorCode::validation, "m_norm: LP solve failed");
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double v = f.at(i, j) + std::max(0.0, res.x[pid[i][j]]);
        D.at(i, j) = D.at(j, i) = v;
      }
  }
  double val = base;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) val += 2.0 * w[i] * w[j] * (D.at(i, j) - f.at(i, j));
  return {val, D};
}

double mdist(const DistanceMatrix& a, const DistanceMatrix& b, const std::vector<double>& w) {
  if (a.n != b.n) fail(ErrorCode::validation, "mdist: dimension mismatch");
  DistanceMatrix f(a.n);
  for (size_t t = 0; t < a.a.size(); ++t) f.a[t] = std::abs(a.a[t] - b.a[t]);
  return m_norm(f, w).first;
}

// ---------------- Dist_m / Dist_K ----------------

namespace {

struct SuppPair { int i, a; double g; };

std::vector<SuppPair> support_of(const TransportPlan& g) {
  std::vector<SuppPair> s;
  for (int i = 0; i < g.n1; ++i)
    for (int a = 0; a < g.n2; ++a)
      if (g.at(i, a) > 1e-14) s.push_back({i, a, g.at(i, a)});
  return s;
}

// m-side value of a fixed coupling: m-norm of |rho1 - rho2| on supp(gamma).
double coupling_m_value(const FiniteMetricTriple& t1, const FiniteMetricTriple& t2,
                        const TransportPlan& g, DistanceMatrix* witness = nullptr) {
  auto s = support_of(g);
  int m = (int)s.size();
  DistanceMatrix f(m);
  std::vector<double> w(m);
  double tot = 0;
  for (int p = 0; p < m; ++p) tot += s[p].g;
  for (int p = 0; p < m; ++p) w[p] = s[p].g / tot;
  for (int p = 0; p < m; ++p)
    for (int q = p + 1; q < m; ++q) {
      double v = std::abs(t1.dist.at(s[p].i, s[q].i) - t2.dist.at(s[p].a, s[q].a));
      f.at(p, q) = f.at(q, p) = v;
    }
  auto [val, D] = m_norm(f, w);
  if (witness) *witness = D;
  return val;
}

// K-side value of a fixed coupling: LP over cross entries of the glued space.
double coupling_K_value(const FiniteMetricTriple& t1, const FiniteMetricTriple& t2,
                        const TransportPlan& g, CrossMetric* witness = nullptr) {
  int n1 = t1.n(), n2 = t2.n();
  LpProblem p;
  p.num_vars = n1 * n2;
  p.c.assign(p.num_vars, 0.0);
  for (int i = 0; i < n1; ++i)
    for (int a = 0; a < n2; ++a) p.c[i * n2 + a] = g.at(i, a);
  auto var = [&](int i, int a) { return i * n2 + a; };
  for (int i = 0; i < n1; ++i)
    for (int j = i + 1; j < n1; ++j) {
      double r1 = t1.dist.at(i, j);
      for (int a = 0; a < n2; ++a) {
        LpRow r{std::vector<double>(p.num_vars, 0.0), '<', r1};
        r.a[var(i, a)] = 1;
        r.a[var(j, a)] = -1;
        p.rows.push_back(r);
        std::swap(r.a[var(i, a)], r.a[var(j, a)]);
        r.rel = '<'; r.b = r1;
        p.rows.push_back(r);
        LpRow r3{std::vector<double>(p.num_vars, 0.0), '>', r1};
        r3.a[var(i, a)] = 1;
        r3.a[var(j, a)] = 1;
        p.rows.push_back(std::move(r3));
      }
    }
  for (int a = 0; a < n2; ++a)
    for (int b = a + 1; b < n2; ++b) {
      double r2 = t2.dist.at(a, b);
      for (int i = 0; i < n1; ++i) {
        LpRow r{std::vector<double>(p.num_vars, 0.0), '<', r2};
        r.a[var(i, a)] = 1;
        r.a[var(i, b)] = -1;
        p.rows.push_back(r);
        std::swap(r.a[var(i, a)], r.a[var(i, b)]);
        p.rows.push_back(r);
        LpRow r3{std::vector<double>(p.num_vars, 0.0), '>', r2};
        r3.a[var(i, a)] = 1;
        r3.a[var(i, b)] = 1;
        p.rows.push_back(std::move(r3));
      }
    }
  auto res = solve_lp(p);
  if (res.status != LpStatus::optimal)
    fail(ErrorCode::validation, "dist_K: cross-metric LP failed");
  if (witness) {
    witness->n1 = n1;
    witness->n2 = n2;
    witness->c = res.x;
  }
  return res.objective;
}

TransportPlan nw_corner(const std::vector<double>& mu, const std::vector<double>& nu,
                        const std::vector<int>& rowo, const std::vector<int>& colo) {
  int n1 = (int)mu.size(), n2 = (int)nu.size();
  TransportPlan g(n1, n2);
  std::vector<double> rm = mu, cm = nu;
  int i = 0, j = 0;
  while (i < n1 && j < n2) {
    int r = rowo[i], c = colo[j];
    double t = std::min(rm[r], cm[c]);
    g.at(r, c) += t;
    rm[r] -= t;
    cm[c] -= t;
    if (rm[r] <= 1e-15) ++i;
    else ++j;
  }
  return g;
}

uint64_t plan_hash(const TransportPlan& g) {
  uint64_t h = 1469598103934665603ull;
  for (double v : g.g) {
    long long q = (long long)std::llround(v * 1e12);
    for (int b = 0; b < 8; ++b) { h ^= (uint64_t)(q >> (8 * b)) & 0xff; h *= 1099511628211ull; }
  }
  return h;
}

// Documented search set of couplings shared by both exact-tiny searches.
std::vector<TransportPlan> coupling_search_set(const FiniteMetricTriple& t1,
                                               const FiniteMetricTriple& t2,
                                               long long budget, uint64_t seed) {
  int n1 = t1.n(), n2 = t2.n();
  std::vector<TransportPlan> out;
  std::map<uint64_t, bool> seen;
  auto push = [&](const TransportPlan& g) {
    uint64_t h = plan_hash(g);
    if (!seen.count(h)) { seen[h] = true; out.push_back(g); }
  };
  // all northwest-corner vertices over row/column orderings
  std::vector<int> ro(n1), co(n2);
  std::iota(ro.begin(), ro.end(), 0);
  long long combos = 1;
  for (int i = 2; i <= n1; ++i) combos *= i;
  for (int i = 2; i <= n2; ++i) combos *= i;
  if (combos <= 50000) {
    do {
      std::iota(co.begin(), co.end(), 0);
      do { push(nw_corner(t1.w, t2.w, ro, co)); } while (std::next_permutation(co.begin(), co.end()));
    } while (std::next_permutation(ro.begin(), ro.end()));
  } else {
    Rng rng(seed, "dist.nwcorner");
    for (int t = 0; t < 2000; ++t) {
      std::iota(ro.begin(), ro.end(), 0);
      std::iota(co.begin(), co.end(), 0);
      for (int i = n1 - 1; i > 0; --i) std::swap(ro[i], ro[rng.below(i + 1)]);
      for (int i = n2 - 1; i > 0; --i) std::swap(co[i], co[rng.below(i + 1)]);
      push(nw_corner(t1.w, t2.w, ro, co));
    }
  }
  // equal-size uniform triples: all permutation couplings (subset of NW set,
  // but generated explicitly when the full NW enumeration was truncated)
  bool uniform_eq = n1 == n2;
  for (int i = 0; uniform_eq && i < n1; ++i)
    uniform_eq = std::abs(t1.w[i] - 1.0 / n1) < 1e-12 && std::abs(t2.w[i] - 1.0 / n1) < 1e-12;
  if (uniform_eq && n1 <= 8 && combos > 50000) {
    std::vector<int> perm(n1);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      TransportPlan g(n1, n2);
      for (int i = 0; i < n1; ++i) g.at(i, perm[i]) = 1.0 / n1;
      push(g);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  // grid refinement: seeded interior couplings (IPF-projected perturbations)
  Rng rng(seed, "dist.interior");
  int n_interior = (int)std::min<long long>(32, std::max<long long>(4, budget / 1000));
  for (int t = 0; t < n_interior; ++t) {
    TransportPlan g(n1, n2);
    for (int i = 0; i < n1; ++i)
      for (int a = 0; a < n2; ++a)
        g.at(i, a) = t1.w[i] * t2.w[a] * std::exp(2.0 * rng.uniform() - 1.0);
    for (int it = 0; it < 80; ++it) {  // iterative proportional fitting
      for (int i = 0; i < n1; ++i) {
        double s = 0;
        for (int a = 0; a < n2; ++a) s += g.at(i, a);
        for (int a = 0; a < n2; ++a) g.at(i, a) *= t1.w[i] / s;
      }
      for (int a = 0; a < n2; ++a) {
        double s = 0;
        for (int i = 0; i < n1; ++i) s += g.at(i, a);
        for (int i = 0; i < n1; ++i) g.at(i, a) *= t2.w[a] / s;
      }
    }
    push(g);
  }
  return out;
}

// one cycle-move refinement pass minimizing eval(gamma)
template <typename Eval>
void refine_coupling(TransportPlan& g, double& best, Eval eval, int moves, Rng& rng) {
  int n1 = g.n1, n2 = g.n2;
  if (n1 < 2 || n2 < 2) return;
  for (int t = 0; t < moves; ++t) {
    int i = (int)rng.below(n1), j = (int)rng.below(n1);
    int a = (int)rng.below(n2), b = (int)rng.below(n2);
    if (i == j || a == b) continue;
    // shift mass along cycle (i,a)+(j,b)-(i,b)-(j,a)
    double up = std::min(g.at(i, b), g.at(j, a));
    double dn = std::min(g.at(i, a), g.at(j, b));
    for (double s : {up, up / 2, -dn, -dn / 2}) {
      if (s == 0) continue;
      TransportPlan h = g;
      h.at(i, a) += s; h.at(j, b) += s; h.at(i, b) -= s; h.at(j, a) -= s;
      double v = eval(h);
      if (v < best - 1e-12) { best = v; g = h; break; }
    }
  }
}

DistResult dist_common(const FiniteMetricTriple& t1, const FiniteMetricTriple& t2,
                       DistMode mode, long long budget, uint64_t seed, bool kside) {
  validate_triple(t1);
  validate_triple(t2);
  if ((long long)t1.n() * t2.n() > 4096)
    fail(ErrorCode::cap, "dist: instance too large");
  if (mode == DistMode::exact_tiny) {
    bool uniform_eq = t1.n() == t2.n() && t1.n() <= 8;
    for (int i = 0; uniform_eq && i < t1.n(); ++i)
      uniform_eq = std::abs(t1.w[i] - 1.0 / t1.n()) < 1e-12 && std::abs(t2.w[i] - 1.0 / t1.n()) < 1e-12;
    if (!(std::max(t1.n(), t2.n()) <= 4 || uniform_eq))
      fail(ErrorCode::cap, "dist: exact-tiny requires supports <= 4 or equal-size uniform n <= 8");
  }
  auto set = coupling_search_set(t1, t2, budget, seed);
  DistResult res;
  res.value = std::numeric_limits<double>::infinity();
  for (auto& g : set) {
    double v = kside ? coupling_K_value(t1, t2, g) : coupling_m_value(t1, t2, g);
    if (v < res.value) { res.value = v; res.plan = g; }
    if (res.value < 1e-13) break;  // exact-zero witness found
  }
  Rng rng(seed, kside ? "distK.refine" : "distm.refine");
  int moves = (int)std::min<long long>(mode == DistMode::exact_tiny ? 400 : 150,
                                       std::max<long long>(40, budget / 100));
  auto eval = [&](const TransportPlan& h) {
    return kside ? coupling_K_value(t1, t2, h) : coupling_m_value(t1, t2, h);
  };
  if (res.value > 1e-13) refine_coupling(res.plan, res.value, eval, moves, rng);
  if (mode == DistMode::heuristic) {
    // alternating descent with restarts from a few search-set couplings
    int restarts = (int)std::min<size_t>(set.size(), 8);
    for (int r = 0; r < restarts; ++r) {
      TransportPlan g = set[(size_t)r * std::max<size_t>(1, set.size() / restarts)];
      double cur = eval(g);
      for (int it = 0; it < 20; ++it) {
        if (kside) {
          CrossMetric c;
          coupling_K_value(t1, t2, g, &c);  // fix plan -> optimal cross metric
          CostMatrix cost(t1.n(), t2.n());
          cost.c = c.c;
          auto [v2, g2] = kantorovich(cost, t1.w, t2.w);  // fix cross -> plan
          if (v2 >= cur - 1e-12) break;
          cur = v2;
          g = g2;
        } else {
          // linearize with the element-wise difference as transport cost
          CostMatrix cost(t1.n(), t2.n());
          auto s = support_of(g);
          for (int i = 0; i < t1.n(); ++i)
            for (int a = 0; a < t2.n(); ++a) {
              double acc = 0;
              for (auto& q : s)
                acc += q.g * std::abs(t1.dist.at(i, q.i) - t2.dist.at(a, q.a));
              cost.at(i, a) = acc;
            }
          auto [v2, g2] = kantorovich(cost, t1.w, t2.w);
          double v_true = coupling_m_value(t1, t2, g2);
          if (v_true >= cur - 1e-12) break;
          cur = v_true;
          g = g2;
        }
      }
      if (cur < res.value) { res.value = cur; res.plan = g; }
    }
  }
  // final witnesses
  if (kside) coupling_K_value(t1, t2, res.plan, &res.cross);
  else coupling_m_value(t1, t2, res.plan, &res.witness_d);
  res.certified = (mode == DistMode::exact_tiny);
  res.converged = true;
  if (res.value < 0 && res.value > -1e-12) res.value = 0;
  return res;
}

}  // namespace

DistResult dist_m(const FiniteMetricTriple& t1, const FiniteMetricTriple& t2,
                  DistMode mode, long long budget, uint64_t seed) {
  return dist_common(t1, t2, mode, budget, seed, false);
}

DistResult dist_K(const FiniteMetricTriple& t1, const FiniteMetricTriple& t2,
                  DistMode mode, long long budget, uint64_t seed) {
  return dist_common(t1, t2, mode, budget, seed, true);
}

}  // namespace scalent
