#include "scalent/lp.hpp"

#include <cmath>
#include <cstring>
#include <limits>

namespace scalent {

namespace {
constexpr double kPivotEps = 1e-11;

// Tableau with rows = constraints, cols = structural + slack + artificial + rhs.
struct Tableau {
  int m, ncols;  // ncols includes rhs
  std::vector<double> t;  // (m+1) x ncols, last row = objective
  std::vector<int> basis; // basic variable per row

  double& at(int r, int c) { return t[(size_t)r * ncols + c]; }

  void pivot(int pr, int pc) {
    double pv = at(pr, pc);
    for (int c = 0; c < ncols; ++c) at(pr, c) /= pv;
    at(pr, pc) = 1.0;
    for (int r = 0; r <= m; ++r) {
      if (r == pr) continue;
      double f = at(r, pc);
      if (f == 0.0) continue;
      for (int c = 0; c < ncols; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
    basis[pr] = pc;
  }

  // Bland's rule over the first nvars columns that are allowed.
  LpStatus run(int allowed_cols) {
    int rhs = ncols - 1;
    for (;;) {
      int pc = -1;
      for (int c = 0; c < allowed_cols; ++c)
        if (at(m, c) < -kPivotEps) { pc = c; break; }
      if (pc < 0) return LpStatus::optimal;
      int pr = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m; ++r) {
        double a = at(r, pc);
        if (a > kPivotEps) {
          double ratio = at(r, rhs) / a;
          if (ratio < best - 1e-15 ||
              (ratio < best + 1e-15 && (pr < 0 || basis[r] < basis[pr]))) {
            best = ratio;
            pr = r;
          }
        }
      }
      if (pr < 0) return LpStatus::unbounded;
      pivot(pr, pc);
    }
  }
};
}  // namespace

LpResult solve_lp(const LpProblem& p) {
  int n = p.num_vars, m = (int)p.rows.size();
  // count slacks
  int nslack = 0;
  for (const auto& r : p.rows)
    if (r.rel != '=') ++nslack;
  int nart = m;  // one artificial per row (simple and safe)
  int ncols = n + nslack + nart + 1;
  Tableau T;
  T.m = m;
  T.ncols = ncols;
  T.t.assign((size_t)(m + 1) * ncols, 0.0);
  T.basis.assign(m, -1);
  int rhs = ncols - 1;
  int sidx = n;
  for (int r = 0; r < m; ++r) {
    const LpRow& row = p.rows[r];
    if ((int)row.a.size() != n) fail(ErrorCode::usage, "LP row size mismatch");
    double sign = row.b < 0 ? -1.0 : 1.0;  // keep rhs nonnegative
    for (int c = 0; c < n; ++c) T.at(r, c) = sign * row.a[c];
    T.at(r, rhs) = sign * row.b;
    if (row.rel != '=') {
      double s = (row.rel == '<') ? 1.0 : -1.0;
      T.at(r, sidx++) = sign * s;
    }
  }
  // artificials
  for (int r = 0; r < m; ++r) {
    // if a slack column can serve as the basis (coefficient +1), use it
    int art = n + nslack + r;
    T.at(r, art) = 1.0;
    T.basis[r] = art;
  }
  // prefer slack as initial basis where it already is +1 (fewer phase-1 pivots)
  // phase 1 objective: min sum of artificials
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < ncols; ++c) T.at(m, c) -= T.at(r, c);
  T.at(m, rhs) = 0.0;
  for (int r = 0; r < m; ++r) T.at(m, rhs) -= T.at(r, rhs);
  // (objective row currently = -sum of rows over all cols; artificial cols become 0)
  for (int r = 0; r < m; ++r) T.at(m, n + nslack + r) = 0.0;
  LpStatus st = T.run(n + nslack);
  double phase1 = -T.at(m, rhs);
  if (st == LpStatus::unbounded || phase1 > 1e-7) return {LpStatus::infeasible, {}, 0.0};
  // drive remaining artificials out of the basis if possible
  for (int r = 0; r < m; ++r) {
    if (T.basis[r] >= n + nslack) {
      int pc = -1;
      for (int c = 0; c < n + nslack; ++c)
        if (std::abs(T.at(r, c)) > kPivotEps) { pc = c; break; }
      if (pc >= 0) T.pivot(r, pc);
      // else the row is redundant (all-zero); leave degenerate artificial at 0
    }
  }
  // phase 2: rebuild objective row from c, reduced by current basis
  for (int c = 0; c < ncols; ++c) T.at(m, c) = 0.0;
  for (int c = 0; c < n; ++c) T.at(m, c) = p.c[c];
  for (int r = 0; r < m; ++r) {
    int b = T.basis[r];
    double cb = (b < n) ? p.c[b] : 0.0;
    if (cb == 0.0) continue;
    for (int c = 0; c < ncols; ++c) T.at(m, c) -= cb * T.at(r, c);
  }
  st = T.run(n + nslack);
  if (st == LpStatus::unbounded) return {LpStatus::unbounded, {}, 0.0};
  LpResult res;
  res.status = LpStatus::optimal;
  res.x.assign(n, 0.0);
  for (int r = 0; r < m; ++r)
    if (T.basis[r] < n) res.x[T.basis[r]] = T.at(r, rhs);
  double obj = 0;
  for (int c = 0; c < n; ++c) obj += p.c[c] * res.x[c];
  res.objective = obj;
  return res;
}

}  // namespace scalent
