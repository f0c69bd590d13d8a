#pragma once
#include <vector>

#include "scalent/common.hpp"

namespace scalent {

// Dense two-phase primal simplex (Bland's rule: finite termination).
// min c.x  s.t.  rows of (A, rel, b),  x >= 0.
struct LpRow {
  std::vector<double> a;  // dense coefficient row, size num_vars
  char rel;               // '<', '>', '='
  double b;
};

struct LpProblem {
  int num_vars = 0;
  std::vector<double> c;
  std::vector<LpRow> rows;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status;
  std::vector<double> x;
  double objective = 0.0;
};

LpResult solve_lp(const LpProblem& p);

}  // namespace scalent
