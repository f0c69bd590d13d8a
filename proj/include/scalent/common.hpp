#pragma once
#include <stdexcept>
#include <string>

namespace scalent {

// Global numeric policy: one place for every tolerance/cap used by the library.
struct Tolerances {
  double symmetry = 1e-9;        // |d_ij - d_ji|
  double triangle = 1e-9;        // d_ik <= d_ij + d_jk + triangle
  double weights = 1e-12;        // |sum p - 1|
  double strict = 1e-12;         // "< eps" realized as "<= eps - strict"
  double lp_gap = 1e-9;          // LP duality-gap acceptance
  double eig_residual = 1e-10;   // eigensolver residual contract
  double right_limit = 1e-6;     // H_{eps+} proxy: eps * (1 + right_limit)
  int exact_cover_cap = 20;      // unconditional branch-and-bound cap
  int exact_cover_extended_cap = 4096;  // certificate-based exact cover cap
  int exact_support_cap = 15;    // H^K support enumeration cap
  int lp_point_cap = 32;         // m-norm point cap (triangle count cubes)
  int window_cap_default = 4096; // averaged_triple exact window cap
  long long adic_cap = 1 << 20;  // |V_k| materialization cap
  long long cover_search_budget = 4000000;  // local-search move budget
  double ratio_stable = 10.0;    // stability_check cross-eps ratio bound
  double subadd_slack_logunits = 2.0;  // monotone-subadditive surrogate slack
  double fit_calibration = 0.95; // synthetic fit recovery target
};
inline const Tolerances& tol() { static Tolerances t; return t; }

enum class ErrorCode : int {
  ok = 0,
  validation = 1,  // invalid input / invariant violation
  cap = 2,         // size cap or budget exceeded
  usage = 64,      // malformed invocation
};

struct Error : std::runtime_error {
  ErrorCode code;
  Error(ErrorCode c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

[[noreturn]] inline void fail(ErrorCode c, const std::string& msg) { throw Error(c, msg); }

}  // namespace scalent
