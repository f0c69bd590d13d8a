#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "scalent/entropy.hpp"
#include "scalent/systems.hpp"

namespace scalent {

struct GridCell {
  double eps = 0;
  int n = 0;
  double H = 0;  // NaN when the cell failed
  std::string method;  // exact | greedy | pack_lb | mc-greedy | error:<msg>
  int replicas = 1;
  uint64_t seed = 0;
  double ci_low = 0, ci_high = 0;
  bool exact = false;
};

struct EntropyProfile {
  std::string descriptor;
  std::string base = "nats";
  std::vector<GridCell> cells;
};

// CSV columns: eps,n,H,method,replicas,seed,ci_low,ci_high
std::string profile_to_csv(const EntropyProfile& p);
EntropyProfile profile_from_csv(const std::string& csv);

struct PhiGridOptions {
  CoverMethod method = CoverMethod::exact;
  long long window_cap = 4096;  // exact-realization cap; beyond it, Monte Carlo
  int mc_samples = 512;
  int mc_replicas = 8;
  uint64_t seed = 0;
  int threads = 1;
};

// Phi(eps, n) = H_eps of the n-averaged realization. Per-cell failures are
// recorded in the cell (method = "error:<msg>"), never fatal. Deterministic
// per seed and independent of the thread count.
EntropyProfile phi_grid(const SystemSpec& spec, const std::vector<double>& eps_list,
                        const std::vector<int>& n_list, const PhiGridOptions& opt);

struct ClassFit {
  double eps = 0;
  std::string label;      // bounded | logpow | npow | linear | twosigma | exp | custom
  std::string tie_label;  // nonempty when two candidates tie
  double residual = 0;    // normalized H-space residual of the winner
  std::vector<double> params;
};

struct AsymptoticClassReport {
  std::vector<ClassFit> per_eps;
  std::string verdict;  // stable | unstable | inconclusive
};

// Least-squares per candidate on transformed coordinates; winner = smallest
// normalized residual in H-space; ties reported with verdict inconclusive;
// all-bad fits labeled custom with the raw log-log exponent.
AsymptoticClassReport fit_class(const EntropyProfile& p, int n_min,
                                const std::vector<int>* sigma = nullptr);

std::string stability_check(const EntropyProfile& p, int n_min,
                            const std::vector<int>* sigma = nullptr);

EntropyProfile exp_profile(const EntropyProfile& p);

struct DimensionEstimate {
  double eps = 0;
  double upper = 0, lower = 0;  // in [0,1], upper >= lower
};
std::vector<DimensionEstimate> entropy_dimension(const EntropyProfile& p, int n_min);

enum class ScaleFamily { power, exponential, constant };
struct SlowEntropyEstimate {
  double eps = 0;
  double upper = 0, lower = 0;
  bool infinite = false;  // constants family on an unbounded profile
};
std::vector<SlowEntropyEstimate> slow_entropy(const EntropyProfile& p, ScaleFamily family,
                                              int n_min);

}  // namespace scalent
