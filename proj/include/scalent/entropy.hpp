#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "scalent/core.hpp"

namespace scalent {

enum class CoverMethod { exact, greedy, pack_lb };

struct CoverSolution {
  double eps = 0;                       // diameter threshold
  double delta = 0;                     // removal-mass threshold (== eps unless mm-entropy)
  int k = 0;                            // number of parts
  std::vector<std::vector<int>> parts;  // disjoint index sets, diameter < eps each
  std::vector<int> removed;             // X_0
  double removed_mass = 0;
  bool exact = false;                   // k is provably minimal
  std::string certificate;              // how exactness/bound was established
  double lower_bound_k = 0;             // best proven lower bound on k (pack/capacity)
};

struct EntropyResult {
  double H = 0;  // nats
  CoverSolution cover;
};

// eps-entropy per method. exact: branch-and-bound for n <= 20 unconditionally;
// up to 4096 points when a matching lower-bound/cover certificate closes,
// otherwise a cap error. greedy: eps/2-ball upper bound. pack_lb: separation
// lower bound.
EntropyResult eps_entropy(const FiniteMetricTriple& t, double eps, CoverMethod method);

// Two-parameter mm-entropy: parts of diameter < eps, removed mass < delta.
EntropyResult mm_entropy(const FiniteMetricTriple& t, double eps, double delta,
                         CoverMethod method);

double shannon(const std::vector<double>& p);

// Largest-mass prefix reaching mass >= 1-delta; |J| <= exp((H+1)/delta).
std::vector<int> tail_support(const std::vector<double>& p, double delta);

struct DiscreteApproximation {
  std::vector<int> support;
  std::vector<double> nu;      // on support
  double transport_cost = 0;   // d_K(mu, nu)
  double H = 0;                // shannon entropy of nu
  bool feasible = false;       // d_K < eps achieved
};

enum class HkMode { exact_tiny, greedy };

// Kantorovich eps-entropy: min H(nu) over supports whose nearest-center
// pushforward lies within Kantorovich distance < eps of mu.
// Returns H = +infinity flag (feasible=false) if no support qualifies.
EntropyResult hk_entropy_result(const FiniteMetricTriple& t, double eps, HkMode mode,
                                DiscreteApproximation* witness = nullptr);
double hk_entropy(const FiniteMetricTriple& t, double eps, HkMode mode);

struct AdmissibilityEvent {
  std::vector<int> separated;  // largest found eps-separated index set
  bool exact = false;
  bool flag = false;  // |I| >= eps * n
};
AdmissibilityEvent admissibility_event(const DistanceMatrix& m,
                                       const std::vector<double>* w, double eps);

struct SubsampleRow {
  int n = 0;
  double mean = 0, min = 0, max = 0;
  std::string method;
};
struct SubsampleBounds {
  std::vector<SubsampleRow> rows;
  double full_H = -1;       // full-space entropy when computable, else -1
  double full_H_plus = -1;  // eps*(1+1e-6) proxy of the right limit
};
SubsampleBounds subsample_entropy_bounds(const FiniteMetricTriple& t, double eps,
                                         const std::vector<int>& n_list, int replicas,
                                         uint64_t seed);

}  // namespace scalent
