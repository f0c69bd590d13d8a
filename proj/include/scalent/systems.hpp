#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "scalent/core.hpp"

namespace scalent {

struct Window {
  std::vector<int> sym;  // composite letter codes
  double prob = 0;
};

struct SymbolicSystem {
  enum class Kind { bernoulli, substitution, adic, product };
  Kind kind = Kind::bernoulli;
  std::string descriptor;

  std::vector<double> p;                 // bernoulli letter probabilities
  std::vector<std::vector<int>> rules;   // substitution: letter -> word
  std::vector<int> sigma;                // adic schedule prefix, entries in {0,1}
  std::vector<SymbolicSystem> children;  // product

  int letter_count() const;
  // base cut semimetric between letters (products: mean of children's cuts)
  double letter_dist(int a, int b) const;
  // all length-n windows with stationary probabilities; Error(cap) if more
  // than cap windows. exact_probs=false marks empirical substitution counts.
  std::vector<Window> windows_exact(int n, long long cap, bool* exact_probs = nullptr) const;
  std::vector<int> sample_window(int n, Rng& rng) const;
};

SymbolicSystem make_bernoulli(const std::vector<double>& p);
SymbolicSystem make_substitution(const std::vector<std::vector<int>>& rules);
SymbolicSystem make_adic(const std::vector<int>& sigma);
SymbolicSystem make_product(const std::vector<SymbolicSystem>& children);
SymbolicSystem make_morse();
SymbolicSystem make_chacon();

struct SubstInvariants {
  bool primitive = false;
  bool constant_length = false;
  int length = 0;          // q, when constant length
  int height = 0;          // h(xi)
  int column_number = 0;   // c(xi)
};
// height/column number require constant length (Error(validation) otherwise;
// primitivity is always computed).
SubstInvariants substitution_invariants(const SymbolicSystem& s, int k_max = 8);

// adic helpers
std::vector<std::vector<int>> adic_level_words(const std::vector<int>& sigma, int level);
// successor map on path encodings (odometer on the choice bits); returns false
// at the maximal path (wrap to all-zeros).
bool adic_successor(std::vector<int>& path);

struct RotationTriple {
  double alpha = 0;  // turns
  int m = 0;         // discretization
  // arc-length triple; identical for every n (the metric is T-invariant)
  FiniteMetricTriple triple(int n = 1) const;
};

FiniteMetricTriple averaged_triple_exact(const SymbolicSystem& s, int n, long long cap);
FiniteMetricTriple averaged_triple_mc(const SymbolicSystem& s, int n, int m, uint64_t seed);

struct OmegaRealization {
  FiniteMetricTriple t;
  int truncation = 0;       // number of series terms kept
  double tail_bound = 0;    // certified bound on the neglected tail
};
OmegaRealization omega_triple_exact(const SymbolicSystem& s, double z, double tol, long long cap);
OmegaRealization omega_triple_mc(const SymbolicSystem& s, double z, double tol, int m, uint64_t seed);

// Omega and averaged triples realized on the SAME m sampled trajectories, for
// pointwise comparison of the two semimetrics pair by pair.
std::pair<OmegaRealization, FiniteMetricTriple> paired_omega_average(
    const SymbolicSystem& s, int n, double z, double tol, int m, uint64_t seed);

// sampleable continuous circle (arc-length metric, uniform measure, turns)
SampleableTriple circle_sampleable();

// descriptor parsing: bernoulli:0.5 | subst:0=01,1=10 | adic:1,0,1,1 |
// product:(A;B) | rotation:0.381966 | cube:4 | circle
struct SystemSpec {
  enum class Kind { symbolic, rotation, cube, circle } kind;
  SymbolicSystem symbolic;
  double rotation_alpha = 0;
  int rotation_m = 256;
  int cube_dim = 0;
  std::string descriptor;
};
SystemSpec parse_system(const std::string& descriptor);

// The finite triple a spec names for sampling/entropy purposes:
// cube -> binary cube; symbolic -> averaged triple at window length n.
FiniteMetricTriple spec_triple(const SystemSpec& spec, int n, long long cap);

}  // namespace scalent
