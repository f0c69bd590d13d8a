#pragma once
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "scalent/common.hpp"
#include "scalent/rng.hpp"

namespace scalent {

struct DistanceMatrix {
  int n = 0;
  std::vector<double> a;  // row-major n*n

  DistanceMatrix() = default;
  explicit DistanceMatrix(int n_) : n(n_), a((size_t)n_ * n_, 0.0) {}
  double& at(int i, int j) { return a[(size_t)i * n + j]; }
  double at(int i, int j) const { return a[(size_t)i * n + j]; }
};

struct Violation {
  std::string kind;  // "diagonal" | "negative" | "nan" | "symmetry" | "triangle" | "zero-offdiag"
  int i = -1, j = -1, k = -1;
  double amount = 0.0;  // worst offence magnitude
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

// Structural problems (non-square, NaN, negative entries) throw; invariant
// violations are reported.
ValidationReport validate(const DistanceMatrix& m, bool strict_metric = false);

struct FiniteMetricTriple {
  DistanceMatrix dist;
  std::vector<double> w;                 // probability weights
  std::vector<std::string> labels;       // optional, empty or size n
  bool allow_zero_weights = false;

  int n() const { return dist.n; }
  double mean_distance() const;
};

// Throws Error(validation) on any broken invariant.
void validate_triple(const FiniteMetricTriple& t);

// Merge zero-distance blocks, summing weights. Idempotent, mean-preserving.
FiniteMetricTriple quotient_zero_blocks(const FiniteMetricTriple& t);

// Rescale distances so the weighted mean distance is exactly 1.
FiniteMetricTriple normalize_mean(const FiniteMetricTriple& t);

struct SampleableTriple {
  std::string descriptor;
  // Draws one point (abstract coordinate vector) from mu using the given rng.
  std::function<std::vector<double>(Rng&)> sample_point;
  std::function<double(const std::vector<double>&, const std::vector<double>&)> metric;
};

// n i.i.d. points (with replacement for finite triples), uniform weights.
FiniteMetricTriple subsample(const FiniteMetricTriple& t, int n, uint64_t seed);
FiniteMetricTriple subsample(const SampleableTriple& t, int n, uint64_t seed);

// ---- text formats ----
/// Matrix file: "n" on line 1, then n rows of n numbers; '#' starts a comment.
/// Triple file: matrix file + line "weights:" + n numbers (omitted => uniform).
DistanceMatrix load_matrix(const std::string& path);
void save_matrix(const DistanceMatrix& m, const std::string& path);
FiniteMetricTriple load_triple(const std::string& path);
void save_triple(const FiniteMetricTriple& t, const std::string& path);
DistanceMatrix parse_matrix(const std::string& text);
FiniteMetricTriple parse_triple(const std::string& text);
std::string format_matrix(const DistanceMatrix& m);
std::string format_triple(const FiniteMetricTriple& t);

}  // namespace scalent
