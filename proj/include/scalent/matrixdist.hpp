#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "scalent/core.hpp"

namespace scalent {

struct MatrixSampleSet {
  std::string descriptor;
  int n = 0;
  int replicas = 0;
  uint64_t seed = 0;
  std::vector<DistanceMatrix> matrices;
};

// Empirical matrix distribution: per replica, n i.i.d. points, matrix of
// pairwise distances. Point j of replica r has its own counter-based stream,
// so prefixes are shared across different n (projectivity by construction).
MatrixSampleSet sample_dn(const SampleableTriple& t, int n, int replicas, uint64_t seed);
MatrixSampleSet sample_dn(const FiniteMetricTriple& t, int n, int replicas, uint64_t seed);

// True iff sampling n+1 points and truncating the matrix equals sampling n
// points from the same stream — exact equality required.
bool projectivity_check(const SampleableTriple& t, int n, uint64_t seed);
bool projectivity_check(const FiniteMetricTriple& t, int n, uint64_t seed);

struct InvarianceReport {
  std::string statistic;  // "spectral" (top eigenvalue) or "entrywise" (entry (0,1))
  double ks_stat = 0;
  double p_value = 1;
  bool gross_failure = false;  // p < 1e-4 — flags implementation bugs only
  int replicas = 0;
};
InvarianceReport permutation_invariance_test(const MatrixSampleSet& set,
                                             const std::string& statistic, uint64_t seed);

struct SpectraReport {
  std::vector<int> sizes;
  // eigenvalues[replica][size_index] = sorted-descending spectrum of the
  // leading principal minor of that size
  std::vector<std::vector<std::vector<double>>> eigenvalues;
  bool interlacing_ok = true;
  double max_interlacing_violation = 0;
  double max_trace_abs = 0;  // |sum of eigenvalues| must vanish (zero trace)
};
SpectraReport minor_spectra(const MatrixSampleSet& set, const std::vector<int>& sizes);

struct AdmissibilityDiagnostic {
  struct Row {
    double eps = 0;
    int k = 0;
    double H = 0;
    std::string method;
  };
  std::vector<Row> rows;  // k on a doubling schedule
  bool bounded_so_far = false;
};
AdmissibilityDiagnostic entropy_admissibility_diagnostic(const DistanceMatrix& m,
                                                         const std::vector<double>& eps_list);

// Asymptotic two-sample Kolmogorov-Smirnov p-value.
double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b, double* stat = nullptr);

}  // namespace scalent
