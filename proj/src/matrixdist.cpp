#include "scalent/matrixdist.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "scalent/entropy.hpp"

namespace scalent {
namespace {

// Wrap a finite triple as a sampler (index drawn by inverse CDF) so both
// overloads share the stream layout.
SampleableTriple as_sampleable(const FiniteMetricTriple& t) {
  validate_triple(t);
  SampleableTriple s;
  s.descriptor = "finite";
  auto w = t.w;
  auto dist = t.dist;
  s.sample_point = [w](Rng& rng) {
    double u = rng.uniform(), acc = 0;
    size_t idx = w.size() - 1;
    for (size_t i = 0; i < w.size(); ++i) {
      acc += w[i];
      if (u < acc) { idx = i; break; }
    }
    return std::vector<double>{(double)idx};
  };
  s.metric = [dist](const std::vector<double>& a, const std::vector<double>& b) {
    return dist.at((int)a[0], (int)b[0]);
  };
  return s;
}

std::vector<std::vector<double>> sample_points(const SampleableTriple& t, int n, int replica,
                                               uint64_t seed) {
  std::vector<std::vector<double>> pts;
  pts.reserve((size_t)n);
  for (int j = 0; j < n; ++j) {
    Rng rng(seed, "matrixdist.point", ((uint64_t)replica << 32) | (uint64_t)j);
    pts.push_back(t.sample_point(rng));
  }
  return pts;
}

DistanceMatrix matrix_of(const SampleableTriple& t,
                         const std::vector<std::vector<double>>& pts) {
  int n = (int)pts.size();
  DistanceMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      m.at(i, j) = m.at(j, i) = t.metric(pts[(size_t)i], pts[(size_t)j]);
  return m;
}

}  // namespace

MatrixSampleSet sample_dn(const SampleableTriple& t, int n, int replicas, uint64_t seed) {
  if (n < 1) fail(ErrorCode::validation, "matrix dimension must be >= 1");
  if (replicas < 1) fail(ErrorCode::validation, "replicas must be >= 1");
  MatrixSampleSet out;
  out.descriptor = t.descriptor;
  out.n = n;
  out.replicas = replicas;
  out.seed = seed;
  out.matrices.reserve((size_t)replicas);
  for (int r = 0; r < replicas; ++r) {
    auto m = matrix_of(t, sample_points(t, n, r, seed));
    auto report = validate(m, false);
    if (!report.ok())
      fail(ErrorCode::validation, "sampled matrix failed validation: " + report.summary());
    out.matrices.push_back(std::move(m));
  }
  return out;
}

MatrixSampleSet sample_dn(const FiniteMetricTriple& t, int n, int replicas, uint64_t seed) {
  return sample_dn(as_sampleable(t), n, replicas, seed);
}

bool projectivity_check(const SampleableTriple& t, int n, uint64_t seed) {
  auto big = sample_dn(t, n + 1, 1, seed).matrices[0];
  auto small = sample_dn(t, n, 1, seed).matrices[0];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (big.at(i, j) != small.at(i, j)) return false;
  return true;
}

bool projectivity_check(const FiniteMetricTriple& t, int n, uint64_t seed) {
  return projectivity_check(as_sampleable(t), n, seed);
}

double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b, double* stat) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    // advance past a full tie group on both sides before comparing CDFs
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    double fa = (double)i / (double)a.size();
    double fb = (double)j / (double)b.size();
    d = std::max(d, std::fabs(fa - fb));
  }
  if (stat) *stat = d;
  double ne = (double)a.size() * (double)b.size() / (double)(a.size() + b.size());
  double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  if (lam <= 0) return 1.0;
  // Kolmogorov asymptotic survival function
  double p = 0;
  for (int k = 1; k <= 100; ++k) {
    double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
    p += term;
    if (std::fabs(term) < 1e-12) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

InvarianceReport permutation_invariance_test(const MatrixSampleSet& set,
                                             const std::string& statistic, uint64_t seed) {
  if (set.replicas < 30) fail(ErrorCode::validation, "need at least 30 replicas");
  if (statistic != "spectral" && statistic != "entrywise")
    fail(ErrorCode::usage, "statistic must be spectral or entrywise");
  InvarianceReport rep;
  rep.statistic = statistic;
  rep.replicas = set.replicas;
  std::vector<double> raw, permuted;
  for (int r = 0; r < set.replicas; ++r) {
    const auto& m = set.matrices[(size_t)r];
    int n = m.n;
    std::vector<int> perm((size_t)n);
    for (int i = 0; i < n; ++i) perm[(size_t)i] = i;
    Rng rng(seed, "matrixdist.perm", (uint64_t)r);
    for (int i = n - 1; i > 0; --i)
      std::swap(perm[(size_t)i], perm[(size_t)rng.below((uint64_t)i + 1)]);
    DistanceMatrix pm(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        pm.at(i, j) = m.at(perm[(size_t)i], perm[(size_t)j]);
    auto value = [&](const DistanceMatrix& x) {
      if (statistic == "entrywise") return x.n > 1 ? x.at(0, 1) : 0.0;
      Eigen::MatrixXd e((Eigen::Index)x.n, (Eigen::Index)x.n);
      for (int i = 0; i < x.n; ++i)
        for (int j = 0; j < x.n; ++j) e(i, j) = x.at(i, j);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e, Eigen::EigenvaluesOnly);
      return es.eigenvalues().maxCoeff();
    };
    raw.push_back(value(m));
    permuted.push_back(value(pm));
  }
  rep.p_value = ks_two_sample_pvalue(raw, permuted, &rep.ks_stat);
  rep.gross_failure = rep.p_value < 1e-4;
  return rep;
}

SpectraReport minor_spectra(const MatrixSampleSet& set, const std::vector<int>& sizes) {
  SpectraReport rep;
  rep.sizes = sizes;
  for (int k : sizes)
    if (k < 1 || k > set.n) fail(ErrorCode::validation, "minor size out of range");
  auto sorted_sizes = sizes;
  std::sort(sorted_sizes.begin(), sorted_sizes.end());
  rep.eigenvalues.resize((size_t)set.replicas);
  for (int r = 0; r < set.replicas; ++r) {
    const auto& m = set.matrices[(size_t)r];
    std::vector<std::vector<double>> per_size;
    for (int k : sizes) {
      Eigen::MatrixXd e((Eigen::Index)k, (Eigen::Index)k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) e(i, j) = m.at(i, j);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e);
      if (es.info() != Eigen::Success) fail(ErrorCode::validation, "eigensolver failed");
      std::vector<double> ev((size_t)k);
      for (int i = 0; i < k; ++i) ev[(size_t)i] = es.eigenvalues()((Eigen::Index)(k - 1 - i));
      double trace = 0;
      for (double x : ev) trace += x;
      rep.max_trace_abs = std::max(rep.max_trace_abs, std::fabs(trace));
      per_size.push_back(std::move(ev));
    }
    // Cauchy interlacing between nested minors: for sizes k < l,
    // lambda_i(l) >= lambda_i(k) >= lambda_{i+l-k}(l) (descending order)
    for (size_t a = 0; a + 1 < sorted_sizes.size(); ++a) {
      int k = sorted_sizes[a], l = sorted_sizes[a + 1];
      auto at_size = [&](int sz) -> const std::vector<double>& {
        size_t pos = (size_t)(std::find(sizes.begin(), sizes.end(), sz) - sizes.begin());
        return per_size[pos];
      };
      const auto& small = at_size(k);
      const auto& big = at_size(l);
      for (int i = 0; i < k; ++i) {
        double v1 = small[(size_t)i] - big[(size_t)i];
        double v2 = big[(size_t)i + (size_t)(l - k)] - small[(size_t)i];
        double viol = std::max({0.0, v1, v2});
        rep.max_interlacing_violation = std::max(rep.max_interlacing_violation, viol);
      }
    }
    rep.eigenvalues[(size_t)r] = std::move(per_size);
  }
  rep.interlacing_ok = rep.max_interlacing_violation <= 1e-7;
  return rep;
}

AdmissibilityDiagnostic entropy_admissibility_diagnostic(const DistanceMatrix& m,
                                                         const std::vector<double>& eps_list) {
  auto report = validate(m, false);
  if (!report.ok()) fail(ErrorCode::validation, "matrix failed validation: " + report.summary());
  AdmissibilityDiagnostic out;
  std::vector<int> schedule;
  for (int k = 1; k <= m.n; k *= 2) schedule.push_back(k);
  if (schedule.empty() || schedule.back() != m.n) schedule.push_back(m.n);
  bool all_bounded = true;
  for (double eps : eps_list) {
    std::vector<double> hs;
    for (int k : schedule) {
      FiniteMetricTriple t;
      t.dist = DistanceMatrix(k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) t.dist.at(i, j) = m.at(i, j);
      t.w.assign((size_t)k, 1.0 / (double)k);
      AdmissibilityDiagnostic::Row row;
      row.eps = eps;
      row.k = k;
      try {
        auto r = eps_entropy(t, eps, CoverMethod::exact);
        row.H = r.H;
        row.method = "exact";
      } catch (const Error&) {
        auto r = eps_entropy(t, eps, CoverMethod::greedy);
        row.H = r.H;
        row.method = "greedy";
      }
      hs.push_back(row.H);
      out.rows.push_back(row);
    }
    size_t s = hs.size();
    bool bounded = s >= 3 && std::fabs(hs[s - 1] - hs[s - 2]) < 1e-12 &&
                   std::fabs(hs[s - 2] - hs[s - 3]) < 1e-12;
    all_bounded = all_bounded && bounded;
  }
  out.bounded_so_far = all_bounded;
  return out;
}

}  // namespace scalent
