#include "scalent/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>

namespace scalent {
namespace {

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string profile_to_csv(const EntropyProfile& p) {
  std::ostringstream os;
  os << "eps,n,H,method,replicas,seed,ci_low,ci_high\n";
  for (const auto& c : p.cells)
    os << fmt17(c.eps) << "," << c.n << "," << fmt17(c.H) << "," << c.method << ","
       << c.replicas << "," << c.seed << "," << fmt17(c.ci_low) << "," << fmt17(c.ci_high)
       << "\n";
  return os.str();
}

EntropyProfile profile_from_csv(const std::string& csv) {
  EntropyProfile p;
  std::istringstream is(csv);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line.rfind("eps,n,H,method", 0) != 0)
        fail(ErrorCode::validation, "profile CSV: bad header at line 1");
      continue;
    }
    auto f = split_line(line);
    if (f.size() != 8)
      fail(ErrorCode::validation, "profile CSV: expected 8 fields at line " +
                                      std::to_string(lineno));
    GridCell c;
    try {
      c.eps = std::stod(f[0]);
      c.n = std::stoi(f[1]);
      c.H = std::stod(f[2]);
      c.method = f[3];
      c.replicas = std::stoi(f[4]);
      c.seed = std::stoull(f[5]);
      c.ci_low = std::stod(f[6]);
      c.ci_high = std::stod(f[7]);
    } catch (const std::exception&) {
      fail(ErrorCode::validation, "profile CSV: parse error at line " + std::to_string(lineno));
    }
    c.exact = c.method == "exact";
    p.cells.push_back(c);
  }
  return p;
}

namespace {

GridCell compute_cell(const SystemSpec& spec, double eps, int n, const PhiGridOptions& opt,
                      uint64_t cell_index) {
  GridCell c;
  c.eps = eps;
  c.n = n;
  c.seed = opt.seed;
  try {
    if (spec.kind == SystemSpec::Kind::rotation || spec.kind == SystemSpec::Kind::cube) {
      auto t = spec_triple(spec, n, opt.window_cap);
      auto r = eps_entropy(t, eps, opt.method);
      c.H = r.H;
      c.exact = r.cover.exact;
      c.method = c.exact ? "exact" : (opt.method == CoverMethod::greedy ? "greedy" : "pack_lb");
      c.ci_low = c.ci_high = c.H;
      return c;
    }
    if (spec.kind != SystemSpec::Kind::symbolic)
      fail(ErrorCode::usage, "phi_grid needs a symbolic, rotation, or cube system");
    bool mc = false;
    FiniteMetricTriple t;
    try {
      t = averaged_triple_exact(spec.symbolic, n, opt.window_cap);
    } catch (const Error& e) {
      if (e.code != ErrorCode::cap) throw;
      mc = true;
    }
    if (!mc) {
      auto r = eps_entropy(t, eps, opt.method);
      c.H = r.H;
      c.exact = r.cover.exact;
      c.method = c.exact ? "exact" : (opt.method == CoverMethod::greedy ? "greedy" : "pack_lb");
      c.ci_low = c.ci_high = c.H;
      return c;
    }
    // Monte-Carlo realizations, greedy entropy, per-replica counter seeds
    std::vector<double> hs;
    for (int r = 0; r < opt.mc_replicas; ++r) {
      uint64_t rep_seed = Rng(opt.seed, "phi_grid.replica", (cell_index << 16) | (uint64_t)r).u64();
      auto tr = averaged_triple_mc(spec.symbolic, n, opt.mc_samples, rep_seed);
      hs.push_back(eps_entropy(tr, eps, CoverMethod::greedy).H);
    }
    double mean = 0;
    for (double h : hs) mean += h;
    mean /= (double)hs.size();
    double var = 0;
    for (double h : hs) var += (h - mean) * (h - mean);
    var /= std::max<double>(1.0, (double)hs.size() - 1);
    double se = std::sqrt(var / (double)hs.size());
    c.H = mean;
    c.method = "mc-greedy";
    c.replicas = opt.mc_replicas;
    c.ci_low = mean - 1.96 * se;
    c.ci_high = mean + 1.96 * se;
    c.exact = false;
    return c;
  } catch (const Error& e) {
    c.H = std::nan("");
    c.method = std::string("error:") + e.what();
    // commas would break the CSV schema
    for (auto& ch : c.method)
      if (ch == ',' || ch == '\n') ch = ';';
    c.ci_low = c.ci_high = c.H;
    return c;
  }
}

}  // namespace

EntropyProfile phi_grid(const SystemSpec& spec, const std::vector<double>& eps_list,
                        const std::vector<int>& n_list, const PhiGridOptions& opt) {
  if (eps_list.empty() || n_list.empty())
    fail(ErrorCode::validation, "phi_grid needs nonempty eps and n grids");
  EntropyProfile p;
  p.descriptor = spec.descriptor;
  size_t total = eps_list.size() * n_list.size();
  p.cells.resize(total);
  int threads = std::max(1, opt.threads);
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= total) break;
      double eps = eps_list[i / n_list.size()];
      int n = n_list[i % n_list.size()];
      p.cells[i] = compute_cell(spec, eps, n, opt, (uint64_t)i);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return p;
}

namespace {

struct Series {
  std::vector<double> n, H;
};

struct CandidateFit {
  std::string label;
  double residual = 1e18;
  std::vector<double> params;
};

double norm_residual(const Series& s, const std::vector<double>& pred) {
  double num = 0, den = 0;
  for (size_t i = 0; i < s.H.size(); ++i) {
    num += (s.H[i] - pred[i]) * (s.H[i] - pred[i]);
    den += s.H[i] * s.H[i];
  }
  if (den <= 0) den = 1;
  return std::sqrt(num / den);
}

// least squares y = a + b x
std::pair<double, double> lsq(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  size_t m = x.size();
  for (size_t i = 0; i < m; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double det = (double)m * sxx - sx * sx;
  if (std::fabs(det) < 1e-30) return {sy / (double)m, 0.0};
  double b = ((double)m * sxy - sx * sy) / det;
  double a = (sy - b * sx) / (double)m;
  return {a, b};
}

std::vector<CandidateFit> fit_candidates(const Series& s, const std::vector<int>* sigma) {
  std::vector<CandidateFit> fits;
  size_t m = s.n.size();

  {  // bounded: H = const
    CandidateFit f;
    f.label = "bounded";
    double mean = 0;
    for (double h : s.H) mean += h;
    mean /= (double)m;
    f.params = {mean};
    f.residual = norm_residual(s, std::vector<double>(m, mean));
    fits.push_back(f);
  }
  bool all_pos = std::all_of(s.H.begin(), s.H.end(), [](double h) { return h > 0; });
  if (all_pos) {  // logpow: H = exp(b) * (log n)^a, a in [0.2, 6]
    std::vector<double> x, y;
    bool good = true;
    for (size_t i = 0; i < m; ++i) {
      double ln = std::log(s.n[i]);
      if (ln <= 0) { good = false; break; }
      x.push_back(std::log(ln));
      y.push_back(std::log(s.H[i]));
    }
    if (good) {
      auto [b, a] = lsq(x, y);
      if (a >= 0.2 && a <= 6.0) {
        CandidateFit f;
        f.label = "logpow";
        f.params = {a, std::exp(b)};
        std::vector<double> pred(m);
        for (size_t i = 0; i < m; ++i)
          pred[i] = std::exp(b) * std::pow(std::log(s.n[i]), a);
        f.residual = norm_residual(s, pred);
        fits.push_back(f);
      }
    }
  }
  if (all_pos) {  // npow: H = exp(b) * n^s, 0 < s < 1
    std::vector<double> x, y;
    for (size_t i = 0; i < m; ++i) {
      x.push_back(std::log(s.n[i]));
      y.push_back(std::log(s.H[i]));
    }
    auto [b, sl] = lsq(x, y);
    if (sl > 0.05 && sl < 0.95) {
      CandidateFit f;
      f.label = "npow";
      f.params = {sl, std::exp(b)};
      std::vector<double> pred(m);
      for (size_t i = 0; i < m; ++i) pred[i] = std::exp(b) * std::pow(s.n[i], sl);
      f.residual = norm_residual(s, pred);
      fits.push_back(f);
    }
  }
  double n_range = s.n.back() - s.n.front();
  double h_mean = 0;
  for (double h : s.H) h_mean += std::fabs(h);
  h_mean /= (double)m;
  {  // linear: H = a + c n, with growth beyond the noise floor over the grid
    auto [a, c] = lsq(s.n, s.H);
    if (c > 0 && c * n_range > 0.05 * h_mean + 1e-12) {
      CandidateFit f;
      f.label = "linear";
      f.params = {c, a};
      std::vector<double> pred(m);
      for (size_t i = 0; i < m; ++i) pred[i] = a + c * s.n[i];
      f.residual = norm_residual(s, pred);
      fits.push_back(f);
    }
  }
  if (all_pos) {  // exp: H = exp(a + c n), c > 0
    std::vector<double> y;
    for (double h : s.H) y.push_back(std::log(h));
    auto [a, c] = lsq(s.n, y);
    // require >= 5% multiplicative growth across the grid, not just c > 0
    if (c > 1e-6 && c * n_range > 0.05) {
      CandidateFit f;
      f.label = "exp";
      f.params = {c, a};
      std::vector<double> pred(m);
      for (size_t i = 0; i < m; ++i) pred[i] = std::exp(a + c * s.n[i]);
      f.residual = norm_residual(s, pred);
      fits.push_back(f);
    }
  }
  if (sigma) {  // twosigma: H = c * 2^{sum of sigma up to level log2 n}
    std::vector<double> x(m);
    for (size_t i = 0; i < m; ++i) {
      int level = 0;
      while ((1 << (level + 1)) <= (int)std::llround(s.n[i])) ++level;
      long long sum = 0;
      for (int k = 1; k <= level; ++k)
        sum += (k <= (int)sigma->size()) ? (*sigma)[(size_t)k - 1] : 0;
      x[i] = std::pow(2.0, (double)sum);
    }
    double num = 0, den = 0;
    for (size_t i = 0; i < m; ++i) {
      num += s.H[i] * x[i];
      den += x[i] * x[i];
    }
    double c = den > 0 ? num / den : 0;
    if (c > 0) {
      CandidateFit f;
      f.label = "twosigma";
      f.params = {c};
      std::vector<double> pred(m);
      for (size_t i = 0; i < m; ++i) pred[i] = c * x[i];
      f.residual = norm_residual(s, pred);
      fits.push_back(f);
    }
  }
  return fits;
}

std::map<double, Series> series_by_eps(const EntropyProfile& p, int n_min) {
  std::map<double, Series> out;
  for (const auto& c : p.cells) {
    if (c.n < n_min || std::isnan(c.H) || c.method.rfind("error:", 0) == 0) continue;
    out[c.eps].n.push_back((double)c.n);
    out[c.eps].H.push_back(c.H);
  }
  for (auto& [eps, s] : out) {
    std::vector<size_t> idx(s.n.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return s.n[a] < s.n[b]; });
    Series t;
    for (size_t i : idx) {
      if (!t.n.empty() && t.n.back() == s.n[i]) continue;  // first record per n wins
      t.n.push_back(s.n[i]);
      t.H.push_back(s.H[i]);
    }
    s = std::move(t);
  }
  return out;
}

}  // namespace

AsymptoticClassReport fit_class(const EntropyProfile& p, int n_min,
                                const std::vector<int>* sigma) {
  auto series = series_by_eps(p, n_min);
  AsymptoticClassReport rep;
  bool any_tie = false;
  for (auto& [eps, s] : series) {
    if (s.n.size() < 4)
      fail(ErrorCode::validation, "fit_class needs at least 4 grid points per eps");
    auto fits = fit_candidates(s, sigma);
    std::sort(fits.begin(), fits.end(),
              [](const CandidateFit& a, const CandidateFit& b) { return a.residual < b.residual; });
    ClassFit cf;
    cf.eps = eps;
    if (fits.empty() || fits[0].residual > 0.25) {
      cf.label = "custom";
      std::vector<double> x, y;
      for (size_t i = 0; i < s.n.size(); ++i)
        if (s.H[i] > 0) {
          x.push_back(std::log(s.n[i]));
          y.push_back(std::log(s.H[i]));
        }
      double slope = x.size() >= 2 ? lsq(x, y).second : 0;
      cf.params = {slope};
      cf.residual = fits.empty() ? 1.0 : fits[0].residual;
    } else {
      cf.label = fits[0].label;
      cf.residual = fits[0].residual;
      cf.params = fits[0].params;
      if (fits.size() > 1 && fits[1].residual - fits[0].residual <= 0.01 &&
          fits[1].label != fits[0].label) {
        cf.tie_label = fits[1].label;
        any_tie = true;
      }
    }
    rep.per_eps.push_back(cf);
  }
  if (rep.per_eps.empty()) fail(ErrorCode::validation, "fit_class: no usable grid cells");
  bool labels_agree = std::all_of(rep.per_eps.begin(), rep.per_eps.end(), [&](const ClassFit& f) {
    return f.label == rep.per_eps[0].label;
  });
  if (any_tie)
    rep.verdict = "inconclusive";
  else if (labels_agree)
    rep.verdict = "stable";
  else
    rep.verdict = "unstable";
  return rep;
}

std::string stability_check(const EntropyProfile& p, int n_min, const std::vector<int>* sigma) {
  auto rep = fit_class(p, n_min, sigma);
  if (rep.per_eps.size() < 2)
    fail(ErrorCode::validation, "stability_check needs at least 2 eps rows");
  if (rep.verdict == "inconclusive") return "inconclusive";
  if (rep.verdict == "unstable") return "unstable";
  // cross-eps H ratio at the largest common n within a fixed factor
  auto series = series_by_eps(p, n_min);
  double common_n = 0;
  for (auto& [eps, s] : series) {
    double last = s.n.back();
    common_n = common_n == 0 ? last : std::min(common_n, last);
  }
  double hmin = 1e300, hmax = 0;
  for (auto& [eps, s] : series)
    for (size_t i = 0; i < s.n.size(); ++i)
      if (s.n[i] == common_n) {
        hmin = std::min(hmin, s.H[i]);
        hmax = std::max(hmax, s.H[i]);
      }
  if (hmax <= 0) return "stable";  // all-zero rows are trivially stable
  double ratio = hmin > 0 ? hmax / hmin : 1e300;
  return ratio <= tol().ratio_stable ? "stable" : "inconclusive";
}

EntropyProfile exp_profile(const EntropyProfile& p) {
  EntropyProfile out = p;
  out.base = p.base + "-exp";
  for (auto& c : out.cells) {
    c.H = std::exp(c.H);
    c.ci_low = std::exp(c.ci_low);
    c.ci_high = std::exp(c.ci_high);
  }
  return out;
}

std::vector<DimensionEstimate> entropy_dimension(const EntropyProfile& p, int n_min) {
  auto series = series_by_eps(p, n_min);
  std::vector<DimensionEstimate> out;
  for (auto& [eps, s] : series) {
    std::vector<double> x, y;
    for (size_t i = 0; i < s.n.size(); ++i)
      if (s.H[i] > 0) {
        x.push_back(std::log(s.n[i]));
        y.push_back(std::log(s.H[i]));
      }
    DimensionEstimate d;
    d.eps = eps;
    if (x.size() < 3) {
      d.upper = d.lower = 0;  // (near-)zero profile
      out.push_back(d);
      continue;
    }
    // limsup/liminf proxy: slopes over all tail suffixes of length >= 3
    double up = -1e18, lo = 1e18;
    for (size_t start = 0; start + 3 <= x.size(); ++start) {
      std::vector<double> xs(x.begin() + (long)start, x.end());
      std::vector<double> ys(y.begin() + (long)start, y.end());
      double slope = lsq(xs, ys).second;
      up = std::max(up, slope);
      lo = std::min(lo, slope);
    }
    d.upper = std::clamp(up, 0.0, 1.0);
    d.lower = std::clamp(lo, 0.0, 1.0);
    if (d.lower > d.upper) d.lower = d.upper;
    out.push_back(d);
  }
  return out;
}

std::vector<SlowEntropyEstimate> slow_entropy(const EntropyProfile& p, ScaleFamily family,
                                              int n_min) {
  auto series = series_by_eps(p, n_min);
  std::vector<SlowEntropyEstimate> out;
  for (auto& [eps, s] : series) {
    SlowEntropyEstimate e;
    e.eps = eps;
    size_t m = s.n.size();
    size_t tail = std::min<size_t>(m, 3);
    // per-point critical t with exp(H)/a_n(t) = 1:
    //   power: t = H / log n;  exponential: t = H / n;  constant: t = exp(H)
    std::vector<double> ts;
    for (size_t i = m - tail; i < m; ++i) {
      double n = s.n[i], H = s.H[i];
      switch (family) {
        case ScaleFamily::power: ts.push_back(n > 1 ? H / std::log(n) : 0); break;
        case ScaleFamily::exponential: ts.push_back(H / n); break;
        case ScaleFamily::constant: ts.push_back(std::exp(H)); break;
      }
    }
    e.upper = *std::max_element(ts.begin(), ts.end());
    e.lower = *std::min_element(ts.begin(), ts.end());
    if (family == ScaleFamily::constant && m >= 2 && s.H[m - 1] > s.H[0] + 1e-9) {
      e.infinite = true;  // unbounded profile: constants never dominate
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace scalent
