#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scalent/entropy.hpp"
#include "scalent/transport.hpp"

using namespace scalent;

namespace {

FiniteMetricTriple cube_triple(int d) {
  int n = 1 << d;
  FiniteMetricTriple t;
  t.dist = DistanceMatrix(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      t.dist.at(i, j) = (double)__builtin_popcount((unsigned)(i ^ j)) / d;
  t.w.assign((size_t)n, 1.0 / n);
  return t;
}

FiniteMetricTriple line_triple(int n, uint64_t seed, double scale = 1.0) {
  Rng rng(seed, "test.entropy.points", 0);
  std::vector<double> x((size_t)n);
  for (auto& v : x) v = scale * rng.uniform();
  FiniteMetricTriple t;
  t.dist = DistanceMatrix(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t.dist.at(i, j) = std::fabs(x[(size_t)i] - x[(size_t)j]);
  t.w.assign((size_t)n, 0.0);
  double s = 0;
  for (auto& v : t.w) { v = 0.2 + rng.uniform(); s += v; }
  for (auto& v : t.w) v /= s;
  return t;
}

// Exhaustive cover oracle: smallest k such that the points split into k parts
// of diameter <= eps - 1e-12 plus a removed set of mass <= eps - 1e-12.
// Enumerates every assignment point -> {removed, part 1..k}; n <= 8 only.
int cover_bruteforce(const FiniteMetricTriple& t, double eps) {
  int n = t.n();
  double thr = eps - 1e-12;
  for (int k = 1; k <= n; ++k) {
    std::vector<int> a((size_t)n, 0);
    for (;;) {
      double removed = 0;
      bool ok = true;
      for (int i = 0; i < n && ok; ++i) {
        if (a[(size_t)i] == 0) { removed += t.w[(size_t)i]; continue; }
        for (int j = i + 1; j < n && ok; ++j)
          if (a[(size_t)j] == a[(size_t)i] && t.dist.at(i, j) > thr) ok = false;
      }
      if (ok && removed <= thr) return k;
      int pos = 0;
      while (pos < n && a[(size_t)pos] == k) { a[(size_t)pos] = 0; ++pos; }
      if (pos == n) break;
      ++a[(size_t)pos];
    }
  }
  return n;
}

}  // namespace

TEST_CASE("eps_entropy: trivial identities") {
  auto t = line_triple(6, 1);
  SUBCASE("eps >= 1 gives 0 with a single full part") {
    for (double eps : {1.0, 1.5, 7.0}) {
      auto r = eps_entropy(t, eps, CoverMethod::exact);
      CHECK(r.H == 0.0);
      CHECK(r.cover.k == 1);
      CHECK(r.cover.exact);
    }
  }
  SUBCASE("identical points give 0 for any eps in (0,1)") {
    FiniteMetricTriple z;
    z.dist = DistanceMatrix(5);
    z.w.assign(5, 0.2);
    for (double eps : {0.01, 0.4, 0.99}) {
      auto r = eps_entropy(z, eps, CoverMethod::exact);
      CHECK(r.H == 0.0);
      CHECK(r.cover.k == 1);
    }
  }
  SUBCASE("thresholds must be positive") {
    CHECK_THROWS_AS((void)eps_entropy(t, 0.0, CoverMethod::exact), Error);
    CHECK_THROWS_AS((void)mm_entropy(t, 0.5, -0.1, CoverMethod::exact), Error);
  }
}

TEST_CASE("eps_entropy: 2-dim binary cube at eps=0.3 is log 3") {
  auto t = cube_triple(2);
  auto r = eps_entropy(t, 0.3, CoverMethod::exact);
  CHECK(r.H == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(r.cover.exact);
  CHECK(r.cover.k == 3);
  CHECK(cover_bruteforce(t, 0.3) == 3);
}

TEST_CASE("eps_entropy: exact matches exhaustive partition oracle") {
  for (uint64_t seed = 0; seed < 6; ++seed) {
    auto t = line_triple(7, seed);
    for (double eps : {0.15, 0.3, 0.6}) {
      auto r = eps_entropy(t, eps, CoverMethod::exact);
      REQUIRE(r.cover.exact);
      CHECK(r.cover.k == cover_bruteforce(t, eps));
      // cover certificate invariants
      double thr = eps - 1e-12;
      double rm = 0;
      std::vector<int> seen((size_t)t.n(), 0);
      for (int v : r.cover.removed) { rm += t.w[(size_t)v]; ++seen[(size_t)v]; }
      CHECK(rm <= thr);
      CHECK(rm == doctest::Approx(r.cover.removed_mass).epsilon(1e-12));
      for (auto& part : r.cover.parts) {
        for (size_t a = 0; a < part.size(); ++a) {
          ++seen[(size_t)part[a]];
          for (size_t b = a + 1; b < part.size(); ++b)
            CHECK(t.dist.at(part[a], part[b]) <= thr);
        }
      }
      for (int c : seen) CHECK(c == 1);  // parts + removed partition the space
    }
  }
}

TEST_CASE("eps_entropy: greedy >= exact >= packing lower bound") {
  for (uint64_t seed = 0; seed < 8; ++seed) {
    auto t = line_triple(12, seed);
    for (double eps : {0.1, 0.25, 0.5}) {
      double he = eps_entropy(t, eps, CoverMethod::exact).H;
      double hg = eps_entropy(t, eps, CoverMethod::greedy).H;
      double hp = eps_entropy(t, eps, CoverMethod::pack_lb).H;
      CHECK(hg >= he - 1e-12);
      CHECK(he >= hp - 1e-12);
    }
  }
}

TEST_CASE("eps_entropy: non-increasing in eps") {
  for (uint64_t seed = 0; seed < 4; ++seed) {
    auto t = line_triple(10, seed);
    double prev = 1e300;
    for (int s = 1; s <= 12; ++s) {
      double h = eps_entropy(t, 0.08 * s, CoverMethod::exact).H;
      CHECK(h <= prev + 1e-12);
      prev = h;
    }
  }
}

TEST_CASE("eps_entropy: subadditivity for metric sums") {
  // H_{2eps}(w, r1+r2) <= H_eps(w, r1) + H_eps(w, r2), exact mode.
  for (uint64_t seed = 0; seed < 6; ++seed) {
    auto t1 = line_triple(8, seed, 0.5);
    auto t2 = line_triple(8, seed + 100, 0.5);
    t2.w = t1.w;  // common measure
    FiniteMetricTriple ts = t1;
    for (size_t i = 0; i < ts.dist.a.size(); ++i) ts.dist.a[i] += t2.dist.a[i];
    for (double eps : {0.15, 0.25, 0.4}) {
      double lhs = eps_entropy(ts, 2 * eps, CoverMethod::exact).H;
      double rhs = eps_entropy(t1, eps, CoverMethod::exact).H +
                   eps_entropy(t2, eps, CoverMethod::exact).H;
      CHECK(lhs <= rhs + 1e-12);
    }
  }
}

TEST_CASE("mm_entropy: larger removal budget never increases k") {
  for (uint64_t seed = 0; seed < 4; ++seed) {
    auto t = line_triple(9, seed);
    for (double eps : {0.2, 0.4}) {
      auto a = mm_entropy(t, eps, eps, CoverMethod::exact);
      auto b = mm_entropy(t, eps, 2 * eps, CoverMethod::exact);
      auto c = eps_entropy(t, eps, CoverMethod::exact);
      CHECK(b.H <= a.H + 1e-12);
      CHECK(a.H == c.H);  // diagonal call is the one-parameter entropy
    }
  }
}

TEST_CASE("shannon: pinned values") {
  CHECK(shannon({1.0, 0.0, 0.0}) == 0.0);
  CHECK(shannon({0.25, 0.25, 0.25, 0.25}) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  CHECK(shannon({0.5, 0.25, 0.125, 0.125}) ==
        doctest::Approx(1.75 * std::log(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS((void)shannon({-0.1, 1.1}), Error);
}

TEST_CASE("tail_support: pinned and random") {
  SUBCASE("point mass") {
    auto J = tail_support({0.0, 1.0, 0.0}, 0.1);
    REQUIRE(J.size() == 1);
    CHECK(J[0] == 1);
  }
  SUBCASE("uniform on N") {
    for (int N : {4, 10, 33}) {
      std::vector<double> p((size_t)N, 1.0 / N);
      for (double delta : {0.1, 0.25, 0.5}) {
        auto J = tail_support(p, delta);
        CHECK((int)J.size() == (int)std::ceil((1 - delta) * N - 1e-9));
        CHECK((double)J.size() <= std::exp((std::log((double)N) + 1) / delta));
      }
    }
  }
  SUBCASE("1000 random vectors: mass, bound, and minimality") {
    Rng rng(7, "test.tail", 0);
    for (int trial = 0; trial < 1000; ++trial) {
      int N = 1 + (int)rng.below(50);
      std::vector<double> p((size_t)N);
      double s = 0;
      for (auto& v : p) { v = rng.uniform(); s += v; }
      for (auto& v : p) v /= s;
      double H = shannon(p);
      for (double delta : {0.1, 0.25, 0.5}) {
        auto J = tail_support(p, delta);
        double mass = 0;
        for (int i : J) mass += p[(size_t)i];
        CHECK(mass >= 1 - delta - 1e-12);
        CHECK((double)J.size() <= std::exp((H + 1) / delta) + 1e-9);
        // sort-based minimal-J oracle
        auto q = p;
        std::sort(q.begin(), q.end(), std::greater<>());
        double acc = 0;
        size_t m = 0;
        while (m < q.size() && acc < 1 - delta - 1e-12) acc += q[m++];
        CHECK(J.size() == m);
      }
    }
  }
  SUBCASE("delta out of range") {
    CHECK_THROWS_AS((void)tail_support({1.0}, 0.0), Error);
    CHECK_THROWS_AS((void)tail_support({1.0}, 1.0), Error);
  }
}

TEST_CASE("hk_entropy: trivial identities") {
  SUBCASE("all distances 0") {
    FiniteMetricTriple z;
    z.dist = DistanceMatrix(4);
    z.w.assign(4, 0.25);
    for (double eps : {0.05, 0.5}) {
      DiscreteApproximation d;
      CHECK(hk_entropy_result(z, eps, HkMode::exact_tiny, &d).H == 0.0);
      CHECK(d.feasible);
    }
  }
  SUBCASE("one center suffices when the medoid is close") {
    auto t = line_triple(6, 3, 0.1);  // diameter ~0.1
    DiscreteApproximation d;
    auto r = hk_entropy_result(t, 0.5, HkMode::exact_tiny, &d);
    CHECK(r.H == 0.0);
    CHECK(d.support.size() == 1);
    CHECK(d.transport_cost < 0.5);
  }
  SUBCASE("tiny eps forces the full support (zero-cost coupling)") {
    auto t = cube_triple(2);
    auto r = hk_entropy_result(t, 1e-9, HkMode::exact_tiny);
    CHECK(r.H == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  }
  SUBCASE("support cap is a hard error") {
    auto t = line_triple(16, 4);
    CHECK_THROWS_AS((void)hk_entropy(t, 0.2, HkMode::exact_tiny), Error);
  }
}

TEST_CASE("hk_entropy: exact-tiny matches full support enumeration") {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    auto t = line_triple(6, seed);
    int n = t.n();
    for (double eps : {0.1, 0.2, 0.4}) {
      double best = std::numeric_limits<double>::infinity();
      for (uint32_t msk = 1; msk < (1u << n); ++msk) {
        std::vector<int> S;
        for (int i = 0; i < n; ++i)
          if (msk & (1u << i)) S.push_back(i);
        std::vector<double> nu(S.size(), 0.0);
        double cost = 0;
        for (int i = 0; i < n; ++i) {
          size_t b = 0;
          for (size_t s = 1; s < S.size(); ++s)
            if (t.dist.at(i, S[s]) < t.dist.at(i, S[b])) b = s;
          nu[b] += t.w[(size_t)i];
          cost += t.w[(size_t)i] * t.dist.at(i, S[b]);
        }
        if (cost <= eps - 1e-12) best = std::min(best, shannon(nu));
      }
      double got = hk_entropy(t, eps, HkMode::exact_tiny);
      if (std::isinf(best))
        CHECK(std::isinf(got));
      else
        CHECK(got == doctest::Approx(best).epsilon(1e-12));
      // greedy, when feasible, can only give more entropy than the optimum
      double greedy = hk_entropy(t, eps, HkMode::greedy);
      if (!std::isinf(greedy)) CHECK(greedy >= got - 1e-12);
    }
  }
}

TEST_CASE("Kantorovich sandwich, lower: H_{2eps} <= (1/eps)(HK_{eps^2} + 1)") {
  for (uint64_t seed = 0; seed < 6; ++seed) {
    auto t = line_triple(8, seed);
    for (double eps : {0.3, 0.4, 0.45}) {
      double lhs = eps_entropy(t, 2 * eps, CoverMethod::exact).H;
      double hk = hk_entropy(t, eps * eps, HkMode::exact_tiny);
      if (std::isinf(hk)) continue;  // vacuous when no discrete measure qualifies
      CHECK(lhs <= (hk + 1) / eps + 1e-12);
    }
  }
}

TEST_CASE("Kantorovich sandwich, upper: exp(HK_eps) <= exp(H_delta) + 1") {
  // precondition: sum_{i in A, j} w_i w_j d(i,j) < eps - delta for every A
  // with mass(A) < delta; checked exhaustively over all 2^n subsets.
  int asserted = 0;
  for (uint64_t seed = 0; seed < 8; ++seed) {
    auto t = line_triple(8, seed);
    int n = t.n();
    for (double delta : {0.25, 0.35}) {
      double eps = delta + 0.4;
      double worst = 0;
      for (uint32_t msk = 1; msk < (1u << n); ++msk) {
        double mass = 0, integral = 0;
        for (int i = 0; i < n; ++i) {
          if (!(msk & (1u << i))) continue;
          mass += t.w[(size_t)i];
          for (int j = 0; j < n; ++j)
            integral += t.w[(size_t)i] * t.w[(size_t)j] * t.dist.at(i, j);
        }
        if (mass < delta) worst = std::max(worst, integral);
      }
      if (!(worst < eps - delta)) continue;
      double hk = hk_entropy(t, eps, HkMode::exact_tiny);
      double hd = eps_entropy(t, delta, CoverMethod::exact).H;
      REQUIRE(!std::isinf(hk));
      CHECK(std::exp(hk) <= std::exp(hd) + 1 + 1e-9);
      ++asserted;
    }
  }
  CHECK(asserted >= 4);  // the precondition actually fired
}

TEST_CASE("admissibility_event: pinned cases") {
  SUBCASE("all-zero distances") {
    DistanceMatrix m(8);
    auto ev = admissibility_event(m, nullptr, 0.5);
    CHECK(ev.separated.size() == 1);
    CHECK(ev.exact);
    CHECK_FALSE(ev.flag);  // 1 < 0.5 * 8
  }
  SUBCASE("simplex at eps=0.5 separates everything") {
    DistanceMatrix m(6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        if (i != j) m.at(i, j) = 1.0;
    auto ev = admissibility_event(m, nullptr, 0.5);
    CHECK(ev.separated.size() == 6);
    CHECK(ev.exact);
    CHECK(ev.flag);
  }
  SUBCASE("separated set is pairwise separated and maximal on small instances") {
    for (uint64_t seed = 0; seed < 4; ++seed) {
      auto t = line_triple(10, seed);
      auto ev = admissibility_event(t.dist, &t.w, 0.3);
      REQUIRE(ev.exact);
      for (size_t a = 0; a < ev.separated.size(); ++a)
        for (size_t b = a + 1; b < ev.separated.size(); ++b)
          CHECK(t.dist.at(ev.separated[a], ev.separated[b]) > 0.3);
    }
  }
}

TEST_CASE("subsample_entropy_bounds: trivial rows and full-space fields") {
  auto t = line_triple(6, 2);
  auto b = subsample_entropy_bounds(t, 0.3, {1, 6}, 10, 99);
  CHECK(b.full_H == eps_entropy(t, 0.3, CoverMethod::exact).H);
  CHECK(b.full_H_plus <= b.full_H + 1e-12);  // right-limit proxy can only shrink
  REQUIRE(b.rows.size() == 2);
  CHECK(b.rows[0].n == 1);
  CHECK(b.rows[0].mean == 0.0);
  CHECK(b.rows[0].min == 0.0);
  CHECK(b.rows[0].max == 0.0);
  CHECK(b.rows[1].min <= b.rows[1].mean);
  CHECK(b.rows[1].mean <= b.rows[1].max);
}

TEST_CASE("subsample_entropy_bounds: cube subsamples stay below the full space") {
  auto t = cube_triple(4);
  auto b = subsample_entropy_bounds(t, 0.3, {64}, 10, 7);
  REQUIRE(b.full_H >= 0);
  CHECK(b.rows[0].max <= b.full_H + 1e-12);
  CHECK(b.rows[0].method == "exact");
}

TEST_CASE("eps_entropy: frozen binary cube values at eps=0.25") {
  // dims 2..4 are within the unconditional branch-and-bound range
  int expected_k[] = {4, 7, 13};
  for (int d = 2; d <= 4; ++d) {
    auto r = eps_entropy(cube_triple(d), 0.25, CoverMethod::exact);
    REQUIRE(r.cover.exact);
    CHECK(r.cover.k == expected_k[d - 2]);
  }
}
