#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>

#include "scalent/core.hpp"
#include "scalent/lp.hpp"

using namespace scalent;

namespace {

FiniteMetricTriple random_triple(int n, uint64_t seed) {
  // random points on a line give a genuine metric
  Rng rng(seed, "test.points", 0);
  std::vector<double> x((size_t)n);
  for (auto& v : x) v = rng.uniform();
  FiniteMetricTriple t;
  t.dist = DistanceMatrix(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t.dist.at(i, j) = std::fabs(x[(size_t)i] - x[(size_t)j]);
  std::vector<double> w((size_t)n);
  double s = 0;
  for (auto& v : w) {
    v = 0.1 + rng.uniform();
    s += v;
  }
  for (auto& v : w) v /= s;
  t.w = w;
  return t;
}

}  // namespace

TEST_CASE("validate: single point is valid") {
  DistanceMatrix m(1);
  CHECK(validate(m).ok());
}

TEST_CASE("validate: negative entry is a structural error") {
  DistanceMatrix m(2);
  m.at(0, 1) = m.at(1, 0) = -1.0;
  CHECK_THROWS_AS((void)validate(m), Error);
}

TEST_CASE("validate: triangle violation located at worst triple") {
  DistanceMatrix m(3);
  m.at(0, 1) = m.at(1, 0) = 1;
  m.at(0, 2) = m.at(2, 0) = 3;
  m.at(1, 2) = m.at(2, 1) = 1;
  auto rep = validate(m);
  REQUIRE_FALSE(rep.ok());
  bool found = false;
  for (const auto& v : rep.violations)
    if (v.kind == "triangle" && ((v.i == 0 && v.j == 2) || (v.i == 2 && v.j == 0)) && v.k == 1)
      found = true;
  CHECK(found);
}

TEST_CASE("validate: strict flag rejects zero off-diagonal") {
  DistanceMatrix m(2);  // both distances zero
  CHECK(validate(m, false).ok());
  CHECK_FALSE(validate(m, true).ok());
}

TEST_CASE("quotient_zero_blocks merges and preserves mean") {
  SUBCASE("two points at distance 0") {
    FiniteMetricTriple t;
    t.dist = DistanceMatrix(2);
    t.w = {0.5, 0.5};
    auto q = quotient_zero_blocks(t);
    CHECK(q.n() == 1);
    CHECK(q.w[0] == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("already strict is identity") {
    auto t = random_triple(5, 1);
    auto q = quotient_zero_blocks(t);
    CHECK(q.n() == t.n());
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) CHECK(q.dist.at(i, j) == t.dist.at(i, j));
  }
  SUBCASE("two zero-blocks of size 2; mean preserved") {
    FiniteMetricTriple t;
    t.dist = DistanceMatrix(4);
    // points {0,1} coincide, {2,3} coincide, blocks at distance 1
    for (int i : {0, 1})
      for (int j : {2, 3}) t.dist.at(i, j) = t.dist.at(j, i) = 1.0;
    t.w = {0.1, 0.2, 0.3, 0.4};
    auto q = quotient_zero_blocks(t);
    REQUIRE(q.n() == 2);
    CHECK(q.mean_distance() == doctest::Approx(t.mean_distance()).epsilon(1e-14));
    CHECK(q.w[0] == doctest::Approx(0.3));
    CHECK(q.w[1] == doctest::Approx(0.7));
  }
  SUBCASE("idempotent") {
    auto t = random_triple(6, 2);
    t.dist.at(1, 2) = t.dist.at(2, 1) = 0;
    t.dist.at(2, 1) = t.dist.at(1, 2) = 0;
    // repair triangle: set point 2 == point 1
    for (int j = 0; j < 6; ++j)
      if (j != 2) t.dist.at(2, j) = t.dist.at(j, 2) = t.dist.at(1, j);
    auto q1 = quotient_zero_blocks(t);
    auto q2 = quotient_zero_blocks(q1);
    CHECK(q1.n() == q2.n());
  }
}

TEST_CASE("normalize_mean") {
  SUBCASE("mean already 1 is identity") {
    FiniteMetricTriple t;
    t.dist = DistanceMatrix(2);
    t.dist.at(0, 1) = t.dist.at(1, 0) = 2.0;
    t.w = {0.5, 0.5};
    REQUIRE(t.mean_distance() == doctest::Approx(1.0));
    auto u = normalize_mean(t);
    CHECK(u.dist.at(0, 1) == doctest::Approx(2.0));
  }
  SUBCASE("doubling then normalizing restores the original") {
    auto t = random_triple(5, 3);
    auto doubled = t;
    for (auto& d : doubled.dist.a) d *= 2;
    auto tn = normalize_mean(t), dn = normalize_mean(doubled);
    for (size_t i = 0; i < tn.dist.a.size(); ++i)
      CHECK(dn.dist.a[i] == doctest::Approx(tn.dist.a[i]).epsilon(1e-12));
  }
  SUBCASE("random 5-point triple normalizes to mean 1") {
    auto u = normalize_mean(random_triple(5, 4));
    CHECK(u.mean_distance() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("zero mean rejected") {
    FiniteMetricTriple t;
    t.dist = DistanceMatrix(2);
    t.w = {0.5, 0.5};
    CHECK_THROWS_AS((void)normalize_mean(t), Error);
  }
}

TEST_CASE("subsample: determinism, n=1, weight reproduction") {
  auto t = random_triple(6, 5);
  SUBCASE("n=1 gives a 1-point triple") {
    auto s = subsample(t, 1, 7);
    CHECK(s.n() == 1);
    CHECK(s.w[0] == doctest::Approx(1.0));
  }
  SUBCASE("same seed gives identical triples") {
    auto a = subsample(t, 16, 42), b = subsample(t, 16, 42);
    CHECK(a.dist.a == b.dist.a);
    auto c = subsample(t, 16, 43);
    CHECK(a.dist.a != c.dist.a);
  }
  SUBCASE("large subsample reproduces weights within 3 binomial sigma") {
    int N = 6 * 2000;
    auto s = subsample(t, N, 11);
    // count copies of each original point by matching distance rows to the
    // original points via a distance-to-point-0 signature is fragile; instead
    // resample indices with the library's own stream contract: each point of
    // the subsample equals some original point, so distances to a fixed
    // subsample point partition the sample. Count points at distance 0 from
    // each representative.
    std::vector<int> counts((size_t)t.n(), 0);
    for (int i = 0; i < N; ++i) {
      // identify the original index by its distance profile to subsample
      // point 0..5 is ambiguous; use nearest original point via row match
      // against the first occurrence of each original index.
      (void)i;
    }
    // direct check: empirical measure of each zero-distance class
    // class representative = first sample point of that class
    std::vector<int> cls;
    std::vector<int> size_of;
    for (int i = 0; i < N; ++i) {
      bool placed = false;
      for (size_t c = 0; c < cls.size(); ++c)
        if (s.dist.at(i, cls[c]) == 0) {
          size_of[c]++;
          placed = true;
          break;
        }
      if (!placed) {
        cls.push_back(i);
        size_of.push_back(1);
      }
    }
    REQUIRE(cls.size() <= (size_t)t.n());
    std::vector<double> freq;
    for (int c : size_of) freq.push_back((double)c / N);
    std::sort(freq.begin(), freq.end());
    auto w = t.w;
    std::sort(w.begin(), w.end());
    for (size_t c = 0; c < freq.size(); ++c) {
      double sigma = std::sqrt(w[c] * (1 - w[c]) / N);
      CHECK(std::fabs(freq[c] - w[c]) <= 3 * sigma + 1e-12);
    }
  }
  SUBCASE("circle sampleable: distances match the metric of logged points") {
    SampleableTriple circ;
    circ.descriptor = "circle";
    std::vector<std::vector<double>> logged;
    circ.sample_point = [&](Rng& rng) {
      auto p = std::vector<double>{rng.uniform()};
      logged.push_back(p);
      return p;
    };
    circ.metric = [](const std::vector<double>& a, const std::vector<double>& b) {
      double d = std::fabs(a[0] - b[0]);
      return std::min(d, 1 - d);
    };
    auto s = subsample(circ, 3, 5);
    REQUIRE(logged.size() == 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(s.dist.at(i, j) ==
              doctest::Approx(circ.metric(logged[(size_t)i], logged[(size_t)j])));
  }
}

TEST_CASE("text formats: round trips and parse errors") {
  auto t = random_triple(5, 9);
  SUBCASE("format/parse round trip is exact") {
    auto u = parse_triple(format_triple(t));
    CHECK(u.dist.a == t.dist.a);
    CHECK(u.w == t.w);
  }
  SUBCASE("17-digit decimals survive") {
    FiniteMetricTriple x;
    x.dist = DistanceMatrix(2);
    x.dist.at(0, 1) = x.dist.at(1, 0) = 0.12345678901234567;
    x.w = {0.3333333333333333, 0.6666666666666667};
    auto y = parse_triple(format_triple(x));
    CHECK(y.dist.at(0, 1) == x.dist.at(0, 1));
    CHECK(y.w[0] == x.w[0]);
  }
  SUBCASE("row count mismatch reports the line") {
    try {
      (void)parse_matrix("3\n0 1 1\n1 0 1\n");
      FAIL("expected parse error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
  }
  SUBCASE("save/load round trip") {
    auto path = std::filesystem::temp_directory_path() / "scalent_test_triple.txt";
    save_triple(t, path.string());
    auto u = load_triple(path.string());
    CHECK(u.dist.a == t.dist.a);
    CHECK(u.w == t.w);
    std::filesystem::remove(path);
  }
  SUBCASE("comments and uniform default weights") {
    auto m = parse_triple("# c\n2\n0 1\n1 0\n");
    CHECK(m.w[0] == doctest::Approx(0.5));
  }
}

TEST_CASE("rng: counter-based determinism and order independence") {
  Rng a(7, "tag", 3), b(7, "tag", 3), c(7, "tag", 4), d(7, "other", 3);
  CHECK(a.u64() == b.u64());
  CHECK(a.u64() == b.u64());
  Rng a2(7, "tag", 3);
  (void)c.u64();
  (void)d.u64();
  CHECK(a2.u64() != c.u64());  // different cells decorrelate
  Rng e(7, "tag", 3);
  CHECK(e.u64() == Rng(7, "tag", 3).u64());  // independent of other streams' use
  for (int i = 0; i < 1000; ++i) {
    double u = e.uniform();
    CHECK(u >= 0);
    CHECK(u < 1);
  }
}

TEST_CASE("property: injected violations are detected") {
  Rng rng(13, "test.inject", 0);
  for (int trial = 0; trial < 50; ++trial) {
    auto t = random_triple(7, 100 + (uint64_t)trial);
    REQUIRE(validate(t.dist).ok());
    auto m = t.dist;
    int i = (int)rng.below(7), j = (int)rng.below(7);
    if (i == j) continue;
    SUBCASE("") {}
    if (trial % 2 == 0) {
      m.at(i, j) += 1e-3;  // symmetry break
      CHECK_FALSE(validate(m).ok());
    } else {
      m.at(i, j) = m.at(j, i) = m.at(i, j) + 3.5;  // triangle break (points on a line)
      CHECK_FALSE(validate(m).ok());
    }
  }
}

TEST_CASE("lp: tiny known instances") {
  SUBCASE("max-flow style equality LP") {
    // minimize x + 2y subject to x + y = 1, x,y >= 0 -> x=1
    LpProblem p;
    p.num_vars = 2;
    p.c = {1, 2};
    p.rows.push_back({{1, 1}, '=', 1});
    auto r = solve_lp(p);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("infeasible detected") {
    LpProblem p;
    p.num_vars = 1;
    p.c = {1};
    p.rows.push_back({{1}, '=', 1});
    p.rows.push_back({{1}, '=', 2});
    CHECK(solve_lp(p).status == LpStatus::infeasible);
  }
  SUBCASE("inequalities") {
    // minimize -x - y subject to x + 2y <= 4, 3x + y <= 6 -> (8/5, 6/5)
    LpProblem p;
    p.num_vars = 2;
    p.c = {-1, -1};
    p.rows.push_back({{1, 2}, '<', 4});
    p.rows.push_back({{3, 1}, '<', 6});
    auto r = solve_lp(p);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.objective == doctest::Approx(-2.8).epsilon(1e-9));
  }
}
