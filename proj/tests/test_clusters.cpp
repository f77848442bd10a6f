#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "aptail/clusters.hpp"
#include "aptail/error.hpp"
#include "aptail/oracle.hpp"
#include "aptail/sampling.hpp"

using namespace aptail;

namespace {

ModelParams model(int N, int k, double p) { return exact_moments(build_index(N, k), p); }

Hypergraph random_hypergraph(std::mt19937_64& g, int n, int k, int max_edges) {
  std::uniform_int_distribution<int> ne(1, max_edges);
  const int want = ne(g);
  std::set<std::vector<int>> seen;
  std::vector<int> verts(n);
  for (int i = 0; i < n; ++i) verts[i] = i;
  for (int tries = 0; static_cast<int>(seen.size()) < want && tries < 1000; ++tries) {
    std::shuffle(verts.begin(), verts.end(), g);
    std::vector<int> e(verts.begin(), verts.begin() + k);
    std::sort(e.begin(), e.end());
    seen.insert(e);
  }
  std::vector<std::vector<int>> edges(seen.begin(), seen.end());
  std::shuffle(edges.begin(), edges.end(), g);  // the edge order is arbitrary
  return make_hypergraph(n, edges);
}

// componentwise max of cumulative boundaries over a family
std::vector<double> family_caps(const Hypergraph& H, const std::vector<oracle::Set>& fam) {
  std::vector<double> a(H.k, 0.0);
  for (const auto& ids : fam) {
    auto c = make_cluster(H, ids);
    for (int i = 0; i < H.k; ++i) a[i] = std::max(a[i], static_cast<double>(c.boundary[i]));
  }
  return a;
}

bool code_condition(const EncodingOutput& out, int k, int m, int s) {
  if (static_cast<int>(out.marks.size()) != s - 1) return false;
  std::set<std::pair<int, int>> uniq(out.marks.begin(), out.marks.end());
  if (uniq.size() != out.marks.size()) return false;
  int w = 0;
  for (auto [i, j] : out.marks) w += k - i;
  return w == m - k;
}

// runs emb over every member of the family that fits a; returns false on a
// collision or a code-condition failure
bool emb_family_ok(const Hypergraph& H, const std::vector<oracle::Set>& fam,
                   const std::vector<double>& a, int* checked = nullptr) {
  std::set<std::pair<int, std::vector<std::pair<int, int>>>> codes;
  int n = 0;
  for (const auto& ids : fam) {
    auto c = make_cluster(H, ids);
    bool fit = true;
    for (int i = 0; i < H.k; ++i) fit = fit && static_cast<double>(c.boundary[i]) <= a[i];
    if (!fit) continue;
    auto out = emb_encode(H, ids, a);
    if (!code_condition(out, H.k, c.m, c.s)) return false;
    for (auto [i, j] : out.marks)
      if (j > std::floor(a[i - 1])) return false;
    if (!codes.insert({out.root_edge, out.marks}).second) return false;
    ++n;
  }
  if (checked) *checked = n;
  return true;
}

}  // namespace

TEST(Hypergraph, Validation) {
  EXPECT_THROW(make_hypergraph(5, {{0, 1, 2}, {1, 2}}), DomainError);
  EXPECT_THROW(make_hypergraph(5, {{0, 1, 1}}), DomainError);
  EXPECT_THROW(make_hypergraph(5, {{0, 1, 5}}), DomainError);
  EXPECT_THROW(make_hypergraph(5, {{0, 1, 2}, {2, 1, 0}}), DomainError);
  auto H = make_hypergraph(5, {{2, 0, 1}, {3, 4, 2}});
  EXPECT_EQ(H.k, 3);
  EXPECT_EQ(H.edges[0], (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(H.incidence[2], (std::vector<int>{0, 1}));
}

TEST(Hypergraph, ApHypergraphMatchesIndex) {
  auto idx = build_index(10, 3);
  auto H = ap_hypergraph(*idx);
  EXPECT_EQ(H.edge_count(), 20);
  EXPECT_EQ(H.k, 3);
  EXPECT_EQ(H.vertex_count, 11);
  for (int i = 1; i <= 10; ++i) EXPECT_EQ(static_cast<int>(H.incidence[i].size()), idx->degree(i));
}

TEST(Components, Examples) {
  auto idx = build_index(8, 3);
  auto H = ap_hypergraph(*idx);
  auto id_of = [&](std::vector<int> e) {
    for (int id = 0; id < H.edge_count(); ++id)
      if (H.edges[id] == e) return id;
    return -1;
  };
  const int a = id_of({1, 2, 3}), b = id_of({2, 3, 4}), c = id_of({5, 6, 7});
  auto one = components(H, {a});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].m, 3);
  EXPECT_EQ(one[0].s, 1);

  EXPECT_EQ(components(H, {a, c}).size(), 2u);

  auto parts = components(H, {c, b, a});
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0].edge_ids, (std::vector<int>{std::min(a, b), std::max(a, b)}));
  EXPECT_EQ(parts[0].vertices, (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(parts[1].edge_ids, (std::vector<int>{c}));
  EXPECT_TRUE(components(H, {}).empty());
}

TEST(Components, PartitionRandom) {
  std::mt19937_64 g(11);
  for (int rep = 0; rep < 50; ++rep) {
    auto H = random_hypergraph(g, 12, 3, 10);
    std::vector<int> pick;
    for (int id = 0; id < H.edge_count(); ++id)
      if (g() % 2) pick.push_back(id);
    auto parts = components(H, pick);
    std::set<int> verts, edges;
    for (const auto& c : parts) {
      EXPECT_TRUE(is_connected(H, c.edge_ids));
      for (int v : c.vertices) EXPECT_TRUE(verts.insert(v).second);
      for (int e : c.edge_ids) edges.insert(e);
    }
    EXPECT_EQ(edges, std::set<int>(pick.begin(), pick.end()));
  }
}

TEST(BoundaryProfile, TrivialAndAgreesWithIntersectionProfile) {
  auto idx = build_index(15, 4);
  auto H = ap_hypergraph(*idx);
  EXPECT_EQ(boundary_profile(H, {}), std::vector<Count>(4, 0));
  std::vector<int> all;
  for (int i = 0; i <= 15; ++i) all.push_back(i);
  auto full = boundary_profile(H, all);
  EXPECT_EQ(full, (std::vector<Count>{0, 0, 0, H.edge_count()}));

  std::mt19937_64 g(3);
  for (int rep = 0; rep < 100; ++rep) {
    ElementSet W;
    for (int i = 1; i <= 15; ++i)
      if (g() % 3 == 0) W.push_back(i);
    EXPECT_EQ(boundary_profile(H, W), intersection_profile(*idx, W));
  }
  EXPECT_EQ(cumulative_boundary({1, 2, 3}), (std::vector<Count>{6, 5, 3}));
}

TEST(Classify, SingleEdgeByFormula) {
  auto mp = model(20, 3, 0.3);
  auto H = ap_hypergraph(mp.idx());
  auto c = make_cluster(H, {0});
  const double t = 2.0;
  ClusterOptions o;
  auto r = classify_cluster(mp, c, t, o);
  EXPECT_GE(r.psi, 1 - std::pow(0.3, 3) - 1e-12);
  const double lg = std::log(1 / 0.3);
  const double g = o.epsilon * lg / std::log(lg);
  const bool small = 1 <= 2 * lg * lg * lg && 1 <= g * 3;
  EXPECT_EQ(r.kind == ClusterClass::small, small);
  EXPECT_NEAR(r.s0, g * g, 1e-15);
  EXPECT_DOUBLE_EQ(r.xi, 1 + 0.1 / 15);
}

TEST(Classify, NoLogLogMeansNotSmall) {
  auto mp = model(10, 3, 0.5);  // log log 2 < 0
  auto H = ap_hypergraph(mp.idx());
  auto r = classify_cluster(mp, make_cluster(H, {0}), 1.0);
  EXPECT_FALSE(r.ratio_ok);
  EXPECT_NE(r.kind, ClusterClass::small);
  EXPECT_EQ(r.s0, 0.0);
}

TEST(Classify, BelowS0IsSmall) {
  // p = 0.01, eps = 1: s0 ~ 9.1 and 2 log(1/p)^3 ~ 195
  auto mp = model(12, 3, 0.01);
  auto H = ap_hypergraph(mp.idx());
  ClusterOptions o;
  o.epsilon = 1.0;
  int seen = 0;
  for (int s = 1; s <= 3; ++s) {
    for (const auto& c : enumerate_clusters(H, -1, s, {})) {
      auto r = classify_cluster(mp, c, 1.0, o);
      ASSERT_LE(c.s, r.s0);
      EXPECT_EQ(r.kind, ClusterClass::small);
      ++seen;
    }
  }
  EXPECT_GT(seen, 100);
}

TEST(Classify, HeavyWeightMatchesLogarithm) {
  auto mp = model(20, 3, 0.3);
  auto H = ap_hypergraph(mp.idx());
  std::mt19937_64 g(5);
  ClusterOptions o;
  const double t = 1.0;
  int heavy = 0;
  for (int rep = 0; rep < 200; ++rep) {
    // grow a random connected cluster of 4..6 progressions
    std::uniform_int_distribution<int> pick(0, H.edge_count() - 1);
    std::vector<int> ids{pick(g)};
    const int want = 4 + static_cast<int>(g() % 3);
    while (static_cast<int>(ids.size()) < want) {
      const int cand = pick(g);
      if (std::find(ids.begin(), ids.end(), cand) != ids.end()) continue;
      auto trial = ids;
      trial.push_back(cand);
      if (is_connected(H, trial)) ids = trial;
    }
    auto c = make_cluster(H, ids);
    auto r = classify_cluster(mp, c, t, o);
    const double scale = mp.mu * c.s / (o.K * t);
    EXPECT_DOUBLE_EQ(r.scale, scale);
    if (r.kind != ClusterClass::heavy) continue;
    ++heavy;
    const int closed =
        std::max(1, static_cast<int>(std::ceil(std::log(r.psi / scale) / std::log(r.xi))));
    EXPECT_EQ(r.weight, closed);
    EXPECT_GT(r.psi, scale);
  }
  EXPECT_GT(heavy, 100);
}

TEST(Classify, BoundedPicksLeastLadderValue) {
  auto mp = model(20, 3, 0.3);
  auto H = ap_hypergraph(mp.idx());
  ClusterOptions o;
  o.K = 1.0;
  std::map<double, int> hist;
  for (const auto& c : enumerate_clusters(H, -1, 4, {})) {
    auto r = classify_cluster(mp, c, 0.01, o);
    if (r.kind != ClusterClass::bounded) continue;
    ++hist[r.L];
    EXPECT_LE(r.psi, r.L * r.scale);
    if (r.L > 1.0 / 64) EXPECT_GT(r.psi, r.L / 2 * r.scale);
  }
  EXPECT_FALSE(hist.empty());
}

TEST(Classify, Preconditions) {
  auto mp = model(8, 3, 0.3);
  auto H = ap_hypergraph(mp.idx());
  auto c = make_cluster(H, {0});
  EXPECT_THROW(classify_cluster(mp, c, 0.0), DomainError);
  EXPECT_THROW(classify_cluster(model(8, 3, 1.0), c, 1.0), DomainError);
  ClusterOptions o;
  o.ladder = {2.0};
  EXPECT_THROW(classify_cluster(mp, c, 1.0, o), DomainError);
}

TEST(FactorialMoment, Examples) {
  auto mp = model(5, 3, 0.5);
  // ordered pairs: 8 with union 4, 4 with union 5
  EXPECT_NEAR(factorial_moment_exact(mp, 2), 8 * 0.0625 + 4 * 0.03125, 1e-15);
  EXPECT_NEAR(factorial_moment_exact(mp, 1), mp.mu, 1e-12);
  EXPECT_EQ(factorial_moment_exact(mp, 0), 1.0);
  auto big = model(20, 3, 0.2);
  EXPECT_NEAR(factorial_moment_exact(big, 1), big.mu, 1e-12);
}

TEST(FactorialMoment, TwoRoutesAndOracleAgree) {
  for (int k : {3, 4}) {
    for (int N : {6, 9, 12}) {
      for (double p : {0.2, 0.5, 0.8}) {
        auto mp = model(N, k, p);
        for (int t = 1; t <= 3; ++t) {
          const double a = factorial_moment_exact(mp, t);
          const double b = factorial_moment_by_subsets(mp, t);
          const double c = oracle::factorial_moment(N, k, p, t);
          EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, b)) << N << ' ' << k << ' ' << p << ' ' << t;
          EXPECT_NEAR(a, c, 1e-9 * std::max(1.0, c));
        }
      }
    }
  }
}

TEST(FactorialMoment, PairsAtTwenty) {
  auto mp = model(20, 3, 0.3);
  EXPECT_NEAR(factorial_moment_exact(mp, 2), oracle::factorial_moment(20, 3, 0.3, 2), 1e-9);
}

TEST(FactorialMoment, Caps) {
  EXPECT_THROW(factorial_moment_exact(model(13, 3, 0.3), 3), CapExceeded);
  EXPECT_THROW(factorial_moment_exact(model(21, 3, 0.3), 2), CapExceeded);
  EXPECT_THROW(factorial_moment_exact(model(8, 3, 0.3), -1), DomainError);
}

TEST(FactorialMoment, SeedFilter) {
  auto mp = model(10, 3, 0.3);
  for (int t = 1; t <= 3; ++t) {
    const double plain = factorial_moment_exact(mp, t);
    EXPECT_NEAR(factorial_moment_exact(mp, t, 1e9), plain, 1e-12 * plain);
    const double f1 = factorial_moment_exact(mp, t, 1.0);
    const double f2 = factorial_moment_exact(mp, t, 2.0);
    EXPECT_LE(f1, plain * (1 + 1e-12));
    EXPECT_LE(f1, f2 * (1 + 1e-12));
  }
}

TEST(FactorialMoment, MarkovStep) {
  for (int N : {8, 10, 12}) {
    auto mp = model(N, 3, 0.35);
    for (int t = 1; t <= 3; ++t) {
      const double thr = mp.mu + t;
      double ff = 1.0;
      for (int j = 0; j < t; ++j) ff *= thr - j;
      EXPECT_LE(exact_tail(mp, thr), factorial_moment_exact(mp, t) / ff);
    }
  }
}

TEST(Jor, MatchesOracleAndHolds) {
  for (int N : {8, 10}) {
    for (double p : {0.2, 0.4}) {
      auto mp = model(N, 3, p);
      for (int m = 1; m <= 3; ++m) {
        for (double u : {0.0, 0.5, 1.0}) {
          auto r = jor_moment(mp, m, u);
          EXPECT_NEAR(r.lhs, oracle::jor_lhs(N, 3, p, m, u, 3 * m), 1e-12 * std::max(1.0, r.lhs));
          EXPECT_LE(r.lhs, r.rhs);
          EXPECT_DOUBLE_EQ(r.rhs, std::pow(mp.mu + u, m));
        }
      }
    }
  }
}

TEST(Jor, ZeroSeedKillsEverything) {
  auto r = jor_moment(model(8, 3, 0.3), 2, 0.0);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_THROW(jor_moment(model(13, 3, 0.3), 1, 1.0), CapExceeded);
}

TEST(Emb, SingleEdge) {
  auto H = make_hypergraph(6, {{3, 4, 5}, {0, 1, 2}});
  auto out = emb_encode(H, {1}, {1, 1, 1});
  EXPECT_EQ(out.root_edge, 1);
  EXPECT_TRUE(out.marks.empty());
}

TEST(Emb, TwoEdgePathsByHand) {
  // sharing one vertex: at step 2 the second edge is first in sigma^(1)
  auto H1 = make_hypergraph(5, {{0, 1, 2}, {2, 3, 4}});
  auto o1 = emb_encode(H1, {0, 1}, {2, 2, 2});
  EXPECT_EQ(o1.root_edge, 0);
  EXPECT_EQ(o1.marks, (std::vector<std::pair<int, int>>{{1, 1}}));
  EXPECT_TRUE(code_condition(o1, 3, 5, 2));

  // sharing two vertices
  auto H2 = make_hypergraph(4, {{0, 1, 2}, {1, 2, 3}});
  auto o2 = emb_encode(H2, {0, 1}, {2, 2, 2});
  EXPECT_EQ(o2.marks, (std::vector<std::pair<int, int>>{{2, 1}}));
  EXPECT_TRUE(code_condition(o2, 3, 4, 2));

  // an extra edge listed earlier in sigma^(1) shifts the position
  auto H3 = make_hypergraph(7, {{0, 1, 2}, {0, 5, 6}, {2, 3, 4}});
  auto o3 = emb_encode(H3, {0, 2}, {3, 3, 3});
  EXPECT_EQ(o3.marks, (std::vector<std::pair<int, int>>{{1, 2}}));
}

TEST(Emb, Preconditions) {
  auto H = make_hypergraph(7, {{0, 1, 2}, {4, 5, 6}, {2, 3, 4}});
  EXPECT_THROW(emb_encode(H, {0, 1}, {9, 9, 9}), PreconditionError);
  EXPECT_THROW(emb_encode(H, {}, {9, 9, 9}), PreconditionError);
  // {0,1,2} u {2,3,4} touches all three edges, so a_1 = 3
  EXPECT_THROW(emb_encode(H, {0, 2}, {2, 9, 9}), PreconditionError);
  EXPECT_NO_THROW(emb_encode(H, {0, 2}, {3, 2, 2}));
  EXPECT_THROW(emb_encode(H, {0, 2}, {3, 2}), DomainError);
}

TEST(Emb, InjectiveOnRandomHypergraphs) {
  std::mt19937_64 g(2024);
  int total = 0;
  for (int rep = 0; rep < 50; ++rep) {
    auto H = random_hypergraph(g, 7 + static_cast<int>(g() % 4), 3, 8);
    std::vector<std::vector<int>> edges = H.edges;
    for (int s = 1; s <= 4; ++s) {
      auto fam = oracle::connected_edge_subsets(edges, s);
      if (fam.empty()) continue;
      auto a = family_caps(H, fam);
      int n = 0;
      EXPECT_TRUE(emb_family_ok(H, fam, a, &n));
      total += n;
      // a tighter cap keeps only part of the family
      auto tight = a;
      for (auto& x : tight) x = std::floor(x * 0.7);
      EXPECT_TRUE(emb_family_ok(H, fam, tight));
      // real-valued caps
      auto frac = a;
      for (auto& x : frac) x = x * 0.85 + 0.3;
      EXPECT_TRUE(emb_family_ok(H, fam, frac));
    }
  }
  EXPECT_GT(total, 500);
}

TEST(Emb, InjectiveOnApEight) {
  auto H = ap_hypergraph(*build_index(8, 3));
  for (int s = 1; s <= 4; ++s) {
    auto fam = oracle::connected_edge_subsets(H.edges, s);
    ASSERT_FALSE(fam.empty());
    int n = 0;
    EXPECT_TRUE(emb_family_ok(H, fam, family_caps(H, fam), &n));
    EXPECT_EQ(n, static_cast<int>(fam.size()));
  }
}

TEST(EnumerateClusters, MatchesOracle) {
  std::mt19937_64 g(8);
  for (int rep = 0; rep < 30; ++rep) {
    auto H = random_hypergraph(g, 9, 3, 12);
    for (int s = 1; s <= 4; ++s) {
      auto fam = oracle::connected_edge_subsets(H.edges, s);
      auto got = enumerate_clusters(H, -1, s, {});
      std::set<std::vector<int>> want(fam.begin(), fam.end()), have;
      for (const auto& c : got) EXPECT_TRUE(have.insert(c.edge_ids).second);
      EXPECT_EQ(have, want);
    }
  }
}

TEST(EnumerateClusters, SerialAndParallelAgree) {
  auto H = ap_hypergraph(*build_index(12, 3));
  for (int s = 1; s <= 3; ++s) {
    auto a = enumerate_clusters(H, -1, s, {});
    auto b = enumerate_clusters_serial(H, -1, s, {});
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t j = 0; j < a.size(); ++j) EXPECT_EQ(a[j].edge_ids, b[j].edge_ids);
  }
}

TEST(EnumerateClusters, TrivialCases) {
  auto H = ap_hypergraph(*build_index(10, 3));
  auto singles = enumerate_clusters(H, 3, 1, {});
  EXPECT_EQ(static_cast<int>(singles.size()), H.edge_count());
  for (const auto& c : singles) EXPECT_EQ(c.m, 3);
  EXPECT_TRUE(enumerate_clusters(H, 4, 1, {}).empty());
  for (int s = 1; s <= 3; ++s) EXPECT_TRUE(enumerate_clusters(H, -1, s, {0, 0, 0}).empty());
  EXPECT_THROW(enumerate_clusters(H, -1, 0, {}), DomainError);
  auto big = ap_hypergraph(*build_index(40, 3));
  EXPECT_THROW(enumerate_clusters(big, -1, 6, {}), CapExceeded);
}

TEST(EnumerateClusters, RespectsCaps) {
  auto H = ap_hypergraph(*build_index(9, 3));
  auto all = enumerate_clusters(H, -1, 3, {});
  std::vector<double> a{30, 12, 4};
  std::size_t fit = 0;
  for (const auto& c : all) {
    bool ok = true;
    for (int i = 0; i < 3; ++i) ok = ok && c.boundary[i] <= a[i];
    fit += ok;
  }
  EXPECT_EQ(enumerate_clusters(H, -1, 3, a).size(), fit);
}

TEST(GeneralizedBinomial, Values) {
  EXPECT_EQ(generalized_binomial(5, 2), 10.0);
  EXPECT_EQ(generalized_binomial(3, 5), 0.0);
  EXPECT_EQ(generalized_binomial(0, 0), 1.0);
  EXPECT_EQ(generalized_binomial(-0.5, 1), 0.0);
  EXPECT_NEAR(generalized_binomial(2.5, 2), 2.5 * 1.5 / 2, 1e-15);
  EXPECT_EQ(generalized_binomial(0.5, 2), 0.0);
  for (int a = 0; a <= 12; ++a)
    for (int n = 0; n <= 12; ++n) {
      double c = 1;
      for (int j = 0; j < n; ++j) c = c * (a - j) / (j + 1);
      EXPECT_NEAR(generalized_binomial(a, n), std::max(0.0, c), 1e-9);
    }
}

TEST(CountBound, Trivial) {
  auto b = cluster_count_bound(20, 3, 3, 1, {5, 5, 5}, 0, 0.3);
  EXPECT_EQ(b.thm, 20.0);
  EXPECT_TRUE(std::isnan(b.weighted));
  // m - k odd with k = 3, s = 2: needs 2 s_1 + s_2 = m - k and s_1 + s_2 + s_3 = 1
  EXPECT_EQ(cluster_count_bound(20, 3, 7, 2, {5, 5, 5}, 0, 0.3).thm, 0.0);
  EXPECT_EQ(cluster_count_bound(20, 3, 2, 2, {5, 5, 5}, 0, 0.3).thm, 0.0);
  // s = 2, m = 5: s_1 = 1 only
  EXPECT_EQ(cluster_count_bound(20, 3, 5, 2, {5, 5, 5}, 0, 0.3).thm, 100.0);
  EXPECT_THROW(cluster_count_bound(20, 3, 5, 2, {5, 5}, 0, 0.3), DomainError);
  EXPECT_THROW(cluster_count_bound(20, 3, 5, 2, {5, -1, 5}, 0, 0.3), DomainError);
}

TEST(CountBound, FloorNeverExceedsGeneralized) {
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> U(0, 20);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> a{U(g), U(g), U(g)};
    const int s = 1 + static_cast<int>(g() % 5);
    const int m = 3 + static_cast<int>(g() % 9);
    auto gen = cluster_count_bound(30, 3, m, s, a, 0, 0.2, BinomialMode::generalized);
    auto fl = cluster_count_bound(30, 3, m, s, a, 0, 0.2, BinomialMode::floor);
    EXPECT_LE(fl.thm, gen.thm * (1 + 1e-12));
  }
}

TEST(CountBound, DominatesBruteForce) {
  std::mt19937_64 g(77);
  int checked = 0;
  for (int rep = 0; rep < 100; ++rep) {
    auto H = random_hypergraph(g, 8 + static_cast<int>(g() % 3), 3, 10);
    const int s = 1 + static_cast<int>(g() % 4);
    auto fam = oracle::connected_edge_subsets(H.edges, s);
    if (fam.empty()) continue;
    const auto full = family_caps(H, fam);
    auto shrunk = full;
    for (auto& x : shrunk) x = std::floor(x * std::uniform_real_distribution<double>(0.7, 1.0)(g));
    auto frac = full;
    for (auto& x : frac) x -= 0.5;
    for (const auto& a : {full, shrunk, frac}) {
      std::map<int, int> by_m;
      for (const auto& c : enumerate_clusters(H, -1, s, a)) ++by_m[c.m];
      for (auto [m, n] : by_m) {
        auto b = cluster_count_bound(H.edge_count(), 3, m, s, a, 0, 0.5);
        EXPECT_LE(n, b.thm);
        auto bf = cluster_count_bound(H.edge_count(), 3, m, s, a, 0, 0.5, BinomialMode::floor);
        EXPECT_LE(n, bf.thm);
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(CountBound, WeightedOnApTen) {
  auto H = ap_hypergraph(*build_index(10, 3));
  for (int s = 2; s <= 3; ++s) {
    auto all = enumerate_clusters(H, -1, s, {});
    std::vector<double> a(3, 0.0);
    for (const auto& c : all)
      for (int i = 0; i < 3; ++i) a[i] = std::max(a[i], static_cast<double>(c.boundary[i]));
    for (double p : {0.05, 0.2, 0.5, 0.9}) {
      double lhs = 0.0;
      for (const auto& c : enumerate_clusters(H, -1, s, a)) lhs += std::pow(p, c.m);
      auto b = cluster_count_bound(H.edge_count(), 3, 3, s, a, 0, p);
      EXPECT_LE(lhs, b.weighted) << s << ' ' << p;
      EXPECT_LE(b.weighted, b.weighted_proof);
    }
  }
}

TEST(Census, CsvShape) {
  auto mp = model(8, 3, 0.2);
  auto rows = cluster_census(mp, 2, 1.0);
  Count total = 0;
  for (const auto& r : rows) total += r.count;
  const auto H = ap_hypergraph(mp.idx());
  EXPECT_EQ(total, static_cast<Count>(enumerate_clusters(H, -1, 1, {}).size() +
                                      enumerate_clusters(H, -1, 2, {}).size()));
  std::ostringstream os;
  write_cluster_csv(os, rows);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, kClusterCsvHeader);
  std::size_t n = 0;
  while (std::getline(is, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
    ++n;
  }
  EXPECT_EQ(n, rows.size());
}
