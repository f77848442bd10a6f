#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "aptail/ap_index.hpp"
#include "aptail/error.hpp"
#include "aptail/kernels.hpp"
#include "aptail/oracle.hpp"

using namespace aptail;

namespace {

ElementSet random_set(std::mt19937_64& rng, int N, double density) {
  std::bernoulli_distribution coin(density);
  ElementSet s;
  for (int i = 1; i <= N; ++i)
    if (coin(rng)) s.push_back(i);
  return s;
}

}  // namespace

TEST(BuildIndex, SmallCounts) {
  EXPECT_EQ(build_index(3, 3)->size(), 1u);
  EXPECT_EQ(build_index(5, 3)->size(), 4u);
  EXPECT_EQ(build_index(10, 3)->size(), 20u);
  EXPECT_EQ(build_index(2, 3)->size(), 0u);
}

TEST(BuildIndex, RejectsBadArguments) {
  EXPECT_THROW(build_index(10, 2), DomainError);
  EXPECT_THROW(build_index(0, 3), DomainError);
  EXPECT_THROW(build_index(100000, 3, 1000), CapExceeded);
}

TEST(BuildIndex, FiveThreeListing) {
  auto idx = build_index(5, 3);
  std::vector<std::vector<int>> got;
  for (std::size_t id = 0; id < idx->size(); ++id) {
    auto pr = idx->progression(id);
    got.emplace_back(pr.begin(), pr.end());
  }
  std::vector<std::vector<int>> want = {{1, 2, 3}, {2, 3, 4}, {3, 4, 5}, {1, 3, 5}};
  EXPECT_EQ(got, want);
}

TEST(BuildIndex, MatchesBruteForce) {
  for (int k = 3; k <= 5; ++k) {
    for (int N = 1; N <= 26; ++N) {
      auto idx = build_index(N, k);
      auto by_subsets = oracle::progressions_by_subsets(N, k);
      std::set<std::vector<int>> want(by_subsets.begin(), by_subsets.end());
      std::set<std::vector<int>> got;
      for (std::size_t id = 0; id < idx->size(); ++id) {
        auto pr = idx->progression(id);
        got.emplace(pr.begin(), pr.end());
      }
      ASSERT_EQ(got, want) << "N=" << N << " k=" << k;
      ASSERT_EQ(static_cast<Count>(idx->size()), ap_count(N, k));
    }
  }
}

TEST(BuildIndex, ClosedFormCountUpTo200) {
  for (int k = 3; k <= 5; ++k)
    for (int N = 1; N <= 200; ++N)
      ASSERT_EQ(static_cast<std::size_t>(ap_count(N, k)), oracle::progressions_ab(N, k).size());
}

TEST(BuildIndex, IncidenceIsInverse) {
  auto idx = build_index(40, 4);
  for (int i = 1; i <= 40; ++i) {
    std::set<std::uint32_t> inc(idx->incidence(i).begin(), idx->incidence(i).end());
    ASSERT_EQ(inc.size(), idx->incidence(i).size());
    for (std::size_t id = 0; id < idx->size(); ++id) {
      auto pr = idx->progression(id);
      bool member = std::find(pr.begin(), pr.end(), i) != pr.end();
      ASSERT_EQ(member, inc.count(static_cast<std::uint32_t>(id)) == 1);
    }
  }
}

TEST(BuildIndex, PairsInFewProgressions) {
  for (int k = 3; k <= 5; ++k) {
    auto idx = build_index(40, k);
    for (int x = 1; x <= 40; ++x) {
      for (int y = x + 1; y <= 40; ++y) {
        int both = 0;
        for (auto id : idx->incidence(x)) {
          auto pr = idx->progression(id);
          both += std::find(pr.begin(), pr.end(), y) != pr.end();
        }
        ASSERT_LE(both, k * (k - 1) / 2);
      }
    }
  }
}

TEST(BuildIndex, DegreesSumToKTimesCount) {
  for (int k = 3; k <= 5; ++k) {
    for (int N : {1, 7, 50, 133}) {
      auto idx = build_index(N, k);
      Count total = 0;
      for (int i = 1; i <= N; ++i) {
        ASSERT_EQ(idx->degree(i), degree_closed_form(N, k, i));
        total += idx->degree(i);
      }
      EXPECT_EQ(total, k * static_cast<Count>(idx->size()));
    }
  }
}

TEST(IntersectionProfile, Examples) {
  auto idx = build_index(5, 3);
  EXPECT_EQ(intersection_profile(*idx, {}), (std::vector<Count>{0, 0, 0}));
  EXPECT_EQ(intersection_profile(*idx, {1, 2, 3}), (std::vector<Count>{1, 2, 1}));
  EXPECT_EQ(intersection_profile(*idx, {1, 2, 3, 4, 5}), (std::vector<Count>{0, 0, 4}));
  EXPECT_THROW(intersection_profile(*idx, {0, 1}), DomainError);
  EXPECT_THROW(intersection_profile(*idx, {6}), DomainError);
}

TEST(IntersectionProfile, MatchesOracle) {
  std::mt19937_64 rng(11);
  for (int k = 3; k <= 5; ++k) {
    for (int N : {9, 17, 30}) {
      auto idx = build_index(N, k);
      for (int rep = 0; rep < 40; ++rep) {
        auto U = random_set(rng, N, 0.1 + 0.02 * rep);
        ASSERT_EQ(intersection_profile(*idx, U), oracle::profile(N, k, U));
      }
    }
  }
}

TEST(Psi, Examples) {
  auto mp = exact_moments(build_index(5, 3), 0.5);
  EXPECT_DOUBLE_EQ(psi(mp, {}), 0.0);
  EXPECT_NEAR(psi(mp, {1, 2, 3}), 1.75, 1e-15);
  EXPECT_NEAR(psi(mp, {1, 2, 3, 4, 5}), 4 * (1 - 0.125), 1e-15);
}

TEST(Psi, MatchesConditionalExpectation) {
  std::mt19937_64 rng(5);
  for (int k = 3; k <= 4; ++k) {
    const int N = 10;
    for (double p : {0.1, 0.45, 0.8}) {
      auto mp = exact_moments(build_index(N, k), p);
      for (int rep = 0; rep < 15; ++rep) {
        auto U = random_set(rng, N, 0.4);
        EXPECT_NEAR(psi(mp, U), oracle::psi(N, k, p, U), 1e-10);
      }
    }
  }
}

TEST(Psi, MonotoneAndSuperadditive) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pu(0.01, 0.99);
  auto idx = build_index(40, 3);
  for (int rep = 0; rep < 300; ++rep) {
    auto mp = exact_moments(idx, pu(rng));
    auto U = random_set(rng, 40, 0.25);
    ElementSet V = U;
    for (int i : random_set(rng, 40, 0.2)) V.push_back(i);
    V = make_set(V, 40);
    EXPECT_LE(psi(mp, U), psi(mp, V) + 1e-12);

    // split a random set into two disjoint parts
    ElementSet A, B;
    for (int i : random_set(rng, 40, 0.5)) (rng() & 1 ? A : B).push_back(i);
    ElementSet AB = make_set([&] { auto c = A; c.insert(c.end(), B.begin(), B.end()); return c; }(), 40);
    EXPECT_GE(psi(mp, AB), psi(mp, A) + psi(mp, B) - 1e-12);
  }
}

TEST(ExactMoments, Examples) {
  auto mp = exact_moments(build_index(10, 3), 0.5);
  EXPECT_DOUBLE_EQ(mp.mu, 2.5);
  auto one = exact_moments(build_index(10, 3), 1.0);
  EXPECT_DOUBLE_EQ(one.mu, 20.0);
  EXPECT_DOUBLE_EQ(one.sigma2, 0.0);
  auto zero = exact_moments(build_index(10, 3), 0.0);
  EXPECT_DOUBLE_EQ(zero.sigma2, 0.0);
  auto five = exact_moments(build_index(5, 3), 0.5);
  EXPECT_NEAR(five.sigma2, 0.875, 1e-15);
}

TEST(ExactMoments, RejectsBadInput) {
  auto idx = build_index(10, 3);
  EXPECT_THROW(exact_moments(idx, 1.5), DomainError);
  EXPECT_THROW(exact_moments(idx, -0.1), DomainError);
  EXPECT_THROW(exact_moments(idx, 1e-17), DomainError);
  MomentOptions opts;
  opts.route = VarianceRoute::pair_scan;
  opts.pair_scan_cap = 9;
  EXPECT_THROW(exact_moments(idx, 0.5, opts), CapExceeded);
}

TEST(ExactMoments, MatchesFullEnumeration) {
  for (int k = 3; k <= 4; ++k) {
    for (int N : {6, 11, 14}) {
      for (double p : {0.05, 0.3, 0.7}) {
        auto idx = build_index(N, k);
        auto mp = exact_moments(idx, p);
        auto brute = oracle::moments(N, k, p);
        EXPECT_NEAR(mp.mu, brute.mean, 1e-12 * std::max(1.0, brute.mean));
        EXPECT_NEAR(mp.sigma2 / brute.var, 1.0, 1e-9) << "N=" << N << " k=" << k << " p=" << p;
      }
    }
  }
}

TEST(OverlapCounts, RoutesAgree) {
  for (int k = 3; k <= 6; ++k) {
    for (int N : {1, 3, 8, 25, 64, 131}) {
      auto idx = build_index(N, k);
      auto scan = kernels::overlap_counts_pair_scan(*idx);
      auto ser = kernels::overlap_counts_serial(N, k);
      auto par = kernels::overlap_counts_omp(N, k);
      ASSERT_EQ(ser.ap_total, scan.ap_total);
      ASSERT_TRUE(ser.sum_deg_sq == scan.sum_deg_sq);
      ASSERT_TRUE(par.sum_deg_sq == scan.sum_deg_sq);
      for (int j = 1; j <= k; ++j) {
        ASSERT_TRUE(ser.pairs[j] == scan.pairs[j]) << "N=" << N << " k=" << k << " j=" << j;
        ASSERT_TRUE(par.pairs[j] == scan.pairs[j]);
      }
      // identical pairs only overlap fully
      ASSERT_TRUE(scan.pairs[k] == static_cast<__int128>(idx->size()));
    }
  }
}

TEST(ExactMoments, VIsWeightedDegreeSquares) {
  auto idx = build_index(30, 3);
  auto mp = exact_moments(idx, 0.2);
  double s = 0.0;
  for (int i = 1; i <= 30; ++i) s += static_cast<double>(idx->degree(i)) * idx->degree(i);
  EXPECT_NEAR(mp.V, s * std::pow(0.2, 5), 1e-12);
}

TEST(ExactMoments, LargeNWithoutIndex) {
  // closed-form counts are p independent, reuse them
  auto counts = kernels::overlap_counts_omp(1000000, 3);
  auto mp = moments_from_counts(counts, 1e-3);
  EXPECT_FALSE(mp.has_index());
  EXPECT_NEAR(mp.mu, static_cast<double>(ap_count(1000000, 3)) * 1e-9, 1e-3);
  EXPECT_GT(mp.sigma2, mp.mu);
  EXPECT_THROW(psi(mp, {1}), PreconditionError);
}

TEST(LinkCounts, Examples) {
  auto idx = build_index(5, 3);
  EXPECT_EQ(link_counts(*idx, {}), std::vector<int>(5, 0));
  std::vector<int> full;
  for (int i = 1; i <= 5; ++i) full.push_back(idx->degree(i));
  EXPECT_EQ(link_counts(*idx, {1, 2, 3, 4, 5}), full);
  // {1,3,5} minus 5 is {1,3}, not inside R, so only 3 has a link
  EXPECT_EQ(link_counts(*idx, {1, 2}), (std::vector<int>{0, 0, 1, 0, 0}));
  EXPECT_EQ(link_counts(*idx, {1, 3}), (std::vector<int>{0, 1, 0, 0, 1}));
}

TEST(LinkCounts, MatchesOracle) {
  std::mt19937_64 rng(3);
  for (int k = 3; k <= 4; ++k) {
    auto idx = build_index(24, k);
    for (int rep = 0; rep < 30; ++rep) {
      auto R = random_set(rng, 24, 0.5);
      ASSERT_EQ(link_counts(*idx, R), oracle::links(24, k, R));
      ASSERT_EQ(link_counts(SubsetState(idx, R)), oracle::links(24, k, R));
    }
  }
}

TEST(SubsetState, IncrementalCountStaysExact) {
  std::mt19937_64 rng(17);
  auto idx = build_index(60, 3);
  SubsetState st(idx);
  std::uniform_int_distribution<int> el(1, 60);
  for (int step = 0; step < 3000; ++step) {
    int i = el(rng);
    if (rng() % 3 == 0) st.erase(i); else st.insert(i);
    if (step % 50 == 0) {
      ASSERT_EQ(st.ap_count(), st.recount());
      ASSERT_EQ(st.ap_count(), contained_count(*idx, st.members()));
      ASSERT_EQ(static_cast<int>(st.members().size()), st.size());
    }
  }
  st.clear();
  EXPECT_EQ(st.ap_count(), 0);
}

TEST(SubsetCensus, SerialAndParallelAgree) {
  for (int k = 3; k <= 4; ++k) {
    for (int N : {1, 5, 9, 13, 16}) {
      auto idx = build_index(N, k);
      auto a = kernels::subset_census_serial(*idx);
      auto b = kernels::subset_census_omp(*idx);
      ASSERT_EQ(a.table, b.table);
      std::uint64_t total = 0;
      for (auto c : a.table) total += c;
      EXPECT_EQ(total, std::uint64_t{1} << N);
      EXPECT_EQ(a.at(N, a.ap_total), 1u);
    }
  }
  EXPECT_THROW(kernels::subset_census_omp(*build_index(25, 3)), CapExceeded);
}
