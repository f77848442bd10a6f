#include "aptail/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <numeric>
#include <string>

#include "aptail/error.hpp"

namespace aptail::kernels {

namespace {

// One way a j-subset of B can coincide with a j-subset of B': positions r
// in B and s in B', with b' = (num/den) * b forced by the first two points.
struct Pattern {
  int j;
  int r0, s0;
  Count num, den;  // reduced; b = den*c, b' = num*c
};

std::vector<std::vector<int>> position_subsets(int k, int j) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(j);
  std::iota(cur.begin(), cur.end(), 0);
  while (true) {
    out.push_back(cur);
    int pos = j - 1;
    while (pos >= 0 && cur[pos] == k - j + pos) --pos;
    if (pos < 0) break;
    ++cur[pos];
    for (int q = pos + 1; q < j; ++q) cur[q] = cur[q - 1] + 1;
  }
  return out;
}

std::vector<Pattern> overlap_patterns(int k) {
  std::vector<Pattern> pats;
  for (int j = 2; j <= k; ++j) {
    auto subs = position_subsets(k, j);
    for (const auto& R : subs) {
      for (const auto& S : subs) {
        const Count dr = R[1] - R[0];
        const Count ds = S[1] - S[0];
        bool ok = true;
        for (int m = 2; m < j && ok; ++m) ok = (R[m] - R[0]) * ds == (S[m] - S[0]) * dr;
        if (!ok) continue;
        const Count g = std::gcd(dr, ds);
        pats.push_back({j, R[0], S[0], dr / g, ds / g});
      }
    }
  }
  return pats;
}

inline Count pattern_hits(const Pattern& pt, Count c, int N, int k) {
  const Count b = pt.den * c;
  const Count bp = pt.num * c;
  const Count shift = pt.r0 * b - pt.s0 * bp;  // a' = a + shift
  const Count lo = std::max<Count>(1, 1 - shift);
  const Count hi = std::min<Count>(N - (k - 1) * b, N - (k - 1) * bp - shift);
  return hi >= lo ? hi - lo + 1 : 0;
}

Count max_multiplier(const Pattern& pt, int N, int k) {
  const Count span = N - 1;
  return span / ((k - 1) * std::max(pt.num, pt.den));
}

__int128 binom(int n, int r) {
  if (r < 0 || r > n) return 0;
  __int128 v = 1;
  for (int i = 1; i <= r; ++i) v = v * (n - r + i) / i;
  return v;
}

void finish_counts(OverlapCounts& out, const std::vector<__int128>& W) {
  const int k = out.k;
  out.pairs.assign(k + 1, 0);
  for (int j = 1; j <= k; ++j) {
    __int128 s = 0;
    for (int m = j; m <= k; ++m) {
      __int128 term = binom(m, j) * W[m];
      s += ((m - j) % 2 == 0) ? term : -term;
    }
    out.pairs[j] = s;
  }
}

void check_nk(int N, int k) {
  if (k < 3) throw DomainError("k must be at least 3");
  if (N < 1) throw DomainError("N must be at least 1");
}

}  // namespace

OverlapCounts overlap_counts_serial(int N, int k) {
  check_nk(N, k);
  OverlapCounts out;
  out.N = N;
  out.k = k;
  out.ap_total = ap_count(N, k);
  std::vector<__int128> W(k + 1, 0);
  for (int i = 1; i <= N; ++i) {
    const __int128 d = degree_closed_form(N, k, i);
    W[1] += d * d;
  }
  for (const auto& pt : overlap_patterns(k)) {
    const Count cmax = max_multiplier(pt, N, k);
    for (Count c = 1; c <= cmax; ++c) W[pt.j] += pattern_hits(pt, c, N, k);
  }
  out.sum_deg_sq = W[1];
  finish_counts(out, W);
  return out;
}

OverlapCounts overlap_counts_omp(int N, int k) {
  check_nk(N, k);
  OverlapCounts out;
  out.N = N;
  out.k = k;
  out.ap_total = ap_count(N, k);
  const auto pats = overlap_patterns(k);
  Count cmax_all = 0;
  for (const auto& pt : pats) cmax_all = std::max(cmax_all, max_multiplier(pt, N, k));

  std::vector<__int128> W(k + 1, 0);
#pragma omp parallel
  {
    std::vector<__int128> local(k + 1, 0);
#pragma omp for schedule(static) nowait
    for (int i = 1; i <= N; ++i) {
      const __int128 d = degree_closed_form(N, k, i);
      local[1] += d * d;
    }
#pragma omp for schedule(dynamic, 4096) nowait
    for (Count c = 1; c <= cmax_all; ++c) {
      for (const auto& pt : pats) {
        if (c <= max_multiplier(pt, N, k)) local[pt.j] += pattern_hits(pt, c, N, k);
      }
    }
#pragma omp critical
    for (int j = 0; j <= k; ++j) W[j] += local[j];
  }
  out.sum_deg_sq = W[1];
  finish_counts(out, W);
  return out;
}

OverlapCounts overlap_counts_pair_scan(const ProgressionIndex& index) {
  const int k = index.k();
  OverlapCounts out;
  out.N = index.N();
  out.k = k;
  out.ap_total = static_cast<Count>(index.size());
  out.pairs.assign(k + 1, 0);
  for (int i = 1; i <= index.N(); ++i) {
    const __int128 d = index.degree(i);
    out.sum_deg_sq += d * d;
  }
  std::vector<Count> S(k + 1, 0);
  for (std::size_t id = 0; id < index.size(); ++id) {
    auto B = index.progression(id);
    for (int i : B) {
      for (auto id2 : index.incidence(i)) {
        auto B2 = index.progression(id2);
        // both sorted: merge to find the first shared element and the overlap
        int first = 0, shared = 0;
        for (int x = 0, y = 0; x < k && y < k;) {
          if (B[x] < B2[y]) {
            ++x;
          } else if (B[x] > B2[y]) {
            ++y;
          } else {
            if (shared++ == 0) first = B[x];
            ++x;
            ++y;
          }
        }
        if (first == i) ++S[shared];
      }
    }
  }
  for (int j = 1; j <= k; ++j) out.pairs[j] = S[j];
  return out;
}

std::vector<std::uint64_t> progression_masks(const ProgressionIndex& index) {
  if (index.N() > 64) throw CapExceeded("mask_N=64", "bit masks need N <= 64");
  std::vector<std::uint64_t> masks(index.size(), 0);
  for (std::size_t id = 0; id < index.size(); ++id) {
    for (int e : index.progression(id)) masks[id] |= std::uint64_t{1} << (e - 1);
  }
  return masks;
}

namespace {

SubsetCensus empty_census(const ProgressionIndex& index) {
  if (index.N() > kCensusCap) {
    throw CapExceeded("census_N=" + std::to_string(kCensusCap),
                      "subset census at N=" + std::to_string(index.N()));
  }
  SubsetCensus c;
  c.N = index.N();
  c.ap_total = static_cast<Count>(index.size());
  c.table.assign(static_cast<std::size_t>(c.N + 1) * (c.ap_total + 1), 0);
  return c;
}

}  // namespace

SubsetCensus subset_census_serial(const ProgressionIndex& index) {
  SubsetCensus c = empty_census(index);
  const auto masks = progression_masks(index);
  const std::uint64_t total = std::uint64_t{1} << c.N;
  for (std::uint64_t m = 0; m < total; ++m) {
    Count x = 0;
    for (auto bm : masks) x += (m & bm) == bm;
    ++c.table[static_cast<std::size_t>(__builtin_popcountll(m)) * (c.ap_total + 1) + x];
  }
  return c;
}

SubsetCensus subset_census_omp(const ProgressionIndex& index) {
  SubsetCensus c = empty_census(index);
  const int N = c.N;
  const auto masks = progression_masks(index);
  // for each element, the rest of every progression through it
  std::vector<std::vector<std::uint64_t>> rest(N);
  for (int i = 1; i <= N; ++i) {
    for (auto id : index.incidence(i)) rest[i - 1].push_back(masks[id] & ~(std::uint64_t{1} << (i - 1)));
  }
  const int hi_bits = std::min(N, 8);
  const int lo_bits = N - hi_bits;
  const Count width = c.ap_total + 1;
  const std::int64_t shards = std::int64_t{1} << hi_bits;

#pragma omp parallel
  {
    std::vector<std::uint64_t> local(c.table.size(), 0);
#pragma omp for schedule(dynamic, 1) nowait
    for (std::int64_t sh = 0; sh < shards; ++sh) {
      std::uint64_t m = static_cast<std::uint64_t>(sh) << lo_bits;
      Count x = 0;
      for (auto bm : masks) x += (m & bm) == bm;
      ++local[static_cast<std::size_t>(__builtin_popcountll(m)) * width + x];
      const std::uint64_t steps = std::uint64_t{1} << lo_bits;
      for (std::uint64_t g = 1; g < steps; ++g) {
        const int bit = __builtin_ctzll(g);
        const std::uint64_t flag = std::uint64_t{1} << bit;
        Count delta = 0;
        for (auto r : rest[bit]) delta += (m & r) == r;
        if (m & flag) {
          m &= ~flag;
          x -= delta;
        } else {
          m |= flag;
          x += delta;
        }
        ++local[static_cast<std::size_t>(__builtin_popcountll(m)) * width + x];
      }
    }
#pragma omp critical
    for (std::size_t q = 0; q < local.size(); ++q) c.table[q] += local[q];
  }
  return c;
}

namespace {

void check_profile_args(int n) {
  if (n > 24) throw CapExceeded("max_profile_n=24", "subset max over 2^" + std::to_string(n));
}

}  // namespace

std::vector<Count> max_profile_serial(const std::vector<std::uint32_t>& masks, int n, int k) {
  check_profile_args(n);
  std::vector<Count> best(k, 0);
  std::vector<Count> prof(k + 1);
  for (std::uint32_t sub = 0; sub < (1u << n); ++sub) {
    std::fill(prof.begin(), prof.end(), 0);
    for (auto bm : masks) ++prof[__builtin_popcount(bm & sub)];
    for (int r = 1; r <= k; ++r) best[r - 1] = std::max(best[r - 1], prof[r]);
  }
  return best;
}

std::vector<Count> max_profile_omp(const std::vector<std::uint32_t>& masks, int n, int k) {
  check_profile_args(n);
  std::vector<Count> best(k, 0);
  const std::int64_t total = std::int64_t{1} << n;
#pragma omp parallel
  {
    std::vector<Count> local(k, 0);
    std::vector<Count> prof(k + 1);
#pragma omp for schedule(static) nowait
    for (std::int64_t sub = 0; sub < total; ++sub) {
      std::fill(prof.begin(), prof.end(), 0);
      for (auto bm : masks) ++prof[__builtin_popcount(bm & static_cast<std::uint32_t>(sub))];
      for (int r = 1; r <= k; ++r) local[r - 1] = std::max(local[r - 1], prof[r]);
    }
#pragma omp critical
    for (int r = 0; r < k; ++r) best[r] = std::max(best[r], local[r]);
  }
  return best;
}

}  // namespace aptail::kernels
