#pragma once

#include <cstdint>
#include <vector>

#include "aptail/ap_index.hpp"

// Hot loops, each with a plain serial version kept as the reference
// and an OpenMP version. Both must give bit-identical integer output.
namespace aptail::kernels {

// Overlap census by counting position patterns, no index needed.
OverlapCounts overlap_counts_serial(int N, int k);
OverlapCounts overlap_counts_omp(int N, int k);

// Overlap census by walking incidence lists; counts each ordered pair
// once at its first shared element. Slow, used as a cross-check.
OverlapCounts overlap_counts_pair_scan(const ProgressionIndex& index);

// table[s][x] = number of R in [N] with |R| = s and A_k(R) = x.
struct SubsetCensus {
  int N = 0;
  Count ap_total = 0;
  std::vector<std::uint64_t> table;

  std::uint64_t at(int s, Count x) const {
    return table[static_cast<std::size_t>(s) * (ap_total + 1) + x];
  }
};

inline constexpr int kCensusCap = 24;

SubsetCensus subset_census_serial(const ProgressionIndex& index);
SubsetCensus subset_census_omp(const ProgressionIndex& index);

// Bit mask of each progression (bit i-1 for element i); N <= 64.
std::vector<std::uint64_t> progression_masks(const ProgressionIndex& index);

// Given masks of B cap U over n positions, the max over all K inside U of
// #{B : |B cap K| = r}, r = 1..k (slot r-1). n <= 24.
std::vector<Count> max_profile_serial(const std::vector<std::uint32_t>& masks, int n, int k);
std::vector<Count> max_profile_omp(const std::vector<std::uint32_t>& masks, int n, int k);

}  // namespace aptail::kernels
