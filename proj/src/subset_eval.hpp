#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "aptail/ap_index.hpp"
#include "aptail/error.hpp"
#include "aptail/kernels.hpp"

namespace aptail {

// psi on bit masks (bit i-1 = element i), N <= 64
class PsiEvaluator {
 public:
  explicit PsiEvaluator(const ModelParams& mp) : masks_(kernels::progression_masks(mp.idx())) {
    const int k = mp.k;
    w_.assign(k + 1, 0.0);
    for (int h = 1; h <= k; ++h) w_[h] = std::pow(mp.p, k - h) * (1.0 - std::pow(mp.p, h));
  }
  double operator()(std::uint64_t mask) const {
    double s = 0.0;
    for (auto bm : masks_) s += w_[__builtin_popcountll(bm & mask)];
    return s;
  }

 private:
  std::vector<std::uint64_t> masks_;
  std::vector<double> w_;
};

// B cap U for every progression meeting U in at least min_hits points,
// as masks over positions in U. |U| <= 32.
inline std::vector<std::uint32_t> local_masks(const ProgressionIndex& idx, const ElementSet& U,
                                              int min_hits) {
  if (U.size() > 32) throw CapExceeded("local_mask_size=32", "local masks need |U| <= 32");
  std::vector<int> pos(idx.N() + 1, -1);
  for (std::size_t j = 0; j < U.size(); ++j) pos[U[j]] = static_cast<int>(j);
  std::vector<std::uint8_t> seen(idx.size(), 0);
  std::vector<std::uint32_t> out;
  for (int u : U) {
    for (auto id : idx.incidence(u)) {
      if (seen[id]) continue;
      seen[id] = 1;
      std::uint32_t m = 0;
      for (int e : idx.progression(id))
        if (pos[e] >= 0) m |= 1u << pos[e];
      if (__builtin_popcount(m) >= min_hits) out.push_back(m);
    }
  }
  return out;
}

inline std::vector<Count> max_profile_over_subsets(const std::vector<std::uint32_t>& masks, int n,
                                                   int k) {
  return kernels::max_profile_omp(masks, n, k);
}

}  // namespace aptail
