#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace aptail {

using Count = std::int64_t;

// A subset of [N], kept sorted and duplicate free. Elements are 1-based.
// Per-element vectors elsewhere (links, tilts, degrees) are 0-based:
// element i lives in slot i-1.
using ElementSet = std::vector<int>;

// Sorts, dedups and range-checks against [1, N]. Throws DomainError.
ElementSet make_set(std::vector<int> elems, int N);

// k-term progressions {a, a+b, ..., a+(k-1)b} in [N], b >= 1, ordered by (b, a).
class ProgressionIndex {
 public:
  ProgressionIndex(int N, int k);

  int N() const { return N_; }
  int k() const { return k_; }
  std::size_t size() const { return count_; }

  std::span<const int> progression(std::size_t id) const {
    return {elems_.data() + id * static_cast<std::size_t>(k_), static_cast<std::size_t>(k_)};
  }
  int first(std::size_t id) const { return elems_[id * k_]; }
  int step(std::size_t id) const { return elems_[id * k_ + 1] - elems_[id * k_]; }

  // ids of progressions containing i, ascending
  std::span<const std::uint32_t> incidence(int i) const {
    return {inc_ids_.data() + inc_off_[i - 1], inc_off_[i] - inc_off_[i - 1]};
  }
  int degree(int i) const { return static_cast<int>(inc_off_[i] - inc_off_[i - 1]); }

 private:
  int N_;
  int k_;
  std::size_t count_;
  std::vector<int> elems_;
  std::vector<std::size_t> inc_off_;
  std::vector<std::uint32_t> inc_ids_;
};

// Default limit on the number of stored progressions.
inline constexpr Count kDefaultIndexCap = 50'000'000;

std::shared_ptr<const ProgressionIndex> build_index(int N, int k,
                                                    Count max_progressions = kDefaultIndexCap);

// |AP_k([m])| in closed form. Same thing as interval_ap_count.
Count ap_count(int m, int k);

// Number of progressions through i, without an index.
Count degree_closed_form(int N, int k, int i);

// (A_1(U), ..., A_k(U)); slot r-1 holds A_r.
std::vector<Count> intersection_profile(const ProgressionIndex& index, const ElementSet& U);

// A_k(U) only.
Count contained_count(const ProgressionIndex& index, const ElementSet& U);

// Exact ordered-pair overlap census: pairs[j] = #{(B, B') : |B cap B'| = j}
// for j = 1..k (pairs[0] unused), plus sum_deg_sq = sum_i A_1(i)^2.
struct OverlapCounts {
  int N = 0;
  int k = 0;
  Count ap_total = 0;
  std::vector<__int128> pairs;
  __int128 sum_deg_sq = 0;

  double pair_count(int j) const { return static_cast<double>(pairs[j]); }
};

enum class VarianceRoute { overlap_count, pair_scan };

struct MomentOptions {
  VarianceRoute route = VarianceRoute::overlap_count;
  int pair_scan_cap = 2000;  // largest N for the incidence pair scan
};

struct ModelParams {
  // null when the moments came from closed-form counts only (very large N)
  std::shared_ptr<const ProgressionIndex> index;
  int N = 0;
  int k = 0;
  double p = 0.0;
  Count ap_total = 0;
  double mu = 0.0;
  double sigma2 = 0.0;
  double V = 0.0;

  const ProgressionIndex& idx() const;
  bool has_index() const { return static_cast<bool>(index); }
};

void check_probability(double p);

ModelParams exact_moments(std::shared_ptr<const ProgressionIndex> index, double p,
                          const MomentOptions& opts = {});

// Moments from precomputed counts; the result carries no index.
ModelParams moments_from_counts(const OverlapCounts& counts, double p);

// psi(U) = E[X | U in R] - E[X]
double psi(const ModelParams& params, const ElementSet& U);
double psi_from_profile(const std::vector<Count>& profile, double p);

// L_i = #{B containing i : B \ {i} inside R}, slot i-1.
std::vector<int> link_counts(const ProgressionIndex& index, const ElementSet& R);

// Membership plus an incrementally maintained A_k(members).
class SubsetState {
 public:
  explicit SubsetState(std::shared_ptr<const ProgressionIndex> index);
  SubsetState(std::shared_ptr<const ProgressionIndex> index, const ElementSet& members);

  bool contains(int i) const { return in_[i] != 0; }
  int size() const { return size_; }
  Count ap_count() const { return ap_count_; }

  void insert(int i);
  void erase(int i);
  void clear();

  // B containing i with every other element present
  int link(int i) const;
  Count recount() const;
  ElementSet members() const;
  const ProgressionIndex& index() const { return *index_; }

 private:
  std::shared_ptr<const ProgressionIndex> index_;
  std::vector<std::uint8_t> in_;
  int size_ = 0;
  Count ap_count_ = 0;
};

std::vector<int> link_counts(const SubsetState& R);

}  // namespace aptail
