#include "aptail/ap_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "aptail/error.hpp"
#include "aptail/kernels.hpp"

namespace aptail {

ElementSet make_set(std::vector<int> elems, int N) {
  std::sort(elems.begin(), elems.end());
  elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
  if (!elems.empty() && (elems.front() < 1 || elems.back() > N)) {
    throw DomainError("element outside [1, " + std::to_string(N) + "]");
  }
  return elems;
}

Count ap_count(int m, int k) {
  if (k < 2) throw DomainError("k must be at least 2");
  if (m < k) return 0;
  const Count q = (m - 1) / (k - 1);
  return q * m - static_cast<Count>(k - 1) * q * (q + 1) / 2;
}

Count degree_closed_form(int N, int k, int i) {
  Count total = 0;
  for (int r = 0; r < k; ++r) {
    // i sits at position r: need i - r*b >= 1 and i + (k-1-r)*b <= N
    Count lim = std::numeric_limits<Count>::max();
    if (r > 0) lim = std::min<Count>(lim, (i - 1) / r);
    if (r < k - 1) lim = std::min<Count>(lim, (N - i) / (k - 1 - r));
    total += std::max<Count>(0, lim);
  }
  return total;
}

ProgressionIndex::ProgressionIndex(int N, int k) : N_(N), k_(k) {
  if (k < 3) throw DomainError("k must be at least 3");
  if (N < 1) throw DomainError("N must be at least 1");
  count_ = static_cast<std::size_t>(ap_count(N, k));
  elems_.reserve(count_ * k);
  for (int b = 1; 1 + (k - 1) * b <= N; ++b) {
    for (int a = 1; a + (k - 1) * b <= N; ++a) {
      for (int j = 0; j < k; ++j) elems_.push_back(a + j * b);
    }
  }
  inc_off_.assign(N + 1, 0);
  for (int e : elems_) ++inc_off_[e];
  for (int i = 1; i <= N; ++i) inc_off_[i] += inc_off_[i - 1];
  inc_ids_.resize(elems_.size());
  std::vector<std::size_t> fill(inc_off_.begin(), inc_off_.end() - 1);
  for (std::size_t id = 0; id < count_; ++id) {
    for (int j = 0; j < k; ++j) {
      int e = elems_[id * k + j];
      inc_ids_[fill[e - 1]++] = static_cast<std::uint32_t>(id);
    }
  }
}

std::shared_ptr<const ProgressionIndex> build_index(int N, int k, Count max_progressions) {
  if (k < 3) throw DomainError("k must be at least 3");
  if (N < 1) throw DomainError("N must be at least 1");
  const Count n = ap_count(N, k);
  if (n > max_progressions || n > std::numeric_limits<std::uint32_t>::max()) {
    throw CapExceeded("index_cap=" + std::to_string(max_progressions),
                      "index for N=" + std::to_string(N) + " would hold " + std::to_string(n) +
                          " progressions");
  }
  return std::make_shared<const ProgressionIndex>(N, k);
}

std::vector<Count> intersection_profile(const ProgressionIndex& index, const ElementSet& U) {
  const int k = index.k();
  std::vector<Count> prof(k, 0);
  if (U.empty()) return prof;
  if (U.front() < 1 || U.back() > index.N()) throw DomainError("U not inside [N]");

  std::size_t touched = 0;
  for (int u : U) touched += index.degree(u);

  if (touched * 4 >= index.size()) {
    std::vector<std::uint8_t> hits(index.size(), 0);
    for (int u : U)
      for (auto id : index.incidence(u)) ++hits[id];
    for (auto h : hits)
      if (h) ++prof[h - 1];
    return prof;
  }
  std::vector<std::uint32_t> ids;
  ids.reserve(touched);
  for (int u : U)
    for (auto id : index.incidence(u)) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ids.size();) {
    std::size_t j = i;
    while (j < ids.size() && ids[j] == ids[i]) ++j;
    ++prof[j - i - 1];
    i = j;
  }
  return prof;
}

Count contained_count(const ProgressionIndex& index, const ElementSet& U) {
  return intersection_profile(index, U).back();
}

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0, 1]");
  if (p > 0.0 && p < 1e-15) throw DomainError("p below 1e-15 is not supported");
}

const ProgressionIndex& ModelParams::idx() const {
  if (!index) throw PreconditionError("operation needs a progression index (N too large?)");
  return *index;
}

ModelParams moments_from_counts(const OverlapCounts& c, double p) {
  check_probability(p);
  ModelParams mp;
  mp.N = c.N;
  mp.k = c.k;
  mp.p = p;
  mp.ap_total = c.ap_total;
  const int k = c.k;
  mp.mu = static_cast<double>(c.ap_total) * std::pow(p, k);
  double s2 = 0.0;
  for (int j = 1; j <= k; ++j) {
    // p^{2k-j} - p^{2k}, written to keep precision at small p
    s2 += c.pair_count(j) * std::pow(p, 2 * k - j) * (1.0 - std::pow(p, j));
  }
  mp.sigma2 = s2;
  mp.V = static_cast<double>(c.sum_deg_sq) * std::pow(p, 2 * k - 1);
  return mp;
}

ModelParams exact_moments(std::shared_ptr<const ProgressionIndex> index, double p,
                          const MomentOptions& opts) {
  if (!index) throw DomainError("null index");
  check_probability(p);
  OverlapCounts counts;
  if (opts.route == VarianceRoute::pair_scan) {
    if (index->N() > opts.pair_scan_cap) {
      throw CapExceeded("pair_scan_cap=" + std::to_string(opts.pair_scan_cap),
                        "exact variance by pair scan at N=" + std::to_string(index->N()));
    }
    counts = kernels::overlap_counts_pair_scan(*index);
  } else {
    counts = kernels::overlap_counts_omp(index->N(), index->k());
  }
  ModelParams mp = moments_from_counts(counts, p);
  mp.index = std::move(index);
  return mp;
}

double psi_from_profile(const std::vector<Count>& profile, double p) {
  const int k = static_cast<int>(profile.size());
  double total = 0.0;
  for (int r = 1; r <= k; ++r) {
    if (profile[r - 1] == 0) continue;
    total += static_cast<double>(profile[r - 1]) * std::pow(p, k - r) * (1.0 - std::pow(p, r));
  }
  return total;
}

double psi(const ModelParams& params, const ElementSet& U) {
  return psi_from_profile(intersection_profile(params.idx(), U), params.p);
}

std::vector<int> link_counts(const ProgressionIndex& index, const ElementSet& R) {
  std::vector<std::uint8_t> in(index.N() + 1, 0);
  for (int r : R) {
    if (r < 1 || r > index.N()) throw DomainError("R not inside [N]");
    in[r] = 1;
  }
  std::vector<int> L(index.N(), 0);
  for (int i = 1; i <= index.N(); ++i) {
    for (auto id : index.incidence(i)) {
      bool ok = true;
      for (int e : index.progression(id)) {
        if (e != i && !in[e]) {
          ok = false;
          break;
        }
      }
      L[i - 1] += ok;
    }
  }
  return L;
}

SubsetState::SubsetState(std::shared_ptr<const ProgressionIndex> index)
    : index_(std::move(index)), in_(index_ ? index_->N() + 1 : 0, 0) {}

SubsetState::SubsetState(std::shared_ptr<const ProgressionIndex> index, const ElementSet& members)
    : SubsetState(std::move(index)) {
  for (int i : members) insert(i);
}

int SubsetState::link(int i) const {
  int n = 0;
  for (auto id : index_->incidence(i)) {
    bool ok = true;
    for (int e : index_->progression(id)) {
      if (e != i && !in_[e]) {
        ok = false;
        break;
      }
    }
    n += ok;
  }
  return n;
}

void SubsetState::insert(int i) {
  if (i < 1 || i > index_->N()) throw DomainError("element outside [N]");
  if (in_[i]) return;
  ap_count_ += link(i);
  in_[i] = 1;
  ++size_;
}

void SubsetState::erase(int i) {
  if (i < 1 || i > index_->N()) throw DomainError("element outside [N]");
  if (!in_[i]) return;
  in_[i] = 0;
  ap_count_ -= link(i);
  --size_;
}

void SubsetState::clear() {
  std::fill(in_.begin(), in_.end(), 0);
  size_ = 0;
  ap_count_ = 0;
}

Count SubsetState::recount() const {
  Count n = 0;
  for (std::size_t id = 0; id < index_->size(); ++id) {
    bool ok = true;
    for (int e : index_->progression(id)) {
      if (!in_[e]) {
        ok = false;
        break;
      }
    }
    n += ok;
  }
  return n;
}

ElementSet SubsetState::members() const {
  ElementSet out;
  out.reserve(size_);
  for (int i = 1; i <= index_->N(); ++i)
    if (in_[i]) out.push_back(i);
  return out;
}

std::vector<int> link_counts(const SubsetState& R) {
  std::vector<int> L(R.index().N(), 0);
  for (int i = 1; i <= R.index().N(); ++i) L[i - 1] = R.link(i);
  return L;
}

}  // namespace aptail
