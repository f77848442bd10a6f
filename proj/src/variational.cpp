#include "aptail/variational.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aptail/error.hpp"
#include "aptail/kernels.hpp"
#include "subset_eval.hpp"

namespace aptail {

Count interval_ap_count(int k, int m) { return ap_count(m, k); }

std::optional<int> psi_star_bounded(int N, int k, double t) {
  if (t <= 0) return 0;
  if (t > static_cast<double>(ap_count(N, k))) return std::nullopt;
  int lo = 0, hi = N;  // ap_count(hi) >= t holds
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (static_cast<double>(ap_count(mid, k)) >= t) hi = mid;
    else lo = mid + 1;
  }
  return lo;
}

namespace {

ElementSet first_m(int m) {
  ElementSet s(m);
  for (int i = 0; i < m; ++i) s[i] = i + 1;
  return s;
}

// Depth-first search, lexicographic order, for a set of exactly m elements
// with A_k >= t. `bound` must upper-bound A_k of every completion.
class SizeSearch {
 public:
  SizeSearch(const ProgressionIndex& index, double t, bool interval_bound)
      : idx_(index), t_(t), interval_(interval_bound), in_(index.N() + 2, 0) {}

  bool run(int m, ElementSet& found) {
    m_ = m;
    cur_.clear();
    if (!feasible(0)) return false;
    if (dfs(1)) {
      found = cur_;
      return true;
    }
    return false;
  }

 private:
  // A_k of the final set is at most the number of progressions that fit in
  // cur + (last, N] and need no more than the remaining picks
  bool feasible(int last) {
    const int remaining = m_ - static_cast<int>(cur_.size());
    if (idx_.N() - last < remaining) return false;
    if (interval_) return static_cast<double>(ap_count(m_, idx_.k())) >= t_;
    Count bound = 0;
    for (std::size_t id = 0; id < idx_.size(); ++id) {
      int missing = 0;
      bool ok = true;
      for (int e : idx_.progression(id)) {
        if (in_[e]) continue;
        if (e <= last) {
          ok = false;
          break;
        }
        ++missing;
      }
      if (ok && missing <= remaining) ++bound;
    }
    return static_cast<double>(bound) >= t_;
  }

  bool dfs(int start) {
    if (static_cast<int>(cur_.size()) == m_) {
      return static_cast<double>(contained_count(idx_, cur_)) >= t_;
    }
    for (int v = start; v <= idx_.N(); ++v) {
      cur_.push_back(v);
      in_[v] = 1;
      if (feasible(v) && dfs(v + 1)) return true;
      in_[v] = 0;
      cur_.pop_back();
    }
    return false;
  }

  const ProgressionIndex& idx_;
  double t_;
  bool interval_;
  int m_ = 0;
  ElementSet cur_;
  std::vector<std::uint8_t> in_;
};

}  // namespace

SizeWitness psi_star(const ProgressionIndex& index, double t, PsiStarMode mode,
                     const PsiStarOptions& opts) {
  if (std::isnan(t) || t < 0) throw DomainError("t must be nonnegative");
  const int N = index.N(), k = index.k();
  const auto bounded = psi_star_bounded(N, k, t);
  if (!bounded) return {};
  if (mode == PsiStarMode::bounded) return {bounded, first_m(*bounded)};

  if (!opts.interval_bound && N > opts.exhaustive_cap) {
    throw CapExceeded("psi_star_exhaustive_cap=" + std::to_string(opts.exhaustive_cap),
                      "plain branch and bound at N=" + std::to_string(N));
  }
  // incumbent: the interval [1, bounded]; look for anything smaller
  SizeSearch search(index, t, opts.interval_bound);
  for (int m = 0; m < *bounded; ++m) {
    ElementSet found;
    if (search.run(m, found)) return {m, found};
  }
  return {bounded, first_m(*bounded)};
}

namespace {

template <class Visit>
bool for_each_combination(int n, int m, Visit&& visit) {
  std::vector<int> pos(m);
  for (int j = 0; j < m; ++j) pos[j] = j;
  while (true) {
    if (visit(pos)) return true;
    int q = m - 1;
    while (q >= 0 && pos[q] == n - m + q) --q;
    if (q < 0) return false;
    ++pos[q];
    for (int r = q + 1; r < m; ++r) pos[r] = pos[r - 1] + 1;
  }
}

}  // namespace

SizeWitness min_seed(const SeedQuery& q, const MinSeedOptions& opts) {
  if (!q.params) throw DomainError("min_seed needs params");
  const ModelParams& mp = *q.params;
  if (q.t <= 0) return {0, {}};
  const auto& idx = mp.idx();
  const int N = idx.N();
  ElementSet all = first_m(N);
  if (psi(mp, all) < q.t) return {};
  if (N > opts.exhaustive_cap) {
    throw CapExceeded("min_seed_cap=" + std::to_string(opts.exhaustive_cap),
                      "exhaustive seed search at N=" + std::to_string(N));
  }
  PsiEvaluator ev(mp);
  long long evals = 0;
  for (int m = 1; m <= N; ++m) {
    ElementSet hit;
    const bool found = for_each_combination(N, m, [&](const std::vector<int>& pos) {
      if (++evals > opts.max_evaluations) {
        throw CapExceeded("min_seed_evaluations=" + std::to_string(opts.max_evaluations),
                          "seed search budget spent");
      }
      std::uint64_t mask = 0;
      for (int x : pos) mask |= std::uint64_t{1} << x;
      if (ev(mask) >= q.t) {
        hit.clear();
        for (int x : pos) hit.push_back(x + 1);
        return true;
      }
      return false;
    });
    if (found) return {m, hit};
  }
  return {N, all};
}

ElementSet extract_core(const SetFunction& f, const ElementSet& U, const std::vector<double>& w) {
  if (w.size() < U.size()) throw DomainError("weight vector shorter than |U|");
  ElementSet cur = U;
  while (!cur.empty()) {
    const double fu = f(cur);
    const double thr = w[cur.size() - 1];
    bool removed = false;
    for (std::size_t pos = 0; pos < cur.size(); ++pos) {
      ElementSet less = cur;
      less.erase(less.begin() + pos);
      if (fu - f(less) < thr) {
        cur = std::move(less);
        removed = true;
        break;
      }
    }
    if (!removed) break;
  }
  return cur;
}

std::vector<std::vector<Count>> profile_derivatives(const ProgressionIndex& index,
                                                    const ElementSet& U) {
  const int k = index.k();
  const int n = static_cast<int>(U.size());
  std::vector<std::vector<Count>> d(k, std::vector<Count>(n, 0));
  if (n == 0) return d;
  std::vector<std::uint8_t> in(index.N() + 1, 0);
  for (int u : U) in[u] = 1;
  for (int pos = 0; pos < n; ++pos) {
    // cnt[h] = progressions through u meeting U in exactly h points
    std::vector<Count> cnt(k + 2, 0);
    for (auto id : index.incidence(U[pos])) {
      int h = 0;
      for (int e : index.progression(id)) h += in[e];
      ++cnt[h];
    }
    for (int r = 1; r <= k; ++r) d[r - 1][pos] = cnt[r] - cnt[r + 1];
  }
  return d;
}

std::vector<Count> max_sub_profile(const ProgressionIndex& index, const ElementSet& U) {
  const int k = index.k();
  const int n = static_cast<int>(U.size());
  if (n > kExactInnerMaxCap) {
    throw CapExceeded("inner_max_cap=" + std::to_string(kExactInnerMaxCap),
                      "exact max over subsets of a set of size " + std::to_string(n));
  }
  const auto masks = local_masks(index, U, 1);
  return max_profile_over_subsets(masks, n, k);
}

CoreCertificate is_core(const ModelParams& params, const ElementSet& U, double t, double epsilon,
                        double xi) {
  if (!(t > 0)) throw DomainError("is_core needs t > 0");
  if (!(epsilon >= 0 && epsilon < 1)) throw DomainError("epsilon must lie in [0, 1)");
  const auto& idx = params.idx();
  const int k = idx.k();
  CoreCertificate cert;
  cert.core = U;
  cert.xi = xi;
  cert.psi_star_needed = psi_star_bounded(idx.N(), k, (1 - epsilon) * t);
  const int m = static_cast<int>(U.size());
  cert.c1 = cert.psi_star_needed && m >= *cert.psi_star_needed;
  if (m == 0) return cert;  // (C2) has no witness on the empty set

  const auto d = profile_derivatives(idx, U);
  std::vector<Count> inner;
  if (m <= kExactInnerMaxCap) {
    inner = max_sub_profile(idx, U);
  } else {
    // a progression with |B cap K| = r-1 for some K inside U has |B cap U| >= r-1
    cert.approximate = true;
    const auto prof = intersection_profile(idx, U);
    inner.assign(k, 0);
    Count tail = 0;
    for (int r = k; r >= 1; --r) {
      tail += prof[r - 1];
      inner[r - 1] = tail;
    }
  }
  const double scale = std::pow(t / (static_cast<double>(m) * m), 1.0 / (k - 2));
  for (int r = 3; r <= k; ++r) {
    const double rhs =
        xi / m * std::max(t, scale * static_cast<double>(inner[r - 2]));
    const Count lo = *std::min_element(d[r - 1].begin(), d[r - 1].end());
    cert.min_derivative.push_back(static_cast<double>(lo));
    cert.required.push_back(rhs);
    if (!cert.c2 && static_cast<double>(lo) >= rhs) {
      cert.c2 = true;
      cert.r = r;
    }
  }
  cert.satisfied = cert.c1 && cert.c2;
  return cert;
}

double beta(double x) {
  if (!(x > 0 && x <= 1)) throw DomainError("beta needs x in (0, 1]");
  const double d = 2.0 - std::log(x);
  return 1.0 / (d * d);
}

double density_threshold(int k, int r, double x, double t, double eta) {
  return (1 - eta) * std::pow(x * x / (eta * t), static_cast<double>(k - r) / (k - 2));
}

SeedCoreResult seed_to_core(const ModelParams& params, const ElementSet& U, double t,
                            double epsilon, double eta) {
  if (!(t > 0)) throw DomainError("seed_to_core needs t > 0");
  if (!(eta > 0 && eta < 1)) throw DomainError("eta must lie in (0, 1)");
  const auto& idx = params.idx();
  const int k = idx.k();
  const int n = static_cast<int>(U.size());
  if (n > kSeedToCoreCap) {
    throw CapExceeded("seed_to_core_cap=" + std::to_string(kSeedToCoreCap),
                      "dense subset search over a set of size " + std::to_string(n));
  }
  if (psi(params, U) < t) throw PreconditionError("U is not a t-seed");

  // smallest (then lexicographically least) r-dense subset, r >= 3
  const auto masks = local_masks(idx, U, 3);
  SeedCoreResult res;
  for (int s = 1; s <= n && res.dense_r == 0; ++s) {
    std::vector<double> need(k + 1, 0.0);
    for (int r = 3; r <= k; ++r) need[r] = density_threshold(k, r, s, t, eta) * t;
    for_each_combination(n, s, [&](const std::vector<int>& pos) {
      std::uint32_t sub = 0;
      for (int x : pos) sub |= 1u << x;
      std::vector<Count> prof(k + 1, 0);
      for (auto bm : masks) ++prof[__builtin_popcount(bm & sub)];
      for (int r = 3; r <= k; ++r) {
        if (static_cast<double>(prof[r]) >= need[r]) {
          res.dense_r = r;
          for (int x : pos) res.dense_subset.push_back(U[x]);
          return true;
        }
      }
      return false;
    });
  }
  if (res.dense_r == 0) throw PreconditionError("no dense subset");

  const int r = res.dense_r;
  const ElementSet& D = res.dense_subset;
  auto f = [&](const ElementSet& S) {
    return static_cast<double>(intersection_profile(idx, S)[r - 1]);
  };
  const double fD = f(D);
  const int nd = static_cast<int>(D.size());
  std::vector<double> w(nd);
  for (int l = 1; l <= nd; ++l) w[l - 1] = eta * fD * beta(static_cast<double>(l) / nd) / l;
  const ElementSet core = extract_core(f, D, w);
  if (core.empty()) {
    res.certificate.core = core;
    return res;
  }
  res.xi = eta * eta * (1 - eta) * (1 - eta) * beta(static_cast<double>(core.size()) / n);
  res.certificate = is_core(params, core, t, epsilon, res.xi);
  return res;
}

bool loc_assumptions(const ModelParams& params, int m, double t, double C) {
  if (m == 0) return t >= 0;
  if (!(t > 0)) return false;
  const double N = params.N, p = params.p;
  const int k = params.k;
  if (t < C * m * std::max(1.0, N * std::pow(p, k - 1))) return false;
  if (p == 0) return true;
  const double log_rhs = std::log(C) + 2 * std::log(m) + (k - 2) * std::log(p) +
                         (k - 2) * std::pow(m / t, 1.0 / (k - 1)) * std::log(N);
  return std::log(t) >= log_rhs;
}

int max_small_size(const ModelParams& params, double u, double C) {
  int best = 0;
  // both constraints only tighten as m grows
  for (int m = 1; m <= params.N; ++m) {
    if (!loc_assumptions(params, m, u, C)) break;
    best = m;
  }
  return best;
}

bool in_small_seed_family(const ModelParams& params, const ElementSet& U, double t, double C) {
  return psi(params, U) >= t && loc_assumptions(params, static_cast<int>(U.size()), t, C);
}

bool contains_seed_of_size(const ModelParams& params, const ElementSet& R, double u, int max_size,
                           const SmallSeedOptions& opts) {
  if (u <= 0) return true;  // the empty set already qualifies
  const int n = static_cast<int>(R.size());
  const int m = std::min(max_size, n);
  if (m <= 0) return false;
  PsiEvaluator ev(params);
  std::uint64_t rmask = 0;
  for (int e : R) rmask |= std::uint64_t{1} << (e - 1);
  // psi is monotone: nothing inside R beats R itself
  if (ev(rmask) < u) return false;
  if (m == n) return true;
  if (m > opts.size_cap && n > opts.set_cap) {
    throw CapExceeded("small_seed_size_cap=" + std::to_string(opts.size_cap),
                      "seed search of size " + std::to_string(m) + " in a set of size " +
                          std::to_string(n));
  }
  // any seed of size < m extends to one of size m, so only size m is scanned
  return for_each_combination(n, m, [&](const std::vector<int>& pos) {
    std::uint64_t mask = 0;
    for (int x : pos) mask |= std::uint64_t{1} << (R[x] - 1);
    return ev(mask) >= u;
  });
}

bool contains_small_seed(const ModelParams& params, const ElementSet& R, double u, double C,
                         const SmallSeedOptions& opts) {
  if (u <= 0) return true;
  return contains_seed_of_size(params, R, u, max_small_size(params, u, C), opts);
}

}  // namespace aptail
