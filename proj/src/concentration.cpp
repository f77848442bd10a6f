#include "aptail/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "aptail/error.hpp"
#include "aptail/kernels.hpp"

namespace aptail {

namespace {

// links of the subset in mask m, from progression masks
void links_of_mask(const std::vector<std::uint64_t>& masks, std::uint64_t m, std::vector<int>& L) {
  std::fill(L.begin(), L.end(), 0);
  for (auto b : masks) {
    const std::uint64_t miss = b & ~m;
    if (miss == 0) {
      for (std::uint64_t r = b; r; r &= r - 1) ++L[__builtin_ctzll(r)];
    } else if ((miss & (miss - 1)) == 0) {
      ++L[__builtin_ctzll(miss)];
    }
  }
}

struct Thresholds {
  double sum_sq, medium, count, max;
};

Thresholds thresholds(const ModelParams& params, double t, double eps) {
  if (!(t > 0)) throw DomainError("link statistics need t > 0");
  if (!(eps > 0)) throw DomainError("link statistics need epsilon > 0");
  if (!(params.p > 0 && params.p < 1)) throw DomainError("link statistics need p in (0, 1)");
  if (!(params.sigma2 > 0)) throw DomainError("link statistics need sigma^2 > 0");
  const double lambda = t / params.sigma2;
  return {(1 + eps / 10) * params.sigma2 / params.p, eps / lambda,
          eps * lambda * lambda * params.sigma2 / (20 * std::sqrt(params.p)),
          std::log(1 / params.p) / (2 * lambda)};
}

LinkStats stats_from(const Thresholds& th, const std::vector<int>& L) {
  LinkStats s;
  s.thr_sum_sq = th.sum_sq;
  s.thr_medium = th.medium;
  s.thr_count = th.count;
  s.thr_max = th.max;
  for (int l : L) {
    s.sum_sq += static_cast<double>(l) * l;
    s.medium_count += l > th.medium;
    s.max_link = std::max(s.max_link, l);
  }
  s.max_exceeds = s.max_link > th.max;
  s.event1 = s.sum_sq > th.sum_sq;
  s.event2 = static_cast<double>(s.medium_count) >= th.count;
  s.event3 = s.max_exceeds;
  return s;
}

}  // namespace

LinkStats link_statistics_from_links(const ModelParams& params, const std::vector<int>& links,
                                     double t, double epsilon) {
  if (static_cast<int>(links.size()) != params.N) throw DomainError("need one link per element");
  return stats_from(thresholds(params, t, epsilon), links);
}

LinkStats link_statistics(const ModelParams& params, const ElementSet& R, double t,
                          double epsilon) {
  return link_statistics_from_links(params, link_counts(params.idx(), R), t, epsilon);
}

const char* provenance_name(Provenance p) {
  return p == Provenance::exact ? "exact" : "monte_carlo";
}

FreedmanInputs make_freedman_inputs(const ModelParams& params, double t, double epsilon,
                                    std::array<double, 3> P, Provenance prov,
                                    std::array<double, 3> stderrs) {
  FreedmanInputs in;
  in.params = params;
  in.t = t;
  in.epsilon = epsilon;
  in.P = P;
  in.stderrs = stderrs;
  in.provenance = prov;
  in.lambda = t / params.sigma2;
  return in;
}

FreedmanReport freedman_bound(const FreedmanInputs& in) {
  const double s2 = in.params.sigma2;
  if (!(s2 > 0)) throw DomainError("freedman bound needs sigma^2 > 0");
  if (!(in.epsilon > 0 && in.epsilon <= in.epsilon0))
    throw DomainError("epsilon must lie in (0, epsilon0]");
  if (!(in.t >= in.epsilon * std::sqrt(s2))) throw PreconditionError("need t >= epsilon sigma");
  const double lam = in.t / s2;
  if (std::abs(lam - in.lambda) > 1e-12 * std::max(1.0, std::abs(lam)))
    throw PreconditionError("stored lambda does not match t / sigma^2");
  for (int j = 0; j < 3; ++j) {
    if (!(in.P[j] >= 0 && in.P[j] <= 1)) throw DomainError("event probabilities must be in [0, 1]");
    if (!(in.stderrs[j] >= 0)) throw DomainError("stderr must be >= 0");
  }
  FreedmanReport r;
  r.provenance = in.provenance;
  const double eps = in.epsilon;
  const double c = 8.0 * in.params.N / (eps * eps * eps);
  r.gaussian_term = std::exp(-(1 - eps) * in.t * in.t / (2 * s2));
  r.terms = {c * in.P[0], c * in.P[1], in.P[2]};
  r.raw = r.gaussian_term + r.terms[0] + r.terms[1] + r.terms[2];
  r.total = std::clamp(r.raw, 0.0, 1.0);
  if (in.provenance == Provenance::monte_carlo) {
    std::array<double, 3> q;
    for (int j = 0; j < 3; ++j) q[j] = std::min(1.0, in.P[j] + 3 * in.stderrs[j]);
    r.conservative_raw = r.gaussian_term + c * q[0] + c * q[1] + q[2];
  } else {
    r.conservative_raw = r.raw;
  }
  r.conservative = std::clamp(r.conservative_raw, 0.0, 1.0);
  r.warnings.push_back("bound assumes epsilon sufficiently small; epsilon0 = " +
                       std::to_string(in.epsilon0) + " is a convention");
  return r;
}

std::array<double, 3> freedman_probs_exact(const ModelParams& params, double t, double epsilon) {
  if (params.N > kExactMeasureCap)
    throw CapExceeded("exact_measure_N=" + std::to_string(kExactMeasureCap),
                      "2^" + std::to_string(params.N) + " subsets");
  const auto th = thresholds(params, t, epsilon);
  const auto masks = kernels::progression_masks(params.idx());
  const int N = params.N;
  const double p = params.p;
  std::array<double, 3> P{};
  std::vector<int> L(N);
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << N); ++m) {
    links_of_mask(masks, m, L);
    const auto s = stats_from(th, L);
    const int sz = __builtin_popcountll(m);
    const double w = std::pow(p, sz) * std::pow(1 - p, N - sz);
    if (s.event1) P[0] += w;
    if (s.event2) P[1] += w;
    if (s.event3) P[2] += w;
  }
  return P;
}

FreedmanProbsMc freedman_probs_mc(const ModelParams& params, double t, double epsilon,
                                  std::uint64_t n, std::uint64_t seed) {
  if (n < 1) throw DomainError("need n >= 1 samples");
  const auto th = thresholds(params, t, epsilon);
  const auto nb = static_cast<long>(block_count(n));
  std::vector<std::array<MergeState, 3>> parts(nb);
#pragma omp parallel for schedule(dynamic)
  for (long b = 0; b < nb; ++b) {
    Rng rng(seed, static_cast<std::uint64_t>(b));
    const std::uint64_t len = std::min<std::uint64_t>(kMcBlock, n - b * kMcBlock);
    for (std::uint64_t r = 0; r < len; ++r) {
      const auto st = sample_subset(params, rng);
      const auto s = stats_from(th, link_counts(st));
      parts[b][0].add(s.event1);
      parts[b][1].add(s.event2);
      parts[b][2].add(s.event3);
    }
  }
  FreedmanProbsMc out;
  for (int j = 0; j < 3; ++j) {
    MergeState tot;
    for (const auto& pb : parts) tot.merge(pb[j]);
    out.est[j] = finish(tot, seed);
  }
  return out;
}

JansonFamily make_janson_family(int universe_size, std::vector<std::vector<int>> sets, int s) {
  if (universe_size < 0) throw DomainError("universe size must be >= 0");
  if (s < 0 || s > universe_size) throw DomainError("need 0 <= s <= universe size");
  for (auto& B : sets) {
    std::sort(B.begin(), B.end());
    B.erase(std::unique(B.begin(), B.end()), B.end());
    for (int e : B)
      if (e < 0 || e >= universe_size) throw DomainError("set element outside the universe");
  }
  JansonFamily f;
  f.universe_size = universe_size;
  f.s = s;
  const double x = universe_size == 0 ? 1.0 : static_cast<double>(s) / universe_size;
  for (const auto& B : sets) f.mu += std::pow(x, static_cast<double>(B.size()));
  for (std::size_t a = 0; a < sets.size(); ++a) {
    for (std::size_t b = 0; b < sets.size(); ++b) {
      if (a == b) continue;
      std::vector<int> uni, meet;
      std::set_intersection(sets[a].begin(), sets[a].end(), sets[b].begin(), sets[b].end(),
                            std::back_inserter(meet));
      if (meet.empty()) continue;
      std::set_union(sets[a].begin(), sets[a].end(), sets[b].begin(), sets[b].end(),
                     std::back_inserter(uni));
      f.Delta += std::pow(x, static_cast<double>(uni.size()));
    }
  }
  f.sets = std::move(sets);
  return f;
}

double janson_bound(const JansonFamily& fam, double epsilon) {
  if (!(epsilon > 0 && epsilon <= 1)) throw DomainError("janson needs epsilon in (0, 1]");
  if (fam.mu == 0) return 2.0;
  return 2 * std::exp(-(epsilon * epsilon / 2) * fam.mu * fam.mu / (fam.mu + fam.Delta));
}

namespace {

std::vector<std::uint64_t> set_masks(const JansonFamily& fam) {
  if (fam.universe_size > 63) throw CapExceeded("universe=63", "hypergeometric universe too big");
  std::vector<std::uint64_t> out;
  for (const auto& B : fam.sets) {
    std::uint64_t m = 0;
    for (int e : B) m |= std::uint64_t{1} << e;
    out.push_back(m);
  }
  return out;
}

int count_inside(const std::vector<std::uint64_t>& masks, std::uint64_t S) {
  int z = 0;
  for (auto b : masks) z += (S & b) == b;
  return z;
}

}  // namespace

double hypergeom_event_exact(const JansonFamily& fam, double threshold) {
  const auto masks = set_masks(fam);
  const int n = fam.universe_size, s = fam.s;
  double total = 1.0;
  for (int j = 0; j < s; ++j) total = total * (n - j) / (j + 1);
  if (total > kHypergeomCap)
    throw CapExceeded("hypergeom_draws=1e7", "C(" + std::to_string(n) + ", " +
                                                 std::to_string(s) + ") draws");
  std::uint64_t hit = 0, all = 0;
  if (s == 0) {
    all = 1;
    hit = count_inside(masks, 0) <= threshold;
  } else {
    // Gosper's hack over s-bit masks below 2^n
    std::uint64_t S = (std::uint64_t{1} << s) - 1;
    const std::uint64_t limit = std::uint64_t{1} << n;
    while (S < limit) {
      ++all;
      hit += count_inside(masks, S) <= threshold;
      const std::uint64_t c = S & (0 - S);
      const std::uint64_t r = S + c;
      S = (((r ^ S) >> 2) / c) | r;
    }
  }
  return static_cast<double>(hit) / static_cast<double>(all);
}

Estimate hypergeom_event_mc(const JansonFamily& fam, double threshold, std::uint64_t n,
                            std::uint64_t seed) {
  if (n < 1) throw DomainError("need n >= 1 samples");
  const auto masks = set_masks(fam);
  const int t = fam.universe_size;
  MergeState st;
  Rng rng(seed);
  std::vector<int> perm(t);
  for (std::uint64_t r = 0; r < n; ++r) {
    // partial Fisher-Yates for the first s slots
    for (int i = 0; i < t; ++i) perm[i] = i;
    std::uint64_t S = 0;
    for (int i = 0; i < fam.s; ++i) {
      const int j = i + static_cast<int>(rng.below(t - i));
      std::swap(perm[i], perm[j]);
      S |= std::uint64_t{1} << perm[i];
    }
    st.add(count_inside(masks, S) <= threshold ? 1.0 : 0.0);
  }
  return finish(st, seed);
}

std::vector<std::vector<int>> greedy_disjoint(const std::vector<std::vector<int>>& sets) {
  std::set<int> used;
  std::vector<std::vector<int>> out;
  for (const auto& B : sets) {
    bool clash = false;
    for (int e : B) clash = clash || used.count(e);
    if (clash) continue;
    used.insert(B.begin(), B.end());
    out.push_back(B);
  }
  return out;
}

std::vector<std::vector<int>> link_sets(const ProgressionIndex& index, int i) {
  if (i < 1 || i > index.N()) throw DomainError("element outside [N]");
  std::vector<std::vector<int>> out;
  for (auto id : index.incidence(i)) {
    std::vector<int> B;
    for (int e : index.progression(id))
      if (e != i) B.push_back(e);
    out.push_back(std::move(B));
  }
  return out;
}

namespace {

double sum_squares(const std::vector<int>& L) {
  double v = 0.0;
  for (int l : L) v += static_cast<double>(l) * l;
  return v;
}

// E[V] and E[V^ell] walking masks in numeric order
std::pair<double, double> v_moments_by_mask(const ModelParams& params, int ell) {
  const auto masks = kernels::progression_masks(params.idx());
  const int N = params.N;
  std::vector<int> L(N);
  double m1 = 0.0, ml = 0.0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << N); ++m) {
    links_of_mask(masks, m, L);
    const double v = sum_squares(L);
    const int sz = __builtin_popcountll(m);
    const double w = std::pow(params.p, sz) * std::pow(1 - params.p, N - sz);
    m1 += w * v;
    ml += w * std::pow(v, ell);
  }
  return {m1, ml};
}

// Same in Gray-code order, updating links one flipped element at a time
// through per-progression missing counts.
std::pair<double, double> v_moments_gray(const ModelParams& params, int ell) {
  const auto& idx = params.idx();
  const int N = params.N;
  const std::size_t n = idx.size();
  std::vector<std::uint8_t> in(N + 1, 0);
  std::vector<int> missing(n, idx.k());
  std::vector<int> L(N, 0);
  // contribution of B to L_i: B \ {i} inside R
  auto contrib = [&](std::size_t id, int i) { return missing[id] - (in[i] ? 0 : 1) == 0; };
  for (std::size_t id = 0; id < n; ++id)
    for (int i : idx.progression(id)) L[i - 1] += contrib(id, i);

  std::vector<double> wsize(N + 1);
  for (int s = 0; s <= N; ++s) wsize[s] = std::pow(params.p, s) * std::pow(1 - params.p, N - s);
  int size = 0;
  double m1 = 0.0, ml = 0.0;
  auto visit = [&] {
    const double v = sum_squares(L);
    m1 += wsize[size] * v;
    ml += wsize[size] * std::pow(v, ell);
  };
  visit();
  for (std::uint64_t g = 1; g < (std::uint64_t{1} << N); ++g) {
    const int j = __builtin_ctzll(g) + 1;
    for (auto id : idx.incidence(j))
      for (int i : idx.progression(id)) L[i - 1] -= contrib(id, i);
    const bool add = !in[j];
    in[j] = add;
    size += add ? 1 : -1;
    for (auto id : idx.incidence(j)) {
      missing[id] += add ? -1 : 1;
      for (int i : idx.progression(id)) L[i - 1] += contrib(id, i);
    }
    visit();
  }
  return {m1, ml};
}

}  // namespace

VMomentReport v_moment_check(const ModelParams& params, int ell, double beta, EnumOrder order) {
  if (params.N > kVMomentCap)
    throw CapExceeded("v_moment_N=" + std::to_string(kVMomentCap),
                      "2^" + std::to_string(params.N) + " subsets");
  if (ell < 0 || ell > 4) throw CapExceeded("v_moment_ell=4", "moment order too high");
  if (!(beta > 0)) throw DomainError("beta must be > 0");
  check_probability(params.p);
  const auto [m1, ml] =
      order == EnumOrder::by_mask ? v_moments_by_mask(params, ell) : v_moments_gray(params, ell);
  VMomentReport r;
  r.ell = ell;
  r.beta = beta;
  r.moment = ml;
  r.mean_power = std::pow(m1, ell);
  r.ratio = r.mean_power == 0 ? (r.moment == 0 ? 1.0 : std::numeric_limits<double>::infinity())
                              : r.moment / r.mean_power;
  r.holds = r.moment <= std::pow(1 + beta, ell) * r.mean_power * (1 + 1e-12);
  return r;
}

}  // namespace aptail
