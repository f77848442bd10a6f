#include "aptail/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "aptail/error.hpp"
#include "aptail/kernels.hpp"
#include "aptail/rates.hpp"

namespace aptail {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

// seed sequence for mt19937_64: splitmix64 keyed by (seed, stream)
struct SplitMixSeq {
  std::uint64_t state;
  using result_type = std::uint32_t;

  template <class It>
  void generate(It begin, It end) {
    for (It it = begin; it != end; ++it) *it = static_cast<std::uint32_t>(splitmix64(state) >> 32);
  }
};

SplitMixSeq make_seq(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  const std::uint64_t a = splitmix64(s);
  std::uint64_t t = stream ^ 0x6A09E667F3BCC909ULL;
  const std::uint64_t b = splitmix64(t);
  return {a ^ (b * 0xD1B54A32D192ED03ULL)};
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  auto seq = make_seq(seed, stream);
  eng_.seed(seq);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Lemire's multiply-shift with rejection
  unsigned __int128 m = static_cast<unsigned __int128>(eng_()) * n;
  auto lo = static_cast<std::uint64_t>(m);
  if (lo < n) {
    const std::uint64_t floor = (0 - n) % n;
    while (lo < floor) {
      m = static_cast<unsigned __int128>(eng_()) * n;
      lo = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

Estimate finish(const MergeState& s, std::uint64_t seed) {
  Estimate e;
  e.state = s;
  e.seed = seed;
  e.n_samples = s.count;
  if (s.count == 0) return e;
  const double n = static_cast<double>(s.count);
  e.value = s.sum / n;
  if (s.count > 1) {
    const double var = std::max(0.0, (s.sumsq - n * e.value * e.value) / (n - 1));
    e.std_error = std::sqrt(var / n);
  }
  return e;
}

Estimate merge(const Estimate& a, const Estimate& b) {
  MergeState s = a.state;
  s.merge(b.state);
  return finish(s, a.seed);
}

std::uint64_t block_count(std::uint64_t n) { return (n + kMcBlock - 1) / kMcBlock; }

namespace {

void need_index(const ModelParams& params, const char* what) {
  if (!params.has_index()) throw PreconditionError(std::string(what) + " needs a progression index");
}

// Draws one subset and returns its A_k. Masks when N <= 64, otherwise an
// incremental SubsetState. Not shared between threads.
class Sampler {
 public:
  explicit Sampler(const ModelParams& params) : N_(params.N), p_(params.p) {
    need_index(params, "sampling");
    if (N_ <= 64) {
      masks_ = kernels::progression_masks(params.idx());
    } else {
      state_.emplace_back(params.index);
    }
  }

  // probs null means p everywhere; lr non-null accumulates log dP/dQ into logw
  Count draw(Rng& rng, const double* probs, const LogRatios* lr, double& logw) {
    logw = 0.0;
    if (N_ <= 64) {
      std::uint64_t m = 0;
      for (int i = 0; i < N_; ++i) {
        const bool y = rng.bernoulli(probs ? probs[i] : p_);
        if (y) m |= std::uint64_t{1} << i;
        if (lr) logw += y ? lr->in[i] : lr->out[i];
      }
      Count x = 0;
      for (auto b : masks_) x += (m & b) == b;
      return x;
    }
    auto& st = state_.front();
    st.clear();
    for (int i = 1; i <= N_; ++i) {
      const bool y = rng.bernoulli(probs ? probs[i - 1] : p_);
      if (y) st.insert(i);
      if (lr) logw += y ? lr->in[i - 1] : lr->out[i - 1];
    }
    return st.ap_count();
  }

 private:
  int N_;
  double p_;
  std::vector<std::uint64_t> masks_;
  std::vector<SubsetState> state_;
};

std::uint64_t block_size(std::uint64_t n, std::uint64_t b) {
  const std::uint64_t start = b * kMcBlock;
  return std::min(kMcBlock, n - start);
}

// Per-block states filled in parallel, merged serially in block order so
// the result does not depend on the thread count.
template <class Body>
MergeState run_blocks(const ModelParams& params, std::uint64_t n, std::uint64_t seed,
                      std::uint64_t b0, std::uint64_t b1, Body body) {
  if (n < 1) throw DomainError("need n >= 1 samples");
  if (b0 > b1 || b1 > block_count(n)) throw DomainError("block range out of bounds");
  const auto nb = static_cast<long>(b1 - b0);
  std::vector<MergeState> parts(nb);
#pragma omp parallel
  {
    Sampler sampler(params);
#pragma omp for schedule(dynamic)
    for (long j = 0; j < nb; ++j) {
      const std::uint64_t b = b0 + static_cast<std::uint64_t>(j);
      Rng rng(seed, b);
      MergeState s;
      for (std::uint64_t r = 0; r < block_size(n, b); ++r) s.add(body(sampler, rng));
      parts[j] = s;
    }
  }
  MergeState total;
  for (const auto& s : parts) total.merge(s);
  return total;
}

}  // namespace

SubsetState sample_subset(const ModelParams& params, Rng& rng) {
  need_index(params, "sample_subset");
  check_probability(params.p);
  SubsetState st(params.index);
  for (int i = 1; i <= params.N; ++i)
    if (rng.bernoulli(params.p)) st.insert(i);
  return st;
}

double exact_tail(const ModelParams& params, double threshold) {
  need_index(params, "exact_tail");
  check_probability(params.p);
  if (threshold <= 0) return 1.0;
  const auto census = kernels::subset_census_omp(params.idx());
  const int N = params.N;
  const double p = params.p;
  // Neumaier summation
  double sum = 0.0, comp = 0.0;
  for (int s = 0; s <= N; ++s) {
    const double w = std::pow(p, s) * std::pow(1 - p, N - s);
    if (w == 0) continue;
    for (Count x = 0; x <= census.ap_total; ++x) {
      if (static_cast<double>(x) < threshold) continue;
      const double term = w * static_cast<double>(census.at(s, x));
      const double t = sum + term;
      if (std::abs(sum) >= std::abs(term)) comp += (sum - t) + term;
      else comp += (term - t) + sum;
      sum = t;
    }
  }
  return sum + comp;
}

MergeState mc_tail_blocks(const ModelParams& params, double threshold, std::uint64_t n,
                          std::uint64_t seed, std::uint64_t b0, std::uint64_t b1) {
  check_probability(params.p);
  return run_blocks(params, n, seed, b0, b1, [&](Sampler& s, Rng& rng) {
    double lw;
    return static_cast<double>(s.draw(rng, nullptr, nullptr, lw)) >= threshold ? 1.0 : 0.0;
  });
}

Estimate mc_tail(const ModelParams& params, double threshold, std::uint64_t n,
                 std::uint64_t seed) {
  return finish(mc_tail_blocks(params, threshold, n, seed, 0, block_count(n)), seed);
}

TiltSpec product_tilt(std::vector<double> probs, double p) {
  TiltSpec t;
  t.kind = TiltKind::product;
  t.p_bounded = true;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0 && probs[i] <= 1))
      throw DomainError("tilted probability out of [0, 1] at i=" + std::to_string(i + 1));
    if (probs[i] < p || probs[i] > 2 * p) t.p_bounded = false;
  }
  t.probs = std::move(probs);
  return t;
}

TiltSpec sprinkle_tilt(Count u) {
  if (u < 0) throw DomainError("sprinkle needs u >= 0");
  TiltSpec t;
  t.kind = TiltKind::sprinkle;
  t.u = u;
  return t;
}

TiltSpec gaussian_tilt(const ModelParams& params, double t, double epsilon) {
  need_index(params, "gaussian_tilt");
  check_probability(params.p);
  if (!(t >= 0)) throw DomainError("gaussian_tilt needs t >= 0");
  if (!(epsilon >= 0)) throw DomainError("gaussian_tilt needs epsilon >= 0");
  const double p = params.p;
  std::vector<double> probs(params.N, p);
  if (t > 0) {
    if (!(params.V > 0)) throw DomainError("gaussian_tilt needs V > 0");
    const double scale = (1 + epsilon) * t * std::pow(p, params.k) / params.V;
    for (int i = 1; i <= params.N; ++i) {
      const double q = scale * params.idx().degree(i);
      if (p + q > 1)
        throw DomainError("tilted probability exceeds 1 at i=" + std::to_string(i));
      probs[i - 1] = p + q;
    }
  }
  return product_tilt(std::move(probs), p);
}

LogRatios product_log_ratios(const TiltSpec& tilt, double p) {
  if (tilt.kind != TiltKind::product) throw DomainError("need a product tilt");
  check_probability(p);
  LogRatios lr;
  const std::size_t n = tilt.probs.size();
  lr.in.assign(n, 0.0);
  lr.out.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = tilt.probs[i];
    if ((q == 0 && p > 0) || (q == 1 && p < 1))
      throw DomainError("degenerate likelihood ratio at i=" + std::to_string(i + 1));
    // a side Q never visits keeps ratio 0
    if (q > 0) lr.in[i] = p == q ? 0.0 : std::log(p) - std::log(q);
    if (q < 1) lr.out[i] = p == q ? 0.0 : std::log1p(-p) - std::log1p(-q);
  }
  return lr;
}

namespace {

void check_tilt_size(const ModelParams& params, const TiltSpec& tilt) {
  if (tilt.kind == TiltKind::product && static_cast<int>(tilt.probs.size()) != params.N)
    throw DomainError("tilt has " + std::to_string(tilt.probs.size()) + " entries, need N");
}

}  // namespace

MergeState is_tail_product_blocks(const ModelParams& params, const TiltSpec& tilt,
                                  double threshold, std::uint64_t n, std::uint64_t seed,
                                  std::uint64_t b0, std::uint64_t b1) {
  check_tilt_size(params, tilt);
  const auto lr = product_log_ratios(tilt, params.p);
  const double* probs = tilt.probs.data();
  return run_blocks(params, n, seed, b0, b1, [&](Sampler& s, Rng& rng) {
    double lw;
    const Count x = s.draw(rng, probs, &lr, lw);
    return static_cast<double>(x) >= threshold ? std::exp(lw) : 0.0;
  });
}

Estimate is_tail_product(const ModelParams& params, const TiltSpec& tilt, double threshold,
                         std::uint64_t n, std::uint64_t seed) {
  return finish(is_tail_product_blocks(params, tilt, threshold, n, seed, 0, block_count(n)),
                seed);
}

double product_kl(const TiltSpec& tilt, double p) {
  if (tilt.kind != TiltKind::product) throw DomainError("need a product tilt");
  double acc = 0.0;
  for (double q : tilt.probs) acc += bernoulli_kl(q, p);
  return acc;
}

SubsetState sprinkle_sample(const ModelParams& params, Count u, Rng& rng) {
  if (u < 0) throw DomainError("sprinkle needs u >= 0");
  if (u > params.ap_total) throw DomainError("sprinkle u exceeds the number of progressions");
  SubsetState st = sample_subset(params, rng);
  const auto n = static_cast<std::uint64_t>(params.ap_total);
  // Floyd: a uniform u-subset of ids, order irrelevant for the union
  std::unordered_set<std::uint64_t> chosen;
  for (std::uint64_t j = n - static_cast<std::uint64_t>(u); j < n; ++j) {
    const std::uint64_t r = rng.below(j + 1);
    chosen.insert(chosen.count(r) ? j : r);
  }
  for (auto id : chosen)
    for (int e : params.idx().progression(id))
      if (!st.contains(e)) st.insert(e);
  return st;
}

namespace {

// C(n, u) as a double
double choose(Count n, Count u) {
  double c = 1.0;
  for (Count j = 0; j < u; ++j) c = c * static_cast<double>(n - j) / static_cast<double>(j + 1);
  return c;
}

double falling(Count a, Count u) {
  double f = 1.0;
  for (Count j = 0; j < u; ++j) f *= static_cast<double>(a - j);
  return f;
}

std::vector<std::uint32_t> contained_ids(const ProgressionIndex& idx, const ElementSet& R) {
  std::vector<std::uint8_t> in(idx.N() + 1, 0);
  for (int e : R) in[e] = 1;
  std::vector<std::uint32_t> ids;
  for (int i : R) {
    for (auto id : idx.incidence(i)) {
      if (idx.first(id) != i) continue;
      bool all = true;
      for (int e : idx.progression(id)) all = all && in[e];
      if (all) ids.push_back(id);
    }
  }
  return ids;
}

void check_tuple_cap(Count a, Count u) {
  if (falling(a, u) > kSprinkleTupleCap)
    throw CapExceeded("sprinkle_tuples=(14)_7", "(" + std::to_string(a) + ")_" +
                                                    std::to_string(u) + " tuples to sum");
}

// Sum of weight(|A_1 cup ... cup A_u|) over u-sets of the given ids, by a
// depth-first walk keeping per-element multiplicities.
template <class F>
double sum_over_usets(const ProgressionIndex& idx, const std::vector<std::uint32_t>& ids,
                      Count u, F weight) {
  std::vector<int> mult(idx.N() + 1, 0);
  int usize = 0;
  double acc = 0.0;
  const auto n = static_cast<Count>(ids.size());
  auto rec = [&](auto&& self, Count pos, Count start) -> void {
    if (pos == u) {
      acc += weight(usize);
      return;
    }
    for (Count j = start; j <= n - (u - pos); ++j) {
      for (int e : idx.progression(ids[j])) usize += mult[e]++ == 0;
      self(self, pos + 1, j + 1);
      for (int e : idx.progression(ids[j])) usize -= --mult[e] == 0;
    }
  };
  rec(rec, 0, 0);
  return acc;
}

}  // namespace

SprinkleRatio sprinkle_ratio(const ModelParams& params, Count u, const ElementSet& R) {
  need_index(params, "sprinkle_ratio");
  if (!(params.p > 0 && params.p <= 1)) throw DomainError("sprinkle_ratio needs p in (0, 1]");
  if (u < 0 || u > params.ap_total) throw DomainError("sprinkle u out of range");
  if (u == 0) return {1.0, 1.0};
  const auto& idx = params.idx();
  const auto ids = contained_ids(idx, make_set(R, params.N));
  const auto a = static_cast<Count>(ids.size());
  if (a < u) return {0.0, 0.0};
  check_tuple_cap(a, u);
  std::vector<double> inv(params.N + 1);
  for (int j = 0; j <= params.N; ++j) inv[j] = std::pow(params.p, -j);
  const double s = sum_over_usets(idx, ids, u, [&](int m) { return inv[m]; });
  const double c = choose(params.ap_total, u);
  return {s / c, choose(a, u) / c * std::pow(params.p, -static_cast<double>(params.k * u))};
}

namespace {

void check_measure_n(const ModelParams& params) {
  need_index(params, "exact measures");
  if (params.N > kExactMeasureCap)
    throw CapExceeded("exact_measure_N=" + std::to_string(kExactMeasureCap),
                      "2^" + std::to_string(params.N) + " subsets");
}

}  // namespace

std::vector<Count> counts_by_mask(const ModelParams& params) {
  check_measure_n(params);
  const auto masks = kernels::progression_masks(params.idx());
  std::vector<Count> out(std::size_t{1} << params.N);
  for (std::uint64_t m = 0; m < out.size(); ++m) {
    Count x = 0;
    for (auto b : masks) x += (m & b) == b;
    out[m] = x;
  }
  return out;
}

std::vector<double> exact_measure(const ModelParams& params, const TiltSpec& q) {
  check_measure_n(params);
  check_probability(params.p);
  check_tilt_size(params, q);
  const int N = params.N;
  std::vector<double> out(std::size_t{1} << N, 0.0);
  if (q.kind == TiltKind::product) {
    for (std::uint64_t m = 0; m < out.size(); ++m) {
      double w = 1.0;
      for (int i = 0; i < N; ++i) w *= (m >> i & 1) ? q.probs[i] : 1 - q.probs[i];
      out[m] = w;
    }
    return out;
  }
  if (q.u > params.ap_total) throw DomainError("sprinkle u exceeds the number of progressions");
  const double p = params.p;
  const double c = choose(params.ap_total, q.u);
  const auto& idx = params.idx();
  for (std::uint64_t m = 0; m < out.size(); ++m) {
    ElementSet R;
    for (int i = 0; i < N; ++i)
      if (m >> i & 1) R.push_back(i + 1);
    const int r = static_cast<int>(R.size());
    const double outside = std::pow(1 - p, N - r);
    if (outside == 0) continue;
    if (q.u == 0) {
      out[m] = std::pow(p, r) * outside;
      continue;
    }
    const auto ids = contained_ids(idx, R);
    const auto a = static_cast<Count>(ids.size());
    if (a < q.u) continue;
    check_tuple_cap(a, q.u);
    // S must cover R minus the union; p^0 = 1 also when p = 0
    out[m] = sum_over_usets(idx, ids, q.u, [&](int usize) { return std::pow(p, r - usize); }) *
             outside / c;
  }
  return out;
}

std::vector<double> base_measure(const ModelParams& params) {
  return exact_measure(params, product_tilt(std::vector<double>(params.N, params.p), params.p));
}

MeasureMoments measure_moments(const ModelParams& params, const std::vector<double>& q) {
  const auto x = counts_by_mask(params);
  if (q.size() != x.size()) throw DomainError("measure size does not match 2^N");
  MeasureMoments mm;
  for (std::size_t m = 0; m < q.size(); ++m) mm.mean += q[m] * static_cast<double>(x[m]);
  for (std::size_t m = 0; m < q.size(); ++m) {
    const double d = static_cast<double>(x[m]) - mm.mean;
    mm.var += q[m] * d * d;
  }
  return mm;
}

ExactIs is_exact(const ModelParams& params, const TiltSpec& tilt, double threshold) {
  check_tilt_size(params, tilt);
  const auto lr = product_log_ratios(tilt, params.p);
  const auto q = exact_measure(params, tilt);
  const auto x = counts_by_mask(params);
  ExactIs r;
  for (std::uint64_t m = 0; m < q.size(); ++m) {
    if (q[m] == 0) continue;
    double lw = 0.0;
    for (int i = 0; i < params.N; ++i) lw += (m >> i & 1) ? lr.in[i] : lr.out[i];
    const double w = q[m] * std::exp(lw);
    r.weight_mass += w;
    if (static_cast<double>(x[m]) >= threshold) r.expectation += w;
  }
  return r;
}

namespace {

// x log(x / y) with 0 log 0 = 0
double xlogxy(double x, double y) {
  if (x == 0) return 0.0;
  if (y == 0) return std::numeric_limits<double>::infinity();
  return x * (std::log(x) - std::log(y));
}

}  // namespace

KlReport kl_lower_bound_check(const ModelParams& params, const std::vector<double>& q,
                              double threshold) {
  const auto P = base_measure(params);
  const auto x = counts_by_mask(params);
  if (q.size() != P.size()) throw DomainError("measure size does not match 2^N");
  const double inf = std::numeric_limits<double>::infinity();
  KlReport r;
  double pa = 0.0, qa = 0.0, pc = 0.0, qc = 0.0;
  for (std::size_t m = 0; m < q.size(); ++m) {
    const bool in_a = static_cast<double>(x[m]) >= threshold;
    (in_a ? pa : pc) += P[m];
    (in_a ? qa : qc) += q[m];
    r.kl_q_p += xlogxy(q[m], P[m]);
  }
  r.p_event = pa;
  r.q_event = qa;
  r.log_p_event = std::log(pa);
  r.log_q_event = std::log(qa);
  r.vacuous = qa == 0;
  if (r.vacuous) {
    r.cond_log_ratio = 0.0;
    r.tilting_rhs = -inf;
    r.kl_conditioned = inf;
  } else {
    double cond = 0.0, klc = 0.0;
    for (std::size_t m = 0; m < q.size(); ++m) {
      if (static_cast<double>(x[m]) < threshold || q[m] == 0) continue;
      cond += xlogxy(q[m], P[m]);
      klc += xlogxy(q[m] / qa, P[m]);
    }
    r.cond_log_ratio = cond / qa;
    r.tilting_rhs = r.log_q_event - r.cond_log_ratio;
    r.kl_conditioned = klc;
  }
  const double split = xlogxy(qa, pa) + xlogxy(qc, pc);
  r.bernoulli_remainder = r.kl_q_p - split;
  if (pa < 1 && pa > 0) {
    r.ratio_lower = qa - (qa == 0 ? 0.0 : qa * std::log(qa)) / std::log(pa) -
                    xlogxy(qc, pc) / std::log(pa);
  } else {
    r.ratio_lower = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

KlReport kl_lower_bound_check(const ModelParams& params, const TiltSpec& q, double threshold) {
  return kl_lower_bound_check(params, exact_measure(params, q), threshold);
}

}  // namespace aptail
