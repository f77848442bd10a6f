#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "aptail/ap_index.hpp"

namespace aptail {

// mt19937_64 whose 312-word state is filled from splitmix64 applied to
// (seed, stream). Block b of a Monte Carlo run uses stream b. Changing
// either piece changes every estimate, so bump kRngVersion when doing so.
inline constexpr const char* kRngVersion = "mt19937_64+splitmix64/1";

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next() { return eng_(); }
  // 53 random bits in [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double q) { return uniform() < q; }
  // uniform on [0, n), n >= 1
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 eng_;
};

std::uint64_t splitmix64(std::uint64_t& state);

struct MergeState {
  std::uint64_t count = 0;
  double sum = 0.0;
  double sumsq = 0.0;

  void add(double x) {
    ++count;
    sum += x;
    sumsq += x * x;
  }
  void merge(const MergeState& o) {
    count += o.count;
    sum += o.sum;
    sumsq += o.sumsq;
  }
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;  // sample sd / sqrt(n)
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  MergeState state;
};

Estimate finish(const MergeState& s, std::uint64_t seed);
Estimate merge(const Estimate& a, const Estimate& b);

inline constexpr std::uint64_t kMcBlock = 4096;

std::uint64_t block_count(std::uint64_t n);

SubsetState sample_subset(const ModelParams& params, Rng& rng);

// Pr(X >= threshold) from the subset census; N <= 24.
double exact_tail(const ModelParams& params, double threshold);

// Plain Monte Carlo over blocks [0, block_count(n)).
Estimate mc_tail(const ModelParams& params, double threshold, std::uint64_t n, std::uint64_t seed);
// Just blocks [b0, b1) of the same run, for splitting work across calls.
MergeState mc_tail_blocks(const ModelParams& params, double threshold, std::uint64_t n,
                          std::uint64_t seed, std::uint64_t b0, std::uint64_t b1);

enum class TiltKind { product, sprinkle };

struct TiltSpec {
  TiltKind kind = TiltKind::product;
  std::vector<double> probs;  // product: inclusion probability of i in slot i-1
  Count u = 0;                // sprinkle: number of planted progressions
  bool p_bounded = false;     // product: every probs[i] - p lies in [0, p]
};

TiltSpec product_tilt(std::vector<double> probs, double p);
TiltSpec sprinkle_tilt(Count u);

// probs[i] = p + (1+eps) t p^k A_1(i) / V
TiltSpec gaussian_tilt(const ModelParams& params, double t, double epsilon = 0.1);

// log dP/dQ of one coordinate, present (in) or absent (out)
struct LogRatios {
  std::vector<double> in;
  std::vector<double> out;
};
LogRatios product_log_ratios(const TiltSpec& tilt, double p);

Estimate is_tail_product(const ModelParams& params, const TiltSpec& tilt, double threshold,
                         std::uint64_t n, std::uint64_t seed);
MergeState is_tail_product_blocks(const ModelParams& params, const TiltSpec& tilt,
                                  double threshold, std::uint64_t n, std::uint64_t seed,
                                  std::uint64_t b0, std::uint64_t b1);

// sum_i j_p(probs[i])
double product_kl(const TiltSpec& tilt, double p);

SubsetState sprinkle_sample(const ModelParams& params, Count u, Rng& rng);

struct SprinkleRatio {
  double ratio = 0.0;        // d(sprinkled)/dP at R
  double upper_bound = 0.0;  // (A_k(R))_u / ((|AP|)_u p^{ku})
};

// (A_k(R))_u tuples are summed, so cap that: (14)_7.
inline constexpr double kSprinkleTupleCap = 17297280.0;

SprinkleRatio sprinkle_ratio(const ModelParams& params, Count u, const ElementSet& R);

inline constexpr int kExactMeasureCap = 14;

// Mass of every subset of [N] (bit i-1 = element i) under the tilt; N <= 14.
std::vector<double> exact_measure(const ModelParams& params, const TiltSpec& q);
// The p-biased measure itself.
std::vector<double> base_measure(const ModelParams& params);

// A_k of every subset of [N], same indexing as exact_measure.
std::vector<Count> counts_by_mask(const ModelParams& params);

struct MeasureMoments {
  double mean = 0.0;
  double var = 0.0;
};
MeasureMoments measure_moments(const ModelParams& params, const std::vector<double>& q);

// E_Q[1{X >= thr} dP/dQ] and E_Q[dP/dQ], by enumeration with the
// estimator's own log weights.
struct ExactIs {
  double expectation = 0.0;
  double weight_mass = 0.0;
};
ExactIs is_exact(const ModelParams& params, const TiltSpec& tilt, double threshold);

struct KlReport {
  bool vacuous = false;  // Q(A) = 0
  double p_event = 0.0;
  double q_event = 0.0;
  double log_p_event = 0.0;
  double log_q_event = 0.0;
  double kl_q_p = 0.0;           // D(Q || P)
  double cond_log_ratio = 0.0;   // E_Q[log dQ/dP | A]
  double tilting_rhs = 0.0;      // log Q(A) - E_Q[log dQ/dP | A]
  double kl_conditioned = 0.0;   // D(Q(.|A) || P)
  // D(Q||P) - Q(A) log(Q(A)/P(A)) - Q(A^c) log(Q(A^c)/P(A^c)), never negative
  double bernoulli_remainder = 0.0;
  // lower bound on D(Q||P) / (-log P(A)) from the remainder; NaN if P(A) = 1
  double ratio_lower = 0.0;

  double tilting_slack() const { return log_p_event - tilting_rhs; }
  double dv_slack() const { return log_p_event + kl_conditioned; }
};

// Event A = {X >= threshold}. Everything exact over 2^N subsets.
KlReport kl_lower_bound_check(const ModelParams& params, const std::vector<double>& q,
                              double threshold);
KlReport kl_lower_bound_check(const ModelParams& params, const TiltSpec& q, double threshold);

}  // namespace aptail
