#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "aptail/ap_index.hpp"
#include "aptail/sampling.hpp"

namespace aptail {

// Link functionals of one R against the truncation thresholds, with
// lambda = t / sigma^2.
struct LinkStats {
  double sum_sq = 0.0;     // sum_i L_i^2
  Count medium_count = 0;  // #{i : L_i > eps / lambda}
  int max_link = 0;
  bool max_exceeds = false;  // some L_i > log(1/p) / (2 lambda)

  double thr_sum_sq = 0.0;  // (1 + eps/10) sigma^2 / p
  double thr_medium = 0.0;  // eps / lambda
  double thr_count = 0.0;   // eps lambda^2 sigma^2 / (20 sqrt p)
  double thr_max = 0.0;     // log(1/p) / (2 lambda)

  // the three events of the bound
  bool event1 = false;  // sum_sq > thr_sum_sq
  bool event2 = false;  // medium_count >= thr_count
  bool event3 = false;  // max_exceeds
};

LinkStats link_statistics(const ModelParams& params, const ElementSet& R, double t,
                          double epsilon);
// Same from precomputed links (slot i-1).
LinkStats link_statistics_from_links(const ModelParams& params, const std::vector<int>& links,
                                     double t, double epsilon);

enum class Provenance { exact, monte_carlo };
const char* provenance_name(Provenance p);

inline constexpr double kDefaultEpsilon0 = 0.2;

struct FreedmanInputs {
  ModelParams params;
  double t = 0.0;
  double epsilon = 0.1;
  std::array<double, 3> P{};       // P1, P2, P3
  std::array<double, 3> stderrs{};  // zero for exact inputs
  Provenance provenance = Provenance::exact;
  double lambda = 0.0;
  double epsilon0 = kDefaultEpsilon0;
};

FreedmanInputs make_freedman_inputs(const ModelParams& params, double t, double epsilon,
                                    std::array<double, 3> P, Provenance prov,
                                    std::array<double, 3> stderrs = {});

struct FreedmanReport {
  double gaussian_term = 0.0;
  std::array<double, 3> terms{};
  double raw = 0.0;    // unclamped sum
  double total = 0.0;  // clamped to [0, 1]
  // MC inputs only: each P replaced by P + 3 stderr (capped at 1)
  double conservative_raw = 0.0;
  double conservative = 0.0;
  Provenance provenance = Provenance::exact;
  std::vector<std::string> warnings;
};

FreedmanReport freedman_bound(const FreedmanInputs& in);

// P1, P2, P3 by walking all 2^N subsets; N <= kExactMeasureCap.
std::array<double, 3> freedman_probs_exact(const ModelParams& params, double t, double epsilon);

struct FreedmanProbsMc {
  std::array<Estimate, 3> est;
};
FreedmanProbsMc freedman_probs_mc(const ModelParams& params, double t, double epsilon,
                                  std::uint64_t n, std::uint64_t seed);

// Sets B_alpha over a universe {0, ..., t-1}; Z counts sets inside a
// uniform s-subset.
struct JansonFamily {
  int universe_size = 0;
  std::vector<std::vector<int>> sets;
  int s = 0;
  double mu = 0.0;
  double Delta = 0.0;
};

JansonFamily make_janson_family(int universe_size, std::vector<std::vector<int>> sets, int s);

// 2 exp(-(eps^2/2) mu^2 / (mu + Delta)); the exponent is 0 when mu = 0
double janson_bound(const JansonFamily& fam, double epsilon);

inline constexpr double kHypergeomCap = 1e7;

// P(Z <= threshold) over all C(t, s) draws; universe <= 63.
double hypergeom_event_exact(const JansonFamily& fam, double threshold);
Estimate hypergeom_event_mc(const JansonFamily& fam, double threshold, std::uint64_t n,
                            std::uint64_t seed);

// Keeps each set that misses everything kept so far, in input order.
std::vector<std::vector<int>> greedy_disjoint(const std::vector<std::vector<int>>& sets);

// B \ {i} for every progression B through i
std::vector<std::vector<int>> link_sets(const ProgressionIndex& index, int i);

enum class EnumOrder { by_mask, gray };

struct VMomentReport {
  int ell = 0;
  double beta = 0.0;
  double moment = 0.0;       // E[V^ell]
  double mean_power = 0.0;   // E[V]^ell
  double ratio = 0.0;        // moment / mean_power, 1 when both vanish
  bool holds = false;        // moment <= (1+beta)^ell mean_power
};

inline constexpr int kVMomentCap = 12;

// V = sum_i L_i^2, exact over 2^N subsets; N <= 12, ell <= 4.
VMomentReport v_moment_check(const ModelParams& params, int ell, double beta,
                             EnumOrder order = EnumOrder::by_mask);

}  // namespace aptail
