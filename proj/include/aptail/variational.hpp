#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "aptail/ap_index.hpp"

namespace aptail {

// A_k([m]); identical to ap_count(m, k).
Count interval_ap_count(int k, int m);

enum class PsiStarMode { exact, bounded };

struct PsiStarOptions {
  // exact mode: true prunes with the interval bound A_k(U) <= A_k([|U|]);
  // false runs a plain branch and bound that never uses it (test route).
  bool interval_bound = true;
  int exhaustive_cap = 40;  // N limit for the plain branch and bound
};

// size is empty for infinity
struct SizeWitness {
  std::optional<int> size;
  ElementSet witness;
};

// min{|U| : A_k(U) >= t}
SizeWitness psi_star(const ProgressionIndex& index, double t, PsiStarMode mode,
                     const PsiStarOptions& opts = {});

// Bounded mode without an index (valid for any N).
std::optional<int> psi_star_bounded(int N, int k, double t);

struct SeedQuery {
  const ModelParams* params = nullptr;
  double t = 0.0;
  double C = 1.0;
  double epsilon = 0.1;
};

struct MinSeedOptions {
  int exhaustive_cap = 24;
  long long max_evaluations = 50'000'000;
};

// Psi(t) = min{|U| : psi(U) >= t}, lexicographically least witness.
SizeWitness min_seed(const SeedQuery& query, const MinSeedOptions& opts = {});

using SetFunction = std::function<double(const ElementSet&)>;

// Greedy chain: repeatedly drop the smallest u with
// f(U) - f(U \ u) < w[|U| - 1]; w is indexed by size-1.
ElementSet extract_core(const SetFunction& f, const ElementSet& U, const std::vector<double>& w);

// largest |U| for which the inner max in is_core is exact
inline constexpr int kExactInnerMaxCap = 20;

struct CoreCertificate {
  ElementSet core;
  int r = 0;            // witnessing r for (C2), 0 if none
  double xi = 0.0;
  bool c1 = false;
  bool c2 = false;
  bool satisfied = false;
  bool approximate = false;  // inner max replaced by an upper bound
  // per r = 3..k: min_u d_u A_r(U) and the required right-hand side
  std::vector<double> min_derivative;
  std::vector<double> required;
  std::optional<int> psi_star_needed;
};

CoreCertificate is_core(const ModelParams& params, const ElementSet& U, double t, double epsilon,
                        double xi);

// d_u A_r(U) = A_r(U) - A_r(U \ u) for every u in U, r = 1..k;
// result[r-1][pos of u in U].
std::vector<std::vector<Count>> profile_derivatives(const ProgressionIndex& index,
                                                    const ElementSet& U);

// max over K inside U of A_r(K), r = 1..k; slot r-1. |U| <= 20.
std::vector<Count> max_sub_profile(const ProgressionIndex& index, const ElementSet& U);

struct SeedCoreResult {
  CoreCertificate certificate;
  ElementSet dense_subset;
  int dense_r = 0;
  double xi = 0.0;
};

inline constexpr int kSeedToCoreCap = 20;

// Throws PreconditionError("no dense subset") when no r-dense subset exists.
SeedCoreResult seed_to_core(const ModelParams& params, const ElementSet& U, double t,
                            double epsilon, double eta = 0.05);

// a_r(x) = (1-eta) (x^2/(eta t))^{(k-r)/(k-2)}
double density_threshold(int k, int r, double x, double t, double eta);

// 1/(2 - log x)^2 on (0, 1]
double beta(double x);

// both size constraints on t for a set of size m
bool loc_assumptions(const ModelParams& params, int m, double t, double C);

// largest m in [0, N] passing loc_assumptions
int max_small_size(const ModelParams& params, double u, double C);

bool in_small_seed_family(const ModelParams& params, const ElementSet& U, double t, double C);

struct SmallSeedOptions {
  int size_cap = 8;
  int set_cap = 20;
};

// does R contain a u-seed of size <= max_small_size(u, C)
bool contains_small_seed(const ModelParams& params, const ElementSet& R, double u, double C,
                         const SmallSeedOptions& opts = {});

// does R contain a u-seed of size <= max_size
bool contains_seed_of_size(const ModelParams& params, const ElementSet& R, double u, int max_size,
                           const SmallSeedOptions& opts = {});

}  // namespace aptail
