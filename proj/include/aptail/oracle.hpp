#pragma once

#include <cstdint>
#include <vector>

// Brute-force reference computations. Deliberately naive and independent
// of ProgressionIndex and the kernels: progressions are re-enumerated from
// (a, b) pairs or by testing every k-subset, and probabilities come from
// walking all 2^N subsets. Only for tiny N.
namespace aptail::oracle {

using Set = std::vector<int>;

// every (a, b) with a, b >= 1, a+(k-1)b <= N, as element lists
std::vector<Set> progressions_ab(int N, int k);

// every k-subset of [N] with constant gaps; N <= 30
std::vector<Set> progressions_by_subsets(int N, int k);

std::vector<std::int64_t> profile(int N, int k, const Set& U);

// A_k of the subset encoded by mask (bit i-1 = element i)
std::int64_t count_in_mask(const std::vector<Set>& aps, std::uint64_t mask);

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};
// distribution of X over all 2^N subsets
Moments moments(int N, int k, double p);

double tail(int N, int k, double p, double threshold);

// E[X | U in R] - E[X] by averaging over the complement of U
double psi(int N, int k, double p, const Set& U);

// best[m] = max A_k(U) over |U| = m
std::vector<std::int64_t> max_contained_by_size(int N, int k);

// min{|U| : A_k(U) >= t}, -1 for infinity
int psi_star(int N, int k, double t);

// min size and lexicographically least witness with psi >= t; size -1 if none
struct Seed {
  int size = -1;
  Set witness;
};
Seed min_seed(int N, int k, double p, double t);

std::vector<int> links(int N, int k, const Set& R);

// sum_R P(R) * X(R)(X(R)-1)...(X(R)-t+1)
double factorial_moment(int N, int k, double p, int t);

// mass of every subset (bit i-1 = element i) under independent inclusion
std::vector<double> product_mass(const std::vector<double>& probs);

// law of S cup A_1 cup ... cup A_u with S p-biased and the A_j a uniform
// u-set of distinct progressions, by walking every (S, u-set) pair
std::vector<double> sprinkle_mass(int N, int k, double p, int u);

// E[X^m Z] where Z says R holds no U with |U| <= max_size and
// E[X | U in R] - E[X] >= u; plain submask scan, N <= 12
double jor_lhs(int N, int k, double p, int m, double u, int max_size);

// connected s-subsets of the edge list (as sorted edge index lists), by
// walking every s-subset of edges and growing a component; <= 24 edges
std::vector<Set> connected_edge_subsets(const std::vector<Set>& edges, int s);

Set mask_to_set(std::uint64_t mask);
std::uint64_t set_to_mask(const Set& s);

}  // namespace aptail::oracle
