#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aptail/ap_index.hpp"

namespace aptail {

// k-uniform hypergraph; edge ids give the fixed total order used by the
// encoding. Vertices are 0..vertex_count-1.
struct Hypergraph {
  int vertex_count = 0;
  int k = 0;
  std::vector<std::vector<int>> edges;      // each sorted
  std::vector<std::vector<int>> incidence;  // per vertex, ascending edge ids

  int edge_count() const { return static_cast<int>(edges.size()); }
};

// Sorts each edge; throws on mixed sizes, repeats or bad vertices.
Hypergraph make_hypergraph(int vertex_count, std::vector<std::vector<int>> edges);

// AP_k([N]) with vertex labels 1..N (vertex 0 unused), edges in index order.
Hypergraph ap_hypergraph(const ProgressionIndex& index);

// (|d1(W)|, ..., |dk(W)|) with di(W) the edges meeting W in exactly i vertices
std::vector<Count> boundary_profile(const Hypergraph& H, const std::vector<int>& W);

// a_i = |di(W)| + ... + |dk(W)|
std::vector<Count> cumulative_boundary(const std::vector<Count>& profile);

struct ClusterRecord {
  std::vector<int> edge_ids;  // ascending
  std::vector<int> vertices;  // union, ascending
  int m = 0;                  // |union|
  int s = 0;                  // number of edges
  std::vector<Count> boundary;  // cumulative, slot i-1
};

ClusterRecord make_cluster(const Hypergraph& H, std::vector<int> edge_ids);
bool is_connected(const Hypergraph& H, const std::vector<int>& edge_ids);

// maximal connected pieces of the chosen edges, ordered by least edge id
std::vector<ClusterRecord> components(const Hypergraph& H, const std::vector<int>& edge_ids);

enum class ClusterClass { small, bounded, heavy };
const char* cluster_class_name(ClusterClass c);

struct ClusterOptions {
  double epsilon = 0.1;
  double K = 1e3;
  std::vector<double> ladder = {1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2, 1.0};
};

struct Classification {
  ClusterClass kind = ClusterClass::small;
  double L = 0.0;   // bounded: least ladder value that works
  int weight = 0;   // heavy: least l >= 1 with psi <= xi^l mu s / (K t)
  double psi = 0.0;
  double scale = 0.0;  // mu s / (K t)
  double xi = 0.0;     // 1 + eps/15
  double s0 = 0.0;     // (eps log(1/p) / log log(1/p))^2, 0 when p >= 1/e
  bool size_ok = false;   // s <= 2 log(1/p)^3
  bool ratio_ok = false;  // s <= eps log(1/p)/log log(1/p) * m; false when p >= 1/e
};

// Cluster vertices are elements of [N] (as from ap_hypergraph).
Classification classify_cluster(const ModelParams& params, const ClusterRecord& c, double t,
                                const ClusterOptions& opts = {});

// Sum over ordered t-tuples of distinct progressions of p^{|union|};
// N <= 12 with t <= 3, or N <= 20 with t <= 2. With filter_u, E[(X)_t Z_u]
// by enumeration over 2^N subsets, Z_u = no small u-seed inside R.
double factorial_moment_exact(const ModelParams& params, int t,
                              std::optional<double> filter_u = std::nullopt, double C = 1.0);

// sum_R P(R) (A_k(R))_t, over all subsets; N <= 14
double factorial_moment_by_subsets(const ModelParams& params, int t);

// E[X^m Z(u, km)] and (mu + u)^m, over all subsets; N <= 12
struct JorCheck {
  double lhs = 0.0;
  double rhs = 0.0;
};
JorCheck jor_moment(const ModelParams& params, int m, double u);

// Output of the encoding: root edge and marked cells (row i, position j).
struct EncodingOutput {
  int root_edge = -1;
  std::vector<std::pair<int, int>> marks;  // sorted
};

// Throws PreconditionError if the sub-hypergraph is disconnected or breaks
// the boundary caps a (slot i-1 caps |di| + ... + |dk|).
EncodingOutput emb_encode(const Hypergraph& H, const std::vector<int>& sub_edges,
                          const std::vector<double>& a);

inline constexpr double kClusterEnumCap = 1e7;

// Connected s-edge subsets with |union| = m (any m when m < 0) within caps a
// (no caps when a is empty). Cap: C(e(H), s) <= 1e7.
std::vector<ClusterRecord> enumerate_clusters(const Hypergraph& H, int m, int s,
                                              const std::vector<double>& a);
// single-threaded reference, same output order
std::vector<ClusterRecord> enumerate_clusters_serial(const Hypergraph& H, int m, int s,
                                                     const std::vector<double>& a);

enum class BinomialMode { generalized, floor };

// C(a, n) = a(a-1)...(a-n+1)/n!, 0 once a factor would go negative
double generalized_binomial(double a, int n);

struct ClusterCountBound {
  double thm = 0.0;             // e(H) sum over compositions of prod C(a_i, s_i)
  double weighted = 0.0;        // mu (e^2 k^2 M / s)^{s-1} (p max (a_i/M)^{1/(k-i)})^x
  double weighted_proof = 0.0;  // same with s-1 in place of s
  double M = 0.0;
};

// mu = e(H) p^k. Weighted forms need s >= 2 and are NaN otherwise.
ClusterCountBound cluster_count_bound(int edge_count, int k, int m, int s,
                                      const std::vector<double>& a, double x, double p,
                                      BinomialMode mode = BinomialMode::generalized);

struct ClusterCensusRow {
  int s = 0;
  int m = 0;
  ClusterClass kind = ClusterClass::small;
  int weight = 0;
  double psi = 0.0;
  Count count = 0;
};

// all connected clusters of AP_k([N]) with at most s_max progressions
std::vector<ClusterCensusRow> cluster_census(const ModelParams& params, int s_max, double t,
                                             const ClusterOptions& opts = {});

inline constexpr const char* kClusterCsvHeader = "s,m,classification,weight,psi,count";
void write_cluster_csv(std::ostream& os, const std::vector<ClusterCensusRow>& rows);

}  // namespace aptail
