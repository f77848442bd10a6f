#include "aptail/clusters.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <string>
#include <tuple>

#include "aptail/error.hpp"
#include "aptail/kernels.hpp"
#include "aptail/sampling.hpp"
#include "aptail/variational.hpp"

namespace aptail {

namespace {

void check_edge_ids(const Hypergraph& H, const std::vector<int>& ids) {
  for (int id : ids)
    if (id < 0 || id >= H.edge_count())
      throw DomainError("edge id " + std::to_string(id) + " out of range");
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::vector<int> union_of(const Hypergraph& H, const std::vector<int>& ids) {
  std::vector<int> v;
  for (int id : ids) v.insert(v.end(), H.edges[id].begin(), H.edges[id].end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool fits(const std::vector<Count>& boundary, const std::vector<double>& a) {
  if (a.empty()) return true;
  for (std::size_t i = 0; i < boundary.size(); ++i)
    if (static_cast<double>(boundary[i]) > a[i]) return false;
  return true;
}

void check_caps_vector(const Hypergraph& H, const std::vector<double>& a, bool allow_empty) {
  if (a.empty() && allow_empty) return;
  if (static_cast<int>(a.size()) != H.k)
    throw DomainError("boundary cap vector needs k = " + std::to_string(H.k) + " entries");
  for (double x : a)
    if (std::isnan(x)) throw DomainError("boundary cap is NaN");
}

double log_binomial(int n, int r) {
  return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
}

// ordered-tuple sum for (X)_t; masks over [N]
double tuple_sum(const std::vector<std::uint64_t>& masks, const std::vector<double>& pw, int t) {
  const std::size_t n = masks.size();
  double sum = 0.0;
  if (t == 1) {
    for (auto b : masks) sum += pw[__builtin_popcountll(b)];
    return sum;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::uint64_t u = masks[i] | masks[j];
      if (t == 2) {
        sum += pw[__builtin_popcountll(u)];
        continue;
      }
      for (std::size_t l = j + 1; l < n; ++l) sum += pw[__builtin_popcountll(u | masks[l])];
    }
  }
  return sum * (t == 2 ? 2.0 : 6.0);
}

double falling(double x, int t) {
  double r = 1.0;
  for (int j = 0; j < t; ++j) r *= x - j;
  return r;
}

ElementSet mask_to_set(std::uint64_t m) {
  ElementSet s;
  for (; m; m &= m - 1) s.push_back(__builtin_ctzll(m) + 1);
  return s;
}

}  // namespace

Hypergraph make_hypergraph(int vertex_count, std::vector<std::vector<int>> edges) {
  if (vertex_count < 0) throw DomainError("vertex_count must be >= 0");
  Hypergraph H;
  H.vertex_count = vertex_count;
  H.k = edges.empty() ? 0 : static_cast<int>(edges.front().size());
  if (!edges.empty() && H.k < 1) throw DomainError("edges must be nonempty");
  for (auto& e : edges) {
    std::sort(e.begin(), e.end());
    if (static_cast<int>(e.size()) != H.k) throw DomainError("hypergraph is not uniform");
    if (std::adjacent_find(e.begin(), e.end()) != e.end())
      throw DomainError("edge repeats a vertex");
    if (e.front() < 0 || e.back() >= vertex_count) throw DomainError("edge vertex out of range");
  }
  auto sorted = edges;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw DomainError("hypergraph has a repeated edge");
  H.edges = std::move(edges);
  H.incidence.assign(vertex_count, {});
  for (int id = 0; id < H.edge_count(); ++id)
    for (int v : H.edges[id]) H.incidence[v].push_back(id);
  return H;
}

Hypergraph ap_hypergraph(const ProgressionIndex& index) {
  std::vector<std::vector<int>> edges(index.size());
  for (std::size_t id = 0; id < index.size(); ++id) {
    auto pr = index.progression(id);
    edges[id].assign(pr.begin(), pr.end());
  }
  auto H = make_hypergraph(index.N() + 1, std::move(edges));
  H.k = index.k();
  return H;
}

std::vector<Count> boundary_profile(const Hypergraph& H, const std::vector<int>& W) {
  std::vector<std::uint8_t> in(H.vertex_count, 0);
  for (int v : W) {
    if (v < 0 || v >= H.vertex_count) throw DomainError("vertex out of range");
    in[v] = 1;
  }
  std::vector<Count> prof(H.k, 0);
  for (const auto& e : H.edges) {
    int c = 0;
    for (int v : e) c += in[v];
    if (c > 0) ++prof[c - 1];
  }
  return prof;
}

std::vector<Count> cumulative_boundary(const std::vector<Count>& profile) {
  std::vector<Count> a(profile.size(), 0);
  Count run = 0;
  for (std::size_t i = profile.size(); i-- > 0;) a[i] = run += profile[i];
  return a;
}

bool is_connected(const Hypergraph& H, const std::vector<int>& edge_ids) {
  check_edge_ids(H, edge_ids);
  if (edge_ids.empty()) return false;
  return components(H, edge_ids).size() == 1;
}

ClusterRecord make_cluster(const Hypergraph& H, std::vector<int> edge_ids) {
  check_edge_ids(H, edge_ids);
  std::sort(edge_ids.begin(), edge_ids.end());
  if (std::adjacent_find(edge_ids.begin(), edge_ids.end()) != edge_ids.end())
    throw DomainError("cluster repeats an edge");
  ClusterRecord c;
  c.vertices = union_of(H, edge_ids);
  c.m = static_cast<int>(c.vertices.size());
  c.s = static_cast<int>(edge_ids.size());
  c.edge_ids = std::move(edge_ids);
  c.boundary = cumulative_boundary(boundary_profile(H, c.vertices));
  return c;
}

std::vector<ClusterRecord> components(const Hypergraph& H, const std::vector<int>& edge_ids) {
  check_edge_ids(H, edge_ids);
  std::vector<int> ids = edge_ids;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  const int n = static_cast<int>(ids.size());
  UnionFind uf(n);
  std::vector<int> owner(H.vertex_count, -1);
  for (int j = 0; j < n; ++j) {
    for (int v : H.edges[ids[j]]) {
      if (owner[v] < 0)
        owner[v] = j;
      else
        uf.unite(owner[v], j);
    }
  }
  // roots are least positions, so groups come out ordered by least edge id
  std::vector<std::vector<int>> groups;
  std::vector<int> slot(n, -1);
  for (int j = 0; j < n; ++j) {
    const int r = uf.find(j);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[slot[r]].push_back(ids[j]);
  }
  std::vector<ClusterRecord> out;
  out.reserve(groups.size());
  for (auto& g : groups) out.push_back(make_cluster(H, std::move(g)));
  return out;
}

const char* cluster_class_name(ClusterClass c) {
  switch (c) {
    case ClusterClass::small: return "small";
    case ClusterClass::bounded: return "bounded";
    case ClusterClass::heavy: return "heavy";
  }
  return "?";
}

Classification classify_cluster(const ModelParams& params, const ClusterRecord& c, double t,
                                const ClusterOptions& opts) {
  if (!(t > 0)) throw DomainError("classification needs t > 0");
  if (!(params.p > 0 && params.p < 1)) throw DomainError("classification needs p in (0, 1)");
  if (!(opts.epsilon > 0) || !(opts.K > 0)) throw DomainError("classification needs eps, K > 0");
  for (double L : opts.ladder)
    if (!(L > 0 && L <= 1)) throw DomainError("ladder values must lie in (0, 1]");

  Classification r;
  r.psi = psi(params, c.vertices);
  r.scale = params.mu * c.s / (opts.K * t);
  r.xi = 1 + opts.epsilon / 15;
  const double lg = std::log(1 / params.p);
  const double llg = std::log(lg);
  r.size_ok = c.s <= 2 * lg * lg * lg;
  if (llg > 0) {
    const double g = opts.epsilon * lg / llg;
    r.s0 = g * g;
    r.ratio_ok = c.s <= g * c.m;
  }
  if (r.size_ok && r.ratio_ok) {
    r.kind = ClusterClass::small;
    return r;
  }
  auto ladder = opts.ladder;
  std::sort(ladder.begin(), ladder.end());
  for (double L : ladder) {
    if (r.psi <= L * r.scale) {
      r.kind = ClusterClass::bounded;
      r.L = L;
      return r;
    }
  }
  if (r.psi <= r.scale) {
    r.kind = ClusterClass::bounded;
    r.L = 1.0;
    return r;
  }
  r.kind = ClusterClass::heavy;
  int l = 1;
  while (r.psi > std::pow(r.xi, l) * r.scale) ++l;
  r.weight = l;
  return r;
}

double factorial_moment_exact(const ModelParams& params, int t, std::optional<double> filter_u,
                              double C) {
  if (t < 0) throw DomainError("factorial moment needs t >= 0");
  if (!((params.N <= 12 && t <= 3) || (params.N <= 20 && t <= 2)))
    throw CapExceeded("factorial_moment N<=12,t<=3 | N<=20,t<=2",
                      "factorial moment at N = " + std::to_string(params.N) +
                          ", t = " + std::to_string(t));
  const auto masks = kernels::progression_masks(params.idx());
  if (!filter_u) {
    if (t == 0) return 1.0;
    std::vector<double> pw(params.N + 1);
    for (int j = 0; j <= params.N; ++j) pw[j] = std::pow(params.p, j);
    return tuple_sum(masks, pw, t);
  }
  const auto P = base_measure(params);
  double sum = 0.0;
  for (std::uint64_t m = 0; m < P.size(); ++m) {
    if (P[m] == 0) continue;
    Count x = 0;
    for (auto b : masks) x += (m & b) == b;
    const double ft = falling(static_cast<double>(x), t);
    if (ft == 0) continue;
    if (contains_small_seed(params, mask_to_set(m), *filter_u, C)) continue;
    sum += P[m] * ft;
  }
  return sum;
}

double factorial_moment_by_subsets(const ModelParams& params, int t) {
  if (t < 0) throw DomainError("factorial moment needs t >= 0");
  const auto P = base_measure(params);
  const auto x = counts_by_mask(params);
  double sum = 0.0;
  for (std::size_t m = 0; m < P.size(); ++m) sum += P[m] * falling(static_cast<double>(x[m]), t);
  return sum;
}

JorCheck jor_moment(const ModelParams& params, int m, double u) {
  if (m < 1) throw DomainError("JOR moment needs m >= 1");
  if (!(u >= 0)) throw DomainError("JOR moment needs u >= 0");
  if (params.N > 12)
    throw CapExceeded("jor_N=12", "JOR enumeration at N = " + std::to_string(params.N));
  const auto P = base_measure(params);
  const auto x = counts_by_mask(params);
  JorCheck r;
  for (std::uint64_t mask = 0; mask < P.size(); ++mask) {
    if (P[mask] == 0 || x[mask] == 0) continue;
    if (contains_seed_of_size(params, mask_to_set(mask), u, params.k * m)) continue;
    r.lhs += P[mask] * std::pow(static_cast<double>(x[mask]), m);
  }
  r.rhs = std::pow(params.mu + u, m);
  return r;
}

EncodingOutput emb_encode(const Hypergraph& H, const std::vector<int>& sub_edges,
                          const std::vector<double>& a) {
  check_caps_vector(H, a, false);
  check_edge_ids(H, sub_edges);
  std::vector<int> sub = sub_edges;
  std::sort(sub.begin(), sub.end());
  if (std::adjacent_find(sub.begin(), sub.end()) != sub.end())
    throw DomainError("sub-hypergraph repeats an edge");
  if (sub.empty() || !is_connected(H, sub))
    throw PreconditionError("encoding needs a connected nonempty sub-hypergraph");
  const auto bnd = cumulative_boundary(boundary_profile(H, union_of(H, sub)));
  if (!fits(bnd, a)) throw PreconditionError("sub-hypergraph breaks the boundary caps");

  const int k = H.k;
  const int s = static_cast<int>(sub.size());
  std::vector<std::uint8_t> in_sub(H.edge_count(), 0), used(H.edge_count(), 0);
  for (int id : sub) in_sub[id] = 1;
  std::vector<std::vector<int>> sigma(k + 1);
  std::vector<std::vector<std::uint8_t>> listed(k + 1, std::vector<std::uint8_t>(H.edge_count(), 0));
  std::vector<std::uint8_t> covered(H.vertex_count, 0);

  EncodingOutput out;
  out.root_edge = sub.front();  // least in the edge order
  used[out.root_edge] = 1;
  for (int v : H.edges[out.root_edge]) covered[v] = 1;

  for (int l = 2; l <= s; ++l) {
    // append the edges of d^(i)(current union) not yet listed, in edge order
    for (int id = 0; id < H.edge_count(); ++id) {
      int c = 0;
      for (int v : H.edges[id]) c += covered[v];
      if (c > 0 && !listed[c][id]) {
        listed[c][id] = 1;
        sigma[c].push_back(id);
      }
    }
    int pick_i = -1, pick_j = -1;
    for (int i = k; i >= 1 && pick_i < 0; --i) {
      const double cap = std::floor(a[i - 1]);
      const int top = static_cast<int>(std::min<double>(static_cast<double>(sigma[i].size()), cap));
      for (int j = top; j >= 1; --j) {
        const int id = sigma[i][j - 1];
        if (in_sub[id] && !used[id]) {
          pick_i = i;
          pick_j = j;
          break;
        }
      }
    }
    if (pick_i < 0) throw PreconditionError("no admissible cell at step " + std::to_string(l));
    const int e = sigma[pick_i][pick_j - 1];
    used[e] = 1;
    for (int v : H.edges[e]) covered[v] = 1;
    out.marks.emplace_back(pick_i, pick_j);
  }
  std::sort(out.marks.begin(), out.marks.end());
  return out;
}

namespace {

double combination_count(int n, int r) {
  if (r < 0 || r > n) return 0.0;
  return std::exp(log_binomial(n, r));
}

// connected s-subsets whose least edge is root
void clusters_from_root(const Hypergraph& H, int root, int m, int s, const std::vector<double>& a,
                        std::vector<ClusterRecord>& out) {
  const int e = H.edge_count();
  const int r = s - 1;
  std::vector<int> comb(r);
  std::iota(comb.begin(), comb.end(), root + 1);
  if (r > 0 && comb.back() >= e) return;
  std::vector<int> ids(s);
  std::vector<int> stamp(H.vertex_count, 0);
  int gen = 0;
  while (true) {
    ids[0] = root;
    std::copy(comb.begin(), comb.end(), ids.begin() + 1);
    // union size first, cheap
    ++gen;
    int size = 0;
    for (int id : ids)
      for (int v : H.edges[id])
        if (stamp[v] != gen) {
          stamp[v] = gen;
          ++size;
        }
    if ((m < 0 || size == m) && is_connected(H, ids)) {
      auto c = make_cluster(H, ids);
      if (fits(c.boundary, a)) out.push_back(std::move(c));
    }
    int i = r - 1;
    while (i >= 0 && comb[i] == e - r + i) --i;
    if (i < 0) break;
    ++comb[i];
    for (int j = i + 1; j < r; ++j) comb[j] = comb[j - 1] + 1;
  }
}

void check_enum(const Hypergraph& H, int s, const std::vector<double>& a) {
  if (s < 1) throw DomainError("cluster enumeration needs s >= 1");
  check_caps_vector(H, a, true);
  if (combination_count(H.edge_count(), s) > kClusterEnumCap)
    throw CapExceeded("cluster_enum=1e7", "C(" + std::to_string(H.edge_count()) + ", " +
                                              std::to_string(s) + ") subsets");
}

}  // namespace

std::vector<ClusterRecord> enumerate_clusters_serial(const Hypergraph& H, int m, int s,
                                                     const std::vector<double>& a) {
  check_enum(H, s, a);
  std::vector<ClusterRecord> out;
  for (int root = 0; root < H.edge_count(); ++root) clusters_from_root(H, root, m, s, a, out);
  return out;
}

std::vector<ClusterRecord> enumerate_clusters(const Hypergraph& H, int m, int s,
                                              const std::vector<double>& a) {
  check_enum(H, s, a);
  const int e = H.edge_count();
  std::vector<std::vector<ClusterRecord>> per_root(e);
#pragma omp parallel for schedule(dynamic)
  for (int root = 0; root < e; ++root) clusters_from_root(H, root, m, s, a, per_root[root]);
  std::vector<ClusterRecord> out;
  for (auto& v : per_root)
    for (auto& c : v) out.push_back(std::move(c));
  return out;
}

double generalized_binomial(double a, int n) {
  if (n < 0) return 0.0;
  if (n == 0) return 1.0;
  if (a < n - 1) return 0.0;
  double r = 1.0;
  for (int j = 0; j < n; ++j) r *= (a - j) / (j + 1);
  return r;
}

namespace {

void compositions(int k, int i, int left_s, int left_w, const std::vector<double>& a,
                  BinomialMode mode, double prod, double& total) {
  if (i == k) {
    // row k carries weight 0 and takes the remaining edges
    const double ak = mode == BinomialMode::floor ? std::floor(a[k - 1]) : a[k - 1];
    if (left_w == 0) total += prod * generalized_binomial(ak, left_s);
    return;
  }
  const int w = k - i;
  const double ai = mode == BinomialMode::floor ? std::floor(a[i - 1]) : a[i - 1];
  for (int si = 0; si <= left_s && si * w <= left_w; ++si) {
    const double b = generalized_binomial(ai, si);
    if (b == 0) continue;
    compositions(k, i + 1, left_s - si, left_w - si * w, a, mode, prod * b, total);
  }
}

}  // namespace

ClusterCountBound cluster_count_bound(int edge_count, int k, int m, int s,
                                      const std::vector<double>& a, double x, double p,
                                      BinomialMode mode) {
  if (k < 1 || static_cast<int>(a.size()) != k) throw DomainError("bound needs k caps");
  if (s < 1) throw DomainError("bound needs s >= 1");
  if (!(x >= 0)) throw DomainError("bound needs x >= 0");
  check_probability(p);
  for (double ai : a)
    if (!(ai >= 0)) throw DomainError("boundary caps must be >= 0");

  ClusterCountBound r;
  double sum = 0.0;
  if (m - k >= 0) compositions(k, 1, s - 1, m - k, a, mode, 1.0, sum);
  r.thm = edge_count * sum;

  for (int i = 1; i <= k; ++i) r.M = std::max(r.M, a[i - 1] * std::pow(p, k - i));
  if (s < 2) {
    r.weighted = r.weighted_proof = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  const double mu = edge_count * std::pow(p, k);
  if (r.M == 0) {
    r.weighted = r.weighted_proof = 0.0;
    return r;
  }
  double tail = 1.0;
  if (x > 0) {
    double mx = 0.0;
    for (int i = 1; i < k; ++i) mx = std::max(mx, std::pow(a[i - 1] / r.M, 1.0 / (k - i)));
    tail = std::pow(p * mx, x);
  }
  const double e2k2M = std::exp(2.0) * k * k * r.M;
  r.weighted = mu * std::pow(e2k2M / s, s - 1) * tail;
  r.weighted_proof = mu * std::pow(e2k2M / (s - 1), s - 1) * tail;
  return r;
}

std::vector<ClusterCensusRow> cluster_census(const ModelParams& params, int s_max, double t,
                                             const ClusterOptions& opts) {
  if (s_max < 1) throw DomainError("census needs s_max >= 1");
  const auto H = ap_hypergraph(params.idx());
  using Key = std::tuple<int, int, int, int, double>;
  std::map<Key, Count> groups;
  for (int s = 1; s <= s_max; ++s) {
    for (const auto& c : enumerate_clusters(H, -1, s, {})) {
      const auto cl = classify_cluster(params, c, t, opts);
      ++groups[{c.s, c.m, static_cast<int>(cl.kind), cl.weight, cl.psi}];
    }
  }
  std::vector<ClusterCensusRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, n] : groups) {
    ClusterCensusRow row;
    row.s = std::get<0>(key);
    row.m = std::get<1>(key);
    row.kind = static_cast<ClusterClass>(std::get<2>(key));
    row.weight = std::get<3>(key);
    row.psi = std::get<4>(key);
    row.count = n;
    rows.push_back(row);
  }
  return rows;
}

void write_cluster_csv(std::ostream& os, const std::vector<ClusterCensusRow>& rows) {
  os << kClusterCsvHeader << '\n';
  char buf[32];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.psi);
    os << r.s << ',' << r.m << ',' << cluster_class_name(r.kind) << ',' << r.weight << ',' << buf
       << ',' << r.count << '\n';
  }
}

}  // namespace aptail
