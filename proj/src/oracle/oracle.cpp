#include "aptail/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace aptail::oracle {

std::vector<Set> progressions_ab(int N, int k) {
  std::set<Set> seen;
  std::vector<Set> out;
  for (int b = 1; b <= N; ++b) {
    for (int a = 1; a <= N; ++a) {
      if (a + (k - 1) * b > N) continue;
      Set s;
      for (int j = 0; j < k; ++j) s.push_back(a + j * b);
      if (!seen.insert(s).second) throw std::logic_error("duplicate progression");
      out.push_back(s);
    }
  }
  return out;
}

std::vector<Set> progressions_by_subsets(int N, int k) {
  if (N > 30) throw std::invalid_argument("oracle: N too large");
  std::vector<Set> out;
  Set cur(k);
  // recursive walk over increasing k-tuples
  auto rec = [&](auto&& self, int pos, int start) -> void {
    if (pos == k) {
      const int d = cur[1] - cur[0];
      for (int j = 2; j < k; ++j)
        if (cur[j] - cur[j - 1] != d) return;
      out.push_back(cur);
      return;
    }
    for (int v = start; v <= N; ++v) {
      cur[pos] = v;
      self(self, pos + 1, v + 1);
    }
  };
  rec(rec, 0, 1);
  return out;
}

std::vector<std::int64_t> profile(int N, int k, const Set& U) {
  std::vector<std::int64_t> prof(k, 0);
  std::set<int> in(U.begin(), U.end());
  for (const auto& B : progressions_ab(N, k)) {
    int hit = 0;
    for (int e : B) hit += in.count(e) ? 1 : 0;
    if (hit > 0) ++prof[hit - 1];
  }
  return prof;
}

std::uint64_t set_to_mask(const Set& s) {
  std::uint64_t m = 0;
  for (int e : s) m |= std::uint64_t{1} << (e - 1);
  return m;
}

Set mask_to_set(std::uint64_t mask) {
  Set s;
  for (int i = 0; i < 64; ++i)
    if (mask >> i & 1) s.push_back(i + 1);
  return s;
}

std::int64_t count_in_mask(const std::vector<Set>& aps, std::uint64_t mask) {
  std::int64_t x = 0;
  for (const auto& B : aps) {
    bool all = true;
    for (int e : B) all = all && (mask >> (e - 1) & 1);
    x += all;
  }
  return x;
}

namespace {

double weight(std::uint64_t mask, int N, double p) {
  const int s = __builtin_popcountll(mask);
  return std::pow(p, s) * std::pow(1.0 - p, N - s);
}

}  // namespace

Moments moments(int N, int k, double p) {
  const auto aps = progressions_ab(N, k);
  double m1 = 0.0, m2 = 0.0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << N); ++m) {
    const double x = static_cast<double>(count_in_mask(aps, m));
    const double w = weight(m, N, p);
    m1 += w * x;
    m2 += w * x * x;
  }
  return {m1, m2 - m1 * m1};
}

double tail(int N, int k, double p, double threshold) {
  const auto aps = progressions_ab(N, k);
  double acc = 0.0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << N); ++m) {
    if (static_cast<double>(count_in_mask(aps, m)) >= threshold) acc += weight(m, N, p);
  }
  return acc;
}

double psi(int N, int k, double p, const Set& U) {
  const auto aps = progressions_ab(N, k);
  const std::uint64_t u = set_to_mask(U);
  double uncond = 0.0, cond = 0.0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << N); ++m) {
    const double x = static_cast<double>(count_in_mask(aps, m));
    const double w = weight(m, N, p);
    uncond += w * x;
    if ((m & u) == u) {
      // P(R = m | U in R) = w / p^|U|
      cond += w / std::pow(p, static_cast<double>(U.size())) * x;
    }
  }
  return cond - uncond;
}

std::vector<std::int64_t> max_contained_by_size(int N, int k) {
  const auto aps = progressions_ab(N, k);
  std::vector<std::int64_t> best(N + 1, 0);
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << N); ++m) {
    const int s = __builtin_popcountll(m);
    best[s] = std::max(best[s], count_in_mask(aps, m));
  }
  return best;
}

int psi_star(int N, int k, double t) {
  const auto best = max_contained_by_size(N, k);
  for (int m = 0; m <= N; ++m)
    if (static_cast<double>(best[m]) >= t) return m;
  return -1;
}

Seed min_seed(int N, int k, double p, double t) {
  for (int m = 0; m <= N; ++m) {
    // m-subsets in lexicographic order
    Set cur(m);
    for (int j = 0; j < m; ++j) cur[j] = j + 1;
    while (true) {
      if (psi(N, k, p, cur) >= t) return {m, cur};
      int pos = m - 1;
      while (pos >= 0 && cur[pos] == N - m + pos + 1) --pos;
      if (pos < 0) break;
      ++cur[pos];
      for (int q = pos + 1; q < m; ++q) cur[q] = cur[q - 1] + 1;
    }
  }
  return {};
}

std::vector<int> links(int N, int k, const Set& R) {
  std::set<int> in(R.begin(), R.end());
  std::vector<int> L(N, 0);
  for (const auto& B : progressions_ab(N, k)) {
    for (int i : B) {
      bool rest = true;
      for (int e : B)
        if (e != i && !in.count(e)) rest = false;
      L[i - 1] += rest;
    }
  }
  return L;
}

double factorial_moment(int N, int k, double p, int t) {
  const auto aps = progressions_ab(N, k);
  double acc = 0.0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << N); ++m) {
    const double x = static_cast<double>(count_in_mask(aps, m));
    double ff = 1.0;
    for (int j = 0; j < t; ++j) ff *= (x - j);
    acc += weight(m, N, p) * ff;
  }
  return acc;
}

std::vector<double> product_mass(const std::vector<double>& probs) {
  const int N = static_cast<int>(probs.size());
  if (N > 20) throw std::invalid_argument("oracle: N too large");
  std::vector<double> out(std::size_t{1} << N);
  for (std::uint64_t m = 0; m < out.size(); ++m) {
    double w = 1.0;
    for (int i = 0; i < N; ++i) w *= (m >> i & 1) ? probs[i] : 1 - probs[i];
    out[m] = w;
  }
  return out;
}

std::vector<double> sprinkle_mass(int N, int k, double p, int u) {
  if (N > 16) throw std::invalid_argument("oracle: N too large");
  const auto aps = progressions_ab(N, k);
  const int n = static_cast<int>(aps.size());
  if (u > n) throw std::invalid_argument("oracle: u too large");
  std::vector<std::uint64_t> am;
  for (const auto& B : aps) am.push_back(set_to_mask(B));

  // all u-subsets of progressions; ordered tuples just repeat each u! times
  std::vector<std::uint64_t> unions;
  std::vector<int> pick(u);
  auto rec = [&](auto&& self, int pos, int start) -> void {
    if (pos == u) {
      std::uint64_t m = 0;
      for (int j : pick) m |= am[j];
      unions.push_back(m);
      return;
    }
    for (int j = start; j < n; ++j) {
      pick[pos] = j;
      self(self, pos + 1, j + 1);
    }
  };
  rec(rec, 0, 0);

  std::vector<double> out(std::size_t{1} << N, 0.0);
  const double share = 1.0 / static_cast<double>(unions.size());
  for (std::uint64_t s = 0; s < out.size(); ++s) {
    const double w = weight(s, N, p) * share;
    if (w == 0) continue;
    for (auto m : unions) out[s | m] += w;
  }
  return out;
}

double jor_lhs(int N, int k, double p, int m, double u, int max_size) {
  if (N > 12) throw std::invalid_argument("oracle: N too large");
  const auto aps = progressions_ab(N, k);
  const std::uint64_t full = std::uint64_t{1} << N;
  const double mean = static_cast<double>(aps.size()) * std::pow(p, static_cast<double>(k));
  // conditional mean given U in R, straight from the definition
  std::vector<std::uint8_t> seed(full, 0);
  for (std::uint64_t U = 0; U < full; ++U) {
    if (__builtin_popcountll(U) > max_size) continue;
    double cond = 0.0;
    for (const auto& B : aps) {
      int outside = 0;
      for (int e : B) outside += (U >> (e - 1) & 1) ? 0 : 1;
      cond += std::pow(p, static_cast<double>(outside));
    }
    seed[U] = cond - mean >= u;
  }
  double acc = 0.0;
  for (std::uint64_t R = 0; R < full; ++R) {
    bool has = false;
    for (std::uint64_t U = R;; U = (U - 1) & R) {
      if (seed[U]) {
        has = true;
        break;
      }
      if (U == 0) break;
    }
    if (has) continue;
    acc += weight(R, N, p) * std::pow(static_cast<double>(count_in_mask(aps, R)), m);
  }
  return acc;
}

std::vector<Set> connected_edge_subsets(const std::vector<Set>& edges, int s) {
  const int e = static_cast<int>(edges.size());
  if (e > 24) throw std::invalid_argument("oracle: too many edges");
  std::vector<Set> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << e); ++mask) {
    if (__builtin_popcountll(mask) != s) continue;
    Set ids = mask_to_set(mask);
    for (int& x : ids) --x;
    // grow from the first edge until nothing new touches
    std::set<int> verts(edges[ids[0]].begin(), edges[ids[0]].end());
    std::vector<bool> taken(ids.size(), false);
    taken[0] = true;
    std::size_t got = 1;
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t j = 0; j < ids.size(); ++j) {
        if (taken[j]) continue;
        bool touch = false;
        for (int v : edges[ids[j]]) touch = touch || verts.count(v);
        if (touch) {
          taken[j] = true;
          ++got;
          grew = true;
          verts.insert(edges[ids[j]].begin(), edges[ids[j]].end());
        }
      }
    }
    if (got == ids.size()) out.push_back(ids);
  }
  return out;
}

}  // namespace aptail::oracle
