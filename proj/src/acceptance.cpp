#include "aptail/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "aptail/ap_index.hpp"
#include "aptail/clusters.hpp"
#include "aptail/concentration.hpp"
#include "aptail/error.hpp"
#include "aptail/oracle.hpp"
#include "aptail/rates.hpp"
#include "aptail/sampling.hpp"
#include "aptail/variational.hpp"

namespace aptail {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

CriterionResult start(int id, std::string name) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  return r;
}

ModelParams model(int N, int k, double p) { return exact_moments(build_index(N, k), p); }

// failures collect a short note; only the first few are kept
struct Tally {
  long checks = 0;
  long failures = 0;
  std::string first;
  void check(bool ok, const std::string& what) {
    ++checks;
    if (ok) return;
    if (failures++ == 0) first = what;
  }
  std::string summary() const {
    std::string s = std::to_string(checks - failures) + "/" + std::to_string(checks) + " checks";
    if (failures) s += "; first failure: " + first;
    return s;
  }
};

ElementSet random_subset(std::mt19937_64& g, int N, int size) {
  std::vector<int> all(N);
  for (int i = 0; i < N; ++i) all[i] = i + 1;
  std::shuffle(all.begin(), all.end(), g);
  all.resize(size);
  return make_set(all, N);
}

std::vector<double> random_probs(std::mt19937_64& g, int N, double lo, double hi) {
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<double> q(N);
  for (auto& x : q) x = U(g);
  return q;
}

// 1. |AP_k| against (a, b) enumeration for N <= 200
CriterionResult c1(const AcceptanceConfig&) {
  auto r = start(1, "enumeration identity");
  const auto t0 = Clock::now();
  Tally tl;
  for (int k = 3; k <= 5; ++k) {
    for (int N = 1; N <= 200; ++N) {
      auto idx = build_index(N, k);
      const auto ab = oracle::progressions_ab(N, k);
      bool same = idx->size() == ab.size();
      if (same) {
        std::set<std::vector<int>> a(ab.begin(), ab.end()), b;
        for (std::size_t id = 0; id < idx->size(); ++id) {
          auto pr = idx->progression(id);
          b.insert(std::vector<int>(pr.begin(), pr.end()));
        }
        same = a == b;
      }
      tl.check(same && static_cast<Count>(idx->size()) == ap_count(N, k),
               "N=" + std::to_string(N) + " k=" + std::to_string(k));
    }
  }
  const double secs = seconds_since(t0);
  tl.check(secs < 5.0, "runtime " + fmt("%.2f s", secs));
  r.passed = tl.failures == 0;
  r.detail = tl.summary() + ", " + fmt("%.2f s (< 5 s)", secs);
  return r;
}

// 2. plain Monte Carlo against the exact tail
CriterionResult c2(const AcceptanceConfig& cfg) {
  auto r = start(2, "exact vs Monte Carlo");
  const auto t0 = Clock::now();
  auto mp = model(16, 3, 0.3);
  const double thr = mp.mu + 3;
  const double ex = exact_tail(mp, thr);
  auto est = mc_tail(mp, thr, cfg.mc_samples, cfg.seed);
  const double secs = seconds_since(t0);
  const double dev = std::abs(est.value - ex);
  r.passed = dev <= 4 * est.std_error && secs < 60.0;
  r.detail = "exact " + fmt("%.6g", ex) + ", mc " + fmt("%.6g", est.value) + " +- " +
             fmt("%.2g", est.std_error) + ", |diff|/se " + fmt("%.2f", dev / est.std_error) +
             ", " + fmt("%.1f s (< 60 s)", secs);
  return r;
}

// 3. importance sampling under the Gaussian tilt
CriterionResult c3(const AcceptanceConfig& cfg) {
  auto r = start(3, "importance sampling unbiasedness");
  Tally tl;
  auto mp = model(14, 3, 0.25);
  const double t = 3.0, thr = mp.mu + t;
  const double ex = exact_tail(mp, thr);
  auto tilt = gaussian_tilt(mp, t, 0.1);
  double worst = 0.0;
  for (int j = 1; j <= 10; ++j) {
    auto est = is_tail_product(mp, tilt, thr, cfg.is_samples, cfg.seed + j);
    const double z = std::abs(est.value - ex) / est.std_error;
    worst = std::max(worst, z);
    tl.check(z <= 4, "seed " + std::to_string(cfg.seed + j) + " z=" + fmt("%.2f", z));
  }
  // at N=10 the t=3 tilt would push probabilities past 1, so smaller t there
  double mass_dev = 0.0;
  auto small = model(10, 3, 0.25);
  std::vector<std::pair<const ModelParams*, double>> cases = {{&mp, t}};
  for (double ts : {0.5, 1.0, 1.5, 2.0}) cases.push_back({&small, ts});
  for (auto [m, tt] : cases) {
    auto ie = is_exact(*m, gaussian_tilt(*m, tt, 0.1), m->mu + tt);
    const double want = exact_tail(*m, m->mu + tt);
    mass_dev = std::max(mass_dev, std::abs(ie.weight_mass - 1));
    const std::string tag = "N=" + std::to_string(m->N) + " t=" + fmt("%g", tt);
    tl.check(std::abs(ie.weight_mass - 1) <= 1e-9, tag + " E_Q[dP/dQ]");
    tl.check(std::abs(ie.expectation - want) <= 1e-9, tag + " exact IS expectation");
  }
  r.passed = tl.failures == 0;
  r.detail = tl.summary() + ", worst |z| " + fmt("%.2f", worst) + ", max |E_Q[dP/dQ] - 1| " +
             fmt("%.1e", mass_dev);
  return r;
}

// 4. tilting and Donsker-Varadhan inequalities, exact
CriterionResult c4(const AcceptanceConfig& cfg) {
  auto r = start(4, "tilting inequalities");
  Tally tl;
  std::mt19937_64 g(cfg.seed ^ 4);
  double worst = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 50; ++rep) {
    const int N = 8 + rep % 5;
    const double p = 0.1 + 0.3 * (rep % 4) / 3.0;
    auto mp = model(N, 3, p);
    auto tilt = product_tilt(random_probs(g, N, 0.01, 0.99), p);
    for (double thr : {1.0, mp.mu + 1, mp.mu + 3}) {
      auto kr = kl_lower_bound_check(mp, tilt, thr);
      if (kr.vacuous) continue;
      worst = std::min({worst, kr.tilting_slack(), kr.dv_slack()});
      tl.check(kr.tilting_slack() >= -1e-9 && kr.dv_slack() >= -1e-9 &&
                   kr.bernoulli_remainder >= -1e-9,
               "product rep " + std::to_string(rep));
    }
  }
  for (int u : {1, 2}) {
    for (int N : {10, 12}) {
      auto mp = model(N, 3, 0.2);
      for (double thr : {mp.mu + u, mp.mu + 2 * u}) {
        auto kr = kl_lower_bound_check(mp, sprinkle_tilt(u), thr);
        if (kr.vacuous) continue;
        worst = std::min({worst, kr.tilting_slack(), kr.dv_slack()});
        tl.check(kr.tilting_slack() >= -1e-9 && kr.dv_slack() >= -1e-9,
                 "sprinkle u=" + std::to_string(u));
      }
    }
  }
  double dev = 0.0;
  for (int u : {1, 2}) {
    auto mp = model(8, 3, 0.2);
    const auto P = base_measure(mp);
    double s = 0.0;
    for (std::uint64_t m = 0; m < P.size(); ++m) {
      auto rr = sprinkle_ratio(mp, u, oracle::mask_to_set(m));
      tl.check(rr.ratio <= rr.upper_bound * (1 + 1e-12), "ratio above its bound");
      s += P[m] * rr.ratio;
    }
    dev = std::max(dev, std::abs(s - 1));
    tl.check(std::abs(s - 1) <= 1e-9, "ratio mass u=" + std::to_string(u));
  }
  r.passed = tl.failures == 0;
  r.detail = tl.summary() + ", min slack " + fmt("%.2e", worst) + ", ratio mass dev " +
             fmt("%.1e", dev);
  return r;
}

// 5. Psi* exact and bounded
CriterionResult c5(const AcceptanceConfig&) {
  auto r = start(5, "variational Psi*");
  Tally tl;
  for (int k = 3; k <= 4; ++k) {
    for (int N = 1; N <= 12; ++N) {
      auto idx = build_index(N, k);
      for (int t = 0; t <= static_cast<int>(idx->size()) + 1; ++t) {
        const int want = oracle::psi_star(N, k, t);
        auto got = psi_star(*idx, t, PsiStarMode::exact);
        auto bnd = psi_star(*idx, t, PsiStarMode::bounded);
        const std::string tag =
            "N=" + std::to_string(N) + " k=" + std::to_string(k) + " t=" + std::to_string(t);
        if (want < 0) {
          tl.check(!got.size && !bnd.size, tag);
          continue;
        }
        tl.check(got.size && *got.size == want, tag);
        tl.check(bnd.size && *bnd.size >= want, tag + " bounded");
      }
    }
  }
  double worst = 0.0;
  for (int t = 1000; t <= 10000; ++t) {
    const auto m = psi_star_bounded(1'000'000, 3, t);
    const double dev = m ? std::abs(*m / std::sqrt(4.0 * t) - 1) : 1e9;
    worst = std::max(worst, dev);
    tl.check(dev <= 0.05, "sqrt law t=" + std::to_string(t));
  }
  r.passed = tl.failures == 0;
  r.detail = tl.summary() + ", max |bounded/sqrt(4t) - 1| " + fmt("%.4f", worst);
  return r;
}

// 6. core extraction and interval cores
CriterionResult c6(const AcceptanceConfig& cfg) {
  auto r = start(6, "core machinery");
  Tally tl;
  std::mt19937_64 g(cfg.seed ^ 6);
  std::uniform_real_distribution<double> val(-1.0, 3.0);
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 1 + static_cast<int>(g() % 10);
    const ElementSet U = random_subset(g, 30, n);
    std::vector<double> table(1u << n);
    for (auto& v : table) v = val(g);
    auto code = [&](const ElementSet& S) {
      std::uint32_t m = 0;
      for (int e : S) m |= 1u << (std::lower_bound(U.begin(), U.end(), e) - U.begin());
      return m;
    };
    SetFunction f = [&](const ElementSet& S) { return table[code(S)]; };
    std::vector<double> w(n);
    for (auto& x : w) x = std::abs(val(g)) * 0.5;
    const ElementSet core = extract_core(f, U, w);
    const bool inside = std::includes(U.begin(), U.end(), core.begin(), core.end());
    // loss is at most the thresholds of the sizes removed
    double budget = 0.0;
    for (std::size_t s = core.size() + 1; s <= U.size(); ++s) budget += w[s - 1];
    bool loss_ok = f(core) >= f(U) - budget - 1e-12;
    bool rich = true;
    for (std::size_t pos = 0; pos < core.size(); ++pos) {
      ElementSet less = core;
      less.erase(less.begin() + pos);
      rich = rich && f(core) - f(less) >= w[core.size() - 1];
    }
    tl.check(inside && loss_ok && rich, "extract rep " + std::to_string(rep));
  }
  auto mp = model(40, 3, 0.1);
  for (double t : {4.0, 10.0, 50.0}) {
    const int m = static_cast<int>(std::floor(std::sqrt(4.0 * t)));
    ElementSet U;
    for (int i = 1; i <= m; ++i) U.push_back(i);
    for (double xi : {cfg.xi0 / 4, cfg.xi0 / 2, cfg.xi0}) {
      auto cert = is_core(mp, U, t, cfg.core_epsilon, xi);
      tl.check(cert.satisfied && !cert.approximate,
               "interval [" + std::to_string(m) + "] t=" + fmt("%g", t) + " xi=" + fmt("%g", xi));
    }
  }
  r.passed = tl.failures == 0;
  r.detail = tl.summary() + ", xi0 " + fmt("%g", cfg.xi0) + ", eps " + fmt("%g", cfg.core_epsilon);
  return r;
}

// 7. psi superadditive on disjoint pairs, monotone on nested pairs
CriterionResult c7(const AcceptanceConfig& cfg) {
  auto r = start(7, "psi superadditivity and monotonicity");
  Tally tl;
  std::mt19937_64 g(cfg.seed ^ 7);
  std::uniform_real_distribution<double> P(0.02, 0.98);
  std::map<std::pair<int, int>, std::shared_ptr<const ProgressionIndex>> cache;
  double worst = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 1000; ++rep) {
    const int N = 5 + static_cast<int>(g() % 36);
    const int k = 3 + static_cast<int>(g() % 2);
    auto& idx = cache[{N, k}];
    if (!idx) idx = build_index(N, k);
    auto mp = exact_moments(idx, P(g));
    std::vector<int> perm(N);
    for (int i = 0; i < N; ++i) perm[i] = i + 1;
    std::shuffle(perm.begin(), perm.end(), g);
    const int a = static_cast<int>(g() % (N + 1));
    const int b = static_cast<int>(g() % (N - a + 1));
    const ElementSet A = make_set({perm.begin(), perm.begin() + a}, N);
    const ElementSet B = make_set({perm.begin() + a, perm.begin() + a + b}, N);
    ElementSet AB = A;
    AB.insert(AB.end(), B.begin(), B.end());
    AB = make_set(AB, N);
    const double sup = psi(mp, AB) - psi(mp, A) - psi(mp, B);
    const double mono = psi(mp, AB) - psi(mp, A);
    worst = std::min({worst, sup, mono});
    tl.check(sup >= -1e-12 && mono >= -1e-12, "rep " + std::to_string(rep));
  }
  r.passed = tl.failures == 0;
  r.detail = tl.summary() + ", min slack " + fmt("%.2e", worst);
  return r;
}

// 8. Janson-type bound for the hypergeometric model
CriterionResult c8(const AcceptanceConfig& cfg) {
  auto r = start(8, "Janson bound");
  Tally tl;
  std::mt19937_64 g(cfg.seed ^ 8);
  double tight = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 4 + static_cast<int>(g() % 9);
    const int m = 1 + static_cast<int>(g() % 8);
    std::vector<std::vector<int>> sets;
    for (int a = 0; a < m; ++a) {
      std::vector<int> B;
      const int sz = 1 + static_cast<int>(g() % 3);
      for (int j = 0; j < sz; ++j) B.push_back(static_cast<int>(g() % n));
      sets.push_back(B);
    }
    auto f = make_janson_family(n, sets, static_cast<int>(g() % (n + 1)));
    for (double eps : {0.25, 0.5, 1.0}) {
      const double lhs = hypergeom_event_exact(f, (1 - eps) * f.mu);
      const double rhs = janson_bound(f, eps);
      tight = std::max(tight, rhs > 0 ? lhs / rhs : 0.0);
      tl.check(lhs <= rhs + 1e-15, "family " + std::to_string(rep) + " eps " + fmt("%g", eps));
    }
  }
  r.passed = tl.failures == 0;
  r.detail = tl.summary() + ", max lhs/bound " + fmt("%.3f", tight);
  return r;
}

// 9. Freedman-type bound dominates the exact tail
CriterionResult c9(const AcceptanceConfig&) {
  auto r = start(9, "Freedman bound");
  Tally tl;
  double tight = 0.0;
  const double eps = 0.2;
  for (int N : {10, 12, 14}) {
    for (double p : {0.2, 0.35, 0.5}) {
      auto mp = model(N, 3, p);
      const double sigma = std::sqrt(mp.sigma2);
      for (int j = 0; j <= 10; ++j) {
        const double t = sigma * (eps + (3 - eps) * j / 10.0);
        auto P = freedman_probs_exact(mp, t, eps);
        auto fb = freedman_bound(make_freedman_inputs(mp, t, eps, P, Provenance::exact));
        const double ex = exact_tail(mp, mp.mu + t);
        tight = std::max(tight, ex / fb.raw);
        tl.check(fb.raw >= ex, "N=" + std::to_string(N) + " p=" + fmt("%g", p));
      }
    }
  }
  r.passed = tl.failures == 0;
  r.detail = tl.summary() + ", max tail/bound " + fmt("%.3g", tight);
  return r;
}

Hypergraph random_hypergraph(std::mt19937_64& g, int n, int k, int max_edges) {
  const int want = 1 + static_cast<int>(g() % max_edges);
  std::set<std::vector<int>> seen;
  std::vector<int> verts(n);
  for (int i = 0; i < n; ++i) verts[i] = i;
  for (int tries = 0; static_cast<int>(seen.size()) < want && tries < 1000; ++tries) {
    std::shuffle(verts.begin(), verts.end(), g);
    std::vector<int> e(verts.begin(), verts.begin() + k);
    std::sort(e.begin(), e.end());
    seen.insert(e);
  }
  std::vector<std::vector<int>> edges(seen.begin(), seen.end());
  std::shuffle(edges.begin(), edges.end(), g);
  return make_hypergraph(n, edges);
}

// emb checks on every connected sub-hypergraph with s <= 4 edges
void check_emb_family(const Hypergraph& H, Tally& tl, const std::string& tag) {
  for (int s = 1; s <= 4; ++s) {
    const auto fam = oracle::connected_edge_subsets(H.edges, s);
    if (fam.empty()) continue;
    std::vector<double> a(H.k, 0.0);
    for (const auto& ids : fam) {
      auto c = make_cluster(H, ids);
      for (int i = 0; i < H.k; ++i) a[i] = std::max(a[i], static_cast<double>(c.boundary[i]));
    }
    std::set<std::pair<int, std::vector<std::pair<int, int>>>> codes;
    std::map<int, Count> by_m;
    bool cond = true, inj = true;
    for (const auto& ids : fam) {
      auto c = make_cluster(H, ids);
      auto out = emb_encode(H, ids, a);
      int w = 0;
      for (auto [i, j] : out.marks) {
        w += H.k - i;
        cond = cond && j >= 1 && j <= a[i - 1];
      }
      cond = cond && static_cast<int>(out.marks.size()) == s - 1 && w == c.m - H.k;
      inj = inj && codes.insert({out.root_edge, out.marks}).second;
      ++by_m[c.m];
    }
    const std::string st = tag + " s=" + std::to_string(s);
    tl.check(cond, st + " code condition");
    tl.check(inj, st + " injectivity");
    for (auto [m, n] : by_m) {
      const auto b = cluster_count_bound(H.edge_count(), H.k, m, s, a, 0, 0.5);
      tl.check(static_cast<double>(n) <= b.thm, st + " m=" + std::to_string(m) + " count bound");
    }
  }
}

// 10. cluster encoding and counting bounds
CriterionResult c10(const AcceptanceConfig& cfg) {
  auto r = start(10, "cluster encoding and counting");
  Tally tl;
  std::mt19937_64 g(cfg.seed ^ 10);
  for (int rep = 0; rep < 50; ++rep) {
    auto H = random_hypergraph(g, 7 + static_cast<int>(g() % 4), 3, 8);
    check_emb_family(H, tl, "random H " + std::to_string(rep));
  }
  check_emb_family(ap_hypergraph(*build_index(8, 3)), tl, "AP_3([8])");

  auto H = ap_hypergraph(*build_index(10, 3));
  double tight = 0.0;
  for (int s = 2; s <= 3; ++s) {
    const auto all = enumerate_clusters(H, -1, s, {});
    std::vector<double> a(3, 0.0);
    for (const auto& c : all)
      for (int i = 0; i < 3; ++i) a[i] = std::max(a[i], static_cast<double>(c.boundary[i]));
    for (double p : {0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9}) {
      double lhs = 0.0;
      for (const auto& c : all) lhs += std::pow(p, c.m);
      const auto b = cluster_count_bound(H.edge_count(), 3, 3, s, a, 0, p);
      tight = std::max(tight, lhs / b.weighted);
      tl.check(lhs <= b.weighted, "weighted s=" + std::to_string(s) + " p=" + fmt("%g", p));
    }
  }
  r.passed = tl.failures == 0;
  r.detail = tl.summary() + ", max weighted lhs/bound " + fmt("%.3g", tight);
  return r;
}

// 11. factorial moments, the Markov step and the JOR inequality
CriterionResult c11(const AcceptanceConfig&) {
  auto r = start(11, "factorial moments");
  Tally tl;
  double dev = 0.0;
  for (int k : {3, 4}) {
    for (int N = k; N <= 12; ++N) {
      for (double p : {0.1, 0.3, 0.5, 0.8}) {
        auto mp = model(N, k, p);
        for (int t = 1; t <= 3; ++t) {
          const double a = factorial_moment_exact(mp, t);
          const double b = factorial_moment_by_subsets(mp, t);
          dev = std::max(dev, std::abs(a - b));
          tl.check(std::abs(a - b) <= 1e-9, "two routes N=" + std::to_string(N));
          const double thr = mp.mu + t;
          double ff = 1.0;
          for (int j = 0; j < t; ++j) ff *= thr - j;
          tl.check(exact_tail(mp, thr) <= a / ff, "Markov N=" + std::to_string(N));
        }
      }
    }
  }
  double jor_tight = 0.0;
  int live = 0;
  for (int N : {8, 10, 12}) {
    for (double p : {0.2, 0.4}) {
      auto mp = model(N, 3, p);
      for (int m = 1; m <= 3; ++m) {
        // u <= 1 filters out every R with a progression; larger u keeps it honest
        for (double u : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
          const auto j = jor_moment(mp, m, u);
          live += j.lhs > 0;
          jor_tight = std::max(jor_tight, j.lhs / j.rhs);
          tl.check(j.lhs <= j.rhs, "JOR N=" + std::to_string(N) + " m=" + std::to_string(m));
        }
      }
    }
  }
  tl.check(live > 0, "every JOR case trivial");
  r.passed = tl.failures == 0;
  r.detail = tl.summary() + ", max route diff " + fmt("%.1e", dev) + ", max JOR lhs/rhs " +
             fmt("%.3g", jor_tight) + " over " + std::to_string(live) + " non-trivial cases";
  return r;
}

int rank_of(Regime g) {
  switch (g) {
    case Regime::CLT: return 0;
    case Regime::Gaussian:
    case Regime::Poisson: return 1;
    case Regime::Localised: return 2;
    default: return -1;
  }
}

// 12. rate functions and the phase diagram
CriterionResult c12(const AcceptanceConfig& cfg) {
  auto r = start(12, "rates and phase diagram");
  Tally tl;
  for (int i = 0; i < 10000; ++i) {
    const double x = i * 1e-3, y = x * 1.7 + 0.3;
    tl.check(poisson_rate((x + y) / 2) <= (poisson_rate(x) + poisson_rate(y)) / 2 + 1e-15,
             "Po convex x=" + fmt("%g", x));
    tl.check(x * std::log1p(x) <= 2 * poisson_rate(x) + 1e-15, "Po vs x log(1+x)");
  }
  for (double mu : {0.5, 10.0, 1e6}) {
    const double t = 0.01 * mu;
    tl.check(std::abs(poisson_total_rate(mu, t) * 2 * mu / (t * t) - 1) <= 0.01,
             "small ratio mu=" + fmt("%g", mu));
  }

  const int N = cfg.phase_N, k = 3;
  const double pd = std::pow(static_cast<double>(N), -1.0 / (k - 1));
  auto ps = log_spaced(std::pow(static_cast<double>(N), -2.0 / k) / 4, 0.5, 60);
  ps.push_back(pd);
  std::sort(ps.begin(), ps.end());
  const auto ts = log_spaced(1, std::pow(static_cast<double>(N), 2.0), 40);
  const auto cells = phase_grid(N, k, ps, ts);
  const auto anchors = phase_anchors(N, k);
  tl.check(std::abs(anchors.p_density / pd - 1) <= 1e-15, "density anchor");

  std::set<Regime> seen;
  std::set<std::pair<int, int>> steps;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double p = ps[i];
    int last = -1;
    Regime last_g = Regime::Boundary;
    for (std::size_t j = 0; j < ts.size(); ++j) {
      const auto& cell = cells[i * ts.size() + j];
      const Regime g = cell.diag.regime;
      seen.insert(g);
      if (p == pd) tl.check(std::abs(cell.diag.density_side - 1) <= 1e-12, "density side at N^-1/2");
      if (g == Regime::Gaussian) tl.check(p > pd, "Gaussian cell at p <= N^-1/2");
      if (g == Regime::Poisson) tl.check(p < pd, "Poisson cell at p >= N^-1/2");
      const int rk = rank_of(g);
      if (rk < 0) continue;
      tl.check(rk >= last, "column p=" + fmt("%.3g", p) + " not ordered in t");
      if (rk > last && last >= 0) steps.insert({static_cast<int>(last_g), static_cast<int>(g)});
      last = rk;
      last_g = g;
    }
  }
  for (Regime g : {Regime::CLT, Regime::Gaussian, Regime::Poisson, Regime::Localised})
    tl.check(seen.count(g) > 0, std::string("missing region ") + regime_name(g));
  const std::pair<Regime, Regime> want[] = {{Regime::CLT, Regime::Gaussian},
                                            {Regime::Gaussian, Regime::Localised},
                                            {Regime::CLT, Regime::Poisson},
                                            {Regime::Poisson, Regime::Localised}};
  for (auto [lo, hi] : want)
    tl.check(steps.count({static_cast<int>(lo), static_cast<int>(hi)}) > 0,
             std::string("no ") + regime_name(lo) + " -> " + regime_name(hi) + " step");
  r.passed = tl.failures == 0;
  r.detail = tl.summary() + ", grid " + std::to_string(ps.size()) + "x" +
             std::to_string(ts.size()) + " at N=" + fmt("%.0e", N);
  return r;
}

// 13. diagnostics: variance against V, tilted variance
CriterionResult c13(const AcceptanceConfig& cfg) {
  auto r = start(13, "diagnostics (non-gating)");
  r.gating = false;
  const int N = 2000;
  const double p = 10 / std::sqrt(static_cast<double>(N));
  auto mp = model(N, 3, p);
  const double ratio = mp.sigma2 / mp.V;
  const bool cv_ok = std::abs(ratio - 1) <= 0.2;

  std::mt19937_64 g(cfg.seed ^ 13);
  int tv_pass = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int M = 10 + rep % 5;
    const double q = 0.05 + 0.45 * (rep % 7) / 6.0;
    auto m2 = model(M, 3, q);
    auto tilt = product_tilt(random_probs(g, M, q, std::min(2 * q, 1.0)), q);
    auto mm = measure_moments(m2, exact_measure(m2, tilt));
    const double rr = mm.var / (std::pow(2.0, 6) * m2.sigma2);
    worst = std::max(worst, rr);
    tv_pass += rr <= 1;
  }
  r.passed = cv_ok && tv_pass == 50;
  r.detail = "Var/V at N=2000, p=10/sqrt(N): " + fmt("%.4f", ratio) +
             (cv_ok ? " (within 0.2)" : " (outside 0.2)") + "; tilted variance " +
             std::to_string(tv_pass) + "/50 within 2^6 sigma^2, max ratio " + fmt("%.3f", worst);
  return r;
}

}  // namespace

CriterionResult run_criterion(int id, const AcceptanceConfig& cfg) {
  using Fn = CriterionResult (*)(const AcceptanceConfig&);
  static const Fn table[] = {c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12, c13};
  if (id < 1 || id > kCriterionCount)
    throw DomainError("criterion id must be in 1.." + std::to_string(kCriterionCount));
  const auto t0 = Clock::now();
  CriterionResult r;
  try {
    r = table[id - 1](cfg);
  } catch (const std::exception& e) {
    r.id = id;
    r.gating = id != 13;
    r.passed = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = seconds_since(t0);
  return r;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids,
                                            const AcceptanceConfig& cfg) {
  std::vector<CriterionResult> out;
  for (int id : ids) out.push_back(run_criterion(id, cfg));
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed ? "PASS" : "FAIL") << "  " << r.id << (r.id < 10 ? "  " : " ") << r.name;
  if (!r.gating) os << " [diagnostic]";
  os << ": " << r.detail << " (" << fmt("%.2f", r.seconds) << " s)";
  return os.str();
}

bool gating_passed(const std::vector<CriterionResult>& results) {
  for (const auto& r : results)
    if (r.gating && !r.passed) return false;
  return true;
}

}  // namespace aptail
