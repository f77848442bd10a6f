#include "aptail/rates.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "aptail/error.hpp"
#include "aptail/kernels.hpp"
#include "aptail/variational.hpp"

namespace aptail {

double poisson_rate(double x) {
  if (!(x >= 0)) throw DomainError("Po needs x >= 0");
  if (std::isinf(x)) return x;
  return (1 + x) * std::log1p(x) - x;
}

double bernoulli_kl(double x, double p) {
  if (!(p > 0 && p < 1)) throw DomainError("bernoulli_kl needs p in (0, 1)");
  if (!(x >= 0 && x <= 1)) throw DomainError("bernoulli_kl needs x in [0, 1]");
  double v = 0.0;
  if (x > 0) v += x * std::log(x / p);
  if (x < 1) v += (1 - x) * std::log((1 - x) / (1 - p));
  return v;
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::CLT: return "CLT";
    case Regime::Gaussian: return "Gaussian";
    case Regime::Poisson: return "Poisson";
    case Regime::Localised: return "Localised";
    case Regime::Boundary: return "Boundary";
    case Regime::BelowRange: return "BelowRange";
  }
  return "?";
}

Regime parse_regime(const std::string& s) {
  for (Regime r : {Regime::CLT, Regime::Gaussian, Regime::Poisson, Regime::Localised,
                   Regime::Boundary, Regime::BelowRange}) {
    std::string name = regime_name(r);
    std::string a = s, b = name;
    for (auto& c : a) c = static_cast<char>(std::tolower(c));
    for (auto& c : b) c = static_cast<char>(std::tolower(c));
    if (a == b) return r;
  }
  throw DomainError("unknown regime: " + s);
}

double gaussian_rate(double t, double sigma2) { return t * t / (2 * sigma2); }

double poisson_total_rate(double mu, double t) {
  if (!(mu > 0)) throw DomainError("Poisson rate needs mu > 0");
  return mu * poisson_rate(t / mu);
}

double localised_comparator(int k, double t, double p) {
  return std::sqrt(2.0 * (k - 1) * t) * std::log(1 / p);
}

RateValue rate_value(const ModelParams& params, double t, Regime regime) {
  if (!(t >= 0)) throw DomainError("rate needs t >= 0");
  switch (regime) {
    case Regime::Gaussian:
      return {gaussian_rate(t, params.sigma2), 0.0};
    case Regime::Poisson:
      return {poisson_total_rate(params.mu, t), 0.0};
    case Regime::Localised: {
      const auto m = psi_star_bounded(params.N, params.k, t);
      const double L = std::log(1 / params.p);
      const double v = m ? *m * L : std::numeric_limits<double>::infinity();
      return {v, localised_comparator(params.k, t, params.p)};
    }
    default:
      throw DomainError(std::string("no rate for regime ") + regime_name(regime));
  }
}

Regime decide_regime(double t_over_sigma, double density_side, double gauss_ratio,
                     double poisson_ratio, double theta, bool below_range) {
  if (below_range) return Regime::BelowRange;
  if (!(t_over_sigma > theta)) return Regime::CLT;
  if (density_side > theta) {
    if (gauss_ratio > theta) return Regime::Gaussian;
    if (gauss_ratio < 1 / theta) return Regime::Localised;
    return Regime::Boundary;
  }
  if (density_side < 1 / theta) {
    if (poisson_ratio > theta) return Regime::Poisson;
    if (poisson_ratio < 1 / theta) return Regime::Localised;
    return Regime::Boundary;
  }
  return Regime::Boundary;
}

RegimeDiagnostics classify_regime(const ModelParams& params, double t, const ClassifyOptions& o) {
  const double p = params.p;
  if (!(p > 0 && p < 1)) throw DomainError("classify needs p in (0, 1)");
  if (!(t >= 0)) throw DomainError("classify needs t >= 0");
  if (!(o.theta > 1)) throw DomainError("theta must exceed 1");
  RegimeDiagnostics d;
  d.theta = o.theta;
  const double N = params.N;
  const int k = params.k;
  const double sigma = std::sqrt(params.sigma2);
  const double L = std::log(1 / p);
  const double inf = std::numeric_limits<double>::infinity();
  d.t_over_sigma = t == 0 ? 0.0 : t / sigma;
  d.density_side = p * std::pow(N, 1.0 / (k - 1));
  d.gauss_ratio = t == 0 ? inf : std::sqrt(t) * L * params.sigma2 / (t * t);
  d.poisson_ratio = t == 0 ? inf : std::sqrt(t) * L / poisson_total_rate(params.mu, t);
  const bool below = p < o.low_density_c * std::pow(N, -2.0 / k);
  d.regime = decide_regime(d.t_over_sigma, d.density_side, d.gauss_ratio, d.poisson_ratio,
                           o.theta, below);
  return d;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  if (n < 1 || !(lo > 0) || !(hi >= lo)) throw DomainError("bad log grid");
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * i / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<PhaseCell> phase_grid(int N, int k, const std::vector<double>& p_grid,
                                  const std::vector<double>& t_grid, const ClassifyOptions& opts) {
  if (p_grid.empty() || t_grid.empty()) throw DomainError("empty grid");
  const auto counts = kernels::overlap_counts_omp(N, k);
  std::vector<ModelParams> per_p;
  per_p.reserve(p_grid.size());
  for (double p : p_grid) per_p.push_back(moments_from_counts(counts, p));

  const long np = static_cast<long>(p_grid.size()), nt = static_cast<long>(t_grid.size());
  std::vector<PhaseCell> cells(np * nt);
#pragma omp parallel for schedule(dynamic)
  for (long c = 0; c < np * nt; ++c) {
    const long i = c / nt, j = c % nt;
    PhaseCell cell;
    cell.p = p_grid[i];
    cell.t = t_grid[j];
    cell.diag = classify_regime(per_p[i], cell.t, opts);
    switch (cell.diag.regime) {
      case Regime::CLT:
        cell.rate = gaussian_rate(cell.t, per_p[i].sigma2);
        break;
      case Regime::Gaussian:
      case Regime::Poisson:
      case Regime::Localised:
        cell.rate = rate_value(per_p[i], cell.t, cell.diag.regime).value;
        break;
      default:
        cell.rate = std::numeric_limits<double>::quiet_NaN();
    }
    cells[c] = cell;
  }
  return cells;
}

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_phase_csv(std::ostream& os, const std::vector<PhaseCell>& cells) {
  os << kPhaseCsvHeader << '\n';
  for (const auto& c : cells) {
    os << num(c.p) << ',' << num(c.t) << ',' << regime_name(c.diag.regime) << ','
       << num(c.diag.t_over_sigma) << ',' << num(c.diag.gauss_ratio) << ','
       << num(c.diag.poisson_ratio) << ',' << num(c.diag.density_side) << ',' << num(c.rate)
       << '\n';
  }
}

std::vector<PhaseCell> read_phase_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kPhaseCsvHeader) throw DomainError("bad phase csv header");
  std::vector<PhaseCell> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f[8];
    for (int i = 0; i < 8; ++i)
      if (!std::getline(ss, f[i], ',')) throw DomainError("short phase csv row");
    PhaseCell c;
    c.p = std::stod(f[0]);
    c.t = std::stod(f[1]);
    c.diag.regime = parse_regime(f[2]);
    c.diag.t_over_sigma = std::stod(f[3]);
    c.diag.gauss_ratio = std::stod(f[4]);
    c.diag.poisson_ratio = std::stod(f[5]);
    c.diag.density_side = std::stod(f[6]);
    c.rate = std::stod(f[7]);
    out.push_back(c);
  }
  return out;
}

PhaseAnchors phase_anchors(int N, int k) {
  return {std::pow(N, -2.0 / k), std::pow(N, -1.0 / (k - 1)),
          static_cast<double>(k - 2) / (2 * k - 2), static_cast<double>(2 * k - 4) / (3 * k - 3),
          2.0};
}

}  // namespace aptail
