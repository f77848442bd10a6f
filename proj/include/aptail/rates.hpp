#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "aptail/ap_index.hpp"

namespace aptail {

// Po(x) = (1+x) log(1+x) - x
double poisson_rate(double x);

// j_p(x) = x log(x/p) + (1-x) log((1-x)/(1-p))
double bernoulli_kl(double x, double p);

enum class Regime { CLT, Gaussian, Poisson, Localised, Boundary, BelowRange };

const char* regime_name(Regime r);
Regime parse_regime(const std::string& s);

double gaussian_rate(double t, double sigma2);
double poisson_total_rate(double mu, double t);
// sqrt(2(k-1)t) log(1/p)
double localised_comparator(int k, double t, double p);

struct RateValue {
  double value = 0.0;
  double comparator = 0.0;  // localised only: asymptotic size times log(1/p)
};

// Localised uses the interval (bounded) value of Psi*; throws for CLT,
// Boundary and BelowRange since no single rate applies.
RateValue rate_value(const ModelParams& params, double t, Regime regime);

struct ClassifyOptions {
  double theta = 3.0;
  double low_density_c = 1.0;  // p below c N^{-2/k} is out of range
};

struct RegimeDiagnostics {
  Regime regime = Regime::CLT;
  double t_over_sigma = 0.0;
  double gauss_ratio = 0.0;
  double poisson_ratio = 0.0;
  double density_side = 0.0;
  double theta = 3.0;
};

RegimeDiagnostics classify_regime(const ModelParams& params, double t,
                                  const ClassifyOptions& opts = {});

// Pure decision table on precomputed ratios.
Regime decide_regime(double t_over_sigma, double density_side, double gauss_ratio,
                     double poisson_ratio, double theta, bool below_range);

struct PhaseCell {
  double p = 0.0;
  double t = 0.0;
  RegimeDiagnostics diag;
  double rate = 0.0;  // NaN when no rate applies
};

std::vector<PhaseCell> phase_grid(int N, int k, const std::vector<double>& p_grid,
                                  const std::vector<double>& t_grid,
                                  const ClassifyOptions& opts = {});

std::vector<double> log_spaced(double lo, double hi, int n);

inline constexpr const char* kPhaseCsvHeader =
    "p,t,regime,t_over_sigma,gauss_ratio,poisson_ratio,density_side,rate";

void write_phase_csv(std::ostream& os, const std::vector<PhaseCell>& cells);
std::vector<PhaseCell> read_phase_csv(std::istream& is);

struct PhaseAnchors {
  double p_low;        // N^{-2/k}
  double p_density;    // N^{-1/(k-1)}
  double exp_sigma;    // (k-2)/(2k-2)
  double exp_poisson;  // (2k-4)/(3k-3)
  double exp_top;      // 2
};

PhaseAnchors phase_anchors(int N, int k);

}  // namespace aptail
