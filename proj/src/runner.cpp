#include "aptail/runner.hpp"

#include <sys/file.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>
#include <sstream>

#include "aptail/acceptance.hpp"
#include "aptail/ap_index.hpp"
#include "aptail/clusters.hpp"
#include "aptail/concentration.hpp"
#include "aptail/kernels.hpp"
#include "aptail/rates.hpp"
#include "aptail/sampling.hpp"
#include "aptail/variational.hpp"

#ifndef APTAIL_VERSION
#define APTAIL_VERSION "dev"
#endif

namespace aptail {

const std::vector<ConfigKey>& default_table() {
  static const std::vector<ConfigKey> table = {
      {"N", "", "ground set size [N]"},
      {"k", "3", "progression length"},
      {"p", "", "inclusion probability"},
      {"t", "", "deviation above the mean (integer for fact-moment)"},
      {"threshold", "", "event X >= threshold; default mu + t where that makes sense"},
      {"seed", "20240611", "PRNG seed"},
      {"n", "100000", "Monte Carlo samples"},
      {"epsilon", "0.1", "slack epsilon (tilt, Freedman, cluster classes, Janson)"},
      {"epsilon0", "0.2", "largest epsilon the Freedman bound accepts"},
      {"theta", "3", "regime margin, > 1"},
      {"low_density_c", "1", "p below c N^{-2/k} is out of range"},
      {"C", "1", "constant in the small-seed size constraint"},
      {"K", "1000", "cluster classification constant"},
      {"xi", "0.05", "verify: largest core constant xi_0 for interval cores"},
      {"u", "1", "seed level / number of sprinkled progressions"},
      {"mu", "", "rates: mean, used instead of N,k,p"},
      {"sigma2", "", "rates: variance, used instead of N,k,p"},
      {"regime", "auto", "rates: gaussian, poisson, localised or auto"},
      {"mode", "exact", "psi-star: exact or bounded"},
      {"R", "", "sprinkle: subset at which to evaluate the ratio"},
      {"s_max", "3", "clusters: largest number of progressions per cluster"},
      {"edges", "", "emb: hyperedges as JSON, default AP_k([N])"},
      {"vertices", "", "emb: vertex count for explicit edges, default max label + 1"},
      {"sub", "", "emb: edge ids of the sub-hypergraph"},
      {"a", "", "emb: boundary caps, default the sub-hypergraph's own"},
      {"sets", "", "janson: family of subsets of 0..universe-1 as JSON"},
      {"universe", "", "janson: universe size"},
      {"s", "", "janson: size of the uniform random subset"},
      {"exact", "true", "janson: also compute the exact probability"},
      {"probs", "exact", "freedman: event probabilities, exact or mc"},
      {"filter_u", "", "fact-moment: u for the no-small-seed filter"},
      {"p_min", "", "phase: smallest p, default N^{-2/k}/4"},
      {"p_max", "0.5", "phase: largest p"},
      {"p_count", "50", "phase: p grid points"},
      {"t_min", "1", "phase: smallest t"},
      {"t_max", "", "phase: largest t, default N^2"},
      {"t_count", "50", "phase: t grid points"},
      {"out", "", "phase/clusters: CSV path"},
      {"store", "", "JSON-lines run store; empty disables"},
      {"criteria", "all", "verify: comma list of criterion ids"},
      {"list_cap", "10000", "index: list progressions only up to this count"},
      {"index_cap", "50000000", "largest progression index built"},
  };
  return table;
}

Config::Config() {
  for (const auto& k : default_table()) values_[k.key] = k.value;
}

void Config::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
}

bool Config::has(const std::string& key) const { return !raw(key).empty(); }

const std::string& Config::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

std::string Config::str(const std::string& key) const {
  if (!has(key)) throw ConfigError("missing required key '" + key + "'");
  return raw(key);
}

double Config::num(const std::string& key) const {
  const std::string s = str(key);
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size()) throw ConfigError("key '" + key + "' needs a number, got '" + s + "'");
  return v;
}

int Config::integer(const std::string& key) const {
  const double v = num(key);
  if (v != std::floor(v) || std::abs(v) > 2e9)
    throw ConfigError("key '" + key + "' needs an integer, got '" + raw(key) + "'");
  return static_cast<int>(v);
}

std::uint64_t Config::u64(const std::string& key) const {
  const std::string s = str(key);
  std::size_t pos = 0;
  std::uint64_t v = 0;
  try {
    if (!s.empty() && s[0] == '-') throw ConfigError("");
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size())
    throw ConfigError("key '" + key + "' needs a non-negative integer, got '" + s + "'");
  return v;
}

bool Config::flag(const std::string& key) const {
  const std::string s = str(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("key '" + key + "' needs true/false, got '" + s + "'");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void load_config_file(Config& cfg, std::istream& is) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void load_config_file(Config& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  load_config_file(cfg, in);
}

bool is_command(const std::string& cmd) {
  for (const char* c : kCommands)
    if (cmd == c) return true;
  return false;
}

std::string params_digest(const Config& cfg) {
  const std::string key = "N=" + cfg.raw("N") + ";k=" + cfg.raw("k") + ";p=" + cfg.raw("p");
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

json parse_json(const Config& cfg, const std::string& key) {
  try {
    return json::parse(cfg.str(key));
  } catch (const json::exception& e) {
    throw ConfigError("key '" + key + "' is not valid JSON: " + e.what());
  }
}

// "[1,2,3]" or "1,2,3"
std::vector<int> int_list(const Config& cfg, const std::string& key) {
  std::string s = cfg.raw(key);
  if (trim(s).empty()) return {};
  if (trim(s)[0] != '[') s = "[" + s + "]";
  try {
    return json::parse(s).get<std::vector<int>>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + key + "' needs a list of integers, got '" + cfg.raw(key) + "'");
  }
}

std::vector<double> num_list(const Config& cfg, const std::string& key) {
  std::string s = cfg.raw(key);
  if (trim(s)[0] != '[') s = "[" + s + "]";
  try {
    return json::parse(s).get<std::vector<double>>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + key + "' needs a list of numbers, got '" + cfg.raw(key) + "'");
  }
}

int ground_N(const Config& cfg) {
  const int N = cfg.integer("N");
  if (N < 1) throw ConfigError("N must be positive");
  return N;
}

int ap_k(const Config& cfg) {
  const int k = cfg.integer("k");
  if (k < 3) throw ConfigError("k must be at least 3");
  return k;
}

std::shared_ptr<const ProgressionIndex> index_of(const Config& cfg) {
  return build_index(ground_N(cfg), ap_k(cfg), static_cast<Count>(cfg.num("index_cap")));
}

ModelParams params_of(const Config& cfg) { return exact_moments(index_of(cfg), cfg.num("p")); }

// moments without building the index, for any N
ModelParams counts_params(const Config& cfg) {
  return moments_from_counts(kernels::overlap_counts_omp(ground_N(cfg), ap_k(cfg)), cfg.num("p"));
}

ElementSet elements(const Config& cfg, const std::string& key, int N) {
  return make_set(int_list(cfg, key), N);
}

json size_json(const SizeWitness& w) {
  json j;
  j["size"] = w.size ? json(*w.size) : json(nullptr);
  j["infinite"] = !w.size;
  j["witness"] = w.witness;
  return j;
}

json estimate_json(const Estimate& e, const Config& cfg) {
  return {{"value", e.value},
          {"stderr", e.std_error},
          {"n", e.n_samples},
          {"seed", e.seed},
          {"params_digest", params_digest(cfg)}};
}

json moments_json(const ModelParams& mp) {
  return {{"N", mp.N},   {"k", mp.k},           {"p", mp.p}, {"ap_total", mp.ap_total},
          {"mu", mp.mu}, {"sigma2", mp.sigma2}, {"V", mp.V}};
}

json num_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json diag_json(const RegimeDiagnostics& d) {
  return {{"regime", regime_name(d.regime)},
          {"t_over_sigma", num_or_null(d.t_over_sigma)},
          {"gauss_ratio", num_or_null(d.gauss_ratio)},
          {"poisson_ratio", num_or_null(d.poisson_ratio)},
          {"density_side", num_or_null(d.density_side)},
          {"theta", d.theta}};
}

ClassifyOptions classify_options(const Config& cfg) {
  ClassifyOptions o;
  o.theta = cfg.num("theta");
  o.low_density_c = cfg.num("low_density_c");
  return o;
}

json cmd_index(const Config& cfg) {
  auto idx = index_of(cfg);
  json out = {{"N", idx->N()}, {"k", idx->k()}, {"count", idx->size()}};
  const bool list = static_cast<double>(idx->size()) <= cfg.num("list_cap");
  out["listed"] = list;
  if (list) {
    json ps = json::array();
    for (std::size_t id = 0; id < idx->size(); ++id) {
      auto pr = idx->progression(id);
      ps.push_back(std::vector<int>(pr.begin(), pr.end()));
    }
    out["progressions"] = std::move(ps);
  }
  return out;
}

json cmd_psi_star(const Config& cfg) {
  const std::string mode = cfg.str("mode");
  if (mode != "exact" && mode != "bounded") throw ConfigError("mode must be exact or bounded");
  auto idx = index_of(cfg);
  const double t = cfg.num("t");
  json out = size_json(psi_star(*idx, t, mode == "exact" ? PsiStarMode::exact : PsiStarMode::bounded));
  out["t"] = t;
  out["mode"] = mode;
  return out;
}

json cmd_min_seed(const Config& cfg) {
  auto mp = params_of(cfg);
  SeedQuery q;
  q.params = &mp;
  q.t = cfg.num("t");
  q.C = cfg.num("C");
  q.epsilon = cfg.num("epsilon");
  json out = size_json(min_seed(q));
  out["t"] = q.t;
  if (!out["witness"].empty())
    out["psi"] = psi(mp, out["witness"].get<std::vector<int>>());
  return out;
}

json cmd_rates(const Config& cfg) {
  const std::string regime = cfg.str("regime");
  const double t = cfg.num("t");
  json out = {{"t", t}};
  if (cfg.has("mu") || cfg.has("sigma2")) {
    if (regime == "poisson") {
      out["value"] = poisson_total_rate(cfg.num("mu"), t);
    } else if (regime == "gaussian") {
      out["value"] = gaussian_rate(t, cfg.num("sigma2"));
    } else {
      throw ConfigError("with mu/sigma2 only regime=poisson or regime=gaussian apply");
    }
    out["regime"] = regime;
    return out;
  }
  auto mp = counts_params(cfg);
  const auto d = classify_regime(mp, t, classify_options(cfg));
  out["diagnostics"] = diag_json(d);
  const Regime r = regime == "auto" ? d.regime : parse_regime(regime);
  out["regime"] = regime_name(r);
  if (r == Regime::Gaussian || r == Regime::Poisson || r == Regime::Localised) {
    const auto v = rate_value(mp, t, r);
    out["value"] = num_or_null(v.value);
    if (r == Regime::Localised) out["comparator"] = v.comparator;
  } else {
    out["value"] = nullptr;
  }
  return out;
}

json cmd_phase(const Config& cfg) {
  const int N = ground_N(cfg), k = ap_k(cfg);
  if (!cfg.has("out")) throw ConfigError("phase needs out=<csv path>");
  const double Nd = N;
  const double p_min = cfg.has("p_min") ? cfg.num("p_min") : std::pow(Nd, -2.0 / k) / 4;
  const double t_max = cfg.has("t_max") ? cfg.num("t_max") : Nd * Nd;
  const auto ps = log_spaced(p_min, cfg.num("p_max"), cfg.integer("p_count"));
  const auto ts = log_spaced(cfg.num("t_min"), t_max, cfg.integer("t_count"));
  const auto cells = phase_grid(N, k, ps, ts, classify_options(cfg));

  const std::string path = cfg.str("out");
  {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path);
    write_phase_csv(os, cells);
  }
  const auto a = phase_anchors(N, k);
  const json anchors = {{"N", N},
                        {"k", k},
                        {"p_low", a.p_low},
                        {"p_density", a.p_density},
                        {"exp_sigma", a.exp_sigma},
                        {"exp_poisson", a.exp_poisson},
                        {"exp_top", a.exp_top}};
  const std::string sidecar = path + ".anchors.json";
  {
    std::ofstream os(sidecar);
    if (!os) throw ConfigError("cannot write " + sidecar);
    os << anchors.dump(2) << '\n';
  }
  std::map<std::string, int> counts;
  for (const auto& c : cells) ++counts[regime_name(c.diag.regime)];
  return {{"csv", path}, {"anchors_file", sidecar}, {"anchors", anchors},
          {"cells", cells.size()}, {"regime_counts", counts}};
}

double threshold_of(const Config& cfg, const ModelParams& mp, const std::string& shift_key) {
  if (cfg.has("threshold")) return cfg.num("threshold");
  if (!cfg.has(shift_key)) throw ConfigError("need threshold or " + shift_key);
  return mp.mu + cfg.num(shift_key);
}

json cmd_tail_exact(const Config& cfg) {
  auto mp = params_of(cfg);
  const double thr = threshold_of(cfg, mp, "t");
  return {{"value", exact_tail(mp, thr)}, {"threshold", thr}, {"params_digest", params_digest(cfg)}};
}

json cmd_tail_mc(const Config& cfg) {
  auto mp = params_of(cfg);
  const double thr = threshold_of(cfg, mp, "t");
  json out = estimate_json(mc_tail(mp, thr, cfg.u64("n"), cfg.u64("seed")), cfg);
  out["threshold"] = thr;
  return out;
}

json cmd_tail_is(const Config& cfg) {
  auto mp = params_of(cfg);
  const double t = cfg.num("t");
  const double thr = cfg.has("threshold") ? cfg.num("threshold") : mp.mu + t;
  auto tilt = gaussian_tilt(mp, t, cfg.num("epsilon"));
  json out = estimate_json(is_tail_product(mp, tilt, thr, cfg.u64("n"), cfg.u64("seed")), cfg);
  out["threshold"] = thr;
  out["tilt_kl"] = product_kl(tilt, mp.p);
  return out;
}

json cmd_sprinkle(const Config& cfg) {
  auto mp = params_of(cfg);
  const int u = cfg.integer("u");
  if (u < 0) throw ConfigError("u must be non-negative");
  if (cfg.has("R")) {
    const auto R = elements(cfg, "R", mp.N);
    const auto r = sprinkle_ratio(mp, u, R);
    return {{"u", u}, {"R", R}, {"ratio", r.ratio}, {"upper_bound", r.upper_bound}};
  }
  const double thr = cfg.has("threshold") ? cfg.num("threshold") : mp.mu + u;
  const auto r = kl_lower_bound_check(mp, sprinkle_tilt(u), thr);
  json out = {{"u", u}, {"threshold", thr}, {"vacuous", r.vacuous}};
  if (!r.vacuous) {
    out["p_event"] = r.p_event;
    out["q_event"] = r.q_event;
    out["kl_q_p"] = r.kl_q_p;
    out["tilting_rhs"] = r.tilting_rhs;
    out["tilting_slack"] = r.tilting_slack();
    out["dv_slack"] = r.dv_slack();
  }
  return out;
}

json cmd_freedman(const Config& cfg) {
  auto mp = params_of(cfg);
  const double t = cfg.num("t"), eps = cfg.num("epsilon");
  const std::string how = cfg.str("probs");
  std::array<double, 3> P{}, se{};
  Provenance prov = Provenance::exact;
  if (how == "exact") {
    P = freedman_probs_exact(mp, t, eps);
  } else if (how == "mc") {
    auto mc = freedman_probs_mc(mp, t, eps, cfg.u64("n"), cfg.u64("seed"));
    for (int i = 0; i < 3; ++i) {
      P[i] = mc.est[i].value;
      se[i] = mc.est[i].std_error;
    }
    prov = Provenance::monte_carlo;
  } else {
    throw ConfigError("probs must be exact or mc");
  }
  auto in = make_freedman_inputs(mp, t, eps, P, prov, se);
  in.epsilon0 = cfg.num("epsilon0");
  const auto r = freedman_bound(in);
  json out = {{"gaussian_term", r.gaussian_term},
              {"term_P1", r.terms[0]},
              {"term_P2", r.terms[1]},
              {"term_P3", r.terms[2]},
              {"total", r.total},
              {"raw", r.raw},
              {"inputs_provenance", provenance_name(r.provenance)},
              {"P", P}};
  if (prov == Provenance::monte_carlo) {
    out["P_stderr"] = se;
    out["conservative"] = r.conservative;
  }
  out["warnings"] = r.warnings;
  return out;
}

json cmd_janson(const Config& cfg) {
  auto sets = parse_json(cfg, "sets");
  std::vector<std::vector<int>> family;
  try {
    family = sets.get<std::vector<std::vector<int>>>();
  } catch (const json::exception&) {
    throw ConfigError("sets must be a JSON list of integer lists");
  }
  auto f = make_janson_family(cfg.integer("universe"), family, cfg.integer("s"));
  const double eps = cfg.num("epsilon");
  json out = {{"mu", f.mu}, {"Delta", f.Delta}, {"epsilon", eps}, {"bound", janson_bound(f, eps)}};
  if (cfg.flag("exact")) out["exact"] = hypergeom_event_exact(f, (1 - eps) * f.mu);
  return out;
}

ClusterOptions cluster_options(const Config& cfg) {
  ClusterOptions o;
  o.epsilon = cfg.num("epsilon");
  o.K = cfg.num("K");
  return o;
}

json cmd_clusters(const Config& cfg) {
  auto mp = params_of(cfg);
  const auto rows = cluster_census(mp, cfg.integer("s_max"), cfg.num("t"), cluster_options(cfg));
  json out = {{"params_digest", params_digest(cfg)}};
  if (cfg.has("out")) {
    std::ofstream os(cfg.str("out"));
    if (!os) throw ConfigError("cannot write " + cfg.str("out"));
    write_cluster_csv(os, rows);
    out["csv"] = cfg.str("out");
  }
  json js = json::array();
  for (const auto& r : rows)
    js.push_back({{"s", r.s},
                  {"m", r.m},
                  {"classification", cluster_class_name(r.kind)},
                  {"weight", r.weight},
                  {"psi", r.psi},
                  {"count", r.count}});
  out["rows"] = std::move(js);
  return out;
}

json cmd_emb(const Config& cfg) {
  Hypergraph H;
  if (cfg.has("edges")) {
    std::vector<std::vector<int>> edges;
    try {
      edges = parse_json(cfg, "edges").get<std::vector<std::vector<int>>>();
    } catch (const json::exception&) {
      throw ConfigError("edges must be a JSON list of integer lists");
    }
    int vc = 0;
    for (const auto& e : edges)
      for (int v : e) vc = std::max(vc, v + 1);
    if (cfg.has("vertices")) vc = cfg.integer("vertices");
    H = make_hypergraph(vc, edges);
  } else {
    H = ap_hypergraph(*index_of(cfg));
  }
  const auto sub = int_list(cfg, "sub");
  const auto c = make_cluster(H, sub);
  std::vector<double> a;
  if (cfg.has("a")) {
    a = num_list(cfg, "a");
  } else {
    for (Count x : c.boundary) a.push_back(static_cast<double>(x));
  }
  const auto e = emb_encode(H, sub, a);
  json marks = json::array();
  for (auto [i, j] : e.marks) marks.push_back({i, j});
  return {{"root_edge", e.root_edge}, {"marks", marks}, {"m", c.m}, {"s", c.s}, {"a", a}};
}

json cmd_fact_moment(const Config& cfg) {
  auto mp = params_of(cfg);
  const int t = cfg.integer("t");
  std::optional<double> fu;
  if (cfg.has("filter_u")) fu = cfg.num("filter_u");
  json out = {{"t", t}, {"value", factorial_moment_exact(mp, t, fu, cfg.num("C"))}};
  out["filter_u"] = fu ? json(*fu) : json(nullptr);
  return out;
}

json cmd_verify(const Config& cfg) {
  std::vector<int> ids;
  if (cfg.str("criteria") == "all") {
    ids.resize(kCriterionCount);
    std::iota(ids.begin(), ids.end(), 1);
  } else {
    ids = int_list(cfg, "criteria");
  }
  AcceptanceConfig ac;
  ac.seed = cfg.u64("seed");
  ac.xi0 = cfg.num("xi");
  json rs = json::array();
  std::vector<CriterionResult> results;
  for (int id : ids) {
    if (id < 1 || id > kCriterionCount) throw ConfigError("no criterion " + std::to_string(id));
    results.push_back(run_criterion(id, ac));
    const auto& r = results.back();
    rs.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"gating", r.gating},
                  {"detail", r.detail}, {"line", format_result(r)}});
  }
  return {{"results", rs}, {"ok", gating_passed(results)}};
}

}  // namespace

json run_command(const std::string& cmd, const Config& cfg) {
  if (cmd == "index") return cmd_index(cfg);
  if (cmd == "moments") return moments_json(counts_params(cfg));
  if (cmd == "psi-star") return cmd_psi_star(cfg);
  if (cmd == "min-seed") return cmd_min_seed(cfg);
  if (cmd == "rates") return cmd_rates(cfg);
  if (cmd == "phase") return cmd_phase(cfg);
  if (cmd == "tail-exact") return cmd_tail_exact(cfg);
  if (cmd == "tail-mc") return cmd_tail_mc(cfg);
  if (cmd == "tail-is") return cmd_tail_is(cfg);
  if (cmd == "sprinkle") return cmd_sprinkle(cfg);
  if (cmd == "freedman") return cmd_freedman(cfg);
  if (cmd == "janson") return cmd_janson(cfg);
  if (cmd == "clusters") return cmd_clusters(cfg);
  if (cmd == "emb") return cmd_emb(cfg);
  if (cmd == "fact-moment") return cmd_fact_moment(cfg);
  if (cmd == "verify") return cmd_verify(cfg);
  throw ConfigError("unknown command '" + cmd + "'");
}

int exit_code_for(const std::string& cmd, const json& out) {
  if (cmd == "verify" && !out.value("ok", false)) return 1;
  return 0;
}

int exit_code_for_exception(const std::exception& e) {
  if (dynamic_cast<const CapExceeded*>(&e)) return 3;
  if (dynamic_cast<const std::invalid_argument*>(&e) ||
      dynamic_cast<const PreconditionError*>(&e) || dynamic_cast<const json::exception*>(&e))
    return 2;
  return 1;
}

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

json make_record(const std::string& cmd, const Config& cfg, const json& out) {
  return {{"timestamp", utc_now()},
          {"command", cmd},
          {"config", cfg.values()},
          {"params_digest", params_digest(cfg)},
          {"seed", cfg.raw("seed")},
          {"outputs", out},
          {"version", std::string("aptail ") + APTAIL_VERSION + " rng " + kRngVersion}};
}

namespace {

Config config_of(const json& record) {
  Config cfg;
  for (const auto& [k, v] : record.at("config").items()) cfg.set(k, v.get<std::string>());
  return cfg;
}

}  // namespace

bool record_digest_matches(const json& record) {
  return params_digest(config_of(record)) == record.at("params_digest").get<std::string>();
}

void append_record(const std::string& path, const json& record) {
  std::FILE* f = std::fopen(path.c_str(), "a");
  if (!f) throw ConfigError("cannot open run store " + path);
  if (flock(fileno(f), LOCK_EX) != 0) {
    std::fclose(f);
    throw ConfigError("cannot lock run store " + path);
  }
  const std::string line = record.dump() + "\n";
  std::fwrite(line.data(), 1, line.size(), f);
  std::fflush(f);
  flock(fileno(f), LOCK_UN);
  std::fclose(f);
}

std::vector<json> read_store(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read run store " + path);
  std::vector<json> out;
  std::string line;
  while (std::getline(in, line))
    if (!trim(line).empty()) out.push_back(json::parse(line));
  return out;
}

json replay_record(const json& record) {
  return run_command(record.at("command").get<std::string>(), config_of(record));
}

int run_cli(const std::string& cmd, const Config& cfg, std::ostream& out, std::ostream& err) {
  try {
    const json result = run_command(cmd, cfg);
    if (cmd == "verify")
      for (const auto& r : result["results"]) err << r["line"].get<std::string>() << '\n';
    out << result.dump() << '\n';
    if (cfg.has("store")) append_record(cfg.str("store"), make_record(cmd, cfg, result));
    return exit_code_for(cmd, result);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for_exception(e);
  }
}

}  // namespace aptail
