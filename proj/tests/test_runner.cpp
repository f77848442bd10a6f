#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "aptail/rates.hpp"
#include "aptail/runner.hpp"

using namespace aptail;

namespace {

Config cfg_of(std::initializer_list<std::pair<const char*, const char*>> kv) {
  Config c;
  for (auto [k, v] : kv) c.set(k, v);
  return c;
}

std::string temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "aptail_runner_test";
  std::filesystem::create_directories(dir);
  auto p = dir / name;
  std::filesystem::remove(p);
  return p.string();
}

int count_lines(const std::string& path) {
  std::ifstream in(path);
  int n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST(Runner, SpecExamples) {
  auto idx = run_command("index", cfg_of({{"N", "5"}, {"k", "3"}}));
  EXPECT_EQ(idx["count"], 4);
  EXPECT_EQ(idx["progressions"].size(), 4u);
  auto tail = run_command("tail-exact", cfg_of({{"N", "3"}, {"k", "3"}, {"p", "0.5"}, {"threshold", "1"}}));
  EXPECT_EQ(tail["value"].get<double>(), 0.125);
  auto rate = run_command("rates", cfg_of({{"regime", "poisson"}, {"mu", "1"}, {"t", "1"}}));
  EXPECT_NEAR(rate["value"].get<double>(), 2 * std::log(2.0) - 1, 1e-15);
}

TEST(Runner, DefaultsTableIsComplete) {
  std::set<std::string> keys;
  for (const auto& k : default_table()) {
    EXPECT_TRUE(keys.insert(k.key).second) << k.key;
    EXPECT_GT(std::string(k.help).size(), 0u) << k.key;
  }
  for (const char* k : {"theta", "epsilon", "C", "K", "seed", "index_cap"})
    EXPECT_TRUE(Config().has(k)) << k;
}

TEST(Config, LayersFileThenOverrides) {
  Config c;
  std::istringstream file("# grid\nN = 12\np=0.3  # trailing comment\n\nseed=7\n");
  load_config_file(c, file);
  EXPECT_EQ(c.integer("N"), 12);
  EXPECT_EQ(c.num("p"), 0.3);
  c.set("seed", "9");
  EXPECT_EQ(c.u64("seed"), 9u);
  EXPECT_EQ(c.num("theta"), 3.0);
}

TEST(Config, RejectsBadInput) {
  Config c;
  EXPECT_THROW(c.set("nope", "1"), ConfigError);
  std::istringstream bad("N 12\n");
  EXPECT_THROW(load_config_file(c, bad), ConfigError);
  c.set("N", "1.5");
  EXPECT_THROW(c.integer("N"), ConfigError);
  c.set("seed", "-3");
  EXPECT_THROW(c.u64("seed"), ConfigError);
  c.set("p", "0.3x");
  EXPECT_THROW(c.num("p"), ConfigError);
  EXPECT_THROW(c.str("threshold"), ConfigError);
  c.set("exact", "maybe");
  EXPECT_THROW(c.flag("exact"), ConfigError);
}

TEST(Runner, ExitCodes) {
  std::ostringstream out, err;
  EXPECT_EQ(run_cli("index", cfg_of({{"N", "5"}}), out, err), 0);
  EXPECT_EQ(run_cli("tail-exact", cfg_of({{"N", "5"}, {"p", "1.5"}, {"threshold", "1"}}), out, err), 2);
  EXPECT_EQ(run_cli("tail-exact", cfg_of({{"N", "5"}, {"p", "0.5"}}), out, err), 2);
  EXPECT_EQ(run_cli("nope", Config(), out, err), 2);
  EXPECT_EQ(run_cli("index", cfg_of({{"N", "1000"}, {"index_cap", "10"}}), out, err), 3);
  EXPECT_EQ(run_cli("tail-exact", cfg_of({{"N", "40"}, {"p", "0.5"}, {"threshold", "1"}}), out, err), 3);
  EXPECT_EQ(exit_code_for("verify", json{{"ok", false}}), 1);
  EXPECT_EQ(exit_code_for("verify", json{{"ok", true}}), 0);
}

TEST(Runner, VerifyReportsDiagnosticWithoutFailing) {
  std::ostringstream out, err;
  EXPECT_EQ(run_cli("verify", cfg_of({{"criteria", "7,13"}}), out, err), 0);
  auto j = json::parse(out.str());
  ASSERT_EQ(j["results"].size(), 2u);
  EXPECT_TRUE(j["results"][0]["passed"].get<bool>());
  EXPECT_FALSE(j["results"][1]["gating"].get<bool>());
  EXPECT_NE(err.str().find("PASS  7"), std::string::npos);
}

TEST(Runner, DigestDependsOnNkpOnly) {
  auto a = cfg_of({{"N", "12"}, {"p", "0.3"}});
  auto b = cfg_of({{"N", "12"}, {"p", "0.3"}, {"seed", "5"}});
  auto c = cfg_of({{"N", "12"}, {"p", "0.31"}});
  EXPECT_EQ(params_digest(a), params_digest(b));
  EXPECT_NE(params_digest(a), params_digest(c));
  EXPECT_EQ(params_digest(a).size(), 16u);
}

TEST(RunStore, AppendAndReplay) {
  const std::string store = temp_path("store.jsonl");
  auto c = cfg_of({{"N", "12"}, {"p", "0.3"}, {"t", "2"}, {"n", "5000"}, {"seed", "11"}, {"store", store.c_str()}});
  std::ostringstream out, err;
  ASSERT_EQ(run_cli("tail-mc", c, out, err), 0);
  ASSERT_EQ(run_cli("tail-is", c, out, err), 0);
  ASSERT_EQ(count_lines(store), 2);
  for (const auto& rec : read_store(store)) {
    EXPECT_TRUE(record_digest_matches(rec));
    EXPECT_EQ(replay_record(rec), rec["outputs"]);
    EXPECT_EQ(rec["outputs"]["params_digest"], rec["params_digest"]);
    EXPECT_EQ(rec["outputs"]["seed"].get<std::uint64_t>(), 11u);
  }
  auto rec = read_store(store).front();
  rec["config"]["p"] = "0.4";
  EXPECT_FALSE(record_digest_matches(rec));
}

TEST(RunStore, DoublesRoundTripExactly) {
  auto out = run_command("moments", cfg_of({{"N", "37"}, {"p", "0.1234567890123"}}));
  auto back = json::parse(out.dump());
  EXPECT_EQ(back["sigma2"].get<double>(), out["sigma2"].get<double>());
  EXPECT_EQ(back["mu"].get<double>(), out["mu"].get<double>());
}

TEST(Phase, SingleCellAndAnchors) {
  const std::string path = temp_path("one.csv");
  auto out = run_command("phase", cfg_of({{"N", "1000000"}, {"p_count", "1"}, {"t_count", "1"}, {"out", path.c_str()}}));
  EXPECT_EQ(count_lines(path), 2);
  EXPECT_NEAR(out["anchors"]["p_density"].get<double>(), 1e-3, 1e-18);
  std::ifstream side(path + ".anchors.json");
  EXPECT_EQ(json::parse(side), out["anchors"]);
}

TEST(Phase, GridParsesBackLosslessly) {
  const std::string path = temp_path("grid.csv");
  run_command("phase", cfg_of({{"N", "100000"}, {"out", path.c_str()}}));
  std::ifstream in(path);
  auto cells = read_phase_csv(in);
  ASSERT_EQ(cells.size(), 2500u);
  const auto ps = log_spaced(std::pow(1e5, -2.0 / 3) / 4, 0.5, 50);
  const auto ts = log_spaced(1, 1e10, 50);
  const auto want = phase_grid(100000, 3, ps, ts);
  for (std::size_t i = 0; i < want.size(); ++i) {
    ASSERT_EQ(cells[i].p, want[i].p);
    ASSERT_EQ(cells[i].t, want[i].t);
    ASSERT_EQ(cells[i].diag.regime, want[i].diag.regime);
    ASSERT_EQ(cells[i].diag.t_over_sigma, want[i].diag.t_over_sigma);
    ASSERT_TRUE(cells[i].rate == want[i].rate || (std::isnan(cells[i].rate) && std::isnan(want[i].rate)));
  }
}

TEST(Runner, FreedmanReportFields) {
  auto out = run_command("freedman", cfg_of({{"N", "12"}, {"p", "0.3"}, {"t", "1"}, {"epsilon", "0.2"}}));
  for (const char* k : {"gaussian_term", "term_P1", "term_P2", "term_P3", "total", "inputs_provenance"})
    EXPECT_TRUE(out.contains(k)) << k;
  EXPECT_EQ(out["inputs_provenance"], "exact");
  auto mc = run_command("freedman", cfg_of({{"N", "12"}, {"p", "0.3"}, {"t", "1"}, {"epsilon", "0.2"},
                                            {"probs", "mc"}, {"n", "2000"}}));
  EXPECT_EQ(mc["inputs_provenance"], "monte_carlo");
}

TEST(Runner, OtherCommandsProduceJson) {
  auto ps = run_command("psi-star", cfg_of({{"N", "9"}, {"t", "4"}}));
  EXPECT_EQ(ps["size"], 5);
  EXPECT_EQ(ps["witness"].size(), 5u);
  auto none = run_command("psi-star", cfg_of({{"N", "5"}, {"t", "100"}}));
  EXPECT_TRUE(none["infinite"].get<bool>());
  EXPECT_TRUE(none["size"].is_null());
  auto seed = run_command("min-seed", cfg_of({{"N", "8"}, {"p", "0.3"}, {"t", "1"}}));
  EXPECT_GE(seed["psi"].get<double>(), 1.0);
  auto jan = run_command("janson", cfg_of({{"universe", "8"}, {"sets", "[[0,1],[2,3,4],[5]]"}, {"s", "3"}}));
  EXPECT_LE(jan["exact"].get<double>(), jan["bound"].get<double>());
  auto fm = run_command("fact-moment", cfg_of({{"N", "4"}, {"p", "0.5"}, {"t", "2"}}));
  // {1,2,3} and {2,3,4}, two ordered pairs with a 4-element union
  EXPECT_DOUBLE_EQ(fm["value"].get<double>(), 2 * 0.0625);
  auto emb = run_command("emb", cfg_of({{"edges", "[[0,1,2],[2,3,4]]"}, {"sub", "[0,1]"}}));
  EXPECT_EQ(emb["root_edge"], 0);
  EXPECT_EQ(emb["marks"].size(), 1u);
  const std::string csv = temp_path("census.csv");
  auto cl = run_command("clusters", cfg_of({{"N", "8"}, {"p", "0.2"}, {"t", "1"}, {"s_max", "2"}, {"out", csv.c_str()}}));
  EXPECT_EQ(count_lines(csv), 1 + static_cast<int>(cl["rows"].size()));
  auto sp = run_command("sprinkle", cfg_of({{"N", "8"}, {"p", "0.2"}, {"u", "1"}}));
  EXPECT_GE(sp["tilting_slack"].get<double>(), -1e-9);
  auto is = run_command("tail-is", cfg_of({{"N", "10"}, {"p", "0.25"}, {"t", "1"}, {"n", "2000"}}));
  EXPECT_GT(is["tilt_kl"].get<double>(), 0.0);
}
