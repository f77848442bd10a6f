#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace aptail {

struct AcceptanceConfig {
  std::uint64_t seed = 20240611;
  std::uint64_t mc_samples = 1'000'000;  // criterion 2
  std::uint64_t is_samples = 200'000;    // criterion 3, per seed
  double core_epsilon = 0.5;             // criterion 6, interval cores
  double xi0 = 0.05;                     // criterion 6, largest xi tested
  int phase_N = 100'000'000;             // criterion 12
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  bool gating = true;
  std::string detail;
  double seconds = 0.0;
};

inline constexpr int kCriterionCount = 13;

// Exceptions inside a criterion become a failure with the message as detail.
CriterionResult run_criterion(int id, const AcceptanceConfig& cfg = {});

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids,
                                            const AcceptanceConfig& cfg = {});

// "PASS  3  importance sampling ... (1.2 s)"
std::string format_result(const CriterionResult& r);

// true when every gating criterion passed
bool gating_passed(const std::vector<CriterionResult>& results);

}  // namespace aptail
