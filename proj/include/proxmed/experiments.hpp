#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "proxmed/estimators.hpp"
#include "proxmed/fixtures.hpp"

namespace proxmed {

struct EstimandRequest {
  Estimand estimand = Estimand::psi1;
  int a = 1;
  int a_prime = 0;
};

// Named nuisance components a pattern can corrupt: "h", "q", "p_a", "p_w".
using CorruptionPattern = std::vector<std::string>;

struct StudyConfig {
  AnySpec spec;
  std::string spec_name;
  std::vector<EstimandRequest> estimands;
  std::vector<Strategy> strategies;
  std::vector<CorruptionPattern> patterns{{}};  // robustness grid only
  int replications = 1;
  std::vector<std::size_t> sample_sizes;        // ascending
  std::uint64_t base_seed = 0;
  bool population_mode = false;
  int folds = 5;
  MinimaxOptions minimax;                       // convergence sweep fits
};

struct StudyRow {
  std::string estimand;
  std::string strategy;
  std::string pattern;       // "-" when empty
  std::size_t n = 0;         // 0 in population mode
  double reference = 0.0;    // identified functional on the exact population
  double mean_bias = 0.0;
  double mc_se = 0.0;        // sd of the replication points / sqrt(R)
  double if_se_avg = 0.0;    // average IF-based SE (s5 only)
  double coverage = -1.0;    // 95% CI coverage rate (s5 only), -1 if n/a
  bool expected_unbiased = true;
  double mse = -1.0;         // convergence sweep only
  double runtime_sec = 0.0;
};

struct StudyReport {
  std::vector<StudyRow> rows;
};

// The corruption operators used by the grid: conditional tables are
// multiplied cellwise by (1 + 0.3 * sign) with a deterministic sign pattern
// and renormalized; bridges get +0.3 on one treatment slice.
NuisanceSet corrupt_propensity(NuisanceSet nu, std::uint64_t seed);
NuisanceSet corrupt_w_law(NuisanceSet nu, std::uint64_t seed);
TabularBridge corrupt_bridge(TabularBridge b);

// True when some Theorem-style valid pair for the estimand survives the
// pattern (3 pairs for psi1, 4 for psi2/psi3).
bool pattern_leaves_valid_pair(Estimand e, const CorruptionPattern& pattern);

// Multiple-robustness grid over the configured corruption patterns. In
// population mode each pattern is evaluated exactly on the enumerated
// population; in sampling mode nuisances are fit per replication, corrupted,
// and the MR value evaluated on the sample (the empty pattern runs the real
// cross-fitted estimator and reports CI coverage).
StudyReport run_robustness_grid(const StudyConfig& cfg);

// Bridge mean-squared error versus n at the data points, with paired seeds
// across the ladder. Gaussian specs fit the minimax bridges against the
// analytic b*w + c*a + d*x; discrete specs fit the tabular plug-ins against
// the oracle tables.
StudyReport run_convergence_sweep(const StudyConfig& cfg);

void write_report_csv(const StudyReport& rep, std::ostream& os);
nlohmann::json to_json(const StudyReport& rep);

// Parses the documented study-config JSON (see docs/schemas.md).
StudyConfig study_config_from_json(const nlohmann::json& j);

}  // namespace proxmed
