#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "proxmed/bridges.hpp"
#include "proxmed/dataset.hpp"
#include "proxmed/nuisance.hpp"
#include "proxmed/oracle.hpp"

namespace proxmed {

enum class Estimand { psi1, psi2, psi3 };
enum class Strategy { s1_hw, s2_qa, s3_ha, s4_hqa, s5_mr };

std::string to_string(Estimand e);
std::string to_string(Strategy s);
std::optional<Estimand> estimand_from_string(const std::string& s);
std::optional<Strategy> strategy_from_string(const std::string& s);

struct EstimateResult {
  Estimand estimand = Estimand::psi1;
  Strategy strategy = Strategy::s1_hw;
  int a = 1;
  int a_prime = 0;
  double point = 0.0;
  std::optional<double> std_error;                     // s5_mr only
  std::optional<std::pair<double, double>> ci_95;      // point +- 1.96 se
  std::string nuisance_provenance;                     // tags of consumed nuisances
  std::size_t n = 0;
  int folds = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

// Bridge evaluator on a record: h(w, a, x) or q(z, a', x). Tabular bridges
// and kernel bridges both adapt to this signature.
using BridgeEval = std::function<double(double v, int a, double x)>;

BridgeEval make_eval(const TabularBridge& b);
BridgeEval make_eval(const KernelBridge& b);

// Plug-in strategies for psi1 (discrete data; tabular nuisances).
//   s1: P_n[ sum_w h(w,a',X) p(w|a,X) ]
//   s2: P_n[ 1{A=a'}/p(a'|X) Y q(Z,A,X) ]
//   s3: P_n[ 1{A=a}/p(a|X) h(W,a',X) ]   (derivation form; the display form
//       evaluates h at the observed A and is available behind a flag)
//   s4: P_n[ 1{A=a'}/p(a'|X) h(W,A,X) q(Z,A,X) ]
//   s5: P_n of the Corollary-1 integrand, with an IF-based standard error.
EstimateResult psi1_s1(const Dataset& data, const BridgeEval& h, const NuisanceSet& nu, int a,
                       int a_prime);
EstimateResult psi1_s2(const Dataset& data, const BridgeEval& q, const NuisanceSet& nu, int a,
                       int a_prime);
EstimateResult psi1_s3(const Dataset& data, const BridgeEval& h, const NuisanceSet& nu, int a,
                       int a_prime, bool display_form = false);
EstimateResult psi1_s4(const Dataset& data, const BridgeEval& h, const BridgeEval& q,
                       const NuisanceSet& nu, int a, int a_prime);
EstimateResult psi1_s5_mr(const Dataset& data, const BridgeEval& h, const BridgeEval& q,
                          const NuisanceSet& nu, int a, int a_prime);

// psi2 counterparts.
//   s1: P_n[ sum_w h(w,A,X) p(w|a,X) ]
//   s2: P_n[ Y q(Z,A,X) ]
//   s3: P_n[ 1{A=a}/p(a|X) sum_{a'} h(W,a',X) p(a'|X) ]
//   s4: P_n[ h(W,A,X) q(Z,A,X) ]
//   s5: Corollary-1 psi2 integrand.
EstimateResult psi2_s1(const Dataset& data, const BridgeEval& h, const NuisanceSet& nu, int a);
EstimateResult psi2_s2(const Dataset& data, const BridgeEval& q, const NuisanceSet& nu, int a);
EstimateResult psi2_s3(const Dataset& data, const BridgeEval& h, const NuisanceSet& nu, int a);
EstimateResult psi2_s4(const Dataset& data, const BridgeEval& h, const BridgeEval& q,
                       const NuisanceSet& nu, int a);
EstimateResult psi2_s5_mr(const Dataset& data, const BridgeEval& h, const BridgeEval& q,
                          const NuisanceSet& nu, int a);

// Everything estimating psi2 also estimates psi3: same formulas, different
// estimand tag.
EstimateResult psi3(const Dataset& data, Strategy strategy, const BridgeEval& h,
                    const BridgeEval& q, const NuisanceSet& nu, int a);

// End-to-end pipeline configuration: how bridges and nuisances are fit from
// data before a strategy is evaluated.
struct FitPlan {
  int folds = 5;               // s5 cross-fitting
  std::uint64_t seed = 0;
  bool kernel_mode = false;    // force kernels even on discrete data
  MinimaxOptions minimax;
  bool s3_display_form = false;
};

// Cross-fitted multiple-robust estimator: all nuisances are fit on
// out-of-fold data, the integrand is evaluated on the held-out fold. Fold
// assignment is a deterministic function of (seed, folds).
EstimateResult psi_s5_crossfit(const Dataset& data, const FitPlan& plan, Estimand estimand, int a,
                               int a_prime);

// Fits whatever the strategy needs (plug-in bridges and nuisances for s1-s4,
// cross-fitting for s5) and evaluates it. The entry point behind the CLI.
EstimateResult estimate(const Dataset& data, const FitPlan& plan, Estimand estimand,
                        Strategy strategy, int a, int a_prime);

// Binary-treatment logistic propensity for continuous covariates.
struct LogisticPropensity {
  double intercept = 0.0;
  double slope = 0.0;
  double operator()(int a, double x) const;
};
LogisticPropensity fit_logistic_propensity(const Dataset& data);

nlohmann::json to_json(const EstimateResult& r);
std::string to_csv_row(const EstimateResult& r);   // matches the documented header
std::string estimate_csv_header();

}  // namespace proxmed
