#pragma once

#include <string>
#include <vector>

#include "proxmed/nuisance.hpp"
#include "proxmed/population.hpp"
#include "proxmed/table.hpp"

namespace proxmed {

// Counterfactual means for one (a, a_prime) request:
//   psi1 = E[Y^(a', M^(a))], psi2 = E[Y^(a)], psi3 = E[Y^(M^(a))].
struct EstimandValue {
  double psi1 = 0.0;
  double psi2 = 0.0;
  double psi3 = 0.0;
};

enum class BridgeKind { outcome_h, treatment_q };

// Exact bridge function solved from population conditionals as a finite
// linear system. `values` is laid out [x][a][w] for h and [x][a'][z] for q.
// Existence is declared iff the stacked residual stays below kExistTol.
struct TabularBridge {
  BridgeKind kind = BridgeKind::outcome_h;
  Table values;
  int target_a = -1;  // only meaningful for treatment_q
  double residual_norm = 0.0;
  std::vector<std::string> positivity_failures;  // q only: zero-denominator cells
  std::vector<std::string> empty_cells;          // empirical fits: unpopulated rows

  static constexpr double kExistTol = 1e-8;
  bool exists() const { return residual_norm < kExistTol; }
  double h(int x, int a, int w) const { return values.at(x, a, w); }
  double q(int x, int a_prime, int z) const { return values.at(x, a_prime, z); }
};

// Per-(a,x) numeric ranks of the mediator-vs-proxy mixing matrices; the
// completeness condition holds iff every slice has rank m_levels.
struct CompletenessReport {
  enum class Side { z_side, w_side };
  Side side = Side::z_side;
  int required_rank = 0;
  Table ranks;  // [x][a], integral values stored as doubles
  bool complete = true;
};

// Ground truth by structural intervention; all three estimands are computed
// for any spec, the caller decides which ones its model kind identifies.
EstimandValue true_estimands(const ScmSpec& spec, int a, int a_prime);

// Classical observed-mediator identification formulas, evaluated with
// test-only access to the joint including M.
EstimandValue observed_mediator_psi(const FullJoint& fj, int a, int a_prime);

// Solves E[h(W,A,X)|Z,A,X] = E[Y|Z,A,X] per (a,x) slice by minimum-norm
// least squares over the cells with positive mass.
TabularBridge solve_outcome_bridge(const PopulationJoint& pop);

// Solves E[q_a(Z,A,X)|W,A=a',X] = p(W|a,X)/p(W|a',X) per (a',x) slice.
TabularBridge solve_treatment_bridge(const PopulationJoint& pop, int a);

CompletenessReport check_completeness(const FullJoint& fj, CompletenessReport::Side side);

// psi1 = sum_{w,x} h(w,a',x) p(w|a,x) p(x); psi2 averages the a' slice over
// p(a'|x); psi3 coincides with psi2.
EstimandValue population_psi_via_h(const PopulationJoint& pop, const TabularBridge& h, int a,
                                   int a_prime);

// psi1 = E[1{A=a'}/p(a'|X) Y q_a(Z,A,X)]; psi2 = E[Y q_a(Z,A,X)]; psi3 = psi2.
EstimandValue population_psi_via_q(const PopulationJoint& pop, const TabularBridge& q, int a,
                                   int a_prime);

enum class IfTarget { psi1, psi2 };

// Population mean of the Corollary-1 integrand (the influence function
// without its -psi recentring term). With exact inputs this equals the
// identified estimand; it is the quantity the multiple-robustness statement
// protects.
double population_mr_value(const PopulationJoint& pop, const TabularBridge& h,
                           const TabularBridge& q, const NuisanceSet& nu, IfTarget which, int a,
                           int a_prime);

// Population mean of the influence function recentred by `psi`; zero when
// every input is exact.
double population_if_mean(const PopulationJoint& pop, const TabularBridge& h,
                          const TabularBridge& q, const NuisanceSet& nu, IfTarget which, int a,
                          int a_prime, double psi);

// Population mean of the bracketed estimating-equation term for the
// treatment bridge: zero for every test function g(w,a,x) when q and the
// nuisance laws are exact. `g` is laid out [x][a][w].
double drq_if_mean(const PopulationJoint& pop, const TabularBridge& q, const Table& g, int a);

}  // namespace proxmed
