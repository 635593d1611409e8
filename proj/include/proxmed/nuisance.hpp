#pragma once

#include <functional>
#include <string>

#include "proxmed/dataset.hpp"
#include "proxmed/population.hpp"
#include "proxmed/table.hpp"

namespace proxmed {

// Auxiliary laws consumed by the estimation strategies: the propensity
// p(a|x) and the outcome-side proxy law p(w|a,x). Provenance distinguishes
// exact population tables, empirical fits, and deliberately wrong fits used
// by the robustness harness.
struct NuisanceSet {
  Table propensity;  // [x][a]
  Table w_law;       // [x][a][w]
  std::string propensity_provenance = "exact";
  std::string w_law_provenance = "exact";
  bool propensity_clipped = false;

  static constexpr double kClipLo = 0.01;
  static constexpr double kClipHi = 0.99;

  double pa(int x, int a) const { return propensity.at(x, a); }
  double pw(int x, int a, int w) const { return w_law.at(x, a, w); }
  int x_levels() const { return propensity.dim(0); }
  int a_levels() const { return propensity.dim(1); }
  int w_levels() const { return w_law.dim(2); }
};

NuisanceSet exact_nuisances(const PopulationJoint& pop);

// Empirical frequency tables with Laplace smoothing of 0.5 per cell;
// propensities are clipped to [0.01, 0.99] (then renormalized) and the clip
// is recorded. Throws if a treatment arm or an x cell is entirely absent.
NuisanceSet fit_nuisances(const Dataset& data);

// Wrong-on-purpose variants for multiple-robustness experiments.
NuisanceSet with_constant_propensity(NuisanceSet nu);      // p(a|x) := uniform
NuisanceSet with_w_law_ignoring_a(NuisanceSet nu);         // p(w|a,x) := p(w|x)-style average

// Outcome bridge evaluated on the discrete support.
using HFn = std::function<double(int x, int a, int w)>;

// eta1(x,a',a) = E[h(W,a',x) | A=a, X=x] = sum_w h(w,a',x) p(w|a,x)
double eta1(const HFn& h, const NuisanceSet& nu, int x, int a_prime, int a);

// hbar(w,x) = sum_{a'} h(w,a',x) p(a'|x)
double hbar(const HFn& h, const NuisanceSet& nu, int w, int x);

// eta2(x,a) = sum_{a'} eta1(x,a',a) p(a'|x); the second route goes through
// hbar and must agree with the first exactly.
double eta2(const HFn& h, const NuisanceSet& nu, int x, int a);
double eta2_via_hbar(const HFn& h, const NuisanceSet& nu, int x, int a);

}  // namespace proxmed
