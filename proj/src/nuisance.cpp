#include "proxmed/nuisance.hpp"

#include <cmath>
#include <stdexcept>

namespace proxmed {

NuisanceSet exact_nuisances(const PopulationJoint& pop) {
  const FiniteSpace& sp = pop.space;
  NuisanceSet nu;
  nu.propensity = Table({sp.x_levels, sp.a_levels});
  nu.w_law = Table({sp.x_levels, sp.a_levels, sp.w_levels});
  for (int x = 0; x < sp.x_levels; ++x)
    for (int a = 0; a < sp.a_levels; ++a) {
      nu.propensity.at(x, a) = pop.p_a_given_x(x, a);
      for (int w = 0; w < sp.w_levels; ++w) nu.w_law.at(x, a, w) = pop.p_w_given_ax(x, a, w);
    }
  nu.propensity_provenance = "exact";
  nu.w_law_provenance = "exact";
  return nu;
}

NuisanceSet fit_nuisances(const Dataset& data) {
  if (!data.discrete) throw std::invalid_argument("fit_nuisances: needs discrete data");
  if (data.x_levels < 1 || data.a_levels < 2 || data.w_levels < 1)
    throw std::invalid_argument("fit_nuisances: level counts unknown");
  const int X = data.x_levels, A = data.a_levels, W = data.w_levels;
  constexpr double kSmooth = 0.5;

  Table n_xa({X, A});
  Table n_x({X});
  Table n_xaw({X, A, W});
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto& r = data.rows[i];
    const double wt = data.weights.empty() ? 1.0 : data.weight(i) * static_cast<double>(data.n());
    const int x = static_cast<int>(r.x), w = static_cast<int>(r.w);
    n_x.at(x) += wt;
    n_xa.at(x, r.a) += wt;
    n_xaw.at(x, r.a, w) += wt;
  }
  for (int x = 0; x < X; ++x) {
    if (n_x.at(x) <= 0.0) throw std::invalid_argument("fit_nuisances: empty x cell");
    for (int a = 0; a < A; ++a) {
      double arm_total = 0.0;
      for (int xx = 0; xx < X; ++xx) arm_total += n_xa.at(xx, a);
      if (arm_total <= 0.0) throw std::invalid_argument("fit_nuisances: missing treatment arm");
    }
  }

  NuisanceSet nu;
  nu.propensity = Table({X, A});
  nu.w_law = Table({X, A, W});
  for (int x = 0; x < X; ++x) {
    for (int a = 0; a < A; ++a) {
      nu.propensity.at(x, a) = (n_xa.at(x, a) + kSmooth) / (n_x.at(x) + kSmooth * A);
      for (int w = 0; w < W; ++w)
        nu.w_law.at(x, a, w) = (n_xaw.at(x, a, w) + kSmooth) / (n_xa.at(x, a) + kSmooth * W);
    }
    // clip propensities, then restore the sum-to-one invariant
    double s = 0.0;
    for (int a = 0; a < A; ++a) {
      double& p = nu.propensity.at(x, a);
      if (p < NuisanceSet::kClipLo || p > NuisanceSet::kClipHi) {
        p = std::clamp(p, NuisanceSet::kClipLo, NuisanceSet::kClipHi);
        nu.propensity_clipped = true;
      }
      s += p;
    }
    for (int a = 0; a < A; ++a) nu.propensity.at(x, a) /= s;
  }
  nu.propensity_provenance = "empirical";
  nu.w_law_provenance = "empirical";
  return nu;
}

NuisanceSet with_constant_propensity(NuisanceSet nu) {
  const int X = nu.x_levels(), A = nu.a_levels();
  for (int x = 0; x < X; ++x)
    for (int a = 0; a < A; ++a) nu.propensity.at(x, a) = 1.0 / A;
  nu.propensity_provenance = "misspecified(constant_propensity)";
  return nu;
}

NuisanceSet with_w_law_ignoring_a(NuisanceSet nu) {
  const int X = nu.x_levels(), A = nu.a_levels(), W = nu.w_levels();
  for (int x = 0; x < X; ++x)
    for (int w = 0; w < W; ++w) {
      double avg = 0.0;
      for (int a = 0; a < A; ++a) avg += nu.w_law.at(x, a, w);
      avg /= A;
      for (int a = 0; a < A; ++a) nu.w_law.at(x, a, w) = avg;
    }
  nu.w_law_provenance = "misspecified(w_law_ignores_a)";
  return nu;
}

double eta1(const HFn& h, const NuisanceSet& nu, int x, int a_prime, int a) {
  double s = 0.0;
  for (int w = 0; w < nu.w_levels(); ++w) s += h(x, a_prime, w) * nu.pw(x, a, w);
  return s;
}

double hbar(const HFn& h, const NuisanceSet& nu, int w, int x) {
  double s = 0.0;
  for (int a1 = 0; a1 < nu.a_levels(); ++a1) s += h(x, a1, w) * nu.pa(x, a1);
  return s;
}

double eta2(const HFn& h, const NuisanceSet& nu, int x, int a) {
  double s = 0.0;
  for (int a1 = 0; a1 < nu.a_levels(); ++a1) s += eta1(h, nu, x, a1, a) * nu.pa(x, a1);
  return s;
}

double eta2_via_hbar(const HFn& h, const NuisanceSet& nu, int x, int a) {
  double s = 0.0;
  for (int w = 0; w < nu.w_levels(); ++w) s += hbar(h, nu, w, x) * nu.pw(x, a, w);
  return s;
}

}  // namespace proxmed
