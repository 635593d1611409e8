#include "proxmed/estimators.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "proxmed/dgp.hpp"

namespace proxmed {

std::string to_string(Estimand e) {
  switch (e) {
    case Estimand::psi1: return "psi1";
    case Estimand::psi2: return "psi2";
    case Estimand::psi3: return "psi3";
  }
  return "?";
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::s1_hw: return "s1_hw";
    case Strategy::s2_qa: return "s2_qa";
    case Strategy::s3_ha: return "s3_ha";
    case Strategy::s4_hqa: return "s4_hqa";
    case Strategy::s5_mr: return "s5_mr";
  }
  return "?";
}

std::optional<Estimand> estimand_from_string(const std::string& s) {
  if (s == "psi1") return Estimand::psi1;
  if (s == "psi2") return Estimand::psi2;
  if (s == "psi3") return Estimand::psi3;
  return std::nullopt;
}

std::optional<Strategy> strategy_from_string(const std::string& s) {
  if (s == "s1" || s == "s1_hw") return Strategy::s1_hw;
  if (s == "s2" || s == "s2_qa") return Strategy::s2_qa;
  if (s == "s3" || s == "s3_ha") return Strategy::s3_ha;
  if (s == "s4" || s == "s4_hqa") return Strategy::s4_hqa;
  if (s == "s5" || s == "s5_mr") return Strategy::s5_mr;
  return std::nullopt;
}

BridgeEval make_eval(const TabularBridge& b) {
  return [b](double v, int a, double x) {
    return b.values.at(static_cast<int>(std::llround(x)), a, static_cast<int>(std::llround(v)));
  };
}

BridgeEval make_eval(const KernelBridge& b) {
  return [b](double v, int a, double x) { return b.eval(v, a, x); };
}

namespace {

void require_discrete(const Dataset& data, const char* who) {
  if (!data.discrete)
    throw std::invalid_argument(std::string(who) + ": tabular nuisances need discrete data");
}

int xi(const Dataset::Row& r) { return static_cast<int>(std::llround(r.x)); }

template <typename F>
double weighted_mean(const Dataset& data, F&& f) {
  double s = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double w = data.weight(i);
    s += w * f(data.rows[i]);
    wsum += w;
  }
  return s / wsum;
}

EstimateResult base_result(const Dataset& data, Estimand e, Strategy s, int a, int a_prime) {
  EstimateResult r;
  r.estimand = e;
  r.strategy = s;
  r.a = a;
  r.a_prime = a_prime;
  r.n = data.n();
  r.seed = data.seed;
  return r;
}

std::string tag(const char* name, const std::string& prov) {
  return std::string(name) + "=" + prov;
}

// eta1 with a BridgeEval instead of an integer-typed HFn
double eta1_eval(const BridgeEval& h, const NuisanceSet& nu, int x, int a_prime, int a) {
  double s = 0.0;
  for (int w = 0; w < nu.w_levels(); ++w)
    s += h(static_cast<double>(w), a_prime, static_cast<double>(x)) * nu.pw(x, a, w);
  return s;
}

double hbar_eval(const BridgeEval& h, const NuisanceSet& nu, double w, int x) {
  double s = 0.0;
  for (int a1 = 0; a1 < nu.a_levels(); ++a1)
    s += h(w, a1, static_cast<double>(x)) * nu.pa(x, a1);
  return s;
}

double eta2_eval(const BridgeEval& h, const NuisanceSet& nu, int x, int a) {
  double s = 0.0;
  for (int a1 = 0; a1 < nu.a_levels(); ++a1) s += eta1_eval(h, nu, x, a1, a) * nu.pa(x, a1);
  return s;
}

double mr_integrand_psi1(const Dataset::Row& r, const BridgeEval& h, const BridgeEval& q,
                         const NuisanceSet& nu, int a, int a_prime) {
  const int x = xi(r);
  const double e1 = eta1_eval(h, nu, x, a_prime, a);
  double v = e1;
  if (r.a == a_prime)
    v += q(r.z, r.a, r.x) * (r.y - h(r.w, r.a, r.x)) / nu.pa(x, a_prime);
  if (r.a == a) v += (h(r.w, a_prime, r.x) - e1) / nu.pa(x, a);
  return v;
}

double mr_integrand_psi2(const Dataset::Row& r, const BridgeEval& h, const BridgeEval& q,
                         const NuisanceSet& nu, int a) {
  const int x = xi(r);
  double v = q(r.z, r.a, r.x) * (r.y - h(r.w, r.a, r.x)) + eta1_eval(h, nu, x, r.a, a);
  if (r.a == a) v += (hbar_eval(h, nu, r.w, x) - eta2_eval(h, nu, x, a)) / nu.pa(x, a);
  return v;
}

void attach_if_se(EstimateResult& res, const std::vector<double>& phi,
                  const std::vector<double>& wts) {
  double mean = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    mean += wts[i] * phi[i];
    wsum += wts[i];
  }
  mean /= wsum;
  double var = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double d = phi[i] - mean;
    var += wts[i] / wsum * d * d;
  }
  res.point = mean;
  const double se = std::sqrt(var / static_cast<double>(phi.size()));
  res.std_error = se;
  res.ci_95 = std::make_pair(mean - 1.96 * se, mean + 1.96 * se);
}

}  // namespace

EstimateResult psi1_s1(const Dataset& data, const BridgeEval& h, const NuisanceSet& nu, int a,
                       int a_prime) {
  require_discrete(data, "psi1_s1");
  EstimateResult res = base_result(data, Estimand::psi1, Strategy::s1_hw, a, a_prime);
  res.point = weighted_mean(data, [&](const Dataset::Row& r) {
    return eta1_eval(h, nu, xi(r), a_prime, a);
  });
  res.nuisance_provenance = "h;" + tag("p_w", nu.w_law_provenance);
  return res;
}

EstimateResult psi1_s2(const Dataset& data, const BridgeEval& q, const NuisanceSet& nu, int a,
                       int a_prime) {
  require_discrete(data, "psi1_s2");
  EstimateResult res = base_result(data, Estimand::psi1, Strategy::s2_qa, a, a_prime);
  res.point = weighted_mean(data, [&](const Dataset::Row& r) {
    if (r.a != a_prime) return 0.0;
    return r.y * q(r.z, r.a, r.x) / nu.pa(xi(r), a_prime);
  });
  res.nuisance_provenance = "q;" + tag("p_a", nu.propensity_provenance);
  return res;
}

EstimateResult psi1_s3(const Dataset& data, const BridgeEval& h, const NuisanceSet& nu, int a,
                       int a_prime, bool display_form) {
  require_discrete(data, "psi1_s3");
  EstimateResult res = base_result(data, Estimand::psi1, Strategy::s3_ha, a, a_prime);
  res.point = weighted_mean(data, [&](const Dataset::Row& r) {
    if (r.a != a) return 0.0;
    const double hv = display_form ? h(r.w, r.a, r.x) : h(r.w, a_prime, r.x);
    return hv / nu.pa(xi(r), a);
  });
  res.nuisance_provenance = "h;" + tag("p_a", nu.propensity_provenance);
  return res;
}

EstimateResult psi1_s4(const Dataset& data, const BridgeEval& h, const BridgeEval& q,
                       const NuisanceSet& nu, int a, int a_prime) {
  require_discrete(data, "psi1_s4");
  EstimateResult res = base_result(data, Estimand::psi1, Strategy::s4_hqa, a, a_prime);
  res.point = weighted_mean(data, [&](const Dataset::Row& r) {
    if (r.a != a_prime) return 0.0;
    return h(r.w, r.a, r.x) * q(r.z, r.a, r.x) / nu.pa(xi(r), a_prime);
  });
  res.nuisance_provenance = "h;q;" + tag("p_a", nu.propensity_provenance);
  return res;
}

EstimateResult psi1_s5_mr(const Dataset& data, const BridgeEval& h, const BridgeEval& q,
                          const NuisanceSet& nu, int a, int a_prime) {
  require_discrete(data, "psi1_s5_mr");
  EstimateResult res = base_result(data, Estimand::psi1, Strategy::s5_mr, a, a_prime);
  std::vector<double> phi(data.n()), wts(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    phi[i] = mr_integrand_psi1(data.rows[i], h, q, nu, a, a_prime);
    wts[i] = data.weight(i);
  }
  attach_if_se(res, phi, wts);
  res.nuisance_provenance = "h;q;" + tag("p_a", nu.propensity_provenance) + ";" +
                            tag("p_w", nu.w_law_provenance);
  return res;
}

EstimateResult psi2_s1(const Dataset& data, const BridgeEval& h, const NuisanceSet& nu, int a) {
  require_discrete(data, "psi2_s1");
  EstimateResult res = base_result(data, Estimand::psi2, Strategy::s1_hw, a, -1);
  res.point = weighted_mean(data, [&](const Dataset::Row& r) {
    return eta1_eval(h, nu, xi(r), r.a, a);
  });
  res.nuisance_provenance = "h;" + tag("p_w", nu.w_law_provenance);
  return res;
}

EstimateResult psi2_s2(const Dataset& data, const BridgeEval& q, const NuisanceSet& nu, int a) {
  require_discrete(data, "psi2_s2");
  EstimateResult res = base_result(data, Estimand::psi2, Strategy::s2_qa, a, -1);
  res.point = weighted_mean(data, [&](const Dataset::Row& r) { return r.y * q(r.z, r.a, r.x); });
  res.nuisance_provenance = "q";
  (void)nu;
  return res;
}

EstimateResult psi2_s3(const Dataset& data, const BridgeEval& h, const NuisanceSet& nu, int a) {
  require_discrete(data, "psi2_s3");
  EstimateResult res = base_result(data, Estimand::psi2, Strategy::s3_ha, a, -1);
  res.point = weighted_mean(data, [&](const Dataset::Row& r) {
    if (r.a != a) return 0.0;
    return hbar_eval(h, nu, r.w, xi(r)) / nu.pa(xi(r), a);
  });
  res.nuisance_provenance = "h;" + tag("p_a", nu.propensity_provenance);
  return res;
}

EstimateResult psi2_s4(const Dataset& data, const BridgeEval& h, const BridgeEval& q,
                       const NuisanceSet& nu, int a) {
  require_discrete(data, "psi2_s4");
  EstimateResult res = base_result(data, Estimand::psi2, Strategy::s4_hqa, a, -1);
  res.point = weighted_mean(data, [&](const Dataset::Row& r) {
    return h(r.w, r.a, r.x) * q(r.z, r.a, r.x);
  });
  res.nuisance_provenance = "h;q";
  (void)nu;
  return res;
}

EstimateResult psi2_s5_mr(const Dataset& data, const BridgeEval& h, const BridgeEval& q,
                          const NuisanceSet& nu, int a) {
  require_discrete(data, "psi2_s5_mr");
  EstimateResult res = base_result(data, Estimand::psi2, Strategy::s5_mr, a, -1);
  std::vector<double> phi(data.n()), wts(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    phi[i] = mr_integrand_psi2(data.rows[i], h, q, nu, a);
    wts[i] = data.weight(i);
  }
  attach_if_se(res, phi, wts);
  res.nuisance_provenance = "h;q;" + tag("p_a", nu.propensity_provenance) + ";" +
                            tag("p_w", nu.w_law_provenance);
  return res;
}

EstimateResult psi3(const Dataset& data, Strategy strategy, const BridgeEval& h,
                    const BridgeEval& q, const NuisanceSet& nu, int a) {
  EstimateResult res;
  switch (strategy) {
    case Strategy::s1_hw: res = psi2_s1(data, h, nu, a); break;
    case Strategy::s2_qa: res = psi2_s2(data, q, nu, a); break;
    case Strategy::s3_ha: res = psi2_s3(data, h, nu, a); break;
    case Strategy::s4_hqa: res = psi2_s4(data, h, q, nu, a); break;
    case Strategy::s5_mr: res = psi2_s5_mr(data, h, q, nu, a); break;
  }
  res.estimand = Estimand::psi3;
  return res;
}

double LogisticPropensity::operator()(int a, double x) const {
  const double p1 = 1.0 / (1.0 + std::exp(-(intercept + slope * x)));
  return a == 1 ? p1 : 1.0 - p1;
}

LogisticPropensity fit_logistic_propensity(const Dataset& data) {
  if (data.a_levels != 2)
    throw std::invalid_argument("fit_logistic_propensity: binary treatment only");
  double b0 = 0.0, b1 = 0.0;
  for (int iter = 0; iter < 50; ++iter) {
    double g0 = 0, g1 = 0, h00 = 0, h01 = 0, h11 = 0;
    for (std::size_t i = 0; i < data.n(); ++i) {
      const auto& r = data.rows[i];
      const double w = data.weight(i);
      const double p = 1.0 / (1.0 + std::exp(-(b0 + b1 * r.x)));
      const double d = (r.a == 1 ? 1.0 : 0.0) - p;
      g0 += w * d;
      g1 += w * d * r.x;
      const double v = p * (1.0 - p);
      h00 += w * v;
      h01 += w * v * r.x;
      h11 += w * v * r.x * r.x;
    }
    const double det = h00 * h11 - h01 * h01;
    if (std::abs(det) < 1e-12) break;
    const double s0 = (h11 * g0 - h01 * g1) / det;
    const double s1 = (h00 * g1 - h01 * g0) / det;
    b0 += s0;
    b1 += s1;
    if (std::abs(s0) + std::abs(s1) < 1e-10) break;
  }
  return {b0, b1};
}

namespace {

std::vector<int> fold_assignment(std::size_t n, int folds, std::uint64_t seed) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 g(splitmix64(seed ^ 0xC3A5C85C97CB3127ULL));
  std::shuffle(perm.begin(), perm.end(), g);
  std::vector<int> fold(n);
  for (std::size_t i = 0; i < n; ++i) fold[static_cast<std::size_t>(perm[i])] = static_cast<int>(i) % folds;
  return fold;
}

Dataset subset(const Dataset& data, const std::vector<int>& fold, int target, bool keep) {
  Dataset out;
  out.seed = data.seed;
  out.source = data.source;
  out.rng = data.rng;
  out.discrete = data.discrete;
  out.x_levels = data.x_levels;
  out.a_levels = data.a_levels;
  out.z_levels = data.z_levels;
  out.w_levels = data.w_levels;
  for (std::size_t i = 0; i < data.n(); ++i)
    if ((fold[i] == target) == keep) out.rows.push_back(data.rows[i]);
  return out;
}

// Nadaraya-Watson regression of vals on xs, gaussian kernel.
struct NwRegression {
  std::vector<double> xs, vals;
  double bw = 1.0;

  static NwRegression fit(std::vector<double> xs_, std::vector<double> vals_) {
    NwRegression r;
    r.xs = std::move(xs_);
    r.vals = std::move(vals_);
    const std::size_t n = r.xs.size();
    if (n >= 2) {
      double m = 0.0;
      for (double v : r.xs) m += v;
      m /= static_cast<double>(n);
      double var = 0.0;
      for (double v : r.xs) var += (v - m) * (v - m);
      const double sd = std::sqrt(var / static_cast<double>(n - 1));
      r.bw = std::max(1.06 * sd * std::pow(static_cast<double>(n), -0.2), 1e-3);
    }
    return r;
  }

  double operator()(double x) const {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const double u = (x - xs[j]) / bw;
      const double k = std::exp(-0.5 * u * u);
      num += k * vals[j];
      den += k;
    }
    return den > 0.0 ? num / den : 0.0;
  }
};

struct ContinuousEtas {
  // regressions within the A = a training arm
  NwRegression eta1_at_aprime;            // h(W, a', X) ~ X
  std::vector<NwRegression> eta1_at_arm;  // h(W, arm, X) ~ X, one per arm
  NwRegression eta2;                      // hbar(W, X) ~ X

  static ContinuousEtas fit(const Dataset& train, const BridgeEval& h,
                            const LogisticPropensity& prop, int a, int a_prime) {
    const bool want_aprime = a_prime >= 0 && a_prime < train.a_levels;
    std::vector<double> xs;
    std::vector<std::vector<double>> per_arm(static_cast<std::size_t>(train.a_levels));
    std::vector<double> vprime, vbar;
    for (const auto& r : train.rows) {
      if (r.a != a) continue;
      xs.push_back(r.x);
      if (want_aprime) vprime.push_back(h(r.w, a_prime, r.x));
      double hb = 0.0;
      for (int a1 = 0; a1 < train.a_levels; ++a1) hb += h(r.w, a1, r.x) * prop(a1, r.x);
      vbar.push_back(hb);
      for (int a1 = 0; a1 < train.a_levels; ++a1)
        per_arm[static_cast<std::size_t>(a1)].push_back(h(r.w, a1, r.x));
    }
    ContinuousEtas e;
    if (want_aprime) e.eta1_at_aprime = NwRegression::fit(xs, vprime);
    e.eta2 = NwRegression::fit(xs, vbar);
    for (auto& vals : per_arm) e.eta1_at_arm.push_back(NwRegression::fit(xs, vals));
    return e;
  }
};

struct FoldFit {
  BridgeEval h;
  BridgeEval q;
  NuisanceSet nu;                       // discrete path
  LogisticPropensity prop;              // continuous path
  ContinuousEtas etas;                  // continuous path
  std::string h_tag = "empirical";
  std::string q_tag = "empirical";
};

FoldFit fit_fold(const Dataset& train, const FitPlan& plan, int a, int a_prime) {
  FoldFit f;
  if (train.discrete && !plan.kernel_mode) {
    f.h = make_eval(fit_h_tabular(train));
    f.q = make_eval(fit_q_tabular(train, a));
    f.nu = fit_nuisances(train);
  } else if (train.discrete) {
    f.h = make_eval(fit_h_minimax(train, plan.minimax).bridge);
    f.nu = fit_nuisances(train);
    const NuisanceSet& nu = f.nu;
    f.q = make_eval(fit_q_minimax(train, plan.minimax, a,
                                  [&nu](int aa, double x) {
                                    return nu.pa(static_cast<int>(std::llround(x)), aa);
                                  })
                        .bridge);
    f.h_tag = "kernel";
    f.q_tag = "kernel";
  } else {
    f.h = make_eval(fit_h_minimax(train, plan.minimax).bridge);
    f.prop = fit_logistic_propensity(train);
    const LogisticPropensity prop = f.prop;
    f.q = make_eval(
        fit_q_minimax(train, plan.minimax, a,
                      [prop](int aa, double x) {
                        return std::clamp(prop(aa, x), NuisanceSet::kClipLo, NuisanceSet::kClipHi);
                      })
            .bridge);
    f.etas = ContinuousEtas::fit(train, f.h, f.prop, a, a_prime);
    f.h_tag = "kernel";
    f.q_tag = "kernel";
  }
  return f;
}

double crossfit_integrand(const Dataset::Row& r, const FoldFit& f, bool discrete,
                          Estimand estimand, int a, int a_prime) {
  if (discrete) {
    if (estimand == Estimand::psi1) return mr_integrand_psi1(r, f.h, f.q, f.nu, a, a_prime);
    return mr_integrand_psi2(r, f.h, f.q, f.nu, a);
  }
  auto clamp_p = [&](int aa) {
    return std::clamp(f.prop(aa, r.x), NuisanceSet::kClipLo, NuisanceSet::kClipHi);
  };
  if (estimand == Estimand::psi1) {
    const double e1 = f.etas.eta1_at_aprime(r.x);
    double v = e1;
    if (r.a == a_prime) v += f.q(r.z, r.a, r.x) * (r.y - f.h(r.w, r.a, r.x)) / clamp_p(a_prime);
    if (r.a == a) v += (f.h(r.w, a_prime, r.x) - e1) / clamp_p(a);
    return v;
  }
  double v = f.q(r.z, r.a, r.x) * (r.y - f.h(r.w, r.a, r.x)) +
             f.etas.eta1_at_arm[static_cast<std::size_t>(r.a)](r.x);
  if (r.a == a) {
    double hb = 0.0;
    for (int a1 = 0; a1 < 2; ++a1) hb += f.h(r.w, a1, r.x) * f.prop(a1, r.x);
    v += (hb - f.etas.eta2(r.x)) / clamp_p(a);
  }
  return v;
}

}  // namespace

EstimateResult psi_s5_crossfit(const Dataset& data, const FitPlan& plan, Estimand estimand, int a,
                               int a_prime) {
  if (plan.folds < 2) throw std::invalid_argument("psi_s5_crossfit: need K >= 2");
  if (!data.weights.empty())
    throw std::invalid_argument("psi_s5_crossfit: weighted data not supported; use the plug-in form");
  EstimateResult res = base_result(data, estimand, Strategy::s5_mr, a, a_prime);
  res.folds = plan.folds;
  res.seed = plan.seed;

  const std::vector<int> fold = fold_assignment(data.n(), plan.folds, plan.seed);
  std::vector<double> phi(data.n());
  bool small_fold = false;
  std::string prov;
  for (int k = 0; k < plan.folds; ++k) {
    const Dataset train = subset(data, fold, k, false);
    const Dataset test = subset(data, fold, k, true);
    if (test.n() < 50) small_fold = true;
    const FoldFit f = fit_fold(train, plan, a, a_prime);
    std::size_t j = 0;
    for (std::size_t i = 0; i < data.n(); ++i) {
      if (fold[i] != k) continue;
      phi[i] = crossfit_integrand(test.rows[j], f, data.discrete && !plan.kernel_mode, estimand,
                                  a, a_prime);
      ++j;
    }
    if (k == 0) {
      prov = tag("h", f.h_tag) + ";" + tag("q", f.q_tag) + ";" +
             tag("p_a", data.discrete && !plan.kernel_mode ? f.nu.propensity_provenance
                                                           : "logistic") +
             ";" +
             tag("p_w", data.discrete && !plan.kernel_mode ? f.nu.w_law_provenance
                                                           : "regression");
    }
  }
  std::vector<double> wts(data.n(), 1.0 / static_cast<double>(data.n()));
  attach_if_se(res, phi, wts);
  res.nuisance_provenance = prov + ";crossfit";
  if (small_fold) res.warnings.push_back("fold smaller than 50 records");
  return res;
}

EstimateResult estimate(const Dataset& data, const FitPlan& plan, Estimand estimand,
                        Strategy strategy, int a, int a_prime) {
  if (data.n() == 0) throw std::invalid_argument("estimate: empty dataset");
  if (a < 0 || a >= data.a_levels || ((estimand == Estimand::psi1) &&
                                      (a_prime < 0 || a_prime >= data.a_levels)))
    throw std::invalid_argument("estimate: treatment level out of range");

  if (strategy == Strategy::s5_mr) {
    EstimateResult r = psi_s5_crossfit(data, plan, estimand, a, a_prime);
    return r;
  }

  if (data.discrete && !plan.kernel_mode) {
    const NuisanceSet nu = fit_nuisances(data);
    BridgeEval h, q;
    if (strategy != Strategy::s2_qa) h = make_eval(fit_h_tabular(data));
    if (strategy == Strategy::s2_qa || strategy == Strategy::s4_hqa)
      q = make_eval(fit_q_tabular(data, a));
    switch (estimand) {
      case Estimand::psi1:
        switch (strategy) {
          case Strategy::s1_hw: return psi1_s1(data, h, nu, a, a_prime);
          case Strategy::s2_qa: return psi1_s2(data, q, nu, a, a_prime);
          case Strategy::s3_ha: return psi1_s3(data, h, nu, a, a_prime, plan.s3_display_form);
          case Strategy::s4_hqa: return psi1_s4(data, h, q, nu, a, a_prime);
          default: break;
        }
        break;
      case Estimand::psi2:
        switch (strategy) {
          case Strategy::s1_hw: return psi2_s1(data, h, nu, a);
          case Strategy::s2_qa: return psi2_s2(data, q, nu, a);
          case Strategy::s3_ha: return psi2_s3(data, h, nu, a);
          case Strategy::s4_hqa: return psi2_s4(data, h, q, nu, a);
          default: break;
        }
        break;
      case Estimand::psi3: return psi3(data, strategy, h, q, nu, a);
    }
    throw std::logic_error("estimate: unreachable");
  }

  // continuous (or forced-kernel) plug-in path
  const FoldFit f = fit_fold(data, plan, a, a_prime);
  EstimateResult res = base_result(data, estimand, strategy, a, a_prime);
  const bool tabular_nu = data.discrete;
  auto prop = [&](int aa, double x) {
    if (tabular_nu) return f.nu.pa(static_cast<int>(std::llround(x)), aa);
    return std::clamp(f.prop(aa, x), NuisanceSet::kClipLo, NuisanceSet::kClipHi);
  };
  const int a_eval = estimand == Estimand::psi1 ? a_prime : -1;
  switch (strategy) {
    case Strategy::s1_hw:
      res.point = weighted_mean(data, [&](const Dataset::Row& r) {
        if (tabular_nu) return eta1_eval(f.h, f.nu, xi(r), estimand == Estimand::psi1 ? a_prime : r.a, a);
        if (estimand == Estimand::psi1) return f.etas.eta1_at_aprime(r.x);
        return f.etas.eta1_at_arm[static_cast<std::size_t>(r.a)](r.x);
      });
      res.nuisance_provenance = "h;p_w=" + std::string(tabular_nu ? "empirical" : "regression");
      break;
    case Strategy::s2_qa:
      res.point = weighted_mean(data, [&](const Dataset::Row& r) {
        const double qv = f.q(r.z, r.a, r.x);
        if (estimand == Estimand::psi1)
          return r.a == a_eval ? r.y * qv / prop(a_eval, r.x) : 0.0;
        return r.y * qv;
      });
      res.nuisance_provenance = estimand == Estimand::psi1 ? "q;p_a" : "q";
      break;
    case Strategy::s3_ha:
      res.point = weighted_mean(data, [&](const Dataset::Row& r) {
        if (r.a != a) return 0.0;
        if (estimand == Estimand::psi1) {
          const double hv = plan.s3_display_form ? f.h(r.w, r.a, r.x) : f.h(r.w, a_prime, r.x);
          return hv / prop(a, r.x);
        }
        double hb = 0.0;
        for (int a1 = 0; a1 < data.a_levels; ++a1) hb += f.h(r.w, a1, r.x) * prop(a1, r.x);
        return hb / prop(a, r.x);
      });
      res.nuisance_provenance = "h;p_a";
      break;
    case Strategy::s4_hqa:
      res.point = weighted_mean(data, [&](const Dataset::Row& r) {
        const double hq = f.h(r.w, r.a, r.x) * f.q(r.z, r.a, r.x);
        if (estimand == Estimand::psi1)
          return r.a == a_eval ? hq / prop(a_eval, r.x) : 0.0;
        return hq;
      });
      res.nuisance_provenance = estimand == Estimand::psi1 ? "h;q;p_a" : "h;q";
      break;
    case Strategy::s5_mr:
      break;  // handled above
  }
  return res;
}

nlohmann::json to_json(const EstimateResult& r) {
  nlohmann::json j;
  j["estimand"] = to_string(r.estimand);
  j["strategy"] = to_string(r.strategy);
  j["a"] = r.a;
  if (r.estimand == Estimand::psi1) j["a_prime"] = r.a_prime;
  j["point"] = r.point;
  if (r.std_error) {
    j["std_error"] = *r.std_error;
    j["ci_95"] = {r.ci_95->first, r.ci_95->second};
  }
  j["nuisance_provenance"] = r.nuisance_provenance;
  j["n"] = r.n;
  if (r.folds > 0) j["folds"] = r.folds;
  j["seed"] = r.seed;
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  return j;
}

std::string estimate_csv_header() { return "estimand,strategy,a,a_prime,point,se,ci_lo,ci_hi,n,seed"; }

std::string to_csv_row(const EstimateResult& r) {
  std::ostringstream os;
  os.precision(17);
  os << to_string(r.estimand) << ',' << to_string(r.strategy) << ',' << r.a << ',';
  if (r.estimand == Estimand::psi1) os << r.a_prime;
  os << ',' << r.point << ',';
  if (r.std_error) os << *r.std_error;
  os << ',';
  if (r.ci_95) os << r.ci_95->first;
  os << ',';
  if (r.ci_95) os << r.ci_95->second;
  os << ',' << r.n << ',' << r.seed;
  return os.str();
}

}  // namespace proxmed
