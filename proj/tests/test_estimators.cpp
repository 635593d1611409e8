#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "proxmed/dgp.hpp"
#include "proxmed/estimators.hpp"
#include "proxmed/fixtures.hpp"
#include "support/specs.hpp"

using namespace proxmed;

namespace {

struct PopSetup {
  ScmSpec spec;
  PopulationJoint pop;
  Dataset data;
  NuisanceSet nu;
  TabularBridge h;
  TabularBridge q;
  BridgeEval he, qe;
  EstimandValue via_h;

  explicit PopSetup(const ScmSpec& s, int a, int a_prime) : spec(s), pop(to_population(s)) {
    data = dataset_from_population(pop);
    nu = exact_nuisances(pop);
    h = solve_outcome_bridge(pop);
    q = solve_treatment_bridge(pop, a);
    he = make_eval(h);
    qe = make_eval(q);
    via_h = population_psi_via_h(pop, h, a, a_prime);
  }
};

// bridge corruption used by the robustness checks: +0.3 on one slice
TabularBridge corrupt_bridge(TabularBridge b) {
  for (int v = 0; v < b.values.dim(2); ++v) b.values.at(0, 1, v) += 0.3;
  return b;
}

}  // namespace

TEST_CASE("population exactness of every strategy") {
  for (const std::string& name : {"D1", "F1", "G1"}) {
    const ScmSpec s = std::get<ScmSpec>(*fixture(name));
    const int a = 1, a1 = 0;
    PopSetup P(s, a, a1);
    const EstimandValue vq = population_psi_via_q(P.pop, P.q, a, a1);
    INFO("fixture ", name);
    CHECK(psi1_s1(P.data, P.he, P.nu, a, a1).point == doctest::Approx(P.via_h.psi1).epsilon(1e-10));
    CHECK(psi1_s2(P.data, P.qe, P.nu, a, a1).point == doctest::Approx(vq.psi1).epsilon(1e-10));
    CHECK(psi1_s3(P.data, P.he, P.nu, a, a1).point == doctest::Approx(P.via_h.psi1).epsilon(1e-10));
    CHECK(psi1_s4(P.data, P.he, P.qe, P.nu, a, a1).point ==
          doctest::Approx(P.via_h.psi1).epsilon(1e-10));
    CHECK(psi1_s5_mr(P.data, P.he, P.qe, P.nu, a, a1).point ==
          doctest::Approx(P.via_h.psi1).epsilon(1e-10));
    CHECK(psi2_s1(P.data, P.he, P.nu, a).point == doctest::Approx(P.via_h.psi2).epsilon(1e-10));
    CHECK(psi2_s2(P.data, P.qe, P.nu, a).point == doctest::Approx(vq.psi2).epsilon(1e-10));
    CHECK(psi2_s3(P.data, P.he, P.nu, a).point == doctest::Approx(P.via_h.psi2).epsilon(1e-10));
    CHECK(psi2_s4(P.data, P.he, P.qe, P.nu, a).point ==
          doctest::Approx(P.via_h.psi2).epsilon(1e-10));
    CHECK(psi2_s5_mr(P.data, P.he, P.qe, P.nu, a).point ==
          doctest::Approx(P.via_h.psi2).epsilon(1e-10));
    // psi3 delegates to the psi2 formulas and tags the estimand
    const EstimateResult r3 = psi3(P.data, Strategy::s4_hqa, P.he, P.qe, P.nu, a);
    CHECK(r3.estimand == Estimand::psi3);
    CHECK(r3.point == doctest::Approx(P.via_h.psi3).epsilon(1e-10));
  }
}

TEST_CASE("constant bridges and outcomes give the expected reductions") {
  const ScmSpec s = std::get<ScmSpec>(*fixture("D1"));
  PopSetup P(s, 1, 0);
  const BridgeEval const_h = [](double, int, double) { return 2.5; };
  CHECK(psi1_s1(P.data, const_h, P.nu, 1, 0).point == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(psi1_s3(P.data, const_h, P.nu, 1, 0).point == doctest::Approx(2.5).epsilon(1e-12));
  // constant outcome: s2 returns the constant because E[q | A=a', X] = 1
  const ScmSpec cs = testspec::constant_outcome();
  PopSetup C(cs, 1, 0);
  CHECK(psi1_s2(C.data, C.qe, C.nu, 1, 0).point == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(psi2_s2(C.data, C.qe, C.nu, 1).point == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("s4 at a = a' with q == 1 reduces to the display form of s3") {
  const ScmSpec s = testspec::null_effect();
  PopSetup P(s, 1, 1);
  // null effect: both arms share the proxy law, so q == 1 solves the equation
  for (int x = 0; x < 2; ++x)
    for (int a1 = 0; a1 < 2; ++a1)
      for (int z = 0; z < 2; ++z) CHECK(P.q.q(x, a1, z) == doctest::Approx(1.0).epsilon(1e-9));
  const double s4 = psi1_s4(P.data, P.he, P.qe, P.nu, 1, 1).point;
  const double s3_display = psi1_s3(P.data, P.he, P.nu, 1, 1, /*display_form=*/true).point;
  CHECK(s4 == doctest::Approx(s3_display).epsilon(1e-9));
}

TEST_CASE("s3 display form differs from the derivation form off the diagonal") {
  const ScmSpec s = std::get<ScmSpec>(*fixture("D1"));
  PopSetup P(s, 1, 0);
  const double derivation = psi1_s3(P.data, P.he, P.nu, 1, 0, false).point;
  const double display = psi1_s3(P.data, P.he, P.nu, 1, 0, true).point;
  CHECK(derivation == doctest::Approx(P.via_h.psi1).epsilon(1e-10));
  CHECK(std::abs(display - derivation) > 1e-3);  // h evaluated at A=a, not a'
}

TEST_CASE("psi3 on G1 equals the counterfactual mediator mean, not E[Y^(a)]") {
  const ScmSpec s = std::get<ScmSpec>(*fixture("G1"));
  const int a = 1;
  PopSetup P(s, a, 0);
  const EstimandValue truth = true_estimands(s, a, 0);
  const EstimateResult r = psi3(P.data, Strategy::s5_mr, P.he, P.qe, P.nu, a);
  CHECK(r.point == doctest::Approx(truth.psi3).epsilon(1e-8));
  CHECK(std::abs(r.point - truth.psi2) > 0.01);
}

TEST_CASE("multiple robustness: each valid pair survives corrupting its complement") {
  const ScmSpec s = std::get<ScmSpec>(*fixture("D1"));
  const int a = 1, a1 = 0;
  PopSetup P(s, a, a1);
  const TabularBridge bad_h = corrupt_bridge(P.h);
  const TabularBridge bad_q = corrupt_bridge(P.q);
  const BridgeEval bad_he = make_eval(bad_h);
  const BridgeEval bad_qe = make_eval(bad_q);
  const NuisanceSet bad_pa = with_constant_propensity(P.nu);
  const NuisanceSet bad_pw = with_w_law_ignoring_a(P.nu);
  NuisanceSet bad_both = with_constant_propensity(with_w_law_ignoring_a(P.nu));

  // psi1 pairs: {h, p_w} / {h, p_a} / {q, p_a}
  CHECK(psi1_s5_mr(P.data, P.he, bad_qe, bad_pa, a, a1).point ==
        doctest::Approx(P.via_h.psi1).epsilon(1e-8));
  CHECK(psi1_s5_mr(P.data, P.he, bad_qe, bad_pw, a, a1).point ==
        doctest::Approx(P.via_h.psi1).epsilon(1e-8));
  CHECK(psi1_s5_mr(P.data, bad_he, P.qe, bad_pw, a, a1).point ==
        doctest::Approx(P.via_h.psi1).epsilon(1e-8));

  // psi2 pairs: {h, p_w} / {h, p_a} / {q, p_w} / {q, p_a}
  CHECK(psi2_s5_mr(P.data, P.he, bad_qe, bad_pa, a).point ==
        doctest::Approx(P.via_h.psi2).epsilon(1e-8));
  CHECK(psi2_s5_mr(P.data, P.he, bad_qe, bad_pw, a).point ==
        doctest::Approx(P.via_h.psi2).epsilon(1e-8));
  CHECK(psi2_s5_mr(P.data, bad_he, P.qe, bad_pa, a).point ==
        doctest::Approx(P.via_h.psi2).epsilon(1e-8));
  CHECK(psi2_s5_mr(P.data, bad_he, P.qe, bad_pw, a).point ==
        doctest::Approx(P.via_h.psi2).epsilon(1e-8));

  // negative control: everything corrupted
  CHECK(std::abs(psi1_s5_mr(P.data, bad_he, bad_qe, bad_both, a, a1).point - P.via_h.psi1) >
        1e-3);
  CHECK(std::abs(psi2_s5_mr(P.data, bad_he, bad_qe, bad_both, a).point - P.via_h.psi2) > 1e-3);
}

TEST_CASE("the MR influence function is recentred: empirical mean matches the point") {
  const ScmSpec s = std::get<ScmSpec>(*fixture("D1"));
  PopSetup P(s, 1, 0);
  const Dataset ds = sample(s, {3, 800});
  const EstimateResult r = psi1_s5_mr(ds, P.he, P.qe, P.nu, 1, 0);
  // recompute the integrand mean by hand: it must equal the reported point,
  // so IF_i = phi_i - point averages to zero by construction
  double mean = 0.0;
  for (const auto& row : ds.rows) {
    const int x = static_cast<int>(row.x);
    const double e1 = [&] {
      double v = 0.0;
      for (int w = 0; w < 2; ++w) v += P.h.h(x, 0, w) * P.nu.pw(x, 1, w);
      return v;
    }();
    double phi = e1;
    if (row.a == 0)
      phi += P.q.q(x, 0, static_cast<int>(row.z)) * (row.y - P.h.h(x, 0, static_cast<int>(row.w))) /
             P.nu.pa(x, 0);
    if (row.a == 1) phi += (P.h.h(x, 0, static_cast<int>(row.w)) - e1) / P.nu.pa(x, 1);
    mean += phi;
  }
  mean /= static_cast<double>(ds.n());
  CHECK(r.point == doctest::Approx(mean).epsilon(1e-12));
  CHECK(r.std_error.has_value());
  CHECK(r.ci_95->first == doctest::Approx(r.point - 1.96 * *r.std_error).epsilon(1e-12));
}

TEST_CASE("cross-fitting is deterministic in (seed, K)") {
  const ScmSpec s = std::get<ScmSpec>(*fixture("D1"));
  const Dataset ds = sample(s, {8, 1200});
  FitPlan plan;
  plan.folds = 4;
  plan.seed = 99;
  const EstimateResult r1 = psi_s5_crossfit(ds, plan, Estimand::psi1, 1, 0);
  const EstimateResult r2 = psi_s5_crossfit(ds, plan, Estimand::psi1, 1, 0);
  CHECK(r1.point == r2.point);
  CHECK(*r1.std_error == *r2.std_error);
  plan.seed = 100;
  const EstimateResult r3 = psi_s5_crossfit(ds, plan, Estimand::psi1, 1, 0);
  CHECK(r1.point != r3.point);
  CHECK(r1.folds == 4);
}

TEST_CASE("cross-fitted MR estimator is close to the truth on a moderate sample") {
  const ScmSpec s = std::get<ScmSpec>(*fixture("D1"));
  // D1 is a mediation model with a direct effect: the psi2 functional equals
  // the true psi3, while psi1 is identified outright
  const EstimandValue truth = true_estimands(s, 1, 0);
  const Dataset ds = sample(s, {42, 4000});
  FitPlan plan;
  plan.seed = 7;
  const EstimateResult r1 = psi_s5_crossfit(ds, plan, Estimand::psi1, 1, 0);
  CHECK(std::abs(r1.point - truth.psi1) < 4.0 * *r1.std_error);
  const EstimateResult r2 = psi_s5_crossfit(ds, plan, Estimand::psi2, 1, -1);
  CHECK(std::abs(r2.point - truth.psi3) < 4.0 * *r2.std_error);
}

TEST_CASE("strategies agree pairwise on large samples within 3x the MR SE") {
  FiniteSpace space{2, 0, 2, 2, 2, 2, 2, false};
  const ScmSpec s = random_valid_scm(space, ModelKind::mediation, 4242);
  const Dataset ds = sample(s, {1, 50000});
  FitPlan plan;
  plan.seed = 5;
  const int a = 1;
  std::vector<double> points;
  for (Strategy st : {Strategy::s1_hw, Strategy::s2_qa, Strategy::s3_ha, Strategy::s4_hqa,
                      Strategy::s5_mr}) {
    points.push_back(estimate(ds, plan, Estimand::psi2, st, a, -1).point);
  }
  const double se = *estimate(ds, plan, Estimand::psi2, Strategy::s5_mr, a, -1).std_error;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      INFO("strategies ", i + 1, " vs ", j + 1, ": ", points[i], " vs ", points[j], " se=", se);
      CHECK(std::abs(points[i] - points[j]) <= 3.0 * se);
    }
}

TEST_CASE("logistic propensity recovers the sampler's parameters") {
  GaussianScmSpec g;
  g.id = "glog";
  g.prop_intercept = 0.2;
  g.prop_slope = 0.5;
  g.alpha = 1.0;
  const Dataset ds = sample(g, {77, 40000});
  const LogisticPropensity p = fit_logistic_propensity(ds);
  CHECK(std::abs(p.intercept - 0.2) < 0.06);
  CHECK(std::abs(p.slope - 0.5) < 0.06);
  CHECK(p(1, 0.0) + p(0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("continuous kernel pipeline improves as the ridge is relaxed") {
  const GaussianScmSpec g = std::get<GaussianScmSpec>(*fixture("GAUSS1"));
  const Dataset ds = sample(g, {11, 2500});
  // psi2(a=1) for this SCM is b*alpha + c + (b*gamma + d)*E[X] = b*alpha + c
  const double truth = g.b * g.alpha + g.c;
  auto run = [&](double lam) {
    FitPlan plan;
    plan.folds = 2;
    plan.seed = 3;
    plan.minimax.lambda_learner = lam;
    plan.minimax.lambda_adversary = lam;
    return estimate(ds, plan, Estimand::psi2, Strategy::s5_mr, 1, -1).point;
  };
  // the RBF class shrinks a linear bridge hard at heavy regularization;
  // lighter lambdas must close most of the gap
  const double heavy = run(0.044);
  const double light = run(0.001);
  INFO("truth=", truth, " heavy=", heavy, " light=", light);
  CHECK(std::abs(light - truth) < std::abs(heavy - truth));
  CHECK(std::abs(light - truth) < 0.45);
  FitPlan plan;
  plan.folds = 2;
  plan.seed = 3;
  plan.minimax.lambda_learner = 0.001;
  plan.minimax.lambda_adversary = 0.001;
  for (Strategy st : {Strategy::s1_hw, Strategy::s2_qa, Strategy::s3_ha, Strategy::s4_hqa}) {
    const EstimateResult r = estimate(ds, plan, Estimand::psi2, st, 1, -1);
    INFO(to_string(st), " point=", r.point);
    CHECK(std::isfinite(r.point));
    CHECK(std::abs(r.point - truth) < 0.7);
  }
}

TEST_CASE("estimate pipeline covers every strategy on discrete data") {
  const ScmSpec s = std::get<ScmSpec>(*fixture("D1"));
  const Dataset ds = sample(s, {21, 3000});
  const EstimandValue truth = true_estimands(s, 1, 0);
  FitPlan plan;
  plan.seed = 2;
  for (Strategy st : {Strategy::s1_hw, Strategy::s2_qa, Strategy::s3_ha, Strategy::s4_hqa,
                      Strategy::s5_mr}) {
    const EstimateResult r1 = estimate(ds, plan, Estimand::psi1, st, 1, 0);
    INFO(to_string(st), " psi1=", r1.point);
    CHECK(std::isfinite(r1.point));
    CHECK(std::abs(r1.point - truth.psi1) < 0.15);
    const EstimateResult r3 = estimate(ds, plan, Estimand::psi3, st, 1, 0);
    CHECK(r3.estimand == Estimand::psi3);
    CHECK(std::abs(r3.point - truth.psi3) < 0.15);
  }
}

TEST_CASE("estimate rejects bad levels and empty data") {
  const ScmSpec s = std::get<ScmSpec>(*fixture("D1"));
  const Dataset ds = sample(s, {21, 100});
  FitPlan plan;
  CHECK_THROWS(estimate(ds, plan, Estimand::psi1, Strategy::s1_hw, 5, 0));
  CHECK_THROWS(estimate(Dataset{}, plan, Estimand::psi1, Strategy::s1_hw, 1, 0));
  CHECK_THROWS(psi_s5_crossfit(ds, FitPlan{1, 0}, Estimand::psi1, 1, 0));
}

TEST_CASE("result serialization carries the documented fields") {
  const ScmSpec s = std::get<ScmSpec>(*fixture("D1"));
  const Dataset ds = sample(s, {21, 1500});
  FitPlan plan;
  const EstimateResult r = estimate(ds, plan, Estimand::psi1, Strategy::s5_mr, 1, 0);
  const auto j = to_json(r);
  CHECK(j.at("estimand") == "psi1");
  CHECK(j.at("strategy") == "s5_mr");
  CHECK(j.contains("std_error"));
  CHECK(j.at("folds") == 5);
  const std::string row = to_csv_row(r);
  CHECK(row.find("psi1,s5_mr,1,0,") == 0);
  CHECK(estimate_csv_header() == "estimand,strategy,a,a_prime,point,se,ci_lo,ci_hi,n,seed");
}
