#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "proxmed/bridges.hpp"
#include "proxmed/dgp.hpp"
#include "proxmed/estimators.hpp"
#include "proxmed/fixtures.hpp"
#include "support/specs.hpp"

using namespace proxmed;

TEST_CASE("tabular plug-in on the enumerated population equals the oracle bridge") {
  const ScmSpec s = testspec::tiny_mediation();
  const PopulationJoint pop = to_population(s);
  const Dataset ds = dataset_from_population(pop);
  const TabularBridge h_fit = fit_h_tabular(ds);
  const TabularBridge h_or = solve_outcome_bridge(pop);
  for (std::size_t k = 0; k < h_fit.values.size(); ++k)
    CHECK(h_fit.values.flat()[k] == doctest::Approx(h_or.values.flat()[k]).epsilon(1e-5));
  const TabularBridge q_fit = fit_q_tabular(ds, 1);
  const TabularBridge q_or = solve_treatment_bridge(pop, 1);
  for (std::size_t k = 0; k < q_fit.values.size(); ++k)
    CHECK(q_fit.values.flat()[k] == doctest::Approx(q_or.values.flat()[k]).epsilon(1e-5));
}

TEST_CASE("tabular plug-in converges on sampled data") {
  const ScmSpec s = std::get<ScmSpec>(*fixture("D1"));
  const PopulationJoint pop = to_population(s);
  const Dataset ds = sample(s, {31, 5000});
  const TabularBridge h_fit = fit_h_tabular(ds);
  const TabularBridge h_or = solve_outcome_bridge(pop);
  for (std::size_t k = 0; k < h_fit.values.size(); ++k)
    CHECK(std::abs(h_fit.values.flat()[k] - h_or.values.flat()[k]) < 0.1);
  const TabularBridge q_fit = fit_q_tabular(ds, 1);
  const TabularBridge q_or = solve_treatment_bridge(pop, 1);
  for (std::size_t k = 0; k < q_fit.values.size(); ++k)
    CHECK(std::abs(q_fit.values.flat()[k] - q_or.values.flat()[k]) < 0.1);
}

TEST_CASE("missing treatment arm is an error") {
  Dataset ds;
  ds.discrete = true;
  ds.x_levels = ds.a_levels = ds.z_levels = ds.w_levels = 2;
  for (int i = 0; i < 40; ++i)
    ds.rows.push_back({static_cast<double>(i % 2), 1, static_cast<double>((i / 2) % 2),
                       static_cast<double>((i / 4) % 2), 1.0});
  CHECK_THROWS(fit_h_tabular(ds));
  CHECK_THROWS(fit_q_tabular(ds, 1));
}

TEST_CASE("rbf gram matrices are symmetric and positive semidefinite") {
  Rng rng(5);
  const int n = 40;
  Eigen::MatrixXd pts(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) pts(i, j) = rng.normal();
  const std::vector<int> blocks{1, 2};
  const std::vector<double> bw{0.8, 1.3};
  const Eigen::MatrixXd G = rbf_gram(pts, pts, blocks, bw);
  CHECK((G - G.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  for (int i = 0; i < n; ++i) CHECK(G(i, i) == doctest::Approx(1.0));
}

TEST_CASE("minimax h on constant outcome is near the constant") {
  // Y == 2 everywhere; h == 2 is the zero-residual solution and the penalty
  // shrinks it towards 0, so the error must vanish with the learner lambda
  ScmSpec cs = testspec::constant_outcome();
  Dataset ds = sample(cs, {5, 2000});
  for (auto& r : ds.rows) r.y *= 2.0;
  double prev = 10.0;
  for (double lam : {0.05, 0.005, 0.0005}) {
    MinimaxOptions opt;
    opt.lambda_learner = lam;
    opt.lambda_adversary = lam;
    const MinimaxFit fit = fit_h_minimax(ds, opt);
    double worst = 0.0;
    for (int x = 0; x < 2; ++x)
      for (int a = 0; a < 2; ++a)
        for (int w = 0; w < 2; ++w)
          worst = std::max(worst, std::abs(fit.bridge.eval(w, a, x) - 2.0));
    INFO("lambda=", lam, " worst=", worst);
    CHECK(worst < prev);
    prev = worst;
  }
  CHECK(prev < 0.15);
}

TEST_CASE("scaling contract: h-hat is exactly linear in y for fixed lambdas") {
  const ScmSpec s = testspec::tiny_mediation();
  Dataset ds = sample(s, {11, 300});
  MinimaxOptions opt;
  opt.lambda_learner = 0.05;
  opt.lambda_adversary = 0.05;
  const MinimaxFit f1 = fit_h_minimax(ds, opt);
  const double scale = -3.5;
  for (auto& r : ds.rows) r.y *= scale;
  const MinimaxFit f2 = fit_h_minimax(ds, opt);
  for (Eigen::Index i = 0; i < f1.bridge.coef.size(); ++i)
    CHECK(f2.bridge.coef(i) == doctest::Approx(scale * f1.bridge.coef(i)).epsilon(1e-9));
}

TEST_CASE("saddle-point optimality against random same-span candidates") {
  GaussianScmSpec g;
  g.id = "gsp";
  g.prop_slope = 0.4;
  g.alpha = 1.0;
  g.gamma = 0.7;
  g.b = 1.2;
  g.c = 0.6;
  g.d = -0.4;
  const Dataset ds = sample(g, {21, 300});
  MinimaxOptions opt;
  const MinimaxFit fit = fit_h_minimax(ds, opt);
  const double at_fit = fit.objective_at_fit();
  Rng rng(99);
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd cand = fit.bridge.coef;
    for (Eigen::Index i = 0; i < cand.size(); ++i) cand(i) += 0.5 * rng.normal();
    CHECK(at_fit <= fit.objective(cand) + 1e-8);
  }
}

TEST_CASE("minimax h approaches the analytic bridge on the gaussian test bed") {
  GaussianScmSpec g;
  g.id = "gconv";
  g.prop_slope = 0.4;
  g.alpha = 1.0;
  g.gamma = 0.7;
  g.sigma_m = 0.8;
  g.sigma_z = 0.4;
  g.sigma_w = 0.4;
  g.b = 1.2;
  g.c = 0.6;
  g.d = -0.4;
  g.sigma_y = 0.5;
  auto mse_at = [&](std::size_t n, std::uint64_t seed) {
    const Dataset ds = sample(g, {seed, n});
    MinimaxOptions opt;
    const MinimaxFit fit = fit_h_minimax(ds, opt);
    double mse = 0.0;
    for (const auto& r : ds.rows) {
      const double d = fit.bridge.eval(r.w, r.a, r.x) - g.bridge_h(r.w, r.a, r.x);
      mse += d * d;
    }
    return mse / static_cast<double>(n);
  };
  // paired seeds across the ladder
  const double m_small = (mse_at(500, 1) + mse_at(500, 2)) / 2.0;
  const double m_big = (mse_at(2000, 1) + mse_at(2000, 2)) / 2.0;
  INFO("mse small=", m_small, " big=", m_big);
  CHECK(m_big < m_small);
  // and it beats the ridge limit (the zero function) by a clear margin
  double eh2 = 0.0;
  const Dataset ref = sample(g, {9, 2000});
  for (const auto& r : ref.rows) eh2 += std::pow(g.bridge_h(r.w, r.a, r.x), 2);
  CHECK(m_big < 0.75 * eh2 / 2000.0);
}

TEST_CASE("minimax on one-hot embedded discrete data approaches the oracle tables") {
  const ScmSpec s = std::get<ScmSpec>(*fixture("D1"));
  const PopulationJoint pop = to_population(s);
  const TabularBridge h_or = solve_outcome_bridge(pop);
  const Dataset ds = sample(s, {13, 8000});
  MinimaxOptions opt;
  opt.lambda_learner = 3e-4;
  opt.lambda_adversary = 1e-3;
  const MinimaxFit fit = fit_h_minimax(ds, opt);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a)
      for (int w = 0; w < 2; ++w) {
        INFO("x=", x, " a=", a, " w=", w);
        CHECK(std::abs(fit.bridge.eval(w, a, x) - h_or.h(x, a, w)) < 0.1);
      }
}

TEST_CASE("minimax q: the unit solution is recovered when both arms share the proxy law") {
  const ScmSpec s = testspec::null_effect();
  const Dataset ds = sample(s, {17, 8000});
  const PopulationJoint pop = to_population(s);
  MinimaxOptions opt;
  opt.lambda_learner = 3e-3;
  opt.lambda_adversary = 1e-3;
  const MinimaxFit fit = fit_q_minimax(ds, opt, 1, [&](int a, double x) {
    return pop.p_a_given_x(static_cast<int>(x), a);
  });
  for (int x = 0; x < 2; ++x)
    for (int a1 = 0; a1 < 2; ++a1)
      for (int z = 0; z < 2; ++z) {
        INFO("x=", x, " a'=", a1, " z=", z);
        CHECK(std::abs(fit.bridge.eval(z, a1, x) - 1.0) < 0.15);
      }
}

TEST_CASE("minimax q approaches the oracle table on discrete data") {
  const ScmSpec s = std::get<ScmSpec>(*fixture("D1"));
  const PopulationJoint pop = to_population(s);
  const int a = 1;
  const TabularBridge q_or = solve_treatment_bridge(pop, a);
  const Dataset ds = sample(s, {101, 12000});
  const NuisanceSet nu = exact_nuisances(pop);
  MinimaxOptions opt;
  opt.lambda_learner = 3e-4;
  opt.lambda_adversary = 1e-3;
  const MinimaxFit fit = fit_q_minimax(ds, opt, a, [&](int aa, double x) {
    return nu.pa(static_cast<int>(x), aa);
  });
  for (int x = 0; x < 2; ++x)
    for (int a1 = 0; a1 < 2; ++a1)
      for (int z = 0; z < 2; ++z) {
        INFO("x=", x, " a'=", a1, " z=", z);
        CHECK(std::abs(fit.bridge.eval(z, a1, x) - q_or.q(x, a1, z)) < 0.12);
      }
}

TEST_CASE("propensity bound violation is rejected") {
  const ScmSpec s = testspec::tiny_mediation();
  const Dataset ds = sample(s, {23, 200});
  MinimaxOptions opt;
  CHECK_THROWS(fit_q_minimax(ds, opt, 1, [](int a, double) { return a == 1 ? 0.999 : 0.001; }));
}

TEST_CASE("moment residual against held-out g shrinks with n (proposition check)") {
  GaussianScmSpec g;
  g.id = "gq";
  g.prop_slope = 0.3;
  g.alpha = 0.8;
  g.gamma = 0.5;
  g.sigma_m = 0.7;
  g.sigma_z = 0.4;
  g.sigma_w = 0.4;
  g.b = 1.0;
  g.c = 0.4;
  g.d = -0.2;
  const int a = 1;
  auto residual = [&](std::size_t n, std::uint64_t seed) {
    const Dataset ds = sample(g, {seed, n});
    const LogisticPropensity prop = fit_logistic_propensity(ds);
    MinimaxOptions opt;
    const MinimaxFit fit = fit_q_minimax(ds, opt, a, [&](int aa, double x) {
      return std::clamp(prop(aa, x), 0.01, 0.99);
    });
    // E-hat[{sum_a' 1{A=a'}/p(a'|X) q - 1{A=a}/p(a|X)} g(W,X)] for a held-out g
    double num = 0.0;
    for (const auto& r : ds.rows) {
      const double p = std::clamp(prop(r.a, r.x), 0.01, 0.99);
      const double rho = fit.bridge.eval(r.z, r.a, r.x) / p -
                         (r.a == a ? 1.0 / std::clamp(prop(a, r.x), 0.01, 0.99) : 0.0) * 2.0;
      const double gv = std::sin(r.w) + 0.5 * r.x;  // held-out test function
      num += rho * gv;
    }
    return std::abs(num / static_cast<double>(n));
  };
  const double r_small = residual(400, 31);
  const double r_big = residual(3200, 31);
  INFO("residual small=", r_small, " big=", r_big);
  CHECK(r_big < r_small);
}
