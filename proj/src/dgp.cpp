#include "proxmed/dgp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "proxmed/oracle.hpp"
#include "proxmed/population.hpp"

namespace proxmed {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 0x51ED2701A9E3C49DULL));
}

double Rng::normal() {
  // Box-Muller; u1 kept away from 0
  const double u1 = std::max(uniform(), 0x1.0p-53);
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::categorical(const double* p, int k) {
  const double u = uniform();
  double c = 0.0;
  for (int i = 0; i < k; ++i) {
    c += p[i];
    if (u < c) return i;
  }
  return k - 1;
}

Dataset sample(const ScmSpec& spec, const SamplerConfig& cfg) {
  if (cfg.n < 1) throw std::invalid_argument("sample: n must be >= 1");
  const ValidationReport rep = validate_spec(spec);
  if (!rep.ok()) throw std::invalid_argument("sample: spec failed validation");
  const FiniteSpace& sp = spec.space;

  Dataset ds;
  ds.seed = cfg.seed;
  ds.source = spec.id;
  ds.discrete = true;
  ds.x_levels = sp.x_levels;
  ds.a_levels = sp.a_levels;
  ds.z_levels = sp.z_levels;
  ds.w_levels = sp.w_levels;
  ds.rows.reserve(cfg.n);

  Rng rng(cfg.seed);
  std::vector<double> buf(static_cast<std::size_t>(
      std::max({sp.x_levels, sp.ueff(), sp.a_levels, sp.m_levels, sp.z_levels, sp.w_levels,
                std::max(sp.y_levels, 1)})));
  auto draw = [&](auto&& prob, int k) {
    for (int i = 0; i < k; ++i) buf[static_cast<std::size_t>(i)] = prob(i);
    return rng.categorical(buf.data(), k);
  };

  for (std::size_t i = 0; i < cfg.n; ++i) {
    const int x = draw([&](int v) { return spec.px(v); }, sp.x_levels);
    const int u = sp.u_levels > 0 ? draw([&](int v) { return spec.pu(x, v); }, sp.u_levels) : 0;
    const int a = draw([&](int v) { return spec.pa(x, u, v); }, sp.a_levels);
    const int m = draw([&](int v) { return spec.pm(x, a, v); }, sp.m_levels);
    const int z = draw([&](int v) { return spec.pz(x, a, m, v); }, sp.z_levels);
    const int w = draw([&](int v) { return spec.pw(x, a, m, z, v); }, sp.w_levels);
    double y;
    if (sp.y_continuous) {
      y = spec.ymean(x, u, a, m, z, w) + spec.y_noise_sd * rng.normal();
    } else {
      y = draw([&](int v) { return spec.py(x, u, a, m, z, w, v); }, sp.y_levels);
    }
    ds.rows.push_back({static_cast<double>(x), a, static_cast<double>(z),
                       static_cast<double>(w), y});
  }
  return ds;
}

Dataset sample(const GaussianScmSpec& spec, const SamplerConfig& cfg) {
  if (cfg.n < 1) throw std::invalid_argument("sample: n must be >= 1");
  std::string why;
  if (!spec.valid(&why)) throw std::invalid_argument("sample: " + why);

  Dataset ds;
  ds.seed = cfg.seed;
  ds.source = spec.id;
  ds.discrete = false;
  ds.a_levels = 2;
  ds.rows.reserve(cfg.n);

  Rng rng(cfg.seed);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const double x = spec.sigma_x * rng.normal();
    const double logit = spec.prop_intercept + spec.prop_slope * x;
    const double pa1 = 1.0 / (1.0 + std::exp(-logit));
    const int a = rng.uniform() < pa1 ? 1 : 0;
    const double m = spec.alpha * a + spec.gamma * x + spec.sigma_m * rng.normal();
    const double z = m + spec.sigma_z * rng.normal();
    const double w = m + spec.sigma_w * rng.normal();
    const double y = spec.b * m + spec.c * a + spec.d * x + spec.sigma_y * rng.normal();
    ds.rows.push_back({x, a, z, w, y});
  }
  return ds;
}

namespace {

// Dirichlet(1,...,1) row floored at 0.02 and renormalized: strictly positive
// with margins bounded away from zero.
void random_row(Rng& rng, double* p, int k) {
  double s = 0.0;
  for (int i = 0; i < k; ++i) {
    p[i] = -std::log(std::max(rng.uniform(), 0x1.0p-53));
    s += p[i];
  }
  double s2 = 0.0;
  for (int i = 0; i < k; ++i) {
    p[i] = std::max(p[i] / s, 0.02);
    s2 += p[i];
  }
  for (int i = 0; i < k; ++i) p[i] /= s2;
}

void fill_random_rows(Rng& rng, Table& t) {
  const int k = t.shape().back();
  auto& v = t.flat();
  for (std::size_t r = 0; r < v.size(); r += static_cast<std::size_t>(k))
    random_row(rng, v.data() + r, k);
}

}  // namespace

ScmSpec random_valid_scm(const FiniteSpace& space, ModelKind kind, std::uint64_t seed) {
  std::string why;
  if (!space.valid(&why)) throw std::invalid_argument("random_valid_scm: " + why);

  FiniteSpace sp = space;
  if (kind == ModelKind::mediation) sp.u_levels = 0;  // sequential exchangeability

  for (int attempt = 0; attempt < 100; ++attempt) {
    Rng rng(substream(seed, static_cast<std::uint64_t>(attempt)));
    ScmSpec s;
    s.id = "random-" + to_string(kind) + "-" + std::to_string(seed);
    s.kind = kind;
    s.space = sp;
    s.p_x = Table({sp.x_levels});
    random_row(rng, s.p_x.data(), sp.x_levels);
    if (sp.u_levels > 0) {
      s.p_u_given_x = Table({sp.x_levels, sp.u_levels});
      fill_random_rows(rng, s.p_u_given_x);
    }
    s.p_a_given_xu = Table({sp.x_levels, sp.ueff(), sp.a_levels});
    fill_random_rows(rng, s.p_a_given_xu);
    s.p_m_given_ax = Table({sp.x_levels, sp.a_levels, sp.m_levels});
    fill_random_rows(rng, s.p_m_given_ax);
    s.p_z_given_max = Table({sp.x_levels, sp.a_levels, sp.m_levels, sp.z_levels});
    fill_random_rows(rng, s.p_z_given_max);
    s.p_w_given_mx = Table({sp.x_levels, 1, sp.m_levels, 1, sp.w_levels});
    fill_random_rows(rng, s.p_w_given_mx);
    const int ya = kind == ModelKind::front_door ? 1 : sp.a_levels;
    if (sp.y_continuous) {
      s.p_y = Table({sp.x_levels, sp.ueff(), ya, sp.m_levels, 1, sp.w_levels});
      for (double& v : s.p_y.flat()) v = rng.uniform();
      s.y_noise_sd = 0.5;
    } else {
      s.p_y = Table({sp.x_levels, sp.ueff(), ya, sp.m_levels, 1, sp.w_levels, sp.y_levels});
      fill_random_rows(rng, s.p_y);
    }

    if (!validate_spec(s).ok()) continue;
    const FullJoint fj = full_joint(s);
    if (!check_completeness(fj, CompletenessReport::Side::z_side).complete) continue;
    if (!check_completeness(fj, CompletenessReport::Side::w_side).complete) continue;
    const PopulationJoint pop = to_population(fj);
    if (!solve_outcome_bridge(pop).exists()) continue;
    bool q_ok = true;
    for (int a = 0; a < sp.a_levels && q_ok; ++a) {
      const TabularBridge q = solve_treatment_bridge(pop, a);
      q_ok = q.exists() && q.positivity_failures.empty();
    }
    if (!q_ok) continue;
    return s;
  }
  throw std::runtime_error("random_valid_scm: no valid draw in 100 attempts (infeasible space?)");
}

}  // namespace proxmed
