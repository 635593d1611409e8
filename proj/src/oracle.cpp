#include "proxmed/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace proxmed {

namespace {

double mean_y(const FullJoint& fj) {
  double s = 0.0;
  for (std::size_t i = 0; i < fj.p.size(); ++i) s += fj.p.flat()[i] * fj.ymean.flat()[i];
  return s;
}

// Forces the treatment law to a point mass.
void set_do_a(ScmSpec& s, int a) {
  Table t({s.space.x_levels, s.space.ueff(), s.space.a_levels}, 0.0);
  for (int x = 0; x < s.space.x_levels; ++x)
    for (int u = 0; u < s.space.ueff(); ++u) t.at(x, u, a) = 1.0;
  s.p_a_given_xu = std::move(t);
}

// Replaces the mediator law with its arm-a slice for every treatment value,
// i.e. M is drawn as the counterfactual M^(a).
void set_mediator_arm(ScmSpec& s, int a) {
  Table t({s.space.x_levels, s.space.a_levels, s.space.m_levels});
  for (int x = 0; x < s.space.x_levels; ++x)
    for (int at = 0; at < s.space.a_levels; ++at)
      for (int m = 0; m < s.space.m_levels; ++m) t.at(x, at, m) = s.pm(x, a, m);
  s.p_m_given_ax = std::move(t);
}

}  // namespace

EstimandValue true_estimands(const ScmSpec& spec, int a, int a_prime) {
  if (a < 0 || a >= spec.space.a_levels || a_prime < 0 || a_prime >= spec.space.a_levels)
    throw std::invalid_argument("true_estimands: treatment level out of range");
  EstimandValue out;
  {
    // psi1: mediator law from arm a, everything else under do(A=a')
    ScmSpec cross = spec;
    set_mediator_arm(cross, a);
    set_do_a(cross, a_prime);
    out.psi1 = mean_y(full_joint(cross));
  }
  {
    ScmSpec doa = spec;
    set_do_a(doa, a);
    out.psi2 = mean_y(full_joint(doa));
  }
  {
    // psi3: mediator set to M^(a), treatment left natural
    ScmSpec shifted = spec;
    set_mediator_arm(shifted, a);
    out.psi3 = mean_y(full_joint(shifted));
  }
  return out;
}

EstimandValue observed_mediator_psi(const FullJoint& fj, int a, int a_prime) {
  const FiniteSpace& sp = fj.space;
  EstimandValue out;
  for (int x = 0; x < sp.x_levels; ++x) {
    const double px = fj.p_x(x);
    if (px <= 0.0) continue;
    for (int m = 0; m < sp.m_levels; ++m) {
      const double pm_a = fj.p_m_given_ax(x, a, m);
      out.psi1 += px * pm_a * fj.ey_given_max(x, a_prime, m);
      for (int at = 0; at < sp.a_levels; ++at) {
        out.psi2 += px * (fj.p_xa(x, at) / px) * pm_a * fj.ey_given_max(x, at, m);
      }
    }
  }
  out.psi3 = out.psi2;  // identical identification formula
  return out;
}

namespace {

// Minimum-norm least-squares solve; returns the solution and accumulates the
// squared residual of A x = b.
Eigen::VectorXd min_norm_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                               double& sq_residual) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  const Eigen::VectorXd x = cod.solve(b);
  sq_residual += (A * x - b).squaredNorm();
  return x;
}

}  // namespace

TabularBridge solve_outcome_bridge(const PopulationJoint& pop) {
  const FiniteSpace& sp = pop.space;
  TabularBridge out;
  out.kind = BridgeKind::outcome_h;
  out.values = Table({sp.x_levels, sp.a_levels, sp.w_levels});
  double sq = 0.0;
  for (int x = 0; x < sp.x_levels; ++x)
    for (int a = 0; a < sp.a_levels; ++a) {
      std::vector<int> zs;
      for (int z = 0; z < sp.z_levels; ++z)
        if (pop.p_zax(x, a, z) > 0.0) zs.push_back(z);
      Eigen::MatrixXd A(static_cast<int>(zs.size()), sp.w_levels);
      Eigen::VectorXd b(static_cast<int>(zs.size()));
      for (std::size_t r = 0; r < zs.size(); ++r) {
        for (int w = 0; w < sp.w_levels; ++w)
          A(static_cast<int>(r), w) = pop.p_w_given_zax(x, a, zs[r], w);
        b(static_cast<int>(r)) = pop.ey_given_zax(x, a, zs[r]);
      }
      const Eigen::VectorXd h = min_norm_solve(A, b, sq);
      for (int w = 0; w < sp.w_levels; ++w) out.values.at(x, a, w) = h(w);
    }
  out.residual_norm = std::sqrt(sq);
  return out;
}

TabularBridge solve_treatment_bridge(const PopulationJoint& pop, int a) {
  const FiniteSpace& sp = pop.space;
  if (a < 0 || a >= sp.a_levels)
    throw std::invalid_argument("solve_treatment_bridge: target level out of range");
  TabularBridge out;
  out.kind = BridgeKind::treatment_q;
  out.target_a = a;
  out.values = Table({sp.x_levels, sp.a_levels, sp.z_levels});
  double sq = 0.0;
  for (int x = 0; x < sp.x_levels; ++x)
    for (int a1 = 0; a1 < sp.a_levels; ++a1) {
      std::vector<int> ws;
      for (int w = 0; w < sp.w_levels; ++w) {
        const double den = pop.p_w_given_ax(x, a1, w);
        const double num = pop.p_w_given_ax(x, a, w);
        if (den > 0.0) {
          ws.push_back(w);
        } else if (num > 0.0) {
          std::ostringstream os;
          os << "p(w=" << w << "|a'=" << a1 << ",x=" << x << ")=0 with p(w|a=" << a << ",x)>0";
          out.positivity_failures.push_back(os.str());
        }
      }
      Eigen::MatrixXd A(static_cast<int>(ws.size()), sp.z_levels);
      Eigen::VectorXd b(static_cast<int>(ws.size()));
      for (std::size_t r = 0; r < ws.size(); ++r) {
        for (int z = 0; z < sp.z_levels; ++z)
          A(static_cast<int>(r), z) = pop.p_z_given_wax(x, a1, ws[r], z);
        b(static_cast<int>(r)) =
            pop.p_w_given_ax(x, a, ws[r]) / pop.p_w_given_ax(x, a1, ws[r]);
      }
      const Eigen::VectorXd q = min_norm_solve(A, b, sq);
      for (int z = 0; z < sp.z_levels; ++z) out.values.at(x, a1, z) = q(z);
    }
  out.residual_norm = std::sqrt(sq);
  return out;
}

CompletenessReport check_completeness(const FullJoint& fj, CompletenessReport::Side side) {
  const FiniteSpace& sp = fj.space;
  CompletenessReport rep;
  rep.side = side;
  rep.required_rank = sp.m_levels;
  rep.ranks = Table({sp.x_levels, sp.a_levels});
  const int proxy_levels = side == CompletenessReport::Side::z_side ? sp.z_levels : sp.w_levels;
  for (int x = 0; x < sp.x_levels; ++x)
    for (int a = 0; a < sp.a_levels; ++a) {
      Eigen::MatrixXd P(proxy_levels, sp.m_levels);
      for (int k = 0; k < proxy_levels; ++k)
        for (int m = 0; m < sp.m_levels; ++m)
          P(k, m) = side == CompletenessReport::Side::z_side ? fj.p_m_given_zax(x, a, k, m)
                                                             : fj.p_m_given_wax(x, a, k, m);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(P);
      const auto& sv = svd.singularValues();
      int rank = 0;
      if (sv.size() > 0) {
        const double thresh = 1e-10 * sv(0);
        for (int i = 0; i < sv.size(); ++i)
          if (sv(i) > thresh) ++rank;
      }
      rep.ranks.at(x, a) = rank;
      rep.complete = rep.complete && rank == sp.m_levels;
    }
  return rep;
}

EstimandValue population_psi_via_h(const PopulationJoint& pop, const TabularBridge& h, int a,
                                   int a_prime) {
  const FiniteSpace& sp = pop.space;
  EstimandValue out;
  for (int x = 0; x < sp.x_levels; ++x) {
    const double px = pop.p_x(x);
    if (px <= 0.0) continue;
    for (int w = 0; w < sp.w_levels; ++w) {
      const double pw_a = pop.p_w_given_ax(x, a, w);
      out.psi1 += px * h.h(x, a_prime, w) * pw_a;
      for (int a1 = 0; a1 < sp.a_levels; ++a1)
        out.psi2 += px * pop.p_a_given_x(x, a1) * h.h(x, a1, w) * pw_a;
    }
  }
  out.psi3 = out.psi2;
  return out;
}

EstimandValue population_psi_via_q(const PopulationJoint& pop, const TabularBridge& q, int a,
                                   int a_prime) {
  const FiniteSpace& sp = pop.space;
  EstimandValue out;
  for (int x = 0; x < sp.x_levels; ++x) {
    const double pa1 = pop.p_a_given_x(x, a_prime);
    if (pop.p_x(x) > 0.0 && pa1 <= 0.0)
      throw std::domain_error("population_psi_via_q: p(a'|x) is zero");
    for (int at = 0; at < sp.a_levels; ++at)
      for (int z = 0; z < sp.z_levels; ++z)
        for (int w = 0; w < sp.w_levels; ++w) {
          const double mass = pop.p.at(x, at, z, w);
          if (mass <= 0.0) continue;
          const double yq = pop.ymean.at(x, at, z, w) * q.q(x, at, z);
          out.psi2 += mass * yq;
          if (at == a_prime) out.psi1 += mass * yq / pa1;
        }
  }
  out.psi3 = out.psi2;
  return out;
}

namespace {

struct IfContext {
  const PopulationJoint& pop;
  const TabularBridge& h;
  const TabularBridge& q;
  const NuisanceSet& nu;
  int a, a_prime;
  HFn hfn;

  IfContext(const PopulationJoint& pop_, const TabularBridge& h_, const TabularBridge& q_,
            const NuisanceSet& nu_, int a_, int ap)
      : pop(pop_), h(h_), q(q_), nu(nu_), a(a_), a_prime(ap) {
    hfn = [this](int x, int aa, int w) { return h.h(x, aa, w); };
  }
};

double mr_integrand(const IfContext& c, IfTarget which, int x, int at, int z, int w) {
  const double y = c.pop.ymean.at(x, at, z, w);
  if (which == IfTarget::psi1) {
    const double e1 = eta1(c.hfn, c.nu, x, c.a_prime, c.a);
    double v = e1;
    if (at == c.a_prime)
      v += c.q.q(x, at, z) * (y - c.h.h(x, at, w)) / c.nu.pa(x, c.a_prime);
    if (at == c.a) v += (c.h.h(x, c.a_prime, w) - e1) / c.nu.pa(x, c.a);
    return v;
  }
  const double e1_at = eta1(c.hfn, c.nu, x, at, c.a);
  double v = c.q.q(x, at, z) * (y - c.h.h(x, at, w)) + e1_at;
  if (at == c.a) v += (hbar(c.hfn, c.nu, w, x) - eta2(c.hfn, c.nu, x, c.a)) / c.nu.pa(x, c.a);
  return v;
}

}  // namespace

double population_mr_value(const PopulationJoint& pop, const TabularBridge& h,
                           const TabularBridge& q, const NuisanceSet& nu, IfTarget which, int a,
                           int a_prime) {
  IfContext c(pop, h, q, nu, a, a_prime);
  const FiniteSpace& sp = pop.space;
  double s = 0.0;
  for (int x = 0; x < sp.x_levels; ++x)
    for (int at = 0; at < sp.a_levels; ++at)
      for (int z = 0; z < sp.z_levels; ++z)
        for (int w = 0; w < sp.w_levels; ++w) {
          const double mass = pop.p.at(x, at, z, w);
          if (mass <= 0.0) continue;
          s += mass * mr_integrand(c, which, x, at, z, w);
        }
  return s;
}

double population_if_mean(const PopulationJoint& pop, const TabularBridge& h,
                          const TabularBridge& q, const NuisanceSet& nu, IfTarget which, int a,
                          int a_prime, double psi) {
  return population_mr_value(pop, h, q, nu, which, a, a_prime) - psi;
}

double drq_if_mean(const PopulationJoint& pop, const TabularBridge& q, const Table& g, int a) {
  const FiniteSpace& sp = pop.space;
  double s = 0.0;
  for (int x = 0; x < sp.x_levels; ++x) {
    const double pa = pop.p_a_given_x(x, a);
    if (pop.p_x(x) <= 0.0) continue;
    if (pa <= 0.0) throw std::domain_error("drq_if_mean: p(a|x) is zero");
    // fully-summed fourth term, constant in (z,w) per x
    double gbar_all = 0.0;
    for (int a1 = 0; a1 < sp.a_levels; ++a1)
      for (int w = 0; w < sp.w_levels; ++w)
        gbar_all += g.at(x, a1, w) * pop.p_a_given_x(x, a1) * pop.p_w_given_ax(x, a, w);
    for (int at = 0; at < sp.a_levels; ++at) {
      // second term, constant in (z,w) per (x,at)
      double g_wlaw = 0.0;
      for (int w = 0; w < sp.w_levels; ++w)
        g_wlaw += g.at(x, at, w) * pop.p_w_given_ax(x, a, w);
      for (int z = 0; z < sp.z_levels; ++z)
        for (int w = 0; w < sp.w_levels; ++w) {
          const double mass = pop.p.at(x, at, z, w);
          if (mass <= 0.0) continue;
          double term = q.q(x, at, z) * g.at(x, at, w) - g_wlaw;
          if (at == a) {
            double gbar_w = 0.0;
            for (int a1 = 0; a1 < sp.a_levels; ++a1)
              gbar_w += g.at(x, a1, w) * pop.p_a_given_x(x, a1);
            term += (-gbar_w + gbar_all) / pa;
          }
          s += mass * term;
        }
    }
  }
  return s;
}

}  // namespace proxmed
