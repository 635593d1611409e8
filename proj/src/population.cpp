#include "proxmed/population.hpp"

#include <stdexcept>

namespace proxmed {

FullJoint full_joint(const ScmSpec& spec) {
  const FiniteSpace& sp = spec.space;
  FullJoint fj;
  fj.space = sp;
  fj.source_id = spec.id;
  const int X = sp.x_levels, U = sp.ueff(), A = sp.a_levels, M = sp.m_levels;
  const int Z = sp.z_levels, W = sp.w_levels;
  fj.p = Table({X, U, A, M, Z, W});
  fj.ymean = Table({X, U, A, M, Z, W});
  for (int x = 0; x < X; ++x)
    for (int u = 0; u < U; ++u)
      for (int a = 0; a < A; ++a)
        for (int m = 0; m < M; ++m)
          for (int z = 0; z < Z; ++z)
            for (int w = 0; w < W; ++w) {
              fj.p.at(x, u, a, m, z, w) = spec.px(x) * spec.pu(x, u) * spec.pa(x, u, a) *
                                          spec.pm(x, a, m) * spec.pz(x, a, m, z) *
                                          spec.pw(x, a, m, z, w);
              fj.ymean.at(x, u, a, m, z, w) = spec.ymean(x, u, a, m, z, w);
            }
  return fj;
}

double FullJoint::p_xam(int x, int a, int m) const {
  double s = 0.0;
  for (int u = 0; u < space.ueff(); ++u)
    for (int z = 0; z < space.z_levels; ++z)
      for (int w = 0; w < space.w_levels; ++w) s += p.at(x, u, a, m, z, w);
  return s;
}

double FullJoint::p_xa(int x, int a) const {
  double s = 0.0;
  for (int m = 0; m < space.m_levels; ++m) s += p_xam(x, a, m);
  return s;
}

double FullJoint::p_x(int x) const {
  double s = 0.0;
  for (int a = 0; a < space.a_levels; ++a) s += p_xa(x, a);
  return s;
}

double FullJoint::p_m_given_ax(int x, int a, int m) const {
  const double den = p_xa(x, a);
  return den > 0.0 ? p_xam(x, a, m) / den : 0.0;
}

double FullJoint::p_m_given_zax(int x, int a, int z, int m) const {
  double num = 0.0, den = 0.0;
  for (int u = 0; u < space.ueff(); ++u)
    for (int mm = 0; mm < space.m_levels; ++mm)
      for (int w = 0; w < space.w_levels; ++w) {
        const double v = p.at(x, u, a, mm, z, w);
        den += v;
        if (mm == m) num += v;
      }
  return den > 0.0 ? num / den : 0.0;
}

double FullJoint::p_m_given_wax(int x, int a, int w, int m) const {
  double num = 0.0, den = 0.0;
  for (int u = 0; u < space.ueff(); ++u)
    for (int mm = 0; mm < space.m_levels; ++mm)
      for (int z = 0; z < space.z_levels; ++z) {
        const double v = p.at(x, u, a, mm, z, w);
        den += v;
        if (mm == m) num += v;
      }
  return den > 0.0 ? num / den : 0.0;
}

double FullJoint::p_z_given_max(int x, int a, int m, int z) const {
  double num = 0.0, den = 0.0;
  for (int u = 0; u < space.ueff(); ++u)
    for (int zz = 0; zz < space.z_levels; ++zz)
      for (int w = 0; w < space.w_levels; ++w) {
        const double v = p.at(x, u, a, m, zz, w);
        den += v;
        if (zz == z) num += v;
      }
  return den > 0.0 ? num / den : 0.0;
}

double FullJoint::ey_given_max(int x, int a, int m) const {
  double num = 0.0, den = 0.0;
  for (int u = 0; u < space.ueff(); ++u)
    for (int z = 0; z < space.z_levels; ++z)
      for (int w = 0; w < space.w_levels; ++w) {
        const double v = p.at(x, u, a, m, z, w);
        den += v;
        num += v * ymean.at(x, u, a, m, z, w);
      }
  return den > 0.0 ? num / den : 0.0;
}

PopulationJoint to_population(const FullJoint& fj) {
  const FiniteSpace& sp = fj.space;
  PopulationJoint pop;
  pop.space = sp;
  pop.source_id = fj.source_id;
  const int X = sp.x_levels, A = sp.a_levels, Z = sp.z_levels, W = sp.w_levels;
  pop.p = Table({X, A, Z, W});
  pop.ymean = Table({X, A, Z, W});
  for (int x = 0; x < X; ++x)
    for (int a = 0; a < A; ++a)
      for (int z = 0; z < Z; ++z)
        for (int w = 0; w < W; ++w) {
          double mass = 0.0, ysum = 0.0;
          for (int u = 0; u < sp.ueff(); ++u)
            for (int m = 0; m < sp.m_levels; ++m) {
              const double v = fj.p.at(x, u, a, m, z, w);
              mass += v;
              ysum += v * fj.ymean.at(x, u, a, m, z, w);
            }
          pop.p.at(x, a, z, w) = mass;
          pop.ymean.at(x, a, z, w) = mass > 0.0 ? ysum / mass : 0.0;
        }
  return pop;
}

PopulationJoint to_population(const ScmSpec& spec) {
  const ValidationReport rep = validate_spec(spec);
  if (!rep.ok()) {
    throw std::invalid_argument("to_population: spec failed validation:\n" + rep.summary());
  }
  return to_population(full_joint(spec));
}

double PopulationJoint::p_x(int x) const {
  double s = 0.0;
  for (int a = 0; a < space.a_levels; ++a) s += p_xa(x, a);
  return s;
}

double PopulationJoint::p_xa(int x, int a) const {
  double s = 0.0;
  for (int z = 0; z < space.z_levels; ++z)
    for (int w = 0; w < space.w_levels; ++w) s += p.at(x, a, z, w);
  return s;
}

double PopulationJoint::p_a_given_x(int x, int a) const {
  const double den = p_x(x);
  return den > 0.0 ? p_xa(x, a) / den : 0.0;
}

double PopulationJoint::p_w_given_ax(int x, int a, int w) const {
  const double den = p_xa(x, a);
  if (den <= 0.0) return 0.0;
  double s = 0.0;
  for (int z = 0; z < space.z_levels; ++z) s += p.at(x, a, z, w);
  return s / den;
}

double PopulationJoint::p_z_given_ax(int x, int a, int z) const {
  const double den = p_xa(x, a);
  return den > 0.0 ? p_zax(x, a, z) / den : 0.0;
}

double PopulationJoint::p_zax(int x, int a, int z) const {
  double s = 0.0;
  for (int w = 0; w < space.w_levels; ++w) s += p.at(x, a, z, w);
  return s;
}

double PopulationJoint::p_w_given_zax(int x, int a, int z, int w) const {
  const double den = p_zax(x, a, z);
  return den > 0.0 ? p.at(x, a, z, w) / den : 0.0;
}

double PopulationJoint::p_z_given_wax(int x, int a, int w, int z) const {
  double den = 0.0;
  for (int zz = 0; zz < space.z_levels; ++zz) den += p.at(x, a, zz, w);
  return den > 0.0 ? p.at(x, a, z, w) / den : 0.0;
}

double PopulationJoint::ey_given_zax(int x, int a, int z) const {
  double num = 0.0, den = 0.0;
  for (int w = 0; w < space.w_levels; ++w) {
    const double v = p.at(x, a, z, w);
    den += v;
    num += v * ymean.at(x, a, z, w);
  }
  return den > 0.0 ? num / den : 0.0;
}

double PopulationJoint::total_mass() const {
  double s = 0.0;
  for (double v : p.flat()) s += v;
  return s;
}

}  // namespace proxmed
