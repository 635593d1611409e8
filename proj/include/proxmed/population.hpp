#pragma once

#include <string>

#include "proxmed/model.hpp"
#include "proxmed/table.hpp"

namespace proxmed {

// Exact joint over all model variables including the hidden ones. Only
// reachable from a generative ScmSpec; downstream estimation never sees M or
// U. Used for ground-truth baselines and completeness diagnostics.
struct FullJoint {
  FiniteSpace space;
  std::string source_id;
  Table p;       // [x][ueff][a][m][z][w]
  Table ymean;   // [x][ueff][a][m][z][w]

  // Observational conditionals with M access.
  double p_xam(int x, int a, int m) const;        // joint p(x,a,m)
  double p_m_given_ax(int x, int a, int m) const;
  double p_m_given_zax(int x, int a, int z, int m) const;
  double p_m_given_wax(int x, int a, int w, int m) const;
  double p_z_given_max(int x, int a, int m, int z) const;
  double ey_given_max(int x, int a, int m) const;  // E[Y | m,a,x]
  double p_xa(int x, int a) const;
  double p_x(int x) const;
};

// Exact joint over the observed tuple (X, A, Z, W) with the conditional
// outcome mean per cell. Substrate for every population-level identity.
struct PopulationJoint {
  FiniteSpace space;
  std::string source_id;
  Table p;       // [x][a][z][w]
  Table ymean;   // [x][a][z][w]

  double p_x(int x) const;
  double p_xa(int x, int a) const;
  double p_a_given_x(int x, int a) const;
  double p_w_given_ax(int x, int a, int w) const;
  double p_z_given_ax(int x, int a, int z) const;
  double p_zax(int x, int a, int z) const;
  double p_w_given_zax(int x, int a, int z, int w) const;
  double p_z_given_wax(int x, int a, int w, int z) const;
  double ey_given_zax(int x, int a, int z) const;
  double total_mass() const;
};

FullJoint full_joint(const ScmSpec& spec);

// Sums M (and U when present) out of the structural model. Rejects specs
// that fail validate_spec.
PopulationJoint to_population(const ScmSpec& spec);
PopulationJoint to_population(const FullJoint& fj);

}  // namespace proxmed
