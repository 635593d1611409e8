#pragma once

// Hand-built fixed specs for unit tests (independent of the dgp generator
// and of the frozen fixture catalog).

#include "proxmed/model.hpp"

namespace proxmed::testspec {

inline Table filled(std::vector<int> shape, std::vector<double> vals) {
  Table t(std::move(shape));
  t.flat() = std::move(vals);
  return t;
}

// All-binary mediation model, no hidden confounder, both dashed edges
// present (A->Z and W->Y), direct A->Y effect.
inline ScmSpec tiny_mediation() {
  ScmSpec s;
  s.id = "tiny_mediation";
  s.kind = ModelKind::mediation;
  s.space = {2, 0, 2, 2, 2, 2, 2, false};
  s.p_x = filled({2}, {0.4, 0.6});
  s.p_a_given_xu = filled({2, 1, 2}, {0.7, 0.3, 0.35, 0.65});
  s.p_m_given_ax = filled({2, 2, 2}, {0.8, 0.2, 0.3, 0.7, 0.6, 0.4, 0.25, 0.75});
  // [x][a][m][z]
  s.p_z_given_max = filled({2, 2, 2, 2}, {0.9,  0.1,  0.2, 0.8,  0.85, 0.15, 0.3, 0.7,
                                          0.75, 0.25, 0.1, 0.9,  0.8,  0.2,  0.15, 0.85});
  // [x][1][m][1][w]
  s.p_w_given_mx = filled({2, 1, 2, 1, 2}, {0.85, 0.15, 0.25, 0.75, 0.7, 0.3, 0.2, 0.8});
  // [x][1][a][m][1][w][y]
  s.p_y = filled({2, 1, 2, 2, 1, 2, 2},
                 {0.9,  0.1,  0.7, 0.3,  0.6,  0.4,  0.3, 0.7,  0.8,  0.2,  0.55, 0.45,
                  0.45, 0.55, 0.2, 0.8,  0.85, 0.15, 0.6, 0.4,  0.5,  0.5,  0.25, 0.75,
                  0.7,  0.3,  0.4, 0.6,  0.35, 0.65, 0.1, 0.9});
  return s;
}

// Binary front-door model with a 2-level hidden confounder of (A, Y); the
// outcome law does not depend on A directly.
inline ScmSpec tiny_front_door() {
  ScmSpec s;
  s.id = "tiny_front_door";
  s.kind = ModelKind::front_door;
  s.space = {2, 2, 2, 2, 2, 2, 2, false};
  s.p_x = filled({2}, {0.5, 0.5});
  s.p_u_given_x = filled({2, 2}, {0.6, 0.4, 0.3, 0.7});
  s.p_a_given_xu = filled({2, 2, 2}, {0.8, 0.2, 0.4, 0.6, 0.55, 0.45, 0.25, 0.75});
  s.p_m_given_ax = filled({2, 2, 2}, {0.75, 0.25, 0.35, 0.65, 0.6, 0.4, 0.2, 0.8});
  s.p_z_given_max = filled({2, 2, 2, 2}, {0.9,  0.1,  0.25, 0.75, 0.8, 0.2,  0.3, 0.7,
                                          0.85, 0.15, 0.2,  0.8,  0.7, 0.3,  0.1, 0.9});
  s.p_w_given_mx = filled({2, 1, 2, 1, 2}, {0.8, 0.2, 0.3, 0.7, 0.75, 0.25, 0.15, 0.85});
  // [x][u][1(a)][m][1][w][y]: no direct A argument
  s.p_y = filled({2, 2, 1, 2, 1, 2, 2},
                 {0.9, 0.1,  0.65, 0.35, 0.5,  0.5,  0.2,  0.8,  0.75, 0.25, 0.45, 0.55,
                  0.4, 0.6,  0.15, 0.85, 0.85, 0.15, 0.55, 0.45, 0.35, 0.65, 0.1,  0.9,
                  0.6, 0.4,  0.3,  0.7,  0.3,  0.7,  0.05, 0.95});
  return s;
}

// Binary generalized front-door: hidden confounder plus a direct A->Y edge.
inline ScmSpec tiny_generalized() {
  ScmSpec s = tiny_front_door();
  s.id = "tiny_generalized";
  s.kind = ModelKind::generalized_front_door;
  // [x][u][a][m][1][w][y]: now with a real A axis
  s.p_y = filled(
      {2, 2, 2, 2, 1, 2, 2},
      {0.9,  0.1,  0.65, 0.35, 0.5,  0.5,  0.2,  0.8,  0.55, 0.45, 0.35, 0.65, 0.25, 0.75, 0.1, 0.9,
       0.75, 0.25, 0.45, 0.55, 0.4,  0.6,  0.15, 0.85, 0.5,  0.5,  0.3,  0.7,  0.2,  0.8,  0.05, 0.95,
       0.85, 0.15, 0.55, 0.45, 0.35, 0.65, 0.1,  0.9,  0.6,  0.4,  0.3,  0.7,  0.15, 0.85, 0.05, 0.95,
       0.6,  0.4,  0.3,  0.7,  0.3,  0.7,  0.05, 0.95, 0.45, 0.55, 0.2,  0.8,  0.1,  0.9,  0.02, 0.98});
  return s;
}

// Perfect proxies: W = Z = M exactly, no confounder, Y depends on (a,m,x).
inline ScmSpec perfect_proxy() {
  ScmSpec s;
  s.id = "perfect_proxy";
  s.kind = ModelKind::mediation;
  s.space = {1, 0, 2, 2, 2, 2, 2, false};
  s.p_x = filled({1}, {1.0});
  s.p_a_given_xu = filled({1, 1, 2}, {0.5, 0.5});
  s.p_m_given_ax = filled({1, 2, 2}, {0.7, 0.3, 0.2, 0.8});
  s.p_z_given_max = filled({1, 1, 2, 2}, {1.0, 0.0, 0.0, 1.0});
  s.p_w_given_mx = filled({1, 1, 2, 1, 2}, {1.0, 0.0, 0.0, 1.0});
  s.p_y = filled({1, 1, 2, 2, 1, 1, 2}, {0.9, 0.1, 0.4, 0.6, 0.65, 0.35, 0.15, 0.85});
  return s;
}

// W carries no information about M (rank-1 mixing) while Y genuinely
// depends on M: the outcome bridge equation has no solution.
inline ScmSpec broken_w_mixing() {
  ScmSpec s = tiny_mediation();
  s.id = "broken_w_mixing";
  s.p_w_given_mx = filled({2, 1, 2, 1, 2}, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  return s;
}

// Null treatment: A feeds neither M nor Y.
inline ScmSpec null_effect() {
  ScmSpec s = tiny_mediation();
  s.id = "null_effect";
  s.p_m_given_ax = filled({2, 2, 2}, {0.8, 0.2, 0.8, 0.2, 0.3, 0.7, 0.3, 0.7});
  s.p_y = filled({2, 1, 2, 2, 1, 2, 2},
                 {0.9,  0.1,  0.7, 0.3,  0.6,  0.4,  0.3, 0.7,
                  0.9,  0.1,  0.7, 0.3,  0.6,  0.4,  0.3, 0.7,
                  0.85, 0.15, 0.6, 0.4,  0.5,  0.5,  0.25, 0.75,
                  0.85, 0.15, 0.6, 0.4,  0.5,  0.5,  0.25, 0.75});
  return s;
}

// m_levels = 2 but w_levels = 3: the outcome bridge system is
// underdetermined, exercising the minimum-norm choice and psi invariance
// across solutions.
inline ScmSpec wide_w() {
  ScmSpec s;
  s.id = "wide_w";
  s.kind = ModelKind::mediation;
  s.space = {1, 0, 2, 2, 2, 3, 2, false};
  s.p_x = filled({1}, {1.0});
  s.p_a_given_xu = filled({1, 1, 2}, {0.45, 0.55});
  s.p_m_given_ax = filled({1, 2, 2}, {0.7, 0.3, 0.25, 0.75});
  s.p_z_given_max = filled({1, 2, 2, 2}, {0.85, 0.15, 0.2, 0.8, 0.75, 0.25, 0.3, 0.7});
  s.p_w_given_mx = filled({1, 1, 2, 1, 3}, {0.7, 0.2, 0.1, 0.15, 0.25, 0.6});
  s.p_y = filled({1, 1, 2, 2, 1, 3, 2},
                 {0.9, 0.1, 0.6, 0.4, 0.5, 0.5, 0.65, 0.35, 0.35, 0.65, 0.2, 0.8,
                  0.8, 0.2, 0.5, 0.5, 0.4, 0.6, 0.5,  0.5,  0.25, 0.75, 0.1, 0.9});
  return s;
}

// Z carries no information about M: completeness on the Z side fails.
inline ScmSpec z_uninformative() {
  ScmSpec s = tiny_mediation();
  s.id = "z_uninformative";
  s.p_z_given_max = filled({2, 2, 2, 2}, {0.6, 0.4, 0.6, 0.4, 0.6, 0.4, 0.6, 0.4,
                                          0.35, 0.65, 0.35, 0.65, 0.35, 0.65, 0.35, 0.65});
  return s;
}

// Constant outcome Y = 1 regardless of anything (discrete levels {0,1},
// mass on level 1).
inline ScmSpec constant_outcome() {
  ScmSpec s = tiny_mediation();
  s.id = "constant_outcome";
  std::vector<double> v(s.p_y.size(), 0.0);
  for (std::size_t i = 1; i < v.size(); i += 2) v[i] = 1.0;
  s.p_y.flat() = v;
  return s;
}

}  // namespace proxmed::testspec
