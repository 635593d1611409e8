#pragma once

#include <optional>
#include <string>
#include <vector>

#include "proxmed/table.hpp"

namespace proxmed {

enum class ModelKind { mediation, front_door, generalized_front_door };

std::string to_string(ModelKind k);
std::optional<ModelKind> model_kind_from_string(const std::string& s);

// Variable supports. u_levels == 0 means no hidden treatment-outcome
// confounder. Proxy supports must be at least as large as the mediator's,
// otherwise the completeness rank conditions cannot hold.
struct FiniteSpace {
  int x_levels = 1;
  int u_levels = 0;
  int a_levels = 2;
  int m_levels = 2;
  int z_levels = 2;
  int w_levels = 2;
  int y_levels = 2;
  bool y_continuous = false;

  int ueff() const { return u_levels > 0 ? u_levels : 1; }
  bool valid(std::string* why = nullptr) const;
};

// Discrete structural model over (X, U, A, M, Z, W, Y).
//
// Tables are stored with the full canonical axis order (x, u, a, m, z, w, y);
// axes a variable does not depend on are kept as broadcast axes of size 1.
// The proxy structure lives in the shapes: W may not depend on A or Z, and Y
// may not depend on Z. A spec can still carry such an axis with real extent
// (e.g. loaded from JSON) to represent an *invalid* model; validate_spec
// flags any actual variation along it.
struct ScmSpec {
  std::string id;
  ModelKind kind = ModelKind::mediation;
  FiniteSpace space;

  Table p_x;           // [x]
  Table p_u_given_x;   // [x][u]; empty when u_levels == 0
  Table p_a_given_xu;  // [x][ueff][a]
  Table p_m_given_ax;  // [x][a][m]
  Table p_z_given_max; // [x][a][m][z]
  Table p_w_given_mx;  // [x][a|1][m][z|1][w]
  Table p_y;           // discrete: [x][ueff][a][m][z|1][w|1][y]; continuous: no y axis
  double y_noise_sd = 1.0;  // only used when sampling continuous Y

  double px(int x) const { return p_x.at(x); }
  double pu(int x, int u) const { return space.u_levels > 0 ? p_u_given_x.at(x, u) : 1.0; }
  double pa(int x, int u, int a) const { return p_a_given_xu.at(x, u, a); }
  double pm(int x, int a, int m) const { return p_m_given_ax.at(x, a, m); }
  double pz(int x, int a, int m, int z) const { return p_z_given_max.at(x, a, m, z); }
  double pw(int x, int a, int m, int z, int w) const { return p_w_given_mx.at(x, a, m, z, w); }
  double py(int x, int u, int a, int m, int z, int w, int y) const {
    return p_y.at(x, u, a, m, z, w, y);
  }
  // Conditional outcome mean for one full parent configuration.
  double ymean(int x, int u, int a, int m, int z, int w) const;
};

struct ValidationCheck {
  std::string name;
  bool pass = true;
  std::vector<std::string> offenders;  // human-readable cell descriptions
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool ok() const;
  std::string summary() const;
};

// Checks every structural assumption the model kind requires: table shapes
// and normalization, positivity of p(m|a,x) and induced p(a|x), the proxy
// conditional independences, mediation => no hidden confounder, and the
// front-door exclusion restriction.
ValidationReport validate_spec(const ScmSpec& spec);

// Linear-Gaussian test bed: X ~ N(0, sigma_x^2), A binary with logistic
// propensity in X, M = alpha*A + gamma*X + eps_m, Z = M + eps_z,
// W = M + eps_w, Y = b*M + c*A + d*X + eps_y. The outcome bridge is
// analytically b*w + c*a + d*x.
struct GaussianScmSpec {
  std::string id;
  double sigma_x = 1.0;
  double prop_intercept = 0.0;  // logit p(A=1|x) = prop_intercept + prop_slope*x
  double prop_slope = 0.0;
  double alpha = 1.0;
  double gamma = 0.0;
  double sigma_m = 1.0;
  double sigma_z = 1.0;
  double sigma_w = 1.0;
  double b = 1.0;
  double c = 0.0;
  double d = 0.0;
  double sigma_y = 1.0;

  bool valid(std::string* why = nullptr) const;
  double bridge_h(double w, int a, double x) const { return b * w + c * a + d * x; }
};

}  // namespace proxmed
