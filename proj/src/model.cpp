#include "proxmed/model.hpp"

#include <cmath>
#include <sstream>

namespace proxmed {

namespace {

constexpr double kRowSumTol = 1e-12;

std::string cell_str(const char* table, std::span<const int> idx) {
  std::ostringstream os;
  os << table << "[";
  for (std::size_t i = 0; i < idx.size(); ++i) os << (i ? "," : "") << idx[i];
  os << "]";
  return os.str();
}

}  // namespace

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::mediation: return "mediation";
    case ModelKind::front_door: return "front_door";
    case ModelKind::generalized_front_door: return "generalized_front_door";
  }
  return "unknown";
}

std::optional<ModelKind> model_kind_from_string(const std::string& s) {
  if (s == "mediation") return ModelKind::mediation;
  if (s == "front_door") return ModelKind::front_door;
  if (s == "generalized_front_door") return ModelKind::generalized_front_door;
  return std::nullopt;
}

bool FiniteSpace::valid(std::string* why) const {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (x_levels < 1) return fail("x_levels must be >= 1");
  if (u_levels < 0) return fail("u_levels must be >= 0");
  if (a_levels < 2) return fail("a_levels must be >= 2");
  if (m_levels < 2) return fail("m_levels must be >= 2");
  if (z_levels < m_levels) return fail("z_levels must be >= m_levels");
  if (w_levels < m_levels) return fail("w_levels must be >= m_levels");
  if (!y_continuous && y_levels < 2) return fail("y_levels must be >= 2");
  return true;
}

double ScmSpec::ymean(int x, int u, int a, int m, int z, int w) const {
  if (space.y_continuous) return p_y.at(x, u, a, m, z, w);
  double s = 0.0;
  for (int y = 0; y < space.y_levels; ++y) s += y * p_y.at(x, u, a, m, z, w, y);
  return s;
}

bool ValidationReport::ok() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.pass ? "pass" : "FAIL") << "  " << c.name;
    if (!c.pass && !c.offenders.empty()) {
      os << "  (" << c.offenders.size() << " offenders, first: " << c.offenders.front() << ")";
    }
    os << "\n";
  }
  return os.str();
}

namespace {

// Checks that every row (last axis) of a conditional table is a probability
// vector; records offending rows into the check.
void check_rows(const Table& t, const char* name, ValidationCheck& chk) {
  if (t.empty()) return;
  const int last = t.shape().back();
  const auto& v = t.flat();
  for (std::size_t r = 0; r < v.size(); r += static_cast<std::size_t>(last)) {
    double s = 0.0;
    bool neg = false;
    for (int k = 0; k < last; ++k) {
      s += v[r + static_cast<std::size_t>(k)];
      neg = neg || v[r + static_cast<std::size_t>(k)] < 0.0;
    }
    if (neg || std::abs(s - 1.0) > kRowSumTol) {
      chk.pass = false;
      std::ostringstream os;
      os << name << " row at flat offset " << r << " sum=" << s << (neg ? " (negative entry)" : "");
      chk.offenders.push_back(os.str());
      if (chk.offenders.size() >= 16) return;  // enough to diagnose
    }
  }
}

// True iff the table varies along axis `d` by more than kRowSumTol.
bool varies_along(const Table& t, int d, std::vector<std::string>* offenders, const char* name) {
  if (t.empty() || t.dim(d) <= 1) return false;
  bool found = false;
  t.for_each_index([&](std::span<const int> idx) {
    if (idx[static_cast<std::size_t>(d)] != 0) return;
    std::vector<int> other(idx.begin(), idx.end());
    const double base = t.flat()[t.offset(idx)];
    for (int i = 1; i < t.dim(d); ++i) {
      other[static_cast<std::size_t>(d)] = i;
      if (std::abs(t.flat()[t.offset(other)] - base) > kRowSumTol) {
        if (offenders && offenders->size() < 16) offenders->push_back(cell_str(name, other));
        found = true;
      }
    }
  });
  return found;
}

}  // namespace

ValidationReport validate_spec(const ScmSpec& spec) {
  ValidationReport rep;
  const FiniteSpace& sp = spec.space;

  auto& space_chk = rep.checks.emplace_back(ValidationCheck{"space invariants", true, {}});
  std::string why;
  if (!sp.valid(&why)) {
    space_chk.pass = false;
    space_chk.offenders.push_back(why);
    return rep;  // shapes below would be meaningless
  }

  auto& shape_chk = rep.checks.emplace_back(ValidationCheck{"table shapes", true, {}});
  auto expect = [&](const Table& t, std::vector<std::vector<int>> allowed, const char* name) {
    for (const auto& s : allowed)
      if (t.shape() == s) return;
    shape_chk.pass = false;
    shape_chk.offenders.push_back(name);
  };
  const int X = sp.x_levels, U = sp.ueff(), A = sp.a_levels, M = sp.m_levels;
  const int Z = sp.z_levels, W = sp.w_levels, Y = sp.y_levels;
  expect(spec.p_x, {{X}}, "p_x");
  if (sp.u_levels > 0) expect(spec.p_u_given_x, {{X, sp.u_levels}}, "p_u_given_x");
  expect(spec.p_a_given_xu, {{X, U, A}}, "p_a_given_xu");
  expect(spec.p_m_given_ax, {{X, A, M}}, "p_m_given_ax");
  expect(spec.p_z_given_max, {{X, A, M, Z}, {X, 1, M, Z}}, "p_z_given_max");
  expect(spec.p_w_given_mx, {{X, 1, M, 1, W}, {X, A, M, 1, W}, {X, 1, M, Z, W}, {X, A, M, Z, W}},
         "p_w_given_mx");
  {
    // p_y slots: [x][ueff][a|1][m][z|1][w|1]([y]); the optional axes may be
    // broadcast, and a real z axis is only legal for validation-failure specs
    const auto& ys = spec.p_y.shape();
    const bool rank_ok = static_cast<int>(ys.size()) == (sp.y_continuous ? 6 : 7);
    bool ok = rank_ok && ys[0] == X && ys[1] == U && (ys[2] == 1 || ys[2] == A) && ys[3] == M &&
              (ys[4] == 1 || ys[4] == Z) && (ys[5] == 1 || ys[5] == W);
    if (ok && !sp.y_continuous) ok = ys[6] == Y;
    if (!ok) {
      shape_chk.pass = false;
      shape_chk.offenders.push_back("p_y");
    }
  }
  if (!shape_chk.pass) return rep;

  auto& norm_chk = rep.checks.emplace_back(ValidationCheck{"conditional rows normalized", true, {}});
  check_rows(spec.p_x, "p_x", norm_chk);
  if (sp.u_levels > 0) check_rows(spec.p_u_given_x, "p_u_given_x", norm_chk);
  check_rows(spec.p_a_given_xu, "p_a_given_xu", norm_chk);
  check_rows(spec.p_m_given_ax, "p_m_given_ax", norm_chk);
  check_rows(spec.p_z_given_max, "p_z_given_max", norm_chk);
  check_rows(spec.p_w_given_mx, "p_w_given_mx", norm_chk);
  if (!sp.y_continuous) check_rows(spec.p_y, "p_y", norm_chk);

  auto& posm_chk = rep.checks.emplace_back(ValidationCheck{"positivity of p(m|a,x)", true, {}});
  spec.p_m_given_ax.for_each_index([&](std::span<const int> idx) {
    if (spec.p_m_given_ax.flat()[spec.p_m_given_ax.offset(idx)] <= 0.0) {
      posm_chk.pass = false;
      if (posm_chk.offenders.size() < 16) posm_chk.offenders.push_back(cell_str("p_m_given_ax", idx));
    }
  });

  auto& posa_chk = rep.checks.emplace_back(ValidationCheck{"positivity of p(a|x)", true, {}});
  for (int x = 0; x < X; ++x) {
    for (int a = 0; a < A; ++a) {
      double pax = 0.0;
      for (int u = 0; u < U; ++u) pax += spec.pu(x, u) * spec.pa(x, u, a);
      if (pax <= 0.0) {
        posa_chk.pass = false;
        std::ostringstream os;
        os << "p(a=" << a << "|x=" << x << ")=0";
        posa_chk.offenders.push_back(os.str());
      }
    }
  }

  auto& yz_chk = rep.checks.emplace_back(ValidationCheck{"Y indep Z given A,M,X", true, {}});
  if (varies_along(spec.p_y, 4, &yz_chk.offenders, "p_y")) yz_chk.pass = false;

  auto& w_chk = rep.checks.emplace_back(ValidationCheck{"W indep {A,Z} given M,X", true, {}});
  if (varies_along(spec.p_w_given_mx, 1, &w_chk.offenders, "p_w_given_mx")) w_chk.pass = false;
  if (varies_along(spec.p_w_given_mx, 3, &w_chk.offenders, "p_w_given_mx")) w_chk.pass = false;

  if (spec.kind == ModelKind::mediation) {
    auto& med_chk = rep.checks.emplace_back(ValidationCheck{"mediation has no hidden confounder", true, {}});
    if (sp.u_levels != 0) {
      med_chk.pass = false;
      med_chk.offenders.push_back("u_levels > 0");
    }
  }

  if (spec.kind == ModelKind::front_door) {
    auto& excl_chk = rep.checks.emplace_back(ValidationCheck{"front-door exclusion: Y has no direct A", true, {}});
    if (varies_along(spec.p_y, 2, &excl_chk.offenders, "p_y")) excl_chk.pass = false;
  }

  return rep;
}

bool GaussianScmSpec::valid(std::string* why) const {
  auto fail = [&](const char* msg) {
    if (why) *why = msg;
    return false;
  };
  if (!(sigma_x > 0.0)) return fail("sigma_x must be > 0");
  if (!(sigma_m > 0.0)) return fail("sigma_m must be > 0");
  if (!(sigma_z > 0.0)) return fail("sigma_z must be > 0");
  if (!(sigma_w > 0.0)) return fail("sigma_w must be > 0");
  if (!(sigma_y > 0.0)) return fail("sigma_y must be > 0");
  return true;
}

}  // namespace proxmed
