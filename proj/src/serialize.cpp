#include "proxmed/serialize.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstring>
#include <fstream>

namespace proxmed {

using nlohmann::json;

namespace {

json nest_values(const Table& t, const std::vector<int>& shape, std::size_t depth,
                 std::size_t& cursor) {
  json arr = json::array();
  if (depth + 1 == shape.size()) {
    for (int i = 0; i < shape[depth]; ++i) arr.push_back(t.flat()[cursor++]);
  } else {
    for (int i = 0; i < shape[depth]; ++i) arr.push_back(nest_values(t, shape, depth + 1, cursor));
  }
  return arr;
}

void flatten_values(const json& node, std::vector<int>& shape, std::size_t depth,
                    std::vector<double>& out, const std::string& key) {
  if (!node.is_array()) throw SchemaError(key + ": expected nested arrays of numbers");
  const int len = static_cast<int>(node.size());
  if (len == 0) throw SchemaError(key + ": empty array");
  if (depth == shape.size()) {
    shape.push_back(len);
  } else if (shape[depth] != len) {
    throw SchemaError(key + ": ragged nesting");
  }
  for (const auto& child : node) {
    if (child.is_array()) {
      flatten_values(child, shape, depth + 1, out, key);
    } else if (child.is_number()) {
      if (depth + 1 != shape.size() && shape.size() > depth + 1)
        throw SchemaError(key + ": ragged nesting");
      out.push_back(child.get<double>());
    } else {
      throw SchemaError(key + ": expected number");
    }
  }
}

constexpr const char* kCanonical = "xuamzwy";

int canon_pos(const std::string& d, const std::string& key) {
  if (d.size() == 1) {
    const char* p = std::strchr(kCanonical, d[0]);
    if (p) return static_cast<int>(p - kCanonical);
  }
  throw SchemaError(key + ".dims: unknown axis '" + d + "'");
}

// Parses {"dims": [...], "values": nested} and embeds into the full slot
// layout given by `slots` (axis name -> required extent; missing optional
// axes become broadcast axes of extent 1).
Table load_table(const json& jt, const std::string& key,
                 const std::vector<std::pair<char, int>>& slots,
                 const std::vector<char>& required) {
  if (!jt.is_object() || !jt.contains("dims") || !jt.contains("values"))
    throw SchemaError("tables." + key + ": expected {\"dims\":[...],\"values\":[...]}");
  std::vector<std::string> dims = jt.at("dims").get<std::vector<std::string>>();
  int prev = -1;
  for (const auto& d : dims) {
    const int p = canon_pos(d, "tables." + key);
    if (p <= prev) throw SchemaError("tables." + key + ".dims: axes must follow order x,u,a,m,z,w,y");
    prev = p;
  }
  auto has = [&](char c) {
    for (const auto& d : dims)
      if (d[0] == c) return true;
    return false;
  };
  for (char c : required)
    if (!has(c))
      throw SchemaError("tables." + key + ".dims: missing required axis '" + std::string(1, c) + "'");
  for (const auto& d : dims) {
    bool known = false;
    for (const auto& [c, extent] : slots) known = known || c == d[0];
    if (!known) throw SchemaError("tables." + key + ".dims: axis '" + d + "' not allowed here");
  }

  std::vector<int> shape;
  std::vector<double> flat;
  flatten_values(jt.at("values"), shape, 0, flat, "tables." + key + ".values");
  if (shape.size() != dims.size())
    throw SchemaError("tables." + key + ": nesting depth does not match dims");

  std::vector<int> full_shape;
  full_shape.reserve(slots.size());
  std::size_t di = 0;
  for (const auto& [c, extent] : slots) {
    if (di < dims.size() && dims[di][0] == c) {
      if (shape[di] != extent)
        throw SchemaError("tables." + key + ": axis '" + std::string(1, c) + "' has extent " +
                          std::to_string(shape[di]) + ", expected " + std::to_string(extent));
      full_shape.push_back(extent);
      ++di;
    } else {
      full_shape.push_back(1);
    }
  }
  if (di != dims.size()) throw SchemaError("tables." + key + ": dims not consumed");

  Table t(full_shape);
  t.flat() = std::move(flat);
  return t;
}

json dump_table(const Table& t, const std::vector<std::pair<char, int>>& slots,
                const std::vector<char>& always) {
  std::vector<std::string> dims;
  std::vector<int> shape;
  for (std::size_t d = 0; d < slots.size(); ++d) {
    const char c = slots[d].first;
    const bool keep = t.dim(static_cast<int>(d)) > 1 ||
                      std::find(always.begin(), always.end(), c) != always.end();
    if (keep) {
      dims.emplace_back(1, c);
      shape.push_back(t.dim(static_cast<int>(d)));
    }
  }
  // Dropped axes all have extent 1, so the row-major flat layouts agree.
  Table packed(shape);
  packed.flat() = t.flat();
  json out;
  out["dims"] = dims;
  std::size_t c2 = 0;
  out["values"] = nest_values(packed, shape, 0, c2);
  return out;
}

int get_int(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer())
    throw SchemaError(std::string("space.") + key + ": expected integer");
  return j.at(key).get<int>();
}

double get_num(const json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw SchemaError(key + ": expected number");
  return j.at(key).get<double>();
}

}  // namespace

nlohmann::json table_to_json(const Table& t, const std::vector<std::string>& dims) {
  json out;
  out["dims"] = dims;
  std::size_t cursor = 0;
  out["values"] = nest_values(t, t.shape(), 0, cursor);
  return out;
}

json to_json(const ScmSpec& spec) {
  const FiniteSpace& sp = spec.space;
  json j;
  j["id"] = spec.id;
  j["model_kind"] = to_string(spec.kind);
  j["space"] = {{"x_levels", sp.x_levels}, {"u_levels", sp.u_levels}, {"a_levels", sp.a_levels},
                {"m_levels", sp.m_levels}, {"z_levels", sp.z_levels}, {"w_levels", sp.w_levels},
                {"y_levels", sp.y_levels}, {"y_continuous", sp.y_continuous}};
  json tables;
  tables["p_x"] = dump_table(spec.p_x, {{'x', sp.x_levels}}, {'x'});
  if (sp.u_levels > 0)
    tables["p_u_given_x"] = dump_table(spec.p_u_given_x, {{'x', sp.x_levels}, {'u', sp.u_levels}}, {'x', 'u'});
  tables["p_a_given_xu"] =
      dump_table(spec.p_a_given_xu, {{'x', sp.x_levels}, {'u', sp.ueff()}, {'a', sp.a_levels}},
                 sp.u_levels > 0 ? std::vector<char>{'x', 'u', 'a'} : std::vector<char>{'x', 'a'});
  tables["p_m_given_ax"] = dump_table(
      spec.p_m_given_ax, {{'x', sp.x_levels}, {'a', sp.a_levels}, {'m', sp.m_levels}}, {'x', 'a', 'm'});
  tables["p_z_given_max"] =
      dump_table(spec.p_z_given_max,
                 {{'x', sp.x_levels}, {'a', sp.a_levels}, {'m', sp.m_levels}, {'z', sp.z_levels}},
                 {'x', 'm', 'z'});
  tables["p_w_given_mx"] =
      dump_table(spec.p_w_given_mx,
                 {{'x', sp.x_levels}, {'a', sp.a_levels}, {'m', sp.m_levels}, {'z', sp.z_levels},
                  {'w', sp.w_levels}},
                 {'x', 'm', 'w'});
  std::vector<char> y_always = {'x', 'm'};
  if (sp.u_levels > 0) y_always.push_back('u');
  if (!sp.y_continuous) y_always.push_back('y');
  std::vector<std::pair<char, int>> y_slots = {{'x', sp.x_levels}, {'u', sp.ueff()},
                                               {'a', sp.a_levels}, {'m', sp.m_levels},
                                               {'z', sp.z_levels}, {'w', sp.w_levels}};
  if (!sp.y_continuous) y_slots.push_back({'y', sp.y_levels});
  tables["p_y_given_mawxu"] = dump_table(spec.p_y, y_slots, y_always);
  j["tables"] = std::move(tables);
  if (sp.y_continuous) j["y_noise_sd"] = spec.y_noise_sd;
  return j;
}

ScmSpec scm_from_json(const json& j) {
  ScmSpec spec;
  if (j.contains("id")) spec.id = j.at("id").get<std::string>();
  if (!j.contains("model_kind")) throw SchemaError("model_kind: missing");
  const auto kind = model_kind_from_string(j.at("model_kind").get<std::string>());
  if (!kind) throw SchemaError("model_kind: must be mediation|front_door|generalized_front_door");
  spec.kind = *kind;

  if (!j.contains("space")) throw SchemaError("space: missing");
  const json& s = j.at("space");
  FiniteSpace sp;
  sp.x_levels = get_int(s, "x_levels");
  sp.u_levels = get_int(s, "u_levels");
  sp.a_levels = get_int(s, "a_levels");
  sp.m_levels = get_int(s, "m_levels");
  sp.z_levels = get_int(s, "z_levels");
  sp.w_levels = get_int(s, "w_levels");
  sp.y_continuous = s.value("y_continuous", false);
  sp.y_levels = sp.y_continuous ? 0 : get_int(s, "y_levels");
  std::string why;
  if (!sp.valid(&why)) throw SchemaError("space: " + why);
  spec.space = sp;

  if (!j.contains("tables")) throw SchemaError("tables: missing");
  const json& t = j.at("tables");
  auto need = [&](const char* key) -> const json& {
    if (!t.contains(key)) throw SchemaError(std::string("tables.") + key + ": missing");
    return t.at(key);
  };
  spec.p_x = load_table(need("p_x"), "p_x", {{'x', sp.x_levels}}, {'x'});
  if (sp.u_levels > 0) {
    spec.p_u_given_x = load_table(need("p_u_given_x"), "p_u_given_x",
                                  {{'x', sp.x_levels}, {'u', sp.u_levels}}, {'x', 'u'});
  }
  spec.p_a_given_xu =
      load_table(need("p_a_given_xu"), "p_a_given_xu",
                 {{'x', sp.x_levels}, {'u', sp.ueff()}, {'a', sp.a_levels}},
                 sp.u_levels > 0 ? std::vector<char>{'x', 'u', 'a'} : std::vector<char>{'x', 'a'});
  spec.p_m_given_ax =
      load_table(need("p_m_given_ax"), "p_m_given_ax",
                 {{'x', sp.x_levels}, {'a', sp.a_levels}, {'m', sp.m_levels}}, {'x', 'a', 'm'});
  spec.p_z_given_max = load_table(
      need("p_z_given_max"), "p_z_given_max",
      {{'x', sp.x_levels}, {'a', sp.a_levels}, {'m', sp.m_levels}, {'z', sp.z_levels}},
      {'x', 'm', 'z'});
  spec.p_w_given_mx =
      load_table(need("p_w_given_mx"), "p_w_given_mx",
                 {{'x', sp.x_levels}, {'a', sp.a_levels}, {'m', sp.m_levels}, {'z', sp.z_levels},
                  {'w', sp.w_levels}},
                 {'x', 'm', 'w'});
  std::vector<char> y_required = {'x', 'm'};
  if (sp.u_levels > 0) y_required.push_back('u');
  if (!sp.y_continuous) y_required.push_back('y');
  std::vector<std::pair<char, int>> y_slots = {{'x', sp.x_levels}, {'u', sp.ueff()},
                                               {'a', sp.a_levels}, {'m', sp.m_levels},
                                               {'z', sp.z_levels}, {'w', sp.w_levels}};
  if (!sp.y_continuous) y_slots.push_back({'y', sp.y_levels});
  spec.p_y = load_table(need("p_y_given_mawxu"), "p_y_given_mawxu", y_slots, y_required);
  if (sp.y_continuous) spec.y_noise_sd = j.value("y_noise_sd", 1.0);
  return spec;
}

json to_json(const GaussianScmSpec& g) {
  return json{{"id", g.id},
              {"kind", "gaussian"},
              {"sigma_x", g.sigma_x},
              {"propensity", {{"intercept", g.prop_intercept}, {"slope", g.prop_slope}}},
              {"alpha", g.alpha},
              {"gamma", g.gamma},
              {"sigma_m", g.sigma_m},
              {"sigma_z", g.sigma_z},
              {"sigma_w", g.sigma_w},
              {"b", g.b},
              {"c", g.c},
              {"d", g.d},
              {"sigma_y", g.sigma_y}};
}

GaussianScmSpec gaussian_from_json(const json& j) {
  GaussianScmSpec g;
  if (j.contains("id")) g.id = j.at("id").get<std::string>();
  g.sigma_x = get_num(j, "sigma_x");
  if (j.contains("propensity")) {
    g.prop_intercept = get_num(j.at("propensity"), "intercept");
    g.prop_slope = get_num(j.at("propensity"), "slope");
  }
  g.alpha = get_num(j, "alpha");
  g.gamma = get_num(j, "gamma");
  g.sigma_m = get_num(j, "sigma_m");
  g.sigma_z = get_num(j, "sigma_z");
  g.sigma_w = get_num(j, "sigma_w");
  g.b = get_num(j, "b");
  g.c = get_num(j, "c");
  g.d = get_num(j, "d");
  g.sigma_y = get_num(j, "sigma_y");
  std::string why;
  if (!g.valid(&why)) throw SchemaError("gaussian spec: " + why);
  return g;
}

json to_json(const ValidationReport& rep) {
  json checks = json::array();
  for (const auto& c : rep.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"offenders", c.offenders}});
  }
  return json{{"ok", rep.ok()}, {"checks", checks}};
}

AnySpec spec_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("top level: expected object");
  if (j.value("kind", "") == "gaussian") return gaussian_from_json(j);
  return scm_from_json(j);
}

AnySpec load_spec_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SchemaError("cannot open: " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("json parse error: ") + e.what());
  }
  return spec_from_json(j);
}

}  // namespace proxmed
