#include "proxmed/dataset.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace proxmed {

Dataset dataset_from_population(const PopulationJoint& pop) {
  Dataset ds;
  ds.source = pop.source_id;
  ds.discrete = true;
  ds.x_levels = pop.space.x_levels;
  ds.a_levels = pop.space.a_levels;
  ds.z_levels = pop.space.z_levels;
  ds.w_levels = pop.space.w_levels;
  for (int x = 0; x < pop.space.x_levels; ++x)
    for (int a = 0; a < pop.space.a_levels; ++a)
      for (int z = 0; z < pop.space.z_levels; ++z)
        for (int w = 0; w < pop.space.w_levels; ++w) {
          const double mass = pop.p.at(x, a, z, w);
          if (mass <= 0.0) continue;
          ds.rows.push_back({static_cast<double>(x), a, static_cast<double>(z),
                             static_cast<double>(w), pop.ymean.at(x, a, z, w)});
          ds.weights.push_back(mass);
        }
  return ds;
}

namespace {

void write_value(std::ostream& os, double v, bool as_int) {
  if (as_int) {
    os << static_cast<long long>(std::llround(v));
  } else {
    os << std::setprecision(17) << v;
  }
}

}  // namespace

void write_csv(const Dataset& ds, std::ostream& os) {
  os << "x,a,z,w,y\n";
  for (const auto& r : ds.rows) {
    write_value(os, r.x, ds.discrete);
    os << ',' << r.a << ',';
    write_value(os, r.z, ds.discrete);
    os << ',';
    write_value(os, r.w, ds.discrete);
    os << ',';
    // y can be a continuous mean even for discrete covariates
    const bool y_int = ds.discrete && r.y == std::floor(r.y);
    write_value(os, r.y, y_int);
    os << '\n';
  }
}

void write_csv_file(const Dataset& ds, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  write_csv(ds, f);
}

Dataset read_csv(std::istream& is) {
  Dataset ds;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("csv: empty input");
  // tolerate trailing \r from Windows line endings
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,a,z,w,y") throw std::runtime_error("csv: expected header 'x,a,z,w,y', got '" + line + "'");
  bool all_int = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string f;
    double vals[5];
    for (int k = 0; k < 5; ++k) {
      if (!std::getline(ss, f, ',')) throw std::runtime_error("csv: short row: " + line);
      try {
        vals[k] = std::stod(f);
      } catch (const std::exception&) {
        throw std::runtime_error("csv: bad number '" + f + "' in row: " + line);
      }
    }
    for (int k : {0, 2, 3}) all_int = all_int && vals[k] == std::floor(vals[k]);
    if (vals[1] != std::floor(vals[1]) || vals[1] < 0)
      throw std::runtime_error("csv: treatment column must be a non-negative integer: " + line);
    ds.rows.push_back({vals[0], static_cast<int>(vals[1]), vals[2], vals[3], vals[4]});
  }
  ds.discrete = all_int;
  int amax = 0, xmax = 0, zmax = 0, wmax = 0;
  for (const auto& r : ds.rows) {
    amax = std::max(amax, r.a);
    if (all_int) {
      xmax = std::max(xmax, static_cast<int>(r.x));
      zmax = std::max(zmax, static_cast<int>(r.z));
      wmax = std::max(wmax, static_cast<int>(r.w));
    }
  }
  ds.a_levels = amax + 1;
  if (all_int) {
    ds.x_levels = xmax + 1;
    ds.z_levels = zmax + 1;
    ds.w_levels = wmax + 1;
  }
  return ds;
}

Dataset read_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  return read_csv(f);
}

}  // namespace proxmed
