#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "proxmed/population.hpp"

namespace proxmed {

// Observed-variable sample. Weights are only populated for in-memory
// population enumerations (they never travel through CSV); empty weights
// mean the uniform 1/n empirical measure.
struct Dataset {
  struct Row {
    double x = 0.0;
    int a = 0;
    double z = 0.0;
    double w = 0.0;
    double y = 0.0;
  };

  std::vector<Row> rows;
  std::vector<double> weights;  // empty => uniform
  std::uint64_t seed = 0;
  std::string source;
  std::string rng = "mt19937_64/splitmix64-substream";
  bool discrete = true;
  int x_levels = 0, a_levels = 0, z_levels = 0, w_levels = 0;  // 0 when continuous/unknown

  std::size_t n() const { return rows.size(); }
  double weight(std::size_t i) const {
    return weights.empty() ? 1.0 / static_cast<double>(rows.size()) : weights[i];
  }
};

// Enumerates every (x,a,z,w) cell of the population with weight p(cell) and
// y equal to the cell's conditional mean. Estimators run on this dataset
// reproduce population identities exactly.
Dataset dataset_from_population(const PopulationJoint& pop);

// CSV with header `x,a,z,w,y`. Discrete columns are written as integers.
void write_csv(const Dataset& ds, std::ostream& os);
void write_csv_file(const Dataset& ds, const std::string& path);
Dataset read_csv(std::istream& is);
Dataset read_csv_file(const std::string& path);

}  // namespace proxmed
