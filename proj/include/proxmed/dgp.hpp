#pragma once

#include <cstdint>
#include <random>

#include "proxmed/dataset.hpp"
#include "proxmed/model.hpp"

namespace proxmed {

struct SamplerConfig {
  std::uint64_t seed = 0;
  std::size_t n = 1;
};

// splitmix64 mix; used to derive independent substreams from (seed, index).
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t substream(std::uint64_t seed, std::uint64_t index);

// mt19937_64 driven through our own uniform and Box-Muller normal, so the
// streams do not depend on the standard library's distribution
// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(splitmix64(seed)) {}
  double uniform() {
    return static_cast<double>(g_() >> 11) * 0x1.0p-53;
  }
  double normal();
  int categorical(const double* p, int k);

 private:
  std::mt19937_64 g_;
};

// i.i.d. ancestral sampling in the order X, U, A, M, Z, W, Y; the hidden
// M and U are dropped from the returned dataset. Bit-identical for a fixed
// seed.
Dataset sample(const ScmSpec& spec, const SamplerConfig& cfg);
Dataset sample(const GaussianScmSpec& spec, const SamplerConfig& cfg);

// Draws Dirichlet(1,...,1) conditional rows floored at 0.02, retrying until
// the spec validates, both completeness sides are full rank and both bridge
// residuals stay below 1e-8. Throws after 100 attempts.
ScmSpec random_valid_scm(const FiniteSpace& space, ModelKind kind, std::uint64_t seed);

}  // namespace proxmed
