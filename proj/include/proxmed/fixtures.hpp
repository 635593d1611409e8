#pragma once

#include <optional>
#include <string>
#include <vector>

#include "proxmed/serialize.hpp"

namespace proxmed {

// Built-in benchmark models with frozen CPTs:
//   D1     all-binary mediation model, no hidden confounder, strong proxies
//   F1     binary front-door model with a 2-level hidden confounder and no
//          direct treatment effect on the outcome
//   G1     generalized front-door: hidden confounder plus a direct A->Y
//          effect (the psi2 functional and the true E[Y^(a)] differ)
//   GAUSS1 linear-Gaussian continuous test bed with a known outcome bridge
std::vector<std::string> fixture_names();
std::optional<AnySpec> fixture(const std::string& name);

}  // namespace proxmed
