#pragma once

#include <nlohmann/json_fwd.hpp>
#include <stdexcept>
#include <string>
#include <variant>

#include "proxmed/model.hpp"

namespace proxmed {

// Raised on any malformed document; the message names the offending key.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const ScmSpec& spec);
ScmSpec scm_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GaussianScmSpec& spec);
GaussianScmSpec gaussian_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ValidationReport& rep);

using AnySpec = std::variant<ScmSpec, GaussianScmSpec>;

// Dispatches on the optional top-level "kind" marker ("gaussian" selects the
// linear-Gaussian spec; anything else parses as a discrete ScmSpec).
AnySpec spec_from_json(const nlohmann::json& j);
AnySpec load_spec_file(const std::string& path);

// Generic table <-> nested-array codec. `dims` names the serialized axes in
// canonical order (subset of x,u,a,m,z,w,y).
nlohmann::json table_to_json(const Table& t, const std::vector<std::string>& dims);

}  // namespace proxmed
