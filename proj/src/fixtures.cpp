#include "proxmed/fixtures.hpp"

#include <nlohmann/json.hpp>

namespace proxmed {

namespace {

// CPTs designed for benchmark quality and committed verbatim: proxies carry
// strong signal about M (mixing matrices far from singular), treatment
// effects are moderate so density ratios stay tame, and propensities are
// bounded away from 0 and 1. G1 adds a +0.12 direct treatment shift on the
// outcome probabilities of F1.
constexpr const char* kD1 = R"__({"id":"D1","model_kind":"mediation","space":{"a_levels":2,"m_levels":2,"u_levels":0,"w_levels":2,"x_levels":2,"y_continuous":false,"y_levels":2,"z_levels":2},"tables":{"p_a_given_xu":{"dims":["x","a"],"values":[[0.6,0.4],[0.35,0.65]]},"p_m_given_ax":{"dims":["x","a","m"],"values":[[[0.62,0.38],[0.45,0.55]],[[0.55,0.45],[0.38,0.62]]]},"p_w_given_mx":{"dims":["x","m","w"],"values":[[[0.93,0.07],[0.08,0.92]],[[0.92,0.08],[0.07,0.93]]]},"p_x":{"dims":["x"],"values":[0.45,0.55]},"p_y_given_mawxu":{"dims":["x","a","m","w","y"],"values":[[[[[0.8,0.2],[0.75,0.25]],[[0.44999999999999996,0.55],[0.4,0.6]]],[[[0.6,0.4],[0.55,0.45]],[[0.25,0.75],[0.19999999999999996,0.8]]]],[[[[0.75,0.25],[0.7,0.3]],[[0.4,0.6],[0.35,0.65]]],[[[0.55,0.45],[0.5,0.5]],[[0.19999999999999996,0.8],[0.15000000000000002,0.85]]]]]},"p_z_given_max":{"dims":["x","a","m","z"],"values":[[[[0.92,0.08],[0.1,0.9]],[[0.9,0.1],[0.08,0.92]]],[[[0.93,0.07],[0.11,0.89]],[[0.91,0.09],[0.09,0.91]]]]}}})__";

constexpr const char* kF1 = R"__({"id":"F1","model_kind":"front_door","space":{"a_levels":2,"m_levels":2,"u_levels":2,"w_levels":2,"x_levels":2,"y_continuous":false,"y_levels":2,"z_levels":2},"tables":{"p_a_given_xu":{"dims":["x","u","a"],"values":[[[0.65,0.35],[0.3,0.7]],[[0.55,0.45],[0.25,0.75]]]},"p_m_given_ax":{"dims":["x","a","m"],"values":[[[0.68,0.32],[0.33,0.67]],[[0.58,0.42],[0.28,0.72]]]},"p_u_given_x":{"dims":["x","u"],"values":[[0.55,0.45],[0.4,0.6]]},"p_w_given_mx":{"dims":["x","m","w"],"values":[[[0.93,0.07],[0.08,0.92]],[[0.92,0.08],[0.07,0.93]]]},"p_x":{"dims":["x"],"values":[0.5,0.5]},"p_y_given_mawxu":{"dims":["x","u","m","w","y"],"values":[[[[[0.8,0.2],[0.75,0.25]],[[0.44999999999999996,0.55],[0.4,0.6]]],[[[0.6,0.4],[0.55,0.45]],[[0.25,0.75],[0.19999999999999996,0.8]]]],[[[[0.75,0.25],[0.7,0.3]],[[0.4,0.6],[0.35,0.65]]],[[[0.55,0.45],[0.5,0.5]],[[0.19999999999999996,0.8],[0.15000000000000002,0.85]]]]]},"p_z_given_max":{"dims":["x","a","m","z"],"values":[[[[0.92,0.08],[0.1,0.9]],[[0.9,0.1],[0.08,0.92]]],[[[0.93,0.07],[0.11,0.89]],[[0.91,0.09],[0.09,0.91]]]]}}})__";

constexpr const char* kG1 = R"__({"id":"G1","model_kind":"generalized_front_door","space":{"a_levels":2,"m_levels":2,"u_levels":2,"w_levels":2,"x_levels":2,"y_continuous":false,"y_levels":2,"z_levels":2},"tables":{"p_a_given_xu":{"dims":["x","u","a"],"values":[[[0.65,0.35],[0.3,0.7]],[[0.55,0.45],[0.25,0.75]]]},"p_m_given_ax":{"dims":["x","a","m"],"values":[[[0.68,0.32],[0.33,0.67]],[[0.58,0.42],[0.28,0.72]]]},"p_u_given_x":{"dims":["x","u"],"values":[[0.55,0.45],[0.4,0.6]]},"p_w_given_mx":{"dims":["x","m","w"],"values":[[[0.93,0.07],[0.08,0.92]],[[0.92,0.08],[0.07,0.93]]]},"p_x":{"dims":["x"],"values":[0.5,0.5]},"p_y_given_mawxu":{"dims":["x","u","a","m","w","y"],"values":[[[[[[0.8,0.2],[0.75,0.25]],[[0.44999999999999996,0.55],[0.4,0.6]]],[[[0.6799999999999999,0.32],[0.63,0.37]],[[0.32999999999999996,0.67],[0.28,0.72]]]],[[[[0.6,0.4],[0.55,0.45]],[[0.25,0.75],[0.19999999999999996,0.8]]],[[[0.48,0.52],[0.42999999999999994,0.5700000000000001]],[[0.13,0.87],[0.07999999999999996,0.92]]]]],[[[[[0.75,0.25],[0.7,0.3]],[[0.4,0.6],[0.35,0.65]]],[[[0.63,0.37],[0.5800000000000001,0.42]],[[0.28,0.72],[0.22999999999999998,0.77]]]],[[[[0.55,0.45],[0.5,0.5]],[[0.19999999999999996,0.8],[0.15000000000000002,0.85]]],[[[0.42999999999999994,0.5700000000000001],[0.38,0.62]],[[0.07999999999999996,0.92],[0.030000000000000027,0.97]]]]]]},"p_z_given_max":{"dims":["x","a","m","z"],"values":[[[[0.92,0.08],[0.1,0.9]],[[0.9,0.1],[0.08,0.92]]],[[[0.93,0.07],[0.11,0.89]],[[0.91,0.09],[0.09,0.91]]]]}}})__";

GaussianScmSpec gauss1() {
  GaussianScmSpec g;
  g.id = "GAUSS1";
  g.sigma_x = 1.0;
  g.prop_intercept = 0.2;
  g.prop_slope = 0.4;
  g.alpha = 1.0;
  g.gamma = 0.7;
  g.sigma_m = 0.8;
  g.sigma_z = 0.5;
  g.sigma_w = 0.5;
  g.b = 1.2;
  g.c = 0.6;
  g.d = -0.4;
  g.sigma_y = 0.7;
  return g;
}

}  // namespace

std::vector<std::string> fixture_names() { return {"D1", "F1", "G1", "GAUSS1"}; }

std::optional<AnySpec> fixture(const std::string& name) {
  if (name == "D1") return scm_from_json(nlohmann::json::parse(kD1));
  if (name == "F1") return scm_from_json(nlohmann::json::parse(kF1));
  if (name == "G1") return scm_from_json(nlohmann::json::parse(kG1));
  if (name == "GAUSS1") return gauss1();
  return std::nullopt;
}

}  // namespace proxmed
