#pragma once

#include <Eigen/Dense>
#include <functional>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "proxmed/dataset.hpp"
#include "proxmed/oracle.hpp"

namespace proxmed {

// Embedded points are stored one per row; row-major keeps each point
// contiguous for the kernel loops.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct KernelSpec {
  enum class Family { gaussian_rbf };
  Family family = Family::gaussian_rbf;
  // <= 0 selects the median heuristic, resolved per argument block.
  double bandwidth = 0.0;
};

// Maps a record (v, a, x) to the kernel input blocks (V | A | X), one-hot
// embedding categorical coordinates at unit scale. v is z or w depending on
// which bridge is being fit; a can be excluded (the Eq.-style adversary for
// the treatment bridge sees only (W, X)).
struct EmbedSpec {
  int v_levels = 0;  // 0 => continuous scalar
  int a_levels = 2;
  int x_levels = 0;  // 0 => continuous scalar
  bool include_a = true;

  int v_dim() const { return v_levels > 0 ? v_levels : 1; }
  int a_dim() const { return include_a ? a_levels : 0; }
  int x_dim() const { return x_levels > 0 ? x_levels : 1; }
  int dim() const { return v_dim() + a_dim() + x_dim(); }
  void write(double v, int a, double x, double* out) const;
  Eigen::RowVectorXd row(double v, int a, double x) const;
};

// Kernel-expansion bridge: f(.) = sum_j coef_j K(., anchor_j) with a
// product Gaussian RBF over the embedding blocks.
struct KernelBridge {
  BridgeKind kind = BridgeKind::outcome_h;
  PointMatrix anchors;           // one embedded point per row
  Eigen::VectorXd coef;
  std::vector<double> block_bandwidths;  // resolved, one per block
  std::vector<int> block_sizes;
  EmbedSpec embed;
  double lambda_learner = 0.0;
  double lambda_adversary = 0.0;
  int target_a = -1;  // treatment bridges only

  double eval(double v, int a, double x) const;
  double eval_embedded(const Eigen::RowVectorXd& point) const;
};

nlohmann::json to_json(const KernelBridge& b);
KernelBridge kernel_bridge_from_json(const nlohmann::json& j);

struct MinimaxOptions {
  KernelSpec learner_kernel;
  KernelSpec adversary_kernel;
  double lambda_learner = -1.0;    // <= 0 resolves to n^{-0.4}
  double lambda_adversary = -1.0;  // <= 0 resolves to n^{-0.4}
  int max_anchors = 1000;          // representer span is capped for large n
};

// Fit result; keeps the quadratic form of the regularized outer objective so
// the saddle-point contract can be checked against arbitrary candidates in
// the same span: J(c) = c'Q c - 2 b'c + k.
struct MinimaxFit {
  KernelBridge bridge;
  Eigen::MatrixXd obj_quad;
  Eigen::VectorXd obj_lin;
  double obj_const = 0.0;
  double condition = 0.0;  // estimate for the final solve

  double objective(const Eigen::VectorXd& coef) const {
    return coef.dot(obj_quad * coef) - 2.0 * obj_lin.dot(coef) + obj_const;
  }
  double objective_at_fit() const { return objective(bridge.coef); }
};

// Outcome bridge via the adversarial Tikhonov program: the inner supremum
// over the adversary class on (Z, A, X) has a closed form, leaving a convex
// quadratic in the learner coefficients on (W, A, X).
MinimaxFit fit_h_minimax(const Dataset& data, const MinimaxOptions& opt);

using PropensityFn = std::function<double(int a, double x)>;

// Treatment bridge for target arm `a`. The conditional moment holds for
// every arm value a'; the fit stacks one copy of the displayed criterion per
// arm, sharing the learner and giving each arm its own adversary on (W, X).
MinimaxFit fit_q_minimax(const Dataset& data, const MinimaxOptions& opt, int a,
                         const PropensityFn& propensity);

// Empirical-frequency plug-ins of the population linear systems with a 1e-8
// ridge. Only defined for discrete data; empty conditioning cells are
// skipped and reported on the bridge.
TabularBridge fit_h_tabular(const Dataset& data);
TabularBridge fit_q_tabular(const Dataset& data, int a);

// Empirical analogue of PopulationJoint: cell frequencies and per-cell
// outcome means.
PopulationJoint empirical_population(const Dataset& data);

// Product-RBF Gram matrix between row sets; exposed for the kernel property
// checks (symmetry, positive semidefiniteness).
Eigen::MatrixXd rbf_gram(const PointMatrix& A, const PointMatrix& B,
                         const std::vector<int>& blocks, const std::vector<double>& bandwidths);

}  // namespace proxmed
