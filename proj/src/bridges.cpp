#include "proxmed/bridges.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace proxmed {

void EmbedSpec::write(double v, int a, double x, double* out) const {
  int off = 0;
  if (v_levels > 0) {
    for (int k = 0; k < v_levels; ++k) out[off + k] = 0.0;
    const int vi = static_cast<int>(std::llround(v));
    if (vi < 0 || vi >= v_levels) throw std::invalid_argument("embed: v level out of range");
    out[off + vi] = 1.0;
    off += v_levels;
  } else {
    out[off++] = v;
  }
  if (include_a) {
    for (int k = 0; k < a_levels; ++k) out[off + k] = 0.0;
    if (a < 0 || a >= a_levels) throw std::invalid_argument("embed: a level out of range");
    out[off + a] = 1.0;
    off += a_levels;
  }
  if (x_levels > 0) {
    for (int k = 0; k < x_levels; ++k) out[off + k] = 0.0;
    const int xi = static_cast<int>(std::llround(x));
    if (xi < 0 || xi >= x_levels) throw std::invalid_argument("embed: x level out of range");
    out[off + xi] = 1.0;
  } else {
    out[off] = x;
  }
}

Eigen::RowVectorXd EmbedSpec::row(double v, int a, double x) const {
  Eigen::RowVectorXd r(dim());
  write(v, a, x, r.data());
  return r;
}

namespace {

std::vector<int> embed_blocks(const EmbedSpec& e) {
  std::vector<int> b{e.v_dim()};
  if (e.include_a) b.push_back(e.a_dim());
  b.push_back(e.x_dim());
  return b;
}

// Product Gaussian kernel over blocks: exp(-sum_b ||du_b||^2 / (2 s_b^2)).
double kernel_value(const double* u, const double* v, const std::vector<int>& blocks,
                    const std::vector<double>& bw) {
  double expo = 0.0;
  int off = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    double d2 = 0.0;
    for (int k = 0; k < blocks[b]; ++k) {
      const double d = u[off + k] - v[off + k];
      d2 += d * d;
    }
    expo += d2 / (2.0 * bw[b] * bw[b]);
    off += blocks[b];
  }
  return std::exp(-expo);
}

// Median heuristic per block over at most `cap` rows; zero medians (all
// points identical in a block) fall back to 1.
std::vector<double> median_bandwidths(const PointMatrix& pts, const std::vector<int>& blocks,
                                      double fixed) {
  std::vector<double> bw(blocks.size(), fixed);
  if (fixed > 0.0) return bw;
  const int cap = 1400;
  const int n = static_cast<int>(pts.rows());
  const int step = std::max(1, n / cap);
  std::vector<int> idx;
  for (int i = 0; i < n; i += step) idx.push_back(i);
  int off = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    std::vector<double> d;
    d.reserve(idx.size() * (idx.size() - 1) / 2);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = i + 1; j < idx.size(); ++j) {
        double d2 = 0.0;
        for (int k = 0; k < blocks[b]; ++k) {
          const double dd = pts(idx[i], off + k) - pts(idx[j], off + k);
          d2 += dd * dd;
        }
        d.push_back(std::sqrt(d2));
      }
    double med = 1.0;
    if (!d.empty()) {
      std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
      med = d[d.size() / 2];
    }
    bw[b] = med > 1e-12 ? med : 1.0;
    off += blocks[b];
  }
  return bw;
}

void add_jitter(Eigen::MatrixXd& G) {
  const double j = 1e-10 * G.trace() / static_cast<double>(G.rows());
  G.diagonal().array() += j;
}

// Deduplicated anchor rows in encounter order, evenly thinned to the cap.
PointMatrix pick_anchors(const PointMatrix& pts, int max_anchors) {
  std::map<std::vector<double>, int> seen;
  std::vector<int> uniq;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    std::vector<double> key(pts.row(i).data(), pts.row(i).data() + pts.cols());
    if (seen.emplace(std::move(key), 1).second) uniq.push_back(static_cast<int>(i));
  }
  std::vector<int> keep;
  if (static_cast<int>(uniq.size()) <= max_anchors) {
    keep = uniq;
  } else {
    const double stride = static_cast<double>(uniq.size()) / max_anchors;
    for (int k = 0; k < max_anchors; ++k)
      keep.push_back(uniq[static_cast<std::size_t>(k * stride)]);
  }
  PointMatrix A(static_cast<Eigen::Index>(keep.size()), pts.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) A.row(static_cast<Eigen::Index>(r)) = pts.row(keep[r]);
  return A;
}

double resolve_lambda(double lambda, std::size_t n) {
  return lambda > 0.0 ? lambda : std::pow(static_cast<double>(n), -0.4);
}

struct AdversaryOp {
  // C = L^-1 Phi' so that the inner supremum value is 0.25 ||C D r||^2.
  Eigen::MatrixXd C;
  double condition = 0.0;
};

AdversaryOp adversary_operator(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& gram_anchor,
                               const Eigen::VectorXd& wgt, double lambda) {
  Eigen::MatrixXd N = phi.transpose() * wgt.asDiagonal() * phi + lambda * gram_anchor;
  add_jitter(N);
  Eigen::LLT<Eigen::MatrixXd> llt(N);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(N);
    std::ostringstream os;
    os << "minimax: adversary system not positive definite (eigen range ["
       << es.eigenvalues().minCoeff() << ", " << es.eigenvalues().maxCoeff() << "])";
    throw std::runtime_error(os.str());
  }
  AdversaryOp op;
  op.C = llt.matrixL().solve(phi.transpose());
  return op;
}

Eigen::VectorXd solve_outer(const Eigen::MatrixXd& Q, const Eigen::VectorXd& b,
                            double* condition) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
  const auto& ev = es.eigenvalues();
  const double lo = ev.minCoeff(), hi = ev.maxCoeff();
  if (condition) *condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(lo > 0.0)) {
    std::ostringstream os;
    os << "minimax: outer system singular after regularization (min eigenvalue " << lo
       << ", condition estimate inf)";
    throw std::runtime_error(os.str());
  }
  return es.eigenvectors() * ((es.eigenvectors().transpose() * b).array() / ev.array()).matrix();
}

Eigen::VectorXd dataset_weights(const Dataset& data) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(data.n()));
  for (std::size_t i = 0; i < data.n(); ++i) w(static_cast<Eigen::Index>(i)) = data.weight(i);
  return w;
}

}  // namespace

double KernelBridge::eval_embedded(const Eigen::RowVectorXd& point) const {
  double s = 0.0;
  for (Eigen::Index j = 0; j < anchors.rows(); ++j)
    s += coef(j) * kernel_value(point.data(), anchors.row(j).data(), block_sizes, block_bandwidths);
  return s;
}

double KernelBridge::eval(double v, int a, double x) const {
  return eval_embedded(embed.row(v, a, x));
}

Eigen::MatrixXd rbf_gram(const PointMatrix& A, const PointMatrix& B,
                         const std::vector<int>& blocks, const std::vector<double>& bandwidths) {
  Eigen::MatrixXd G(A.rows(), B.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < B.rows(); ++j)
      G(i, j) = kernel_value(A.row(i).data(), B.row(j).data(), blocks, bandwidths);
  return G;
}

MinimaxFit fit_h_minimax(const Dataset& data, const MinimaxOptions& opt) {
  const std::size_t n = data.n();
  if (n < 2) throw std::invalid_argument("fit_h_minimax: need n >= 2");
  const double lam_h = resolve_lambda(opt.lambda_learner, n);
  const double lam_q = resolve_lambda(opt.lambda_adversary, n);

  EmbedSpec eh{data.discrete ? data.w_levels : 0, data.a_levels,
               data.discrete ? data.x_levels : 0, true};
  EmbedSpec eq{data.discrete ? data.z_levels : 0, data.a_levels,
               data.discrete ? data.x_levels : 0, true};

  PointMatrix Ph(static_cast<Eigen::Index>(n), eh.dim());
  PointMatrix Pq(static_cast<Eigen::Index>(n), eq.dim());
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = data.rows[i];
    eh.write(r.w, r.a, r.x, Ph.row(static_cast<Eigen::Index>(i)).data());
    eq.write(r.z, r.a, r.x, Pq.row(static_cast<Eigen::Index>(i)).data());
    y(static_cast<Eigen::Index>(i)) = r.y;
  }

  const auto blocks_h = embed_blocks(eh);
  const auto blocks_q = embed_blocks(eq);
  const auto bw_h = median_bandwidths(Ph, blocks_h, opt.learner_kernel.bandwidth);
  const auto bw_q = median_bandwidths(Pq, blocks_q, opt.adversary_kernel.bandwidth);

  const PointMatrix anchors_h = pick_anchors(Ph, opt.max_anchors);
  const PointMatrix anchors_q = pick_anchors(Pq, opt.max_anchors);
  Eigen::MatrixXd Ah = rbf_gram(anchors_h, anchors_h, blocks_h, bw_h);
  Eigen::MatrixXd Aq = rbf_gram(anchors_q, anchors_q, blocks_q, bw_q);
  add_jitter(Ah);
  add_jitter(Aq);
  const Eigen::MatrixXd Phi_h = rbf_gram(Ph, anchors_h, blocks_h, bw_h);
  const Eigen::MatrixXd Phi_q = rbf_gram(Pq, anchors_q, blocks_q, bw_q);

  const Eigen::VectorXd wgt = dataset_weights(data);
  const AdversaryOp adv = adversary_operator(Phi_q, Aq, wgt, lam_q);

  const Eigen::MatrixXd G = adv.C * wgt.asDiagonal() * Phi_h;
  const Eigen::VectorXd g = adv.C * wgt.asDiagonal() * y;

  MinimaxFit fit;
  fit.obj_quad = 0.25 * G.transpose() * G + lam_h * Ah;
  fit.obj_lin = 0.25 * G.transpose() * g;
  fit.obj_const = 0.25 * g.dot(g);
  const Eigen::VectorXd alpha = solve_outer(fit.obj_quad, fit.obj_lin, &fit.condition);

  fit.bridge.kind = BridgeKind::outcome_h;
  fit.bridge.anchors = anchors_h;
  fit.bridge.coef = alpha;
  fit.bridge.block_bandwidths = bw_h;
  fit.bridge.block_sizes = blocks_h;
  fit.bridge.embed = eh;
  fit.bridge.lambda_learner = lam_h;
  fit.bridge.lambda_adversary = lam_q;
  return fit;
}

MinimaxFit fit_q_minimax(const Dataset& data, const MinimaxOptions& opt, int a,
                         const PropensityFn& propensity) {
  const std::size_t n = data.n();
  if (n < 2) throw std::invalid_argument("fit_q_minimax: need n >= 2");
  const int A = data.a_levels;
  if (a < 0 || a >= A) throw std::invalid_argument("fit_q_minimax: target arm out of range");
  const double lam_q = resolve_lambda(opt.lambda_learner, n);
  const double lam_h = resolve_lambda(opt.lambda_adversary, n);

  EmbedSpec eq{data.discrete ? data.z_levels : 0, A, data.discrete ? data.x_levels : 0, true};
  EmbedSpec ew{data.discrete ? data.w_levels : 0, A, data.discrete ? data.x_levels : 0, false};

  PointMatrix Pq(static_cast<Eigen::Index>(n), eq.dim());
  PointMatrix Pw(static_cast<Eigen::Index>(n), ew.dim());
  Eigen::MatrixXd invp(static_cast<Eigen::Index>(n), A);  // 1{A_i=a'}/p(a'|x_i)
  Eigen::VectorXd target(static_cast<Eigen::Index>(n));   // 1{A_i=a}/p(a|x_i)
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = data.rows[i];
    eq.write(r.z, r.a, r.x, Pq.row(static_cast<Eigen::Index>(i)).data());
    ew.write(r.w, r.a, r.x, Pw.row(static_cast<Eigen::Index>(i)).data());
    for (int a1 = 0; a1 < A; ++a1) {
      const double p = propensity(a1, r.x);
      if (!(p >= 0.01 && p <= 0.99))
        throw std::invalid_argument("fit_q_minimax: propensity outside [0.01, 0.99]");
      invp(static_cast<Eigen::Index>(i), a1) = r.a == a1 ? 1.0 / p : 0.0;
    }
    target(static_cast<Eigen::Index>(i)) = invp(static_cast<Eigen::Index>(i), a);
  }

  const auto blocks_q = embed_blocks(eq);
  const auto blocks_w = embed_blocks(ew);
  const auto bw_q = median_bandwidths(Pq, blocks_q, opt.learner_kernel.bandwidth);
  const auto bw_w = median_bandwidths(Pw, blocks_w, opt.adversary_kernel.bandwidth);

  const PointMatrix anchors_q = pick_anchors(Pq, opt.max_anchors);
  const PointMatrix anchors_w = pick_anchors(Pw, opt.max_anchors);
  Eigen::MatrixXd Aq = rbf_gram(anchors_q, anchors_q, blocks_q, bw_q);
  Eigen::MatrixXd Aw = rbf_gram(anchors_w, anchors_w, blocks_w, bw_w);
  add_jitter(Aq);
  add_jitter(Aw);
  const Eigen::MatrixXd Phi_q = rbf_gram(Pq, anchors_q, blocks_q, bw_q);
  const Eigen::MatrixXd Phi_w = rbf_gram(Pw, anchors_w, blocks_w, bw_w);

  const Eigen::VectorXd wgt = dataset_weights(data);
  const AdversaryOp adv = adversary_operator(Phi_w, Aw, wgt, lam_h);
  const Eigen::VectorXd g = adv.C * wgt.asDiagonal() * target;

  MinimaxFit fit;
  fit.obj_quad = lam_q * Aq;
  fit.obj_lin = Eigen::VectorXd::Zero(anchors_q.rows());
  fit.obj_const = 0.0;
  // one copy of the moment per arm a', sharing the learner
  for (int a1 = 0; a1 < A; ++a1) {
    const Eigen::MatrixXd Ga1 =
        adv.C * (wgt.array() * invp.col(a1).array()).matrix().asDiagonal() * Phi_q;
    fit.obj_quad += 0.25 * Ga1.transpose() * Ga1;
    fit.obj_lin += 0.25 * Ga1.transpose() * g;
    fit.obj_const += 0.25 * g.dot(g);
  }
  const Eigen::VectorXd delta = solve_outer(fit.obj_quad, fit.obj_lin, &fit.condition);

  fit.bridge.kind = BridgeKind::treatment_q;
  fit.bridge.anchors = anchors_q;
  fit.bridge.coef = delta;
  fit.bridge.block_bandwidths = bw_q;
  fit.bridge.block_sizes = blocks_q;
  fit.bridge.embed = eq;
  fit.bridge.lambda_learner = lam_q;
  fit.bridge.lambda_adversary = lam_h;
  fit.bridge.target_a = a;
  return fit;
}

PopulationJoint empirical_population(const Dataset& data) {
  if (!data.discrete) throw std::invalid_argument("empirical_population: needs discrete data");
  if (data.x_levels < 1 || data.a_levels < 2 || data.z_levels < 1 || data.w_levels < 1)
    throw std::invalid_argument("empirical_population: level counts unknown");
  PopulationJoint pop;
  pop.space = FiniteSpace{data.x_levels, 0, data.a_levels,
                          std::min(data.z_levels, data.w_levels), data.z_levels, data.w_levels,
                          2, true};
  pop.source_id = data.source;
  pop.p = Table({data.x_levels, data.a_levels, data.z_levels, data.w_levels});
  pop.ymean = Table({data.x_levels, data.a_levels, data.z_levels, data.w_levels});
  Table ysum({data.x_levels, data.a_levels, data.z_levels, data.w_levels});
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto& r = data.rows[i];
    const double wt = data.weight(i);
    const int x = static_cast<int>(r.x), z = static_cast<int>(r.z), w = static_cast<int>(r.w);
    pop.p.at(x, r.a, z, w) += wt;
    ysum.at(x, r.a, z, w) += wt * r.y;
  }
  for (std::size_t k = 0; k < pop.p.size(); ++k) {
    if (pop.p.flat()[k] > 0.0) pop.ymean.flat()[k] = ysum.flat()[k] / pop.p.flat()[k];
  }
  return pop;
}

namespace {

void check_arms_present(const PopulationJoint& pop) {
  for (int a = 0; a < pop.space.a_levels; ++a) {
    double total = 0.0;
    for (int x = 0; x < pop.space.x_levels; ++x) total += pop.p_xa(x, a);
    if (total <= 0.0) {
      throw std::invalid_argument("tabular bridge fit: treatment arm " + std::to_string(a) +
                                  " is absent from the data");
    }
  }
}

constexpr double kTabularRidge = 1e-8;

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            double& sq_residual) {
  Eigen::MatrixXd M = A.transpose() * A;
  M.diagonal().array() += kTabularRidge;
  const Eigen::VectorXd x = M.ldlt().solve(A.transpose() * b);
  sq_residual += (A * x - b).squaredNorm();
  return x;
}

}  // namespace

TabularBridge fit_h_tabular(const Dataset& data) {
  const PopulationJoint pop = empirical_population(data);
  check_arms_present(pop);
  const FiniteSpace& sp = pop.space;
  TabularBridge out;
  out.kind = BridgeKind::outcome_h;
  out.values = Table({sp.x_levels, sp.a_levels, sp.w_levels});
  double sq = 0.0;
  for (int x = 0; x < sp.x_levels; ++x)
    for (int a = 0; a < sp.a_levels; ++a) {
      std::vector<int> zs;
      for (int z = 0; z < sp.z_levels; ++z) {
        if (pop.p_zax(x, a, z) > 0.0) {
          zs.push_back(z);
        } else {
          std::ostringstream os;
          os << "no samples with (z=" << z << ",a=" << a << ",x=" << x << ")";
          out.empty_cells.push_back(os.str());
        }
      }
      Eigen::MatrixXd A(static_cast<int>(zs.size()), sp.w_levels);
      Eigen::VectorXd b(static_cast<int>(zs.size()));
      for (std::size_t r = 0; r < zs.size(); ++r) {
        for (int w = 0; w < sp.w_levels; ++w)
          A(static_cast<int>(r), w) = pop.p_w_given_zax(x, a, zs[r], w);
        b(static_cast<int>(r)) = pop.ey_given_zax(x, a, zs[r]);
      }
      const Eigen::VectorXd h = ridge_solve(A, b, sq);
      for (int w = 0; w < sp.w_levels; ++w) out.values.at(x, a, w) = h(w);
    }
  out.residual_norm = std::sqrt(sq);
  return out;
}

TabularBridge fit_q_tabular(const Dataset& data, int a) {
  const PopulationJoint pop = empirical_population(data);
  check_arms_present(pop);
  const FiniteSpace& sp = pop.space;
  if (a < 0 || a >= sp.a_levels) throw std::invalid_argument("fit_q_tabular: bad target arm");
  TabularBridge out;
  out.kind = BridgeKind::treatment_q;
  out.target_a = a;
  out.values = Table({sp.x_levels, sp.a_levels, sp.z_levels});
  double sq = 0.0;
  for (int x = 0; x < sp.x_levels; ++x)
    for (int a1 = 0; a1 < sp.a_levels; ++a1) {
      std::vector<int> ws;
      for (int w = 0; w < sp.w_levels; ++w) {
        const double den = pop.p_w_given_ax(x, a1, w);
        const double num = pop.p_w_given_ax(x, a, w);
        if (den > 0.0) {
          ws.push_back(w);
        } else {
          std::ostringstream os;
          os << "no samples with (w=" << w << ",a'=" << a1 << ",x=" << x << ")";
          out.empty_cells.push_back(os.str());
          if (num > 0.0) out.positivity_failures.push_back(os.str());
        }
      }
      Eigen::MatrixXd A(static_cast<int>(ws.size()), sp.z_levels);
      Eigen::VectorXd b(static_cast<int>(ws.size()));
      for (std::size_t r = 0; r < ws.size(); ++r) {
        for (int z = 0; z < sp.z_levels; ++z)
          A(static_cast<int>(r), z) = pop.p_z_given_wax(x, a1, ws[r], z);
        b(static_cast<int>(r)) = pop.p_w_given_ax(x, a, ws[r]) / pop.p_w_given_ax(x, a1, ws[r]);
      }
      const Eigen::VectorXd q = ridge_solve(A, b, sq);
      for (int z = 0; z < sp.z_levels; ++z) out.values.at(x, a1, z) = q(z);
    }
  out.residual_norm = std::sqrt(sq);
  return out;
}

nlohmann::json to_json(const KernelBridge& b) {
  nlohmann::json j;
  j["kind"] = b.kind == BridgeKind::outcome_h ? "outcome_h" : "treatment_q";
  j["anchors"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < b.anchors.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < b.anchors.cols(); ++c) row.push_back(b.anchors(r, c));
    j["anchors"].push_back(std::move(row));
  }
  j["coef"] = std::vector<double>(b.coef.data(), b.coef.data() + b.coef.size());
  j["kernel"] = {{"family", "gaussian_rbf"},
                 {"block_bandwidths", b.block_bandwidths},
                 {"block_sizes", b.block_sizes}};
  j["embed"] = {{"v_levels", b.embed.v_levels},
                {"a_levels", b.embed.a_levels},
                {"x_levels", b.embed.x_levels},
                {"include_a", b.embed.include_a}};
  j["lambda_learner"] = b.lambda_learner;
  j["lambda_adversary"] = b.lambda_adversary;
  j["target_a"] = b.target_a;
  return j;
}

KernelBridge kernel_bridge_from_json(const nlohmann::json& j) {
  KernelBridge b;
  b.kind = j.at("kind").get<std::string>() == "treatment_q" ? BridgeKind::treatment_q
                                                            : BridgeKind::outcome_h;
  const auto& ja = j.at("anchors");
  const Eigen::Index rows = static_cast<Eigen::Index>(ja.size());
  const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(ja.at(0).size()) : 0;
  b.anchors.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) b.anchors(r, c) = ja.at(r).at(c).get<double>();
  const auto coef = j.at("coef").get<std::vector<double>>();
  b.coef = Eigen::Map<const Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size()));
  b.block_bandwidths = j.at("kernel").at("block_bandwidths").get<std::vector<double>>();
  b.block_sizes = j.at("kernel").at("block_sizes").get<std::vector<int>>();
  const auto& je = j.at("embed");
  b.embed = EmbedSpec{je.at("v_levels").get<int>(), je.at("a_levels").get<int>(),
                      je.at("x_levels").get<int>(), je.at("include_a").get<bool>()};
  b.lambda_learner = j.at("lambda_learner").get<double>();
  b.lambda_adversary = j.at("lambda_adversary").get<double>();
  b.target_a = j.at("target_a").get<int>();
  return b;
}

}  // namespace proxmed
