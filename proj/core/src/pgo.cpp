#include "lumio/pgo.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace lumio::pgo {

namespace {

constexpr double kMaxDamping = 1e32;
constexpr double kMinDamping = 1e-12;

Vec6 residual(const Pose& measurement, const Pose& p_ij) {
  return twist_from_pose(compose(inverse(measurement), p_ij)).vector();
}

std::vector<double> pose_to_row_major(const Pose& p) {
  std::vector<double> v(12);
  const Mat3& r = p.rotation.matrix();
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) v[row * 4 + col] = r(row, col);
    v[row * 4 + 3] = p.translation[row];
  }
  return v;
}

Pose pose_from_row_major(const std::vector<double>& v) {
  if (v.size() != 12) {
    throw std::invalid_argument("pose entry must hold 12 numbers");
  }
  Mat3 r;
  Vec3 t;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) r(row, col) = v[row * 4 + col];
    t[row] = v[row * 4 + 3];
  }
  return Pose(Rotation(r, 1e-4), t);
}

}  // namespace

void PoseGraph::validate() const {
  if (lambda_weight < 0.0) {
    throw std::invalid_argument("PoseGraph: lambda_weight must be >= 0");
  }
  const int n = static_cast<int>(nodes.size());
  for (const auto& e : edges) {
    if (e.i < 0 || e.j >= n || e.i >= e.j) {
      throw std::invalid_argument("PoseGraph: edge must reference existing nodes with i < j");
    }
    if ((e.information - e.information.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
      throw std::invalid_argument("PoseGraph: information matrix must be symmetric");
    }
    Eigen::LLT<Mat6> llt(e.information);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("PoseGraph: information matrix must be positive definite");
    }
  }
}

void LmConfig::validate() const {
  if (max_iterations <= 0 || initial_damping <= 0.0 || cost_tolerance <= 0.0 ||
      step_tolerance <= 0.0 || damping_up <= 1.0 || damping_down <= 0.0 ||
      damping_down >= 1.0) {
    throw std::invalid_argument("LmConfig: invalid parameter");
  }
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::converged_cost: return "converged_cost";
    case Termination::converged_step: return "converged_step";
    case Termination::max_iterations: return "max_iterations";
    case Termination::stalled: return "stalled";
  }
  return "unknown";
}

PoseGraph build_graph(std::span<const Pose> vo_motions,
                      std::span<const Pose> imu_relative_poses, double lambda,
                      const Mat6& sigma) {
  if (vo_motions.size() != imu_relative_poses.size()) {
    throw std::invalid_argument("build_graph: VO and IMU motion counts differ");
  }

  PoseGraph g;
  g.lambda_weight = lambda;
  g.nodes.reserve(vo_motions.size() + 1);
  g.nodes.push_back(Pose::identity());
  for (const auto& m : vo_motions) {
    g.nodes.push_back(compose(g.nodes.back(), m));
  }

  g.edges.reserve(vo_motions.size());
  for (std::size_t k = 0; k < vo_motions.size(); ++k) {
    Edge e;
    e.i = static_cast<int>(k);
    e.j = static_cast<int>(k + 1);
    e.vo_measurement = vo_motions[k];
    e.imu_measurement = imu_relative_poses[k];
    e.information = sigma;
    g.edges.push_back(e);
  }
  g.validate();
  return g;
}

PoseGraph build_graph(std::span<const Pose> vo_motions,
                      std::span<const imu::PreintegratedMotion> imu_motions,
                      double lambda, const Mat6& sigma, const Vec3& initial_velocity,
                      const imu::ChainOptions& chain_opts) {
  if (vo_motions.size() != imu_motions.size()) {
    throw std::invalid_argument("build_graph: VO and IMU motion counts differ");
  }
  const Trajectory imu_world =
      imu::chain_to_world(imu_motions, Pose::identity(), initial_velocity, chain_opts);
  std::vector<Pose> imu_relative;
  imu_relative.reserve(imu_motions.size());
  for (std::size_t k = 0; k + 1 < imu_world.poses.size(); ++k) {
    imu_relative.push_back(
        relative_pose(imu_world.poses[k].pose, imu_world.poses[k + 1].pose));
  }
  return build_graph(vo_motions, imu_relative, lambda, sigma);
}

CostReport graph_cost(const PoseGraph& g) {
  CostReport report;
  report.residuals.reserve(g.edges.size());
  for (const auto& e : g.edges) {
    const Pose p_ij = relative_pose(g.nodes[e.i], g.nodes[e.j]);
    EdgeResiduals r;
    r.vo = residual(e.vo_measurement, p_ij);
    r.imu = residual(e.imu_measurement, p_ij);
    report.total += r.vo.dot(e.information * r.vo) +
                    g.lambda_weight * r.imu.dot(e.information * r.imu);
    report.residuals.push_back(r);
  }
  return report;
}

namespace {

// Jacobian blocks of r = twist(inverse(T) * p_i^-1 p_j) w.r.t. the right
// tangent perturbations of nodes i and j.
void measurement_jacobians(const Pose& T, const Pose& pi, const Pose& pj,
                           Mat6& wrt_i, Mat6& wrt_j) {
  const Mat3 rt_T = T.rotation.matrix().transpose();
  const Mat3 m = pi.rotation.matrix().transpose() * pj.rotation.matrix();  // R_i' R_j
  const Vec3 r_w = so3_log(Rotation::from_matrix_unchecked(rt_T * m));
  const Mat3 jr_inv = so3_right_jacobian_inverse(r_w);
  const Vec3 d = pi.rotation.matrix().transpose() * (pj.translation - pi.translation);

  wrt_j.setZero();
  wrt_j.topLeftCorner<3, 3>() = jr_inv;
  wrt_j.bottomRightCorner<3, 3>() = rt_T * m;

  wrt_i.setZero();
  wrt_i.topLeftCorner<3, 3>() = -jr_inv * m.transpose();
  wrt_i.bottomLeftCorner<3, 3>() = rt_T * skew(d);
  wrt_i.bottomRightCorner<3, 3>() = -rt_T;
}

std::vector<Pose> retract(const std::vector<Pose>& nodes, const Eigen::VectorXd& step) {
  std::vector<Pose> out = nodes;
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    const Eigen::Index off = 6 * static_cast<Eigen::Index>(k - 1);
    const Twist6 delta(Vec6(step.segment<6>(off)));
    out[k] = compose(nodes[k], pose_from_twist(delta));
  }
  return out;
}

struct NormalEquations {
  Eigen::MatrixXd h;
  Eigen::VectorXd g;
};

NormalEquations assemble(const PoseGraph& g, const std::vector<Pose>& nodes) {
  const Eigen::Index dim = 6 * static_cast<Eigen::Index>(nodes.size() - 1);
  NormalEquations ne{Eigen::MatrixXd::Zero(dim, dim), Eigen::VectorXd::Zero(dim)};

  auto accumulate = [&](int i, int j, const Vec6& r, const Mat6& ji, const Mat6& jj,
                        const Mat6& info, double weight) {
    const Eigen::Index oi = 6 * static_cast<Eigen::Index>(i - 1);
    const Eigen::Index oj = 6 * static_cast<Eigen::Index>(j - 1);
    const Mat6 wi = weight * (ji.transpose() * info);
    const Mat6 wj = weight * (jj.transpose() * info);
    if (i > 0) {
      ne.h.block<6, 6>(oi, oi) += wi * ji;
      ne.g.segment<6>(oi) += wi * r;
    }
    if (j > 0) {
      ne.h.block<6, 6>(oj, oj) += wj * jj;
      ne.g.segment<6>(oj) += wj * r;
    }
    if (i > 0 && j > 0) {
      ne.h.block<6, 6>(oi, oj) += wi * jj;
      ne.h.block<6, 6>(oj, oi) += wj * ji;
    }
  };

  for (const auto& e : g.edges) {
    const Pose p_ij = relative_pose(nodes[e.i], nodes[e.j]);
    Mat6 ji, jj;
    measurement_jacobians(e.vo_measurement, nodes[e.i], nodes[e.j], ji, jj);
    accumulate(e.i, e.j, residual(e.vo_measurement, p_ij), ji, jj, e.information, 1.0);
    measurement_jacobians(e.imu_measurement, nodes[e.i], nodes[e.j], ji, jj);
    accumulate(e.i, e.j, residual(e.imu_measurement, p_ij), ji, jj, e.information,
               g.lambda_weight);
  }
  return ne;
}

double total_cost(const PoseGraph& g, const std::vector<Pose>& nodes) {
  PoseGraph tmp = g;
  tmp.nodes = nodes;
  return graph_cost(tmp).total;
}

}  // namespace

EdgeJacobians edge_jacobians(const PoseGraph& g, const Edge& e) {
  EdgeJacobians j;
  measurement_jacobians(e.vo_measurement, g.nodes[e.i], g.nodes[e.j], j.vo_wrt_i, j.vo_wrt_j);
  measurement_jacobians(e.imu_measurement, g.nodes[e.i], g.nodes[e.j], j.imu_wrt_i,
                        j.imu_wrt_j);
  return j;
}

std::pair<std::vector<Pose>, SolveReport> lm_solve(const PoseGraph& g, const LmConfig& cfg) {
  g.validate();
  cfg.validate();

  SolveReport report;
  std::vector<Pose> nodes = g.nodes;
  if (nodes.empty()) {
    throw std::invalid_argument("lm_solve: graph has no nodes");
  }

  double cost = graph_cost(g).total;
  report.cost_history.push_back(cost);

  if (nodes.size() == 1 || g.edges.empty()) {
    report.termination = Termination::converged_step;
    report.final_cost = cost;
    return {nodes, report};
  }

  const Eigen::Index dim = 6 * static_cast<Eigen::Index>(nodes.size() - 1);
  double mu = cfg.initial_damping;

  while (report.iterations < cfg.max_iterations) {
    ++report.iterations;

    const NormalEquations ne = assemble(g, nodes);
    const Eigen::MatrixXd damped =
        ne.h + mu * Eigen::MatrixXd::Identity(dim, dim);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
    Eigen::VectorXd step;
    bool solvable = ldlt.info() == Eigen::Success;
    if (solvable) {
      step = ldlt.solve(-ne.g);
      solvable = step.allFinite();
    }
    if (!solvable) {
      mu *= cfg.damping_up;
      if (mu > kMaxDamping) {
        report.termination = Termination::stalled;
        break;
      }
      continue;
    }

    if (step.norm() < cfg.step_tolerance) {
      report.termination = Termination::converged_step;
      break;
    }

    const std::vector<Pose> candidate = retract(nodes, step);
    const double new_cost = total_cost(g, candidate);

    if (new_cost < cost) {
      const double rel_decrease = (cost - new_cost) / std::max(cost, 1e-300);
      nodes = candidate;
      cost = new_cost;
      ++report.accepted_steps;
      report.cost_history.push_back(cost);
      mu = std::max(mu * cfg.damping_down, kMinDamping);
      if (rel_decrease < cfg.cost_tolerance) {
        report.termination = Termination::converged_cost;
        break;
      }
    } else {
      mu *= cfg.damping_up;
      if (mu > kMaxDamping) {
        report.termination = Termination::stalled;
        break;
      }
    }
  }

  report.final_cost = cost;
  return {nodes, report};
}

std::string dump_json(const PoseGraph& g) {
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["lambda"] = g.lambda_weight;
  auto& nodes = doc["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : g.nodes) nodes.push_back(pose_to_row_major(n));
  auto& edges = doc["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : g.edges) {
    nlohmann::ordered_json je;
    je["i"] = e.i;
    je["j"] = e.j;
    je["vo"] = pose_to_row_major(e.vo_measurement);
    je["imu"] = pose_to_row_major(e.imu_measurement);
    std::vector<double> info(36);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) info[r * 6 + c] = e.information(r, c);
    je["information"] = info;
    edges.push_back(je);
  }
  return doc.dump(2) + "\n";
}

PoseGraph load_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  if (doc.at("version").get<int>() != 1) {
    throw std::invalid_argument("pose graph: unsupported version");
  }
  PoseGraph g;
  g.lambda_weight = doc.at("lambda").get<double>();
  for (const auto& n : doc.at("nodes")) {
    g.nodes.push_back(pose_from_row_major(n.get<std::vector<double>>()));
  }
  for (const auto& je : doc.at("edges")) {
    Edge e;
    e.i = je.at("i").get<int>();
    e.j = je.at("j").get<int>();
    e.vo_measurement = pose_from_row_major(je.at("vo").get<std::vector<double>>());
    e.imu_measurement = pose_from_row_major(je.at("imu").get<std::vector<double>>());
    const auto info = je.at("information").get<std::vector<double>>();
    if (info.size() != 36) {
      throw std::invalid_argument("pose graph: information matrix must hold 36 numbers");
    }
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) e.information(r, c) = info[r * 6 + c];
    g.edges.push_back(e);
  }
  g.validate();
  return g;
}

}  // namespace lumio::pgo
