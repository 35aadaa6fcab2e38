// Pose-graph construction and Levenberg-Marquardt refinement on SE(3).
//
// Each edge (i, j) carries two relative-pose measurements of the same motion,
// one from visual odometry and one from the chained IMU deltas. The residual
// for a measurement T is the 6-vector twist of inverse(T) * p_ij with
// p_ij = relative_pose(p_i, p_j); the total cost is
//   L = sum r_vo' S r_vo + lambda * sum r_imu' S r_imu
// with S the per-edge information matrix. Node 0 is the gauge anchor.

#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lumio/geometry.hpp"
#include "lumio/imu.hpp"

namespace lumio::pgo {

struct Edge {
  int i = 0;
  int j = 0;
  Pose vo_measurement;
  Pose imu_measurement;
  Mat6 information = Mat6::Identity();  // symmetric positive definite
};

struct PoseGraph {
  std::vector<Pose> nodes;
  std::vector<Edge> edges;
  double lambda_weight = 1.0;

  /// Throws std::invalid_argument on dangling/misordered edges (requires
  /// i < j), non-SPD information, or negative lambda.
  void validate() const;
};

struct LmConfig {
  int max_iterations = 100;
  double initial_damping = 1e-4;
  double damping_up = 10.0;
  double damping_down = 0.5;
  double cost_tolerance = 1e-9;  // relative decrease per accepted step
  double step_tolerance = 1e-10;

  void validate() const;
};

enum class Termination { converged_cost, converged_step, max_iterations, stalled };

std::string to_string(Termination t);

struct SolveReport {
  std::vector<double> cost_history;  // initial cost followed by accepted costs
  Termination termination = Termination::max_iterations;
  double final_cost = 0.0;
  int iterations = 0;
  int accepted_steps = 0;
};

struct EdgeResiduals {
  Vec6 vo = Vec6::Zero();
  Vec6 imu = Vec6::Zero();
};

struct CostReport {
  double total = 0.0;
  std::vector<EdgeResiduals> residuals;  // one entry per edge
};

/// Nodes chained from identity along the VO motions; one edge per consecutive
/// pair. The IMU relative measurements are derived by chaining the deltas
/// from (identity, initial_velocity) and taking consecutive relative poses.
PoseGraph build_graph(std::span<const Pose> vo_motions,
                      std::span<const imu::PreintegratedMotion> imu_motions,
                      double lambda, const Mat6& sigma,
                      const Vec3& initial_velocity = Vec3::Zero(),
                      const imu::ChainOptions& chain_opts = {});

/// Same construction with the per-edge IMU relative poses supplied directly
/// (e.g. taken from a GNSS-corrected IMU chain).
PoseGraph build_graph(std::span<const Pose> vo_motions,
                      std::span<const Pose> imu_relative_poses, double lambda,
                      const Mat6& sigma);

CostReport graph_cost(const PoseGraph& g);

/// Jacobians of one edge's residuals w.r.t. the right-multiplicative tangent
/// perturbations of its two endpoint nodes. Column order matches Twist6:
/// rotation first, translation last.
struct EdgeJacobians {
  Mat6 vo_wrt_i, vo_wrt_j;
  Mat6 imu_wrt_i, imu_wrt_j;
};
EdgeJacobians edge_jacobians(const PoseGraph& g, const Edge& e);

/// Damped Gauss-Newton in the tangent space of the free nodes (node 0 fixed).
/// Steps are accepted only if the cost decreases; accepted costs are
/// non-increasing by construction.
std::pair<std::vector<Pose>, SolveReport> lm_solve(const PoseGraph& g, const LmConfig& cfg);

/// Graph round trip as JSON: nodes and measurements as row-major 3x4 [R|t].
std::string dump_json(const PoseGraph& g);
PoseGraph load_json(const std::string& text);

}  // namespace lumio::pgo
