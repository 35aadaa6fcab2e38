#include "lumio/eval.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace lumio::eval {

namespace {

// Nearest-neighbor timestamp association; both inputs must pair up fully.
std::vector<std::pair<std::size_t, std::size_t>> associate(const Trajectory& est,
                                                           const Trajectory& gt,
                                                           double max_offset) {
  est.validate();
  gt.validate();
  if (est.size() != gt.size()) {
    throw std::invalid_argument("trajectory lengths differ");
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(gt.size());
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    while (cursor + 1 < est.size() &&
           std::abs(est.poses[cursor + 1].t - gt.poses[i].t) <=
               std::abs(est.poses[cursor].t - gt.poses[i].t)) {
      ++cursor;
    }
    if (std::abs(est.poses[cursor].t - gt.poses[i].t) > max_offset) {
      throw std::invalid_argument("timestamp association failed: offset above tolerance");
    }
    pairs.emplace_back(cursor, i);
  }
  return pairs;
}

double rmse_of(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]).squaredNorm();
  return std::sqrt(acc / static_cast<double>(a.size()));
}

double rotation_angle(const Rotation& r) { return so3_log(r).norm(); }

}  // namespace

AlignmentResult umeyama_align(const Trajectory& est, const Trajectory& gt,
                              bool with_scale, const AssocOptions& assoc) {
  const auto pairs = associate(est, gt, assoc.max_time_offset);
  const std::size_t n = pairs.size();
  if (n < 3) {
    throw std::invalid_argument("umeyama_align: need at least 3 point pairs");
  }

  std::vector<Vec3> e(n), g(n);
  Vec3 mu_e = Vec3::Zero(), mu_g = Vec3::Zero();
  for (std::size_t k = 0; k < n; ++k) {
    e[k] = est.poses[pairs[k].first].pose.translation;
    g[k] = gt.poses[pairs[k].second].pose.translation;
    mu_e += e[k];
    mu_g += g[k];
  }
  mu_e /= static_cast<double>(n);
  mu_g /= static_cast<double>(n);

  Mat3 cov = Mat3::Zero();
  double var_e = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cov += (g[k] - mu_g) * (e[k] - mu_e).transpose();
    var_e += (e[k] - mu_e).squaredNorm();
  }
  cov /= static_cast<double>(n);
  var_e /= static_cast<double>(n);

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 d = svd.singularValues();
  if (d[1] < 1e-12 * std::max(1.0, d[0])) {
    throw std::invalid_argument("umeyama_align: degenerate (collinear) input");
  }
  Mat3 s = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) s(2, 2) = -1.0;

  AlignmentResult result;
  result.rotation =
      Rotation::from_matrix_unchecked(svd.matrixU() * s * svd.matrixV().transpose());
  result.scale = with_scale ? (d[0] * s(0, 0) + d[1] * s(1, 1) + d[2] * s(2, 2)) / var_e
                            : 1.0;
  if (!(result.scale > 0.0)) {
    throw std::invalid_argument("umeyama_align: recovered scale is not positive");
  }
  result.translation = mu_g - result.scale * (result.rotation * mu_e);

  std::vector<Vec3> mapped(n);
  for (std::size_t k = 0; k < n; ++k) {
    mapped[k] = result.scale * (result.rotation * e[k]) + result.translation;
  }
  result.rmse_before = rmse_of(e, g);
  result.rmse_after = rmse_of(mapped, g);
  return result;
}

Trajectory apply_alignment(const AlignmentResult& a, const Trajectory& traj) {
  Trajectory out = traj;
  for (auto& tp : out.poses) {
    tp.pose.translation = a.scale * (a.rotation * tp.pose.translation) + a.translation;
    tp.pose.rotation = a.rotation * tp.pose.rotation;
  }
  return out;
}

double ate(const Trajectory& est, const Trajectory& gt, bool align, bool with_scale,
           const AssocOptions& assoc) {
  const auto pairs = associate(est, gt, assoc.max_time_offset);
  const Trajectory* est_used = &est;
  Trajectory aligned;
  if (align) {
    aligned = apply_alignment(umeyama_align(est, gt, with_scale, assoc), est);
    est_used = &aligned;
  }
  double acc = 0.0;
  for (const auto& [ie, ig] : pairs) {
    acc += (est_used->poses[ie].pose.translation - gt.poses[ig].pose.translation)
               .squaredNorm();
  }
  return std::sqrt(acc / static_cast<double>(pairs.size()));
}

RpeResult rpe(const Trajectory& est, const Trajectory& gt, int delta) {
  est.validate();
  gt.validate();
  if (est.size() != gt.size()) {
    throw std::invalid_argument("rpe: trajectory lengths differ");
  }
  if (delta < 1 || est.size() < static_cast<std::size_t>(delta) + 1) {
    throw std::invalid_argument("rpe: need at least delta+1 poses");
  }
  const std::size_t n = est.size() - static_cast<std::size_t>(delta);
  double acc_t = 0.0, acc_r = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Pose rel_gt = relative_pose(gt.poses[i].pose, gt.poses[i + delta].pose);
    const Pose rel_est = relative_pose(est.poses[i].pose, est.poses[i + delta].pose);
    const Pose err = compose(inverse(rel_gt), rel_est);
    acc_t += err.translation.squaredNorm();
    const double ang = rotation_angle(err.rotation);
    acc_r += ang * ang;
  }
  RpeResult r;
  r.translational = std::sqrt(acc_t / static_cast<double>(n));
  r.rotational = std::sqrt(acc_r / static_cast<double>(n));
  return r;
}

std::vector<double> default_segment_lengths() {
  return {100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 700.0, 800.0};
}

SegmentErrorResult segment_errors(const Trajectory& est, const Trajectory& gt,
                                  std::span<const double> lengths) {
  est.validate();
  gt.validate();
  if (est.size() != gt.size()) {
    throw std::invalid_argument("segment_errors: trajectory lengths differ");
  }
  const std::vector<double> dist = path_distances(gt);

  SegmentErrorResult result;
  double sum_t = 0.0, sum_r = 0.0;
  for (double len : lengths) {
    SegmentLengthErrors per;
    per.length = len;
    double len_t = 0.0, len_r = 0.0;
    for (std::size_t first = 0; first < gt.size(); ++first) {
      // First frame whose cumulative distance exceeds the segment length.
      std::size_t last = first;
      while (last < gt.size() && dist[last] <= dist[first] + len) ++last;
      if (last >= gt.size()) break;

      const Pose delta_gt = relative_pose(gt.poses[first].pose, gt.poses[last].pose);
      const Pose delta_est = relative_pose(est.poses[first].pose, est.poses[last].pose);
      const Pose err = compose(inverse(delta_gt), delta_est);

      len_t += err.translation.norm() / len;
      len_r += rotation_angle(err.rotation) / len;
      ++per.count;
    }
    if (per.count > 0) {
      sum_t += len_t;
      sum_r += len_r;
      result.segment_count += per.count;
      per.t_rel_percent = 100.0 * len_t / per.count;
      per.r_rel_deg_per_100m = (len_r / per.count) * (180.0 / M_PI) * 100.0;
      result.per_length.push_back(per);
    }
  }
  if (result.segment_count == 0) {
    std::cerr << "warning: ground-truth path shorter than every segment length\n";
    return result;
  }
  result.t_rel_percent = 100.0 * sum_t / result.segment_count;
  result.r_rel_deg_per_100m =
      (sum_r / result.segment_count) * (180.0 / M_PI) * 100.0;
  return result;
}

}  // namespace lumio::eval
