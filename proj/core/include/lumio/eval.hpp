// Trajectory alignment and error metrics.
//
// ATE is the RMSE of translation differences after optional similarity
// alignment. RPE compares per-step error transforms
//   E_i = inverse(rel(gt_i, gt_{i+d})) * rel(est_i, est_{i+d})
// and segment errors follow the KITTI convention: per start frame and
// segment length L (measured by cumulative ground-truth chord length),
// t_rel = mean(|t_err| / L) * 100%, r_rel = mean(angle / L) in deg/100m.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lumio/geometry.hpp"
#include "lumio/trajectory.hpp"

namespace lumio::eval {

struct AlignmentResult {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;
  double rmse_before = 0.0;
  double rmse_after = 0.0;
};

struct AssocOptions {
  double max_time_offset = 0.02;  // seconds
};

/// Least-squares similarity transform minimizing sum |gt_i - (s R est_i + t)|^2.
/// with_scale = false forces s = 1. Throws on fewer than 3 non-collinear
/// associated points.
AlignmentResult umeyama_align(const Trajectory& est, const Trajectory& gt,
                              bool with_scale, const AssocOptions& assoc = {});

/// Applies x -> s R x + t to positions and R to orientations.
Trajectory apply_alignment(const AlignmentResult& a, const Trajectory& traj);

/// RMSE of translation differences, optionally after similarity alignment.
double ate(const Trajectory& est, const Trajectory& gt, bool align,
           bool with_scale = true, const AssocOptions& assoc = {});

struct RpeResult {
  double translational = 0.0;  // meters, RMSE
  double rotational = 0.0;     // radians, RMSE
};

RpeResult rpe(const Trajectory& est, const Trajectory& gt, int delta);

struct SegmentLengthErrors {
  double length = 0.0;
  double t_rel_percent = 0.0;
  double r_rel_deg_per_100m = 0.0;
  int count = 0;
};

struct SegmentErrorResult {
  double t_rel_percent = 0.0;       // averaged over all segments
  double r_rel_deg_per_100m = 0.0;  // averaged over all segments
  int segment_count = 0;
  std::vector<SegmentLengthErrors> per_length;
};

/// Empty result (segment_count = 0, warning on stderr) when the ground-truth
/// path is shorter than every requested length.
SegmentErrorResult segment_errors(const Trajectory& est, const Trajectory& gt,
                                  std::span<const double> lengths);

std::vector<double> default_segment_lengths();

}  // namespace lumio::eval
