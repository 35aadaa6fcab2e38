#pragma once

#include <string>
#include <vector>

#include "lumio/geometry.hpp"

namespace lumio {

struct TimedPose {
  double t = 0.0;
  Pose pose;
};

/// Timestamped pose sequence in a named reference frame.
struct Trajectory {
  std::string frame = "world";
  std::vector<TimedPose> poses;

  std::size_t size() const { return poses.size(); }
  bool empty() const { return poses.empty(); }

  /// Throws std::invalid_argument unless timestamps strictly increase and
  /// the trajectory holds at least one pose.
  void validate() const;

  std::vector<Vec3> positions() const;
};

/// Cumulative chord length along the trajectory, one entry per pose.
std::vector<double> path_distances(const Trajectory& traj);

}  // namespace lumio
