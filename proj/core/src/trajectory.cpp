#include "lumio/trajectory.hpp"

#include <stdexcept>

namespace lumio {

void Trajectory::validate() const {
  if (poses.empty()) {
    throw std::invalid_argument("Trajectory: needs at least one pose");
  }
  for (std::size_t i = 1; i < poses.size(); ++i) {
    if (!(poses[i].t > poses[i - 1].t)) {
      throw std::invalid_argument("Trajectory: timestamps must strictly increase");
    }
  }
}

std::vector<Vec3> Trajectory::positions() const {
  std::vector<Vec3> out;
  out.reserve(poses.size());
  for (const auto& tp : poses) out.push_back(tp.pose.translation);
  return out;
}

std::vector<double> path_distances(const Trajectory& traj) {
  std::vector<double> dist;
  dist.reserve(traj.poses.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < traj.poses.size(); ++i) {
    if (i > 0) {
      acc += (traj.poses[i].pose.translation - traj.poses[i - 1].pose.translation).norm();
    }
    dist.push_back(acc);
  }
  return dist;
}

}  // namespace lumio
