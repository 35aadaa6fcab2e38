#include "lumio/imu.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace lumio::imu {

PreintegratedMotion preintegrate(std::span<const ImuSample> samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("preintegrate: need at least 2 samples");
  }
  PreintegratedMotion m;
  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    const double dt = samples[k + 1].t - samples[k].t;
    if (!(dt > 0.0)) {
      throw std::invalid_argument("preintegrate: timestamps must strictly increase");
    }
    const Vec3 a_rot = m.delta_rotation * samples[k].accel;
    m.delta_position += m.delta_velocity * dt + 0.5 * a_rot * dt * dt;
    m.delta_velocity += a_rot * dt;
    m.delta_rotation = m.delta_rotation * so3_exp(samples[k].gyro * dt);
  }
  m.duration = samples.back().t - samples.front().t;
  return m;
}

PreintegratedMotion compose(const PreintegratedMotion& a, const PreintegratedMotion& b) {
  PreintegratedMotion m;
  m.delta_rotation = a.delta_rotation * b.delta_rotation;
  m.delta_velocity = a.delta_velocity + a.delta_rotation * b.delta_velocity;
  m.delta_position = a.delta_position + a.delta_velocity * b.duration +
                     a.delta_rotation * b.delta_position;
  m.duration = a.duration + b.duration;
  return m;
}

Trajectory chain_to_world(std::span<const PreintegratedMotion> deltas,
                          const Pose& initial_pose, const Vec3& initial_velocity,
                          const ChainOptions& opts) {
  const Vec3 g = opts.gravity_compensation ? Vec3(0.0, 0.0, -opts.gravity) : Vec3::Zero();

  Trajectory traj;
  traj.frame = "world";
  traj.poses.push_back({opts.start_time, initial_pose});

  Rotation r = initial_pose.rotation;
  Vec3 p = initial_pose.translation;
  Vec3 v = initial_velocity;
  double t = opts.start_time;
  for (const auto& d : deltas) {
    const double T = d.duration;
    p += v * T + r * d.delta_position + 0.5 * g * T * T;
    v += r * d.delta_velocity + g * T;
    r = r * d.delta_rotation;
    t += T;
    traj.poses.push_back({t, Pose(r, p)});
  }
  return traj;
}

Trajectory apply_gnss_correction(const Trajectory& traj, std::span<const GnssFix> fixes,
                                 const GnssBlendOptions& opts) {
  traj.validate();

  const double t_begin = traj.poses.front().t;
  const double t_end = traj.poses.back().t;

  std::vector<GnssFix> ordered(fixes.begin(), fixes.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const GnssFix& a, const GnssFix& b) { return a.t < b.t; });

  // Correction offsets anchored at fix-matched pose indices. Fixes are
  // blended sequentially: each one sees the trajectory as already shifted by
  // the previous correction.
  std::vector<std::pair<std::size_t, Vec3>> anchors;
  Vec3 carry = Vec3::Zero();
  double t_last_fix = t_begin;

  for (const auto& fix : ordered) {
    if (!(fix.sigma > 0.0)) {
      throw std::invalid_argument("apply_gnss_correction: fix sigma must be > 0");
    }
    if (fix.t < t_begin || fix.t > t_end) {
      std::cerr << "warning: GNSS fix at t=" << fix.t
                << " outside trajectory span, ignored\n";
      continue;
    }
    std::size_t nearest = 0;
    double best = std::abs(traj.poses[0].t - fix.t);
    for (std::size_t i = 1; i < traj.poses.size(); ++i) {
      const double d = std::abs(traj.poses[i].t - fix.t);
      if (d < best) {
        best = d;
        nearest = i;
      }
    }
    const double sigma_traj = std::max(opts.min_traj_sigma,
                                       opts.traj_sigma_rate * (fix.t - t_last_fix));
    const double beta = (sigma_traj * sigma_traj) /
                        (sigma_traj * sigma_traj + fix.sigma * fix.sigma);
    const Vec3 shifted = traj.poses[nearest].pose.translation + carry;
    carry += beta * (fix.position - shifted);
    anchors.emplace_back(nearest, carry);
    t_last_fix = fix.t;
  }

  Trajectory out = traj;
  if (anchors.empty()) return out;

  auto correction_at = [&](std::size_t i) -> Vec3 {
    if (i <= anchors.front().first) return anchors.front().second;
    if (i >= anchors.back().first) return anchors.back().second;
    for (std::size_t k = 0; k + 1 < anchors.size(); ++k) {
      const auto& [ia, ca] = anchors[k];
      const auto& [ib, cb] = anchors[k + 1];
      if (i >= ia && i <= ib) {
        const double ta = traj.poses[ia].t, tb = traj.poses[ib].t;
        const double s = tb > ta ? (traj.poses[i].t - ta) / (tb - ta) : 0.0;
        return ca + s * (cb - ca);
      }
    }
    return anchors.back().second;
  };

  for (std::size_t i = 0; i < out.poses.size(); ++i) {
    out.poses[i].pose.translation += correction_at(i);
  }
  return out;
}

}  // namespace lumio::imu
