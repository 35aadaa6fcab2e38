// IMU pre-integration: compresses raw inertial samples between keyframes
// into relative-motion deltas, chains deltas into a world trajectory, and
// optionally blends GNSS position fixes into that chain.
//
// The discrete recursion (zero-order hold on the left-endpoint sample):
//   dR_{k+1} = dR_k * exp(w_k * dt)
//   dv_{k+1} = dv_k + dR_k * a_k * dt
//   dp_{k+1} = dp_k + dv_k * dt + 1/2 * dR_k * a_k * dt^2
// carries no gravity term; accelerometer input is treated as free
// acceleration. chain_to_world can re-insert gravity for data recorded as
// specific force (gravity_compensation).

#pragma once

#include <span>
#include <vector>

#include "lumio/geometry.hpp"
#include "lumio/trajectory.hpp"

namespace lumio::imu {

struct ImuSample {
  double t = 0.0;  // seconds
  Vec3 accel = Vec3::Zero();  // m/s^2
  Vec3 gyro = Vec3::Zero();   // rad/s
};

struct PreintegratedMotion {
  Rotation delta_rotation;
  Vec3 delta_velocity = Vec3::Zero();
  Vec3 delta_position = Vec3::Zero();
  double duration = 0.0;
};

struct GnssFix {
  double t = 0.0;
  Vec3 position = Vec3::Zero();  // world frame
  double sigma = 1.0;            // position noise, > 0
};

/// Runs the recursion over >= 2 samples with strictly increasing timestamps.
PreintegratedMotion preintegrate(std::span<const ImuSample> samples);

/// Composition rule: preintegrating a concatenated sample list equals
/// compose(preintegrate(first half), preintegrate(second half)).
PreintegratedMotion compose(const PreintegratedMotion& a, const PreintegratedMotion& b);

struct ChainOptions {
  bool gravity_compensation = false;  // add g back when samples hold specific force
  double gravity = 9.81;              // m/s^2 along -z when enabled
  double start_time = 0.0;
};

/// World-frame pose sequence from an initial state and a list of deltas.
/// Per delta: p += v*T + R*dp (+ 1/2 g T^2), v += R*dv (+ g T), R *= dR.
Trajectory chain_to_world(std::span<const PreintegratedMotion> deltas,
                          const Pose& initial_pose, const Vec3& initial_velocity,
                          const ChainOptions& opts = {});

struct GnssBlendOptions {
  /// Assumed trajectory position uncertainty growth (m per second since the
  /// previous fix); sets the blend weight beta = s_t^2 / (s_t^2 + s_gnss^2).
  double traj_sigma_rate = 0.5;
  double min_traj_sigma = 1e-6;
};

/// Blends each fix into the time-nearest pose and linearly interpolates the
/// applied corrections over the poses in between (constant beyond the ends).
/// Fixes outside the trajectory time span are ignored with a warning on stderr.
Trajectory apply_gnss_correction(const Trajectory& traj, std::span<const GnssFix> fixes,
                                 const GnssBlendOptions& opts = {});

}  // namespace lumio::imu
