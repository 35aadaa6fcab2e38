// Synthetic scenario generation: analytic ground-truth trajectories, IMU
// samples consistent with the pre-integration recursion, drifting/noisy VO
// relative motions, GNSS fixes, and procedural low-light frame pairs.
//
// All generators are pure functions of (config, seed).

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lumio/geometry.hpp"
#include "lumio/imu.hpp"
#include "lumio/trajectory.hpp"
#include "lumio/vonet.hpp"

namespace lumio::sim {

enum class TrajectoryKind { line, circle, figure_eight };

TrajectoryKind trajectory_kind_from_string(const std::string& s);
std::string to_string(TrajectoryKind kind);

struct ScenarioConfig {
  TrajectoryKind kind = TrajectoryKind::circle;
  double duration = 60.0;       // seconds
  double imu_rate = 100.0;      // Hz
  double keyframe_rate = 1.0;   // Hz
  double speed = 2.0;           // m/s (line/circle; figure-eight peak scale)
  double radius = 10.0;         // m (circle radius / figure-eight half-width)

  double vo_noise_translation = 0.0;  // sigma, m per step
  double vo_noise_rotation = 0.0;     // sigma, rad per step
  Twist6 vo_drift_bias;               // constant per-step twist bias

  double imu_accel_noise = 0.0;  // sigma, m/s^2
  double imu_gyro_noise = 0.0;   // sigma, rad/s

  double gnss_rate = 1.0;         // Hz
  double gnss_sigma = 0.01;       // reported fix accuracy, m
  double gnss_noise_sigma = 0.0;  // actual noise added to fixes, m

  bool gravity_compensation = false;

  double brightness = 1.0;  // [0, 1], scales the frame pattern
  int frame_height = 32;
  int frame_width = 32;

  std::uint64_t seed = 0;

  void validate() const;
};

/// Raw analytic body state at time t. Generated trajectories are expressed
/// relative to the first frame (KITTI convention: pose 0 is the identity),
/// so consumers normally want gen_ground_truth/initial_velocity instead.
struct BodyState {
  Pose pose;
  Vec3 velocity = Vec3::Zero();
};

BodyState body_state(const ScenarioConfig& cfg, double t);

/// Start velocity expressed in the trajectory (first-camera) frame; pairs
/// with chaining integrated motion from the identity pose.
Vec3 initial_velocity(const ScenarioConfig& cfg);

/// Ground-truth poses sampled at the keyframe rate (duration * rate + 1
/// poses), relative to the first frame.
Trajectory gen_ground_truth(const ScenarioConfig& cfg);

/// Ground truth sampled at an arbitrary rate (used for dense IMU truth).
Trajectory gen_ground_truth_at(const ScenarioConfig& cfg, double rate);

/// Body-frame IMU samples derived from dense ground truth such that the
/// noiseless pre-integration recursion reproduces the sampled path exactly.
/// Honors gravity_compensation (emits specific force when enabled).
std::vector<imu::ImuSample> gen_imu(const Trajectory& dense_gt, const ScenarioConfig& cfg);

/// Per-step relative motions: ground truth perturbed by seeded Gaussian twist
/// noise plus the constant drift bias twist.
std::vector<Pose> gen_vo(const Trajectory& gt, const ScenarioConfig& cfg);

/// Position fixes at the GNSS rate; noise sigma and the reported sigma are
/// configured independently so exact fixes can carry a nonzero accuracy.
std::vector<imu::GnssFix> gen_gnss(const Trajectory& gt, const ScenarioConfig& cfg);

/// One procedural frame per ground-truth pose; consecutive entries form the
/// frame pairs fed to the pose regressor. The texture is a smooth seeded
/// blob-and-gradient pattern with mean 0.5, sampled with a viewpoint shift
/// proportional to the pose translation, then scaled by cfg.brightness.
std::vector<vonet::Image> gen_frames(const Trajectory& gt, const ScenarioConfig& cfg);

}  // namespace lumio::sim
