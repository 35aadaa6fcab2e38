#include "lumio/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lumio/rng.hpp"

namespace lumio::sim {

namespace {

// Stream separators so each generator draws independent random sequences
// from one scenario seed.
constexpr std::uint64_t kImuStream = 0x1d872b41dbc22a4bULL;
constexpr std::uint64_t kVoStream = 0x8824b4186a15bd17ULL;
constexpr std::uint64_t kGnssStream = 0x5e41c9a6f6e1d3c5ULL;
constexpr std::uint64_t kFrameStream = 0x93d2f5a7b8c10e69ULL;

Rotation yaw_rotation(double yaw) {
  Mat3 r;
  const double c = std::cos(yaw), s = std::sin(yaw);
  // clang-format off
  r << c, -s, 0.0,
       s,  c, 0.0,
       0.0, 0.0, 1.0;
  // clang-format on
  return Rotation::from_matrix_unchecked(r);
}

}  // namespace

TrajectoryKind trajectory_kind_from_string(const std::string& s) {
  if (s == "line") return TrajectoryKind::line;
  if (s == "circle") return TrajectoryKind::circle;
  if (s == "figure-eight" || s == "figure_eight") return TrajectoryKind::figure_eight;
  throw std::invalid_argument("unknown trajectory kind: " + s);
}

std::string to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::line: return "line";
    case TrajectoryKind::circle: return "circle";
    case TrajectoryKind::figure_eight: return "figure-eight";
  }
  return "unknown";
}

void ScenarioConfig::validate() const {
  if (!(duration > 0.0)) throw std::invalid_argument("scenario: duration must be > 0");
  if (!(imu_rate > 0.0) || !(keyframe_rate > 0.0) || !(gnss_rate > 0.0)) {
    throw std::invalid_argument("scenario: rates must be > 0");
  }
  if (imu_rate < keyframe_rate) {
    throw std::invalid_argument("scenario: imu_rate must be >= keyframe_rate");
  }
  if (speed < 0.0 || !(radius > 0.0)) {
    throw std::invalid_argument("scenario: speed must be >= 0 and radius > 0");
  }
  if (vo_noise_translation < 0.0 || vo_noise_rotation < 0.0 || imu_accel_noise < 0.0 ||
      imu_gyro_noise < 0.0 || gnss_noise_sigma < 0.0) {
    throw std::invalid_argument("scenario: noise levels must be >= 0");
  }
  if (!(gnss_sigma > 0.0)) throw std::invalid_argument("scenario: gnss_sigma must be > 0");
  if (brightness < 0.0 || brightness > 1.0) {
    throw std::invalid_argument("scenario: brightness must be in [0, 1]");
  }
  if (frame_height <= 0 || frame_width <= 0) {
    throw std::invalid_argument("scenario: frame dimensions must be > 0");
  }
}

BodyState body_state(const ScenarioConfig& cfg, double t) {
  BodyState s;
  switch (cfg.kind) {
    case TrajectoryKind::line: {
      s.pose = Pose(Rotation::identity(), Vec3(cfg.speed * t, 0.0, 0.0));
      s.velocity = Vec3(cfg.speed, 0.0, 0.0);
      break;
    }
    case TrajectoryKind::circle: {
      // Starts at the origin heading +x; counterclockwise about (0, r).
      const double omega = cfg.speed / cfg.radius;
      const double phi = omega * t;
      s.pose = Pose(yaw_rotation(phi),
                    Vec3(cfg.radius * std::sin(phi), cfg.radius * (1.0 - std::cos(phi)),
                         0.0));
      s.velocity = Vec3(cfg.speed * std::cos(phi), cfg.speed * std::sin(phi), 0.0);
      break;
    }
    case TrajectoryKind::figure_eight: {
      // Gerono lemniscate traversed once over the configured duration; the
      // speed profile is non-constant by design.
      const double omega = 2.0 * M_PI / cfg.duration;
      const double theta = omega * t;
      const double a = cfg.radius;
      const Vec3 p(a * std::sin(theta), 0.5 * a * std::sin(2.0 * theta), 0.0);
      const Vec3 v(a * omega * std::cos(theta), a * omega * std::cos(2.0 * theta), 0.0);
      s.pose = Pose(yaw_rotation(std::atan2(v.y(), v.x())), p);
      s.velocity = v;
      break;
    }
  }
  return s;
}

Vec3 initial_velocity(const ScenarioConfig& cfg) {
  const BodyState s0 = body_state(cfg, 0.0);
  return s0.pose.rotation.inverse() * s0.velocity;
}

Trajectory gen_ground_truth_at(const ScenarioConfig& cfg, double rate) {
  cfg.validate();
  if (!(rate > 0.0)) throw std::invalid_argument("gen_ground_truth_at: rate must be > 0");
  const auto steps = static_cast<std::size_t>(std::llround(cfg.duration * rate));
  const Pose to_first = inverse(body_state(cfg, 0.0).pose);
  Trajectory traj;
  traj.frame = "camera0";
  traj.poses.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) / rate;
    traj.poses.push_back({t, compose(to_first, body_state(cfg, t).pose)});
  }
  return traj;
}

Trajectory gen_ground_truth(const ScenarioConfig& cfg) {
  return gen_ground_truth_at(cfg, cfg.keyframe_rate);
}

std::vector<imu::ImuSample> gen_imu(const Trajectory& dense_gt, const ScenarioConfig& cfg) {
  dense_gt.validate();
  if (dense_gt.size() < 2) {
    throw std::invalid_argument("gen_imu: need at least 2 ground-truth samples");
  }
  const Vec3 gravity =
      cfg.gravity_compensation ? Vec3(0.0, 0.0, -9.81) : Vec3(0.0, 0.0, 0.0);

  Rng rng(cfg.seed ^ kImuStream);
  std::vector<imu::ImuSample> samples(dense_gt.size());

  // Invert the discrete recursion: choose a_k so that one zero-order-hold
  // step lands exactly on the next ground-truth position. The start velocity
  // is re-expressed in the trajectory's own frame (body velocity is frame
  // invariant, so this works for raw and first-frame-relative inputs alike).
  const BodyState s0 = body_state(cfg, dense_gt.poses.front().t);
  Vec3 v = dense_gt.poses.front().pose.rotation * (s0.pose.rotation.inverse() * s0.velocity);
  for (std::size_t k = 0; k + 1 < dense_gt.size(); ++k) {
    const auto& cur = dense_gt.poses[k];
    const auto& nxt = dense_gt.poses[k + 1];
    const double dt = nxt.t - cur.t;
    const Mat3 r_t = cur.pose.rotation.matrix().transpose();

    const Vec3 accel_world =
        2.0 * (nxt.pose.translation - cur.pose.translation - v * dt) / (dt * dt);
    const Vec3 gyro =
        so3_log(Rotation::from_matrix_unchecked(r_t * nxt.pose.rotation.matrix())) / dt;

    samples[k].t = cur.t;
    samples[k].accel = r_t * (accel_world - gravity) + rng.gaussian_vec3(cfg.imu_accel_noise);
    samples[k].gyro = gyro + rng.gaussian_vec3(cfg.imu_gyro_noise);

    v += accel_world * dt;
  }
  // The final sample only terminates the last integration interval.
  samples.back().t = dense_gt.poses.back().t;
  return samples;
}

std::vector<Pose> gen_vo(const Trajectory& gt, const ScenarioConfig& cfg) {
  gt.validate();
  if (gt.size() < 2) throw std::invalid_argument("gen_vo: need at least 2 poses");
  Rng rng(cfg.seed ^ kVoStream);
  std::vector<Pose> motions;
  motions.reserve(gt.size() - 1);
  for (std::size_t k = 0; k + 1 < gt.size(); ++k) {
    const Pose true_motion = relative_pose(gt.poses[k].pose, gt.poses[k + 1].pose);
    const Twist6 perturbation(
        cfg.vo_drift_bias.rotation + rng.gaussian_vec3(cfg.vo_noise_rotation),
        cfg.vo_drift_bias.translation + rng.gaussian_vec3(cfg.vo_noise_translation));
    motions.push_back(compose(true_motion, pose_from_twist(perturbation)));
  }
  return motions;
}

std::vector<imu::GnssFix> gen_gnss(const Trajectory& gt, const ScenarioConfig& cfg) {
  gt.validate();
  Rng rng(cfg.seed ^ kGnssStream);
  const Pose to_first = inverse(body_state(cfg, 0.0).pose);
  std::vector<imu::GnssFix> fixes;
  const double t0 = gt.poses.front().t;
  const double t1 = gt.poses.back().t;
  for (std::size_t k = 0;; ++k) {
    const double t = t0 + static_cast<double>(k) / cfg.gnss_rate;
    if (t > t1 + 1e-12) break;
    imu::GnssFix fix;
    fix.t = std::min(t, t1);
    fix.position = compose(to_first, body_state(cfg, fix.t).pose).translation +
                   rng.gaussian_vec3(cfg.gnss_noise_sigma);
    fix.sigma = cfg.gnss_sigma;
    fixes.push_back(fix);
  }
  return fixes;
}

namespace {

struct TexturePattern {
  double grad_freq_u = 0.0, grad_freq_v = 0.0, grad_phase = 0.0;
  struct Blob {
    double u, v, inv_two_sigma2, amplitude;
    double tint[3];
  };
  std::vector<Blob> blobs;

  // Smooth value in (0, 1); safe to scale by any brightness in [0, 1].
  double sample(double u, double v, int channel) const {
    double value =
        0.45 + 0.15 * std::sin(2.0 * M_PI * (grad_freq_u * u + grad_freq_v * v) +
                               grad_phase);
    for (const auto& b : blobs) {
      const double du = u - b.u, dv = v - b.v;
      value += b.amplitude * b.tint[channel] *
               std::exp(-(du * du + dv * dv) * b.inv_two_sigma2);
    }
    return value;
  }
};

TexturePattern make_pattern(std::uint64_t seed) {
  Rng rng(seed ^ kFrameStream);
  TexturePattern p;
  p.grad_freq_u = rng.uniform(0.005, 0.02);
  p.grad_freq_v = rng.uniform(0.005, 0.02);
  p.grad_phase = rng.uniform(0.0, 2.0 * M_PI);
  p.blobs.resize(6);
  for (auto& b : p.blobs) {
    b.u = rng.uniform(0.0, 64.0);
    b.v = rng.uniform(0.0, 64.0);
    const double sigma = rng.uniform(4.0, 12.0);
    b.inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
    b.amplitude = rng.uniform(0.04, 0.065);
    for (double& t : b.tint) t = rng.uniform(0.7, 1.0);
  }
  return p;
}

}  // namespace

std::vector<vonet::Image> gen_frames(const Trajectory& gt, const ScenarioConfig& cfg) {
  gt.validate();
  cfg.validate();
  const TexturePattern pattern = make_pattern(cfg.seed);
  constexpr double kPixelsPerMeter = 3.0;

  std::vector<vonet::Image> frames;
  frames.reserve(gt.size());
  for (const auto& tp : gt.poses) {
    const double shift_u = kPixelsPerMeter * tp.pose.translation.x();
    const double shift_v = kPixelsPerMeter * tp.pose.translation.y();
    vonet::Image img;
    img.height = cfg.frame_height;
    img.width = cfg.frame_width;
    for (int c = 0; c < 3; ++c) {
      img.channels[c].resize(cfg.frame_height, cfg.frame_width);
      for (int y = 0; y < cfg.frame_height; ++y) {
        for (int x = 0; x < cfg.frame_width; ++x) {
          const double value =
              cfg.brightness * pattern.sample(x + shift_u, y + shift_v, c);
          img.channels[c](y, x) = std::clamp(value, 0.0, 1.0);
        }
      }
    }
    frames.push_back(std::move(img));
  }
  return frames;
}

}  // namespace lumio::sim
