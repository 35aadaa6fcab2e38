// File formats: KITTI-style pose files (12 row-major numbers of [R|t] per
// line), IMU/GNSS CSV, trajectory CSV with quaternions, and binary PGM/PPM.
//
// Numbers are printed with 17 significant digits, so write -> read -> write
// is byte-stable.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lumio/geometry.hpp"
#include "lumio/imu.hpp"
#include "lumio/trajectory.hpp"
#include "lumio/vonet.hpp"

namespace lumio::io {

/// One KITTI pose line, no trailing newline. Identity pose prints exactly
/// "1 0 0 0 0 1 0 0 0 0 1 0".
std::string format_pose_line(const Pose& p);

Pose parse_pose_line(const std::string& line, double orthonormal_tol = 1e-4);

void write_pose_file(const Trajectory& traj, const std::filesystem::path& path);

/// Timestamps are assigned as frame_index * dt (the format carries none).
/// Malformed lines and rotation blocks beyond the orthonormality tolerance
/// are reported with their line number.
Trajectory read_pose_file(const std::filesystem::path& path, double dt = 1.0);

// IMU CSV, header "t,ax,ay,az,wx,wy,wz".
void write_imu_csv(const std::vector<imu::ImuSample>& samples,
                   const std::filesystem::path& path);
std::vector<imu::ImuSample> read_imu_csv(const std::filesystem::path& path);

// GNSS CSV, header "t,x,y,z,sigma".
void write_gnss_csv(const std::vector<imu::GnssFix>& fixes,
                    const std::filesystem::path& path);
std::vector<imu::GnssFix> read_gnss_csv(const std::filesystem::path& path);

/// Aligned-trajectory CSV, header "t,x,y,z,qx,qy,qz,qw".
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

/// Binary PPM (P6), maxval 255; values clamped to [0, 1] then quantized.
void write_ppm(const vonet::Image& img, const std::filesystem::path& path);

/// Binary PGM (P5) or PPM (P6), maxval 255, mapped to [0, 1]; grayscale is
/// replicated across the three channels.
vonet::Image read_pnm(const std::filesystem::path& path);

}  // namespace lumio::io
