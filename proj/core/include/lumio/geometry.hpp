// Exact SO(3)/SE(3) arithmetic used throughout lumio.
//
// Conventions:
//  - Rotations are 3x3 orthonormal matrices with det = +1.
//  - A Pose is (rotation R, translation t); acting on a point: x' = R x + t.
//  - Twist6 stores axis-angle rotation in its first three components and a
//    plain translation in the last three. The translation is NOT coupled
//    through an SE(3) exponential: pose_from_twist copies it verbatim.

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace lumio {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Skew-symmetric matrix such that skew(v) * u = v x u.
Mat3 skew(const Vec3& v);

/// 3x3 orthonormal matrix with det = +1.
///
/// Construction re-projects inputs within `tol` of orthonormal onto SO(3)
/// via polar decomposition and rejects anything worse.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}
  explicit Rotation(const Mat3& m, double tol = 1e-6);

  static Rotation identity() { return Rotation(); }

  /// Wraps a matrix already known to be orthonormal (no validation).
  static Rotation from_matrix_unchecked(const Mat3& m);

  const Mat3& matrix() const { return m_; }
  Rotation inverse() const { return from_matrix_unchecked(m_.transpose()); }

  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  Rotation operator*(const Rotation& other) const {
    return from_matrix_unchecked(m_ * other.m_);
  }

  /// Max-norm deviation of R^T R from identity.
  double orthonormality_error() const;

 private:
  Mat3 m_;
};

/// Rigid-body transform in SE(3).
struct Pose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  Pose() = default;
  Pose(const Rotation& r, const Vec3& t) : rotation(r), translation(t) {}

  static Pose identity() { return Pose(); }

  Eigen::Matrix4d matrix() const;
};

/// 6-DoF local coordinates: axis-angle rotation (rad) + translation (m).
struct Twist6 {
  Vec3 rotation = Vec3::Zero();
  Vec3 translation = Vec3::Zero();

  Twist6() = default;
  Twist6(const Vec3& w, const Vec3& t) : rotation(w), translation(t) {}
  explicit Twist6(const Vec6& v) : rotation(v.head<3>()), translation(v.tail<3>()) {}

  Vec6 vector() const {
    Vec6 v;
    v << rotation, translation;
    return v;
  }

  /// Wraps the axis-angle part into [0, pi]; at exactly pi the representative
  /// with positive first nonzero component is chosen.
  Twist6 canonicalized() const;
};

/// Rodrigues exponential map. Throws std::invalid_argument on non-finite input.
Rotation so3_exp(const Vec3& w);

/// Logarithm map; magnitude in [0, pi]. At the pi boundary the representative
/// whose first nonzero component is positive is returned.
Vec3 so3_log(const Rotation& r);

/// Inverse of the right Jacobian of SO(3): d/d(dw) log(exp(w) exp(dw)) at 0.
Mat3 so3_right_jacobian_inverse(const Vec3& w);

Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);

/// inverse(a) composed with b: the motion taking frame a to frame b.
Pose relative_pose(const Pose& a, const Pose& b);

Pose pose_from_twist(const Twist6& v);
Twist6 twist_from_pose(const Pose& p);

inline Pose operator*(const Pose& a, const Pose& b) { return compose(a, b); }

}  // namespace lumio
