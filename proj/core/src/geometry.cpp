#include "lumio/geometry.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace lumio {

namespace {

bool all_finite(const Vec3& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

// Nearest rotation in Frobenius norm (polar factor of m).
Mat3 project_to_so3(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

// Flips w so its first nonzero component is positive. Used to pick a
// deterministic representative at the pi boundary where exp(w) == exp(-w).
Vec3 canonical_sign(const Vec3& w) {
  constexpr double kTiny = 1e-12;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(w[i]) > kTiny) {
      return w[i] > 0.0 ? w : Vec3(-w);
    }
  }
  return w;
}

}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 s;
  // clang-format off
  s <<     0.0, -v.z(),  v.y(),
         v.z(),    0.0, -v.x(),
        -v.y(),  v.x(),    0.0;
  // clang-format on
  return s;
}

Rotation::Rotation(const Mat3& m, double tol) {
  if (!m.allFinite()) {
    throw std::invalid_argument("Rotation: matrix has non-finite entries");
  }
  const Mat3 gram_err = m.transpose() * m - Mat3::Identity();
  const double err = gram_err.cwiseAbs().maxCoeff();
  if (m.determinant() <= 0.0 || err > tol) {
    throw std::invalid_argument("Rotation: matrix is not orthonormal within tolerance");
  }
  m_ = err > 1e-12 ? project_to_so3(m) : m;
}

Rotation Rotation::from_matrix_unchecked(const Mat3& m) {
  Rotation r;
  r.m_ = m;
  return r;
}

double Rotation::orthonormality_error() const {
  return (m_.transpose() * m_ - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation.matrix();
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Twist6 Twist6::canonicalized() const {
  const double theta = rotation.norm();
  if (theta <= M_PI) {
    Vec3 w = rotation;
    if (std::abs(theta - M_PI) < 1e-12) w = canonical_sign(w);
    return Twist6(w, translation);
  }
  // Reduce the angle modulo 2*pi into (-pi, pi], keeping the rotation equal.
  const Vec3 axis = rotation / theta;
  double angle = std::fmod(theta, 2.0 * M_PI);
  if (angle > M_PI) angle -= 2.0 * M_PI;
  Vec3 w = axis * angle;
  if (w.norm() > M_PI - 1e-12) w = canonical_sign(w);
  return Twist6(w, translation);
}

Rotation so3_exp(const Vec3& w) {
  if (!all_finite(w)) {
    throw std::invalid_argument("so3_exp: non-finite input");
  }
  const double theta2 = w.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Mat3 w_hat = skew(w);
  double a, b;  // R = I + a*w_hat + b*w_hat^2
  if (theta < 1e-5) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Rotation::from_matrix_unchecked(Mat3::Identity() + a * w_hat + b * w_hat * w_hat);
}

Vec3 so3_log(const Rotation& r) {
  // Quaternion-backed conversion stays accurate near both theta = 0 and pi.
  Eigen::AngleAxisd aa(r.matrix());
  Vec3 w = aa.angle() * aa.axis();
  if (aa.angle() > M_PI - 1e-9) w = canonical_sign(w);
  return w;
}

Mat3 so3_right_jacobian_inverse(const Vec3& w) {
  const double theta2 = w.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Mat3 w_hat = skew(w);
  double c;
  if (theta < 1e-5) {
    c = 1.0 / 12.0 + theta2 / 720.0;
  } else {
    c = 1.0 / theta2 - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  }
  return Mat3::Identity() + 0.5 * w_hat + c * w_hat * w_hat;
}

Pose compose(const Pose& a, const Pose& b) {
  return Pose(a.rotation * b.rotation, a.rotation * b.translation + a.translation);
}

Pose inverse(const Pose& p) {
  const Rotation rt = p.rotation.inverse();
  return Pose(rt, -(rt * p.translation));
}

Pose relative_pose(const Pose& a, const Pose& b) { return compose(inverse(a), b); }

Pose pose_from_twist(const Twist6& v) {
  if (!all_finite(v.rotation) || !all_finite(v.translation)) {
    throw std::invalid_argument("pose_from_twist: non-finite input");
  }
  return Pose(so3_exp(v.rotation), v.translation);
}

Twist6 twist_from_pose(const Pose& p) {
  return Twist6(so3_log(p.rotation), p.translation);
}

}  // namespace lumio
