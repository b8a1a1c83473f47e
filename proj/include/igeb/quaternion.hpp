#pragma once

// Unit quaternions as rotation charts, plus the right-invariant kinematic
// update used when recovering frames from angular velocities / strains:
//   dq/ds = U(w) q,   U(w) = 1/2 [[0, -w^T], [w, -hat(w)]],
// discretized with the Cayley transform (midpoint rule), which preserves the
// quaternion norm exactly.

#include <Eigen/Dense>
#include <cmath>

#include "igeb/errors.hpp"
#include "igeb/linalg.hpp"

namespace igeb {

struct Quaternion {
  double w = 1.0;  // scalar part
  Vec3 v = Vec3::Zero();

  Vec4 coeffs() const {
    Vec4 c;
    c << w, v;
    return c;
  }
  static Quaternion from_coeffs(const Vec4& c) {
    Quaternion q;
    q.w = c(0);
    q.v = c.tail<3>();
    return q;
  }
  double norm() const { return std::sqrt(w * w + v.squaredNorm()); }
  double dot(const Quaternion& o) const { return w * o.w + v.dot(o.v); }
  Quaternion negated() const {
    Quaternion q;
    q.w = -w;
    q.v = -v;
    return q;
  }
};

// Rotation matrix of a unit quaternion:
//   R(q) = (q0^2 - |qv|^2) I + 2 qv qv^T + 2 q0 hat(qv).
inline Mat3 quat_to_rot(const Quaternion& q) {
  const double n = q.norm();
  if (std::abs(n - 1.0) > 1e-9)
    throw ParameterError("quat_to_rot: quaternion is not unit length");
  return (q.w * q.w - q.v.squaredNorm()) * Mat3::Identity() +
         2.0 * (q.v * q.v.transpose()) + 2.0 * q.w * hat(q.v);
}

// Inverse chart with a fixed sign convention: the scalar part is >= 0, and
// when it vanishes the first nonzero vector component is positive. Uses the
// numerically stable four-branch extraction (largest diagonal pivot).
inline Quaternion rot_to_quat(const Mat3& r) {
  if ((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-8 ||
      r.determinant() < 0.0)
    throw ParameterError("rot_to_quat: matrix is not a rotation");

  const double tr = r.trace();
  Vec4 c;  // (q0, q1, q2, q3)
  if (tr >= r(0, 0) && tr >= r(1, 1) && tr >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    c << 0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s,
        (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
    c << (r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s,
        (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
    c << (r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s,
        (r(1, 2) + r(2, 1)) / s;
  } else {
    const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
    c << (r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s,
        (r(1, 2) + r(2, 1)) / s, 0.25 * s;
  }
  c.normalize();

  // Resolve the double cover: q and -q encode the same rotation.
  double lead = c(0);
  if (std::abs(lead) < 1e-12) {
    lead = 0.0;
    for (int i = 1; i < 4; ++i)
      if (std::abs(c(i)) > 1e-12) {
        lead = c(i);
        break;
      }
  }
  if (lead < 0.0) c = -c;
  return Quaternion::from_coeffs(c);
}

// Kinematic coefficient matrix: dq/ds = U(w) q.
inline Mat4 U_of(const Vec3& w) {
  Mat4 u = Mat4::Zero();
  u.block<1, 3>(0, 1) = -0.5 * w.transpose();
  u.block<3, 1>(1, 0) = 0.5 * w;
  u.block<3, 3>(1, 1) = -0.5 * hat(w);
  return u;
}

// One Cayley (midpoint) update over an interval of length h with endpoint
// angular rates w0, w1:
//   q_next = (I - h/2 U(wm))^{-1} (I + h/2 U(wm)) q,  wm = (w0 + w1)/2.
// U(w) is skew, so the update is orthogonal and |q_next| = |q| exactly.
inline Quaternion advance_quaternion(const Quaternion& q, const Vec3& w0,
                                     const Vec3& w1, double h) {
  const Mat4 u = U_of(0.5 * (w0 + w1));
  const Mat4 lhs = Mat4::Identity() - (0.5 * h) * u;
  const Vec4 rhs = (Mat4::Identity() + (0.5 * h) * u) * q.coeffs();
  return Quaternion::from_coeffs(Eigen::PartialPivLU<Mat4>(lhs).solve(rhs));
}

}  // namespace igeb
