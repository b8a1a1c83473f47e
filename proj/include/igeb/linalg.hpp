#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "igeb/errors.hpp"

namespace igeb {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using MatX = Eigen::MatrixXd;

// Skew-symmetric matrix of a 3-vector: hat(u) * v == u x v.
inline Mat3 hat(const Vec3& u) {
  Mat3 s;
  s << 0.0, -u.z(), u.y(),
       u.z(), 0.0, -u.x(),
      -u.y(), u.x(), 0.0;
  return s;
}

// Inverse of hat on skew-symmetric matrices (reads the lower triangle).
inline Vec3 vec(const Mat3& s) { return Vec3(s(2, 1), s(0, 2), s(1, 0)); }

// Largest absolute deviation from symmetry.
inline double max_asymmetry(const MatX& a) {
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

inline void require_symmetric(const MatX& a, double tol, const std::string& name) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (max_asymmetry(a) > tol * scale)
    throw ParameterError(name + " must be symmetric (asymmetry " +
                         std::to_string(max_asymmetry(a)) + ")");
}

inline double min_eig_sym(const MatX& a) {
  Eigen::SelfAdjointEigenSolver<MatX> es(0.5 * (a + a.transpose()),
                                         Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double max_eig_sym(const MatX& a) {
  Eigen::SelfAdjointEigenSolver<MatX> es(0.5 * (a + a.transpose()),
                                         Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

inline void require_spd(const MatX& a, const std::string& name) {
  require_symmetric(a, 1e-12, name);
  const double lmin = min_eig_sym(a);
  if (!(lmin > 0.0))
    throw DefinitenessError(name + " must be positive definite (min eigenvalue " +
                            std::to_string(lmin) + ")");
}

// Symmetric square root of a symmetric positive definite matrix.
inline MatX spd_sqrt(const MatX& a, const std::string& name = "matrix") {
  Eigen::SelfAdjointEigenSolver<MatX> es(0.5 * (a + a.transpose()));
  const VecX d = es.eigenvalues();
  if (!(d.minCoeff() > 0.0))
    throw DefinitenessError("spd_sqrt: " + name + " is not positive definite");
  return es.eigenvectors() * d.cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

// Inverse symmetric square root of a symmetric positive definite matrix.
inline MatX spd_inv_sqrt(const MatX& a, const std::string& name = "matrix") {
  Eigen::SelfAdjointEigenSolver<MatX> es(0.5 * (a + a.transpose()));
  const VecX d = es.eigenvalues();
  if (!(d.minCoeff() > 0.0))
    throw DefinitenessError("spd_inv_sqrt: " + name +
                            " is not positive definite");
  return es.eigenvectors() * d.cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

inline bool is_diagonal(const MatX& a, double tol = 1e-14) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  MatX off = a;
  off.diagonal().setZero();
  return off.cwiseAbs().maxCoeff() <= tol * scale;
}

}  // namespace igeb
