#pragma once

// Continuous-model data for one beam and the coefficient matrices of the
// intrinsic (velocity/internal-force) first-order formulation
//
//   dy/dt + A(x) dy/dx + Bbar(x) y = gbar(x, y),   y = (v, z) in R^12,
//
// where v stacks linear and angular velocities and z stacks internal forces
// and moments, all expressed in the cross-section-attached frame.

#include <utility>

#include "igeb/errors.hpp"
#include "igeb/linalg.hpp"

namespace igeb {

// Section constants of a prismatic isotropic beam: density rho, area a,
// Young/shear moduli E and G, area moments I2, I3, and the twist/shear
// correction factors k1, k2, k3.
struct IsotropicSection {
  double rho = 1.0;
  double a = 1.0;
  double E = 1.0;
  double G = 1.0;
  double I2 = 1.0;
  double I3 = 1.0;
  double k1 = 1.0;
  double k2 = 1.0;
  double k3 = 1.0;
};

// Mass and flexibility matrices of an isotropic section:
//   M = rho * diag(a I3x3, J),  C = diag(S1, S2)^{-1},
//   J = diag((I2+I3) k1, I2, I3),  S1 = a diag(E, k2 G, k3 G),
//   S2 = diag((I2+I3) k1 G, I2 E, I3 E).
inline std::pair<Mat6, Mat6> isotropic_mass_flex(const IsotropicSection& s) {
  const double fields[9] = {s.rho, s.a, s.E, s.G, s.I2, s.I3, s.k1, s.k2, s.k3};
  const char* names[9] = {"rho", "a", "E", "G", "I2", "I3", "k1", "k2", "k3"};
  for (int i = 0; i < 9; ++i)
    if (!(fields[i] > 0.0))
      throw ParameterError(std::string("isotropic section: field ") + names[i] +
                           " must be positive");
  const double j1 = (s.I2 + s.I3) * s.k1;
  Mat6 m = Mat6::Zero();
  m.diagonal() << s.rho * s.a, s.rho * s.a, s.rho * s.a, s.rho * j1,
      s.rho * s.I2, s.rho * s.I3;
  Mat6 c = Mat6::Zero();
  c.diagonal() << 1.0 / (s.a * s.E), 1.0 / (s.a * s.k2 * s.G),
      1.0 / (s.a * s.k3 * s.G), 1.0 / (j1 * s.G), 1.0 / (s.I2 * s.E),
      1.0 / (s.I3 * s.E);
  return {m, c};
}

// Physical identity of one beam. Mass, flexibility and precurvature are
// constant along the axis in this implementation, but all evaluation entry
// points take the axial coordinate so that variable coefficients can be
// added without touching call sites.
struct BeamParameters {
  double length = 1.0;
  Mat6 mass_matrix = Mat6::Identity();
  Mat6 flexibility_matrix = Mat6::Identity();
  Vec3 precurvature_vector = Vec3::Zero();

  Mat6 mass(double) const { return mass_matrix; }
  Mat6 flexibility(double) const { return flexibility_matrix; }
  Vec3 precurvature(double) const { return precurvature_vector; }

  // Block-diagonal energy matrix Q^P(x) = diag(M, C).
  Mat12 QP(double x) const {
    Mat12 q = Mat12::Zero();
    q.topLeftCorner<6, 6>() = mass(x);
    q.bottomRightCorner<6, 6>() = flexibility(x);
    return q;
  }

  void validate() const {
    if (!(length > 0.0)) throw ParameterError("beam length must be positive");
    require_spd(mass_matrix, "mass matrix");
    require_spd(flexibility_matrix, "flexibility matrix");
  }
};

// State of the beam at one point: velocities v and internal forces/moments z.
struct PointState {
  Vec6 v = Vec6::Zero();
  Vec6 z = Vec6::Zero();

  // Strains associated with the internal forces through the flexibility law.
  Vec6 strains(const Mat6& flexibility) const { return flexibility * z; }

  Vec12 stacked() const {
    Vec12 y;
    y << v, z;
    return y;
  }
};

// Curvature/twist coupling matrix E = [[hat(Uc), 0], [hat(e1), hat(Uc)]].
inline Mat6 build_E(const Vec3& precurvature) {
  const Mat3 uc = hat(precurvature);
  Mat6 e = Mat6::Zero();
  e.topLeftCorner<3, 3>() = uc;
  e.bottomRightCorner<3, 3>() = uc;
  e.bottomLeftCorner<3, 3>() = hat(Vec3::UnitX());
  return e;
}

// First-order coefficients at a point:
//   A = -(Q^P)^{-1} [[0, I], [I, 0]],  Bbar = (Q^P)^{-1} [[0, -E], [E^T, 0]].
inline std::pair<Mat12, Mat12> build_A_Bbar(const BeamParameters& params,
                                            double x = 0.0) {
  params.validate();
  const Mat6 m = params.mass(x);
  const Mat6 c = params.flexibility(x);
  const Mat6 e = build_E(params.precurvature(x));
  const Mat6 m_inv = m.ldlt().solve(Mat6::Identity());
  const Mat6 c_inv = c.ldlt().solve(Mat6::Identity());
  Mat12 a = Mat12::Zero();
  a.topRightCorner<6, 6>() = -m_inv;
  a.bottomLeftCorner<6, 6>() = -c_inv;
  Mat12 bbar = Mat12::Zero();
  bbar.topRightCorner<6, 6>() = -m_inv * e;
  bbar.bottomLeftCorner<6, 6>() = c_inv * e.transpose();
  return {a, bbar};
}

// Quadratic-coupling matrix: with u = (u1, u2, u3, u4) in 3-vector blocks,
//
//   G(u) = -[[hat(u2), 0,       0,       hat(u3)],
//            [hat(u1), hat(u2), hat(u3), hat(u4)],
//            [0,       0,       hat(u2), hat(u1)],
//            [0,       0,       0,       hat(u2)]].
inline Mat12 G_of(const Vec12& u) {
  const Mat3 h1 = hat(u.segment<3>(0));
  const Mat3 h2 = hat(u.segment<3>(3));
  const Mat3 h3 = hat(u.segment<3>(6));
  const Mat3 h4 = hat(u.segment<3>(9));
  Mat12 g = Mat12::Zero();
  g.block<3, 3>(0, 0) = h2;
  g.block<3, 3>(0, 9) = h3;
  g.block<3, 3>(3, 0) = h1;
  g.block<3, 3>(3, 3) = h2;
  g.block<3, 3>(3, 6) = h3;
  g.block<3, 3>(3, 9) = h4;
  g.block<3, 3>(6, 6) = h2;
  g.block<3, 3>(6, 9) = h1;
  g.block<3, 3>(9, 9) = h2;
  return -g;
}

// Quadratic source gbar(x, u) = Q^P(x)^{-1} G(u) Q^P(x) u.
inline Vec12 gbar(const BeamParameters& params, double x, const Vec12& u) {
  const Mat12 qp = params.QP(x);
  const Vec12 w = G_of(u) * (qp * u);
  Vec12 r;
  r.head<6>() = params.mass(x).ldlt().solve(w.head<6>());
  r.tail<6>() = params.flexibility(x).ldlt().solve(w.tail<6>());
  return r;
}

}  // namespace igeb
