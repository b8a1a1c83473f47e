#pragma once

// Reference beams and initial data used by the command-line tool, the demos
// and the test suite.

#include <cmath>

#include "igeb/beam.hpp"
#include "igeb/linalg.hpp"

namespace igeb {

// Stiff reference beam: diagonal mass diag(1,1,1,20,10,10) and flexibility
// diag(1e4,1e4,1e4,500,500,500)^{-1} on a unit interval, no precurvature.
inline BeamParameters hesse2012() {
  BeamParameters p;
  p.length = 1.0;
  p.mass_matrix = Mat6::Zero();
  p.mass_matrix.diagonal() << 1, 1, 1, 20, 10, 10;
  p.flexibility_matrix = Mat6::Zero();
  p.flexibility_matrix.diagonal() << 1e-4, 1e-4, 1e-4, 1.0 / 500, 1.0 / 500,
      1.0 / 500;
  p.precurvature_vector = Vec3::Zero();
  return p;
}

// Unit-coefficient beam (M = C = I), handy for tests where the internal
// forces coincide with the strains.
inline BeamParameters unit_beam(double length = 1.0) {
  BeamParameters p;
  p.length = length;
  return p;
}

// Helical initial centerline p0(x) = (x, 1 - cos x, sin x) / sqrt(2) with the
// frame whose first column is the unit tangent.
inline Vec3 helix_position(double x) {
  return Vec3(x, 1.0 - std::cos(x), std::sin(x)) / std::sqrt(2.0);
}

inline Mat3 helix_rotation(double x) {
  const double s = std::sin(x);
  const double c = std::cos(x);
  const double r2 = std::sqrt(2.0);
  Mat3 r;
  r << 1.0, 0.0, -1.0,
       s, r2 * c, s,
       c, -r2 * s, c;
  return r / r2;
}

// Strains of the helical shape: no shear/extension, constant curvature
// twist vector (-1, 0, 1)/sqrt(2) minus the beam's own precurvature.
inline Vec6 helix_strains(const BeamParameters& params, double x) {
  Vec6 s = Vec6::Zero();
  s.tail<3>() = Vec3(-1.0, 0.0, 1.0) / std::sqrt(2.0) - params.precurvature(x);
  return s;
}

// Internal forces producing the helical strains: z0 = C^{-1} s0.
inline Vec6 helix_internal_forces(const BeamParameters& params, double x) {
  return params.flexibility(x).ldlt().solve(helix_strains(params, x));
}

}  // namespace igeb
