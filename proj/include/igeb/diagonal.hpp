#pragma once

// Diagonalization of the principal part. With Theta = (C^{1/2} M C^{1/2})^{-1}
// decomposed as Theta = U^T D^2 U (U orthogonal, D positive diagonal),
//
//   L = [[U C^{-1/2},  D U C^{1/2}],        L^{-1} = 1/2 [[C^{1/2} U^T,      C^{1/2} U^T],
//        [U C^{-1/2}, -D U C^{1/2}]],                     [C^{-1/2} U^T D^{-1}, -C^{-1/2} U^T D^{-1}]]
//
// satisfies L A L^{-1} = diag(-D, D): the change of variable r = L y turns the
// system into transport at speeds -D (first six rows) and +D (last six).

#include <array>
#include <utility>

#include "igeb/beam.hpp"
#include "igeb/errors.hpp"
#include "igeb/linalg.hpp"

namespace igeb {

struct Diagonalization {
  Mat6 D = Mat6::Identity();      // positive diagonal wave-speed matrix
  Mat12 L = Mat12::Identity();
  Mat12 L_inv = Mat12::Identity();
  std::array<double, 12> eigenvalues{};  // -D_11..-D_66 then +D_11..+D_66

  // Factors kept for the network nodal matrices.
  Mat6 U = Mat6::Identity();
  Mat6 C_half = Mat6::Identity();
  Mat6 C_inv_half = Mat6::Identity();
};

inline Diagonalization diagonalize(const BeamParameters& params, double x = 0.0) {
  params.validate();
  const Mat6 m = params.mass(x);
  const Mat6 c = params.flexibility(x);

  Diagonalization out;
  if (is_diagonal(m) && is_diagonal(c)) {
    // Diagonal coefficients admit U = I with the natural component order.
    out.U = Mat6::Identity();
    out.C_half = c.diagonal().cwiseSqrt().asDiagonal();
    out.C_inv_half = c.diagonal().cwiseSqrt().cwiseInverse().asDiagonal();
    out.D = (m.diagonal().cwiseProduct(c.diagonal()))
                .cwiseSqrt()
                .cwiseInverse()
                .asDiagonal();
  } else {
    out.C_half = spd_sqrt(c);
    out.C_inv_half = spd_inv_sqrt(c);
    const Mat6 theta =
        (out.C_half * m * out.C_half).ldlt().solve(Mat6::Identity());
    Eigen::SelfAdjointEigenSolver<Mat6> es(0.5 * (theta + theta.transpose()));
    if (!(es.eigenvalues().minCoeff() > 0.0))
      throw DefinitenessError("diagonalize: mass/flexibility product not SPD");
    Mat6 v = es.eigenvectors();  // columns, eigenvalues ascending
    for (int j = 0; j < 6; ++j) {
      int imax = 0;
      v.col(j).cwiseAbs().maxCoeff(&imax);
      if (v(imax, j) < 0.0) v.col(j) *= -1.0;
    }
    out.U = v.transpose();
    out.D = es.eigenvalues().cwiseSqrt().asDiagonal();
  }

  const Mat6 ucm = out.U * out.C_inv_half;
  const Mat6 ducp = out.D * out.U * out.C_half;
  out.L.topLeftCorner<6, 6>() = ucm;
  out.L.topRightCorner<6, 6>() = ducp;
  out.L.bottomLeftCorner<6, 6>() = ucm;
  out.L.bottomRightCorner<6, 6>() = -ducp;

  const Mat6 cu = out.C_half * out.U.transpose();
  const Mat6 cud = out.C_inv_half * out.U.transpose() *
                   out.D.diagonal().cwiseInverse().asDiagonal();
  out.L_inv.topLeftCorner<6, 6>() = 0.5 * cu;
  out.L_inv.topRightCorner<6, 6>() = 0.5 * cu;
  out.L_inv.bottomLeftCorner<6, 6>() = 0.5 * cud;
  out.L_inv.bottomRightCorner<6, 6>() = -0.5 * cud;

  for (int i = 0; i < 6; ++i) {
    out.eigenvalues[i] = -out.D(i, i);
    out.eigenvalues[6 + i] = out.D(i, i);
  }
  return out;
}

inline Vec12 to_riemann(const Vec12& y, const Diagonalization& d) {
  return d.L * y;
}

inline Vec12 from_riemann(const Vec12& r, const Diagonalization& d) {
  return d.L_inv * r;
}

// Velocity feedback K making the boundary fully absorbing (no reflection of
// outgoing information): K = C^{-1/2} (C^{1/2} M C^{1/2})^{1/2} C^{-1/2}.
inline Mat6 transparent_K(const BeamParameters& params, double x = 0.0) {
  params.validate();
  const Mat6 c = params.flexibility(x);
  const Mat6 c_half = spd_sqrt(c);
  const Mat6 c_inv_half = spd_inv_sqrt(c);
  return c_inv_half * spd_sqrt(c_half * params.mass(x) * c_half) * c_inv_half;
}

// Scalars (mu1, mu2) for the two-parameter feedback diag(mu1 I3, mu2 I3)
// closest in spread to the transparent one: with b = diag(M^{1/2} C^{-1/2}),
// mu1 is the geometric mean of min/max of b over the first three components,
// mu2 the same over the last three. Requires diagonal mass and flexibility.
inline std::pair<double, double> near_transparent_mu(
    const BeamParameters& params, double x = 0.0) {
  params.validate();
  const Mat6 m = params.mass(x);
  const Mat6 c = params.flexibility(x);
  if (!is_diagonal(m) || !is_diagonal(c))
    throw UnsupportedError(
        "near_transparent_mu requires diagonal mass and flexibility matrices");
  const Vec6 b = (m.diagonal().cwiseQuotient(c.diagonal())).cwiseSqrt();
  const double mu1 =
      std::sqrt(b.head<3>().minCoeff() * b.head<3>().maxCoeff());
  const double mu2 =
      std::sqrt(b.tail<3>().minCoeff() * b.tail<3>().maxCoeff());
  return {mu1, mu2};
}

}  // namespace igeb
