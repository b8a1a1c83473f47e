#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>
#include <unsupported/Eigen/KroneckerProduct>

#include "igeb/fem.hpp"
#include "igeb/presets.hpp"
#include "oracles.hpp"

using namespace igeb;

namespace {

VecX random_state(std::mt19937& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  VecX y(n);
  for (int i = 0; i < n; ++i) y(i) = g(rng);
  return y;
}

// Reduce a full (12 Nx) x (12 Nx) matrix by dropping the first six rows/cols.
Eigen::MatrixXd drop_clamped(const Eigen::MatrixXd& full) {
  const long n = full.rows() - 6;
  return full.block(6, 6, n, n);
}

}  // namespace

TEST_CASE("element matrices equal the exact rational integrals", "[fem]") {
  const ElementMatrices& em = element_matrices();
  const Mat3* P[3] = {&em.P1, &em.P2, &em.P3};
  for (int k = 0; k < 3; ++k)
    for (int p = 0; p < 3; ++p) {
      REQUIRE(em.Me(k, p) == oracle::mass_entry(k, p).to_double());
      REQUIRE(em.Ke(k, p) == oracle::stiff_entry(k, p).to_double());
      for (int n = 0; n < 3; ++n)
        REQUIRE((*P[n])(k, p) == oracle::triple_entry(n, k, p).to_double());
    }

  // The triple integral is fully symmetric in its three indices, and the
  // three slices sum to the mass matrix (partition of unity).
  for (int n = 0; n < 3; ++n)
    for (int k = 0; k < 3; ++k)
      for (int p = 0; p < 3; ++p) {
        REQUIRE(oracle::triple_entry(n, k, p) == oracle::triple_entry(k, n, p));
        REQUIRE(oracle::triple_entry(n, k, p) == oracle::triple_entry(p, k, n));
      }
  REQUIRE((em.P1 + em.P2 + em.P3 - em.Me).cwiseAbs().maxCoeff() < 1e-15);

  // Integration by parts: Ke + Ke^T = [N_k N_p] at the interval ends.
  Mat3 boundary = Mat3::Zero();
  boundary(0, 0) = -1.0;
  boundary(2, 2) = 1.0;
  REQUIRE((em.Ke + em.Ke.transpose() - boundary).cwiseAbs().maxCoeff() <
          1e-15);
}

TEST_CASE("reference shape functions interpolate and partition unity",
          "[fem]") {
  const double nodes[3] = {0.0, 0.5, 1.0};
  for (int k = 0; k < 3; ++k)
    for (int p = 0; p < 3; ++p) {
      const auto [n, d] = reference_shape(nodes[p]);
      (void)d;
      REQUIRE(n(k) == Catch::Approx(k == p ? 1.0 : 0.0).margin(1e-15));
    }
  for (double xi : {0.0, 0.2, 0.77, 1.0}) {
    const auto [n, d] = reference_shape(xi);
    REQUIRE(n.sum() == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(d.sum() == Catch::Approx(0.0).margin(1e-14));
  }
  REQUIRE_THROWS_AS(reference_shape(-0.01), ParameterError);
  REQUIRE_THROWS_AS(reference_shape(1.01), ParameterError);
}

TEST_CASE("energy-form coefficients match their defining products", "[fem]") {
  std::mt19937 rng(71);
  BeamParameters p;
  p.mass_matrix = oracle::random_spd(rng, 6, 0.5, 3.0);
  p.flexibility_matrix = oracle::random_spd(rng, 6, 0.3, 2.0);
  p.precurvature_vector = Vec3(0.2, -0.1, 0.4);

  const auto [a, bbar] = build_A_Bbar(p);
  const Mat12 qp = p.QP(0.0);
  REQUIRE((qp * a - bold_A()).cwiseAbs().maxCoeff() < 1e-12);
  const Mat12 bb = bold_B(build_E(p.precurvature_vector));
  REQUIRE((qp * bbar - bb).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE((bb + bb.transpose()).cwiseAbs().maxCoeff() == 0.0);

  // bG(x, u) = -G(u) Q^P and the transposed pairing identity.
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vec12 u, y, ybar;
    for (int i = 0; i < 12; ++i) {
      u(i) = g(rng);
      y(i) = g(rng);
      ybar(i) = g(rng);
    }
    const Mat6 m = p.mass_matrix, c = p.flexibility_matrix;
    REQUIRE((bold_G(m, c, u) + G_of(u) * qp).cwiseAbs().maxCoeff() <
            1e-12 * (1.0 + u.norm()) * qp.cwiseAbs().maxCoeff());
    const Vec12 lhs = bold_G(m, c, y) * ybar;
    const Vec12 rhs = bold_G_dagger(m, c, ybar) * y;
    REQUIRE((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()));
    // Skew pairing in the energy inner product.
    REQUIRE(std::abs(y.dot(bold_G(m, c, y) * y)) <
            1e-11 * (1.0 + std::pow(y.norm(), 3)) *
                qp.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("assembled mass equals the scalar P2 mass times Q^P", "[fem]") {
  const BeamParameters p = hesse2012();
  const Mesh mesh{p.length, 3};
  const AssembledSystem sys = assemble(p, mesh, Mat6::Zero());
  REQUIRE(sys.dof_count == 12 * mesh.node_count() - 6);

  const Eigen::MatrixXd scalar = oracle::scalar_p2_mass(mesh.elements,
                                                        p.length);
  const Eigen::MatrixXd full =
      Eigen::kroneckerProduct(scalar, Eigen::MatrixXd(p.QP(0.0)));
  const Eigen::MatrixXd expect = drop_clamped(full);
  REQUIRE((Eigen::MatrixXd(sys.M) - expect).cwiseAbs().maxCoeff() <
          1e-13 * expect.cwiseAbs().maxCoeff());

  // SPD on the reduced space.
  REQUIRE(min_eig_sym(Eigen::MatrixXd(sys.M)) > 0.0);
  REQUIRE(max_asymmetry(Eigen::MatrixXd(sys.M)) < 1e-14);
}

TEST_CASE("weighted mass assembly reproduces the plain mass", "[fem]") {
  const BeamParameters p = hesse2012();
  const Mesh mesh{p.length, 4};
  const AssembledSystem sys = assemble(p, mesh, Mat6::Zero());
  const SpMat again =
      assemble_weighted_mass(mesh, [&](double x) { return p.QP(x); });
  REQUIRE((Eigen::MatrixXd(sys.M) - Eigen::MatrixXd(again))
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("transport and feedback blocks concentrate energy on the boundary",
          "[fem]") {
  std::mt19937 rng(81);
  BeamParameters p = hesse2012();
  p.precurvature_vector = Vec3(0.3, 0.1, -0.2);  // exercise K2 as well
  const Mesh mesh{p.length, 3};
  Mat6 kfb = Mat6::Zero();
  kfb.diagonal() << 3, 3, 3, 7, 7, 7;
  const AssembledSystem sys = assemble(p, mesh, kfb);

  // K2 is skew (precurvature coupling does no work).
  const Eigen::MatrixXd k2 = Eigen::MatrixXd(sys.K2);
  REQUIRE((k2 + k2.transpose()).cwiseAbs().maxCoeff() < 1e-14);

  // K1 + K1^T telescopes to the free-end block [[0, I], [I, 0]].
  const Eigen::MatrixXd k1 = Eigen::MatrixXd(sys.K1);
  Eigen::MatrixXd boundary =
      Eigen::MatrixXd::Zero(sys.dof_count, sys.dof_count);
  const int last0 = sys.dof_count - 12;
  boundary.block(last0, last0 + 6, 6, 6) = Mat6::Identity();
  boundary.block(last0 + 6, last0, 6, 6) = Mat6::Identity();
  REQUIRE((k1 + k1.transpose() - boundary).cwiseAbs().maxCoeff() < 1e-14);

  // Hence y^T K y = v(ell)^T K_fb v(ell) for every reduced state.
  for (int trial = 0; trial < 20; ++trial) {
    const VecX y = random_state(rng, sys.dof_count);
    const Vec6 v_end = y.segment<6>(sys.dof_count - 12);
    const double quad = y.dot(Eigen::MatrixXd(sys.K) * y);
    const double expect = v_end.dot(kfb * v_end);
    REQUIRE(std::abs(quad - expect) < 1e-10 * (1.0 + std::abs(expect)));
  }

  Mat6 lopsided = Mat6::Zero();
  lopsided(0, 1) = 1.0;
  REQUIRE_THROWS_AS(assemble(p, mesh, lopsided), ParameterError);
}

TEST_CASE("quadratic term: skew energy, transposed pairing, bilinearity",
          "[fem]") {
  std::mt19937 rng(91);
  const BeamParameters p = hesse2012();
  const Mesh mesh{p.length, 3};
  const AssembledSystem sys = assemble(p, mesh, Mat6::Zero());

  for (int trial = 0; trial < 10; ++trial) {
    const VecX y = random_state(rng, sys.dof_count);
    const VecX ybar = random_state(rng, sys.dof_count);

    const SpMat qy = eval_Q(sys, y);
    const double scale =
        std::max(1.0, Eigen::MatrixXd(qy).cwiseAbs().maxCoeff() * y.norm());
    // Exact skewness in the energy pairing (full index symmetry of the
    // triple integrals).
    REQUIRE(std::abs(y.dot(qy * y)) < 1e-12 * scale * y.norm());

    // Q(y) ybar = Qdagger(ybar) y.
    const VecX lhs = qy * ybar;
    const VecX rhs = eval_Qdagger(sys, ybar) * y;
    REQUIRE((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()));

    // Matrix-free product agrees with assembly.
    REQUIRE((apply_Q(sys, y, ybar) - lhs).norm() < 1e-12 * (1.0 + lhs.norm()));

    // Bilinearity in the frozen state.
    const VecX y2 = random_state(rng, sys.dof_count);
    const Eigen::MatrixXd sum =
        Eigen::MatrixXd(eval_Q(sys, y)) + Eigen::MatrixXd(eval_Q(sys, y2));
    REQUIRE((Eigen::MatrixXd(eval_Q(sys, VecX(y + y2))) - sum)
                .cwiseAbs()
                .maxCoeff() < 1e-12 * (1.0 + sum.cwiseAbs().maxCoeff()));
  }

  REQUIRE_THROWS_AS(eval_Q(sys, VecX::Zero(3)), ShapeError);
  REQUIRE_THROWS_AS(apply_Q(sys, VecX::Zero(3), VecX::Zero(3)), ShapeError);
}

TEST_CASE("linearized mode drops the quadratic term", "[fem]") {
  std::mt19937 rng(101);
  const BeamParameters p = hesse2012();
  const Mesh mesh{p.length, 2};
  AssembledSystem sys = assemble(p, mesh, Mat6::Zero());
  sys.nonlinear = false;
  const VecX y = random_state(rng, sys.dof_count);
  REQUIRE(Eigen::MatrixXd(eval_Q(sys, y)).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(apply_Q(sys, y, y).norm() == 0.0);
}

TEST_CASE("node state extraction pads the clamped end with zeros", "[fem]") {
  const BeamParameters p = unit_beam();
  const Mesh mesh{p.length, 2};
  const AssembledSystem sys = assemble(p, mesh, Mat6::Zero());
  VecX y = VecX::Zero(sys.dof_count);
  for (int i = 0; i < sys.dof_count; ++i) y(i) = i + 1;

  const Vec12 u0 = sys.node_state(y, 0);
  REQUIRE(u0.head<6>().norm() == 0.0);
  for (int i = 0; i < 6; ++i) REQUIRE(u0(6 + i) == i + 1);
  const Vec12 u1 = sys.node_state(y, 1);
  for (int i = 0; i < 12; ++i) REQUIRE(u1(i) == 7 + i);
}

TEST_CASE("mesh bookkeeping: nodes, spacing, classical index maps", "[fem]") {
  const Mesh mesh{2.0, 5};
  REQUIRE(mesh.node_count() == 11);
  REQUIRE(mesh.he() == Catch::Approx(0.4));
  REQUIRE(mesh.node_x(0) == 0.0);
  REQUIRE(mesh.node_x(10) == Catch::Approx(2.0));
  REQUIRE(mesh.element_midpoint(2) == Catch::Approx(1.0));
  REQUIRE(mesh.full_dof_count() == 132);
  REQUIRE(mesh.reduced_dof_count() == 126);
  REQUIRE(eta(1, 1) == 1);
  REQUIRE(eta(12, 3) == 36);
  REQUIRE(eta_bar(7, 1) == 1);
  REQUIRE(element_dof(1, 2) == 25);
  Mesh bad{1.0, 0};
  REQUIRE_THROWS_AS(bad.validate(), ParameterError);
}
