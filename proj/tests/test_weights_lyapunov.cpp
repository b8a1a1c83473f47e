#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "igeb/diagonal.hpp"
#include "igeb/lyapunov.hpp"
#include "igeb/presets.hpp"
#include "oracles.hpp"

using namespace igeb;

namespace {

Mat6 near_transparent_K(const BeamParameters& p) {
  const auto [mu1, mu2] = near_transparent_mu(p);
  Mat6 k = Mat6::Zero();
  k.diagonal() << mu1, mu1, mu1, mu2, mu2, mu2;
  return k;
}

ShiftedWeight ramp_weight(double amplitude, double ell) {
  return shift_at_start(exp_weight(0.0, amplitude, 5.0, ell, +1));
}

VecX helix_force_state(const BeamParameters& p, const Mesh& mesh) {
  VecX y = VecX::Zero(mesh.reduced_dof_count());
  for (int a = 0; a < mesh.node_count(); ++a)
    y.segment<6>(a == 0 ? 0 : 12 * a) =
        helix_internal_forces(p, mesh.node_x(a));
  return y;
}

}  // namespace

TEST_CASE("weight families hit their documented endpoint values",
          "[lyapunov]") {
  const WeightFunction qp = exp_weight(0.2, 0.9, 3.0, 2.0, +1);
  REQUIRE(qp.value(0.0) == Catch::Approx(0.2).margin(1e-15));
  REQUIRE(qp.value(2.0) == Catch::Approx(0.9).margin(1e-15));

  const WeightFunction qn = exp_weight(-1.0, 0.0, 5.0, 1.0, -1);
  REQUIRE(qn.value(0.0) == Catch::Approx(-1.0).margin(1e-15));
  REQUIRE(qn.value(1.0) == Catch::Approx(0.0).margin(1e-15));

  const WeightFunction pm = poly_weight(4, 1.0, 1.0, -1);
  REQUIRE(pm.value(0.0) == Catch::Approx(-0.0625).margin(1e-15));
  // The sign change sits at x = n / (2 eta), outside the domain by design.
  REQUIRE(pm.value(2.0) == Catch::Approx(0.0).margin(1e-15));

  const WeightFunction pp = poly_weight(4, 1.0, 1.0, +1);
  REQUIRE(pp.value(1.0) == Catch::Approx(2.0 * std::pow(2.0, -4)).margin(1e-15));
  REQUIRE(pp.value(0.0) > 0.0);
}

TEST_CASE("weight derivatives match finite differences", "[lyapunov]") {
  const WeightFunction ws[] = {
      exp_weight(0.1, 1.3, 4.0, 1.5, +1), exp_weight(-2.0, -0.5, 2.0, 1.5, -1),
      poly_weight(5, 1.2, 1.5, -1), poly_weight(5, 1.2, 1.5, +1)};
  for (const WeightFunction& w : ws)
    for (double x : {0.1, 0.4, 0.75, 1.1, 1.45}) {
      const double d = 1e-6;
      const double fd = (w.value(x + d) - w.value(x - d)) / (2.0 * d);
      REQUIRE(w.deriv(x) == Catch::Approx(fd).epsilon(1e-7).margin(1e-9));
    }
}

TEST_CASE("both families obey their strict slope inequality", "[lyapunov]") {
  const double ell = 1.5, eta = 2.0;
  const WeightFunction pos[] = {exp_weight(0.1, 1.0, eta, ell, +1),
                                poly_weight(7, eta, ell, +1)};
  for (const WeightFunction& q : pos)
    for (int j = 0; j <= 60; ++j) {
      const double x = ell * j / 60.0;
      REQUIRE(q.deriv(x) > eta * (q.value(x) - q.value(0.0)));
    }
  const WeightFunction neg[] = {exp_weight(-1.0, -0.05, eta, ell, -1),
                                poly_weight(7, eta, ell, -1)};
  for (const WeightFunction& q : neg)
    for (int j = 0; j <= 60; ++j) {
      const double x = ell * j / 60.0;
      REQUIRE(q.deriv(x) > eta * (q.value(ell) - q.value(x)));
    }
}

TEST_CASE("weight constructors reject inadmissible parameters", "[lyapunov]") {
  REQUIRE_THROWS_AS(exp_weight(0.5, 0.3, 1.0, 1.0, +1), ParameterError);
  REQUIRE_THROWS_AS(exp_weight(-0.5, -0.6, 1.0, 1.0, +1), ParameterError);
  REQUIRE_THROWS_AS(exp_weight(-1.0, 0.5, 1.0, 1.0, -1), ParameterError);
  REQUIRE_THROWS_AS(exp_weight(0.0, 1.0, 0.0, 1.0, +1), ParameterError);
  REQUIRE_THROWS_AS(exp_weight(0.0, 1.0, 1.0, 0.0, +1), ParameterError);
  REQUIRE_THROWS_AS(poly_weight(4, 2.0, 1.0, +1), ParameterError);  // 2 eta l = n
  REQUIRE_THROWS_AS(poly_weight(1, 0.1, 1.0, -1), ParameterError);
}

TEST_CASE("shift helpers anchor the weight zero where requested",
          "[lyapunov]") {
  const WeightFunction q = exp_weight(0.2, 0.9, 3.0, 2.0, +1);
  const ShiftedWeight s0 = shift_at_start(q);
  REQUIRE(s0.w(0.0) == 0.0);
  REQUIRE(s0.w(2.0) == Catch::Approx(0.7));
  const ShiftedWeight s1 = shift_at_end(q);
  REQUIRE(s1.w(2.0) == 0.0);
  REQUIRE(s1.w(0.0) == Catch::Approx(-0.7));
  const ShiftedWeight s2 = shift_by(q, 0.25);
  REQUIRE(s2.w(1.0) == Catch::Approx(q.value(1.0) - 0.25));
  REQUIRE(s2.wprime(1.0) == q.deriv(1.0));
  REQUIRE(s2.ell() == 2.0);
}

TEST_CASE("coupling block variants: identity, product, commuting square root",
          "[lyapunov]") {
  const BeamParameters p = hesse2012();
  REQUIRE((build_W(p, WVariant::identity) - Mat6::Identity()).norm() == 0.0);

  Vec6 mc_diag;
  mc_diag << 1e-4, 1e-4, 1e-4, 0.04, 0.02, 0.02;
  REQUIRE((build_W(p, WVariant::mass_flex).diagonal() - mc_diag).norm() <
          1e-15);

  const Mat6 w = build_W(p, WVariant::sqrt_pair);
  REQUIRE((w * w - p.mass_matrix * p.flexibility_matrix).cwiseAbs().maxCoeff() <
          1e-14);

  // Commuting dense pair: same eigenbasis, different spectra.
  std::mt19937 rng(151);
  const Eigen::MatrixXd q6 = oracle::random_orthogonal(rng, 6);
  Vec6 d1, d2;
  d1 << 1, 2, 3, 4, 5, 6;
  d2 << 0.3, 0.4, 0.5, 0.6, 0.7, 0.8;
  const Mat6 m = q6 * d1.asDiagonal() * q6.transpose();
  const Mat6 c = q6 * d2.asDiagonal() * q6.transpose();
  const Mat6 wc = build_W(WVariant::sqrt_pair, m, c);
  REQUIRE((wc * wc - m * c).cwiseAbs().maxCoeff() <
          1e-10 * (m * c).cwiseAbs().maxCoeff());

  // Generic SPD pairs do not commute.
  const Mat6 m2 = oracle::random_spd(rng, 6, 0.5, 2.0);
  const Mat6 c2 = oracle::random_spd(rng, 6, 0.5, 2.0);
  REQUIRE_THROWS_AS(build_W(WVariant::sqrt_pair, m2, c2), UnsupportedError);
}

TEST_CASE("interior scan equals the slope/precurvature decomposition",
          "[lyapunov]") {
  BeamParameters p = hesse2012();
  p.precurvature_vector = Vec3(0.4, -0.3, 0.2);
  const WVariant variants[] = {WVariant::identity, WVariant::mass_flex};
  const double rho = 2.0;
  const WeightFunction q = exp_weight(0.1, 0.8, 3.0, 1.0, +1);
  const ShiftedWeight weights[] = {shift_by(q, 0.0), shift_by(q, 1.0)};

  for (WVariant variant : variants)
    for (const ShiftedWeight& weight : weights)
      for (double x : {0.0, 0.3, 0.8, 1.0}) {
        const Mat6 m = p.mass(x);
        const Mat6 c = p.flexibility(x);
        const Mat6 w_mat = build_W(variant, m, c);
        const double w = weight.w(x);
        const double wp = weight.wprime(x);

        Mat12 omega = Mat12::Zero();
        omega.topRightCorner<6, 6>() = w_mat;
        omega.bottomLeftCorner<6, 6>() = w_mat.transpose();
        const Mat12 qbar = rho * p.QP(x) + w * omega;
        const auto [A, Bbar] = build_A_Bbar(p, x);
        const Mat12 direct =
            -wp * lambda_xi(w_mat, p, 1, x).lambda -
            (Mat12(qbar * Bbar) + Mat12(qbar * Bbar).transpose());

        const LambdaXi lx = lambda_xi(w_mat, p, w < 0.0 ? -1 : 1, x);
        const Mat12 split = -wp * lx.lambda + std::abs(w) * lx.xi;
        const double scale = std::max(1.0, direct.cwiseAbs().maxCoeff());
        REQUIRE((direct - split).cwiseAbs().maxCoeff() < 1e-10 * scale);
        (void)A;
      }
}

TEST_CASE("certificate passes below the boundary threshold and reports "
          "margins",
          "[lyapunov]") {
  const BeamParameters p = hesse2012();
  const Mat6 K = near_transparent_K(p);
  const LyapunovCertificate cert = certificate(
      p, K, 1.5, ramp_weight(0.7, p.length), WVariant::sqrt_pair, 400);

  REQUIRE(cert.verdict);
  REQUIRE(cert.failed.empty());
  REQUIRE(cert.interior.positivity_ok);
  REQUIRE(cert.interior.symmetry_ok);
  REQUIRE(cert.interior.dissipation_ok);
  REQUIRE(cert.boundary_ok);
  REQUIRE(cert.w_at_start == 0.0);
  REQUIRE(cert.interior.min_eig_Qbar > 0.0);
  REQUIRE(cert.interior.max_eig_Sbar < 0.0);
  // Worst boundary channel: -2 rho mu2 + 0.7 (100 + mu2^2 / 100).
  REQUIRE(cert.max_eig_mu == Catch::Approx(-132.7714).margin(0.01));
}

TEST_CASE("amplitudes beyond the threshold fail with the boundary condition",
          "[lyapunov]") {
  const BeamParameters p = hesse2012();
  const Mat6 K = near_transparent_K(p);

  // Exact per-channel threshold: 2 rho kappa / (1 + kappa^2) with
  // kappa = K_j / b_j; here min_j gives |w(ell)| <= 1.47776 at rho = 1.5.
  const LyapunovCertificate pass = certificate(
      p, K, 1.5, ramp_weight(1.45, p.length), WVariant::sqrt_pair, 400);
  REQUIRE(pass.verdict);

  const LyapunovCertificate fail = certificate(
      p, K, 1.5, ramp_weight(1.49, p.length), WVariant::sqrt_pair, 400);
  REQUIRE_FALSE(fail.verdict);
  REQUIRE(fail.failed == "mu");
  REQUIRE(fail.max_eig_mu > 0.0);
  REQUIRE(fail.interior.positivity_ok);  // 1.49 < rho still

  // Without feedback nothing absorbs the boundary flux.
  const LyapunovCertificate free_end = certificate(
      p, Mat6::Zero(), 1.5, ramp_weight(0.7, p.length), WVariant::sqrt_pair,
      400);
  REQUIRE_FALSE(free_end.verdict);
  REQUIRE(free_end.failed == "mu");
  REQUIRE(free_end.max_eig_mu == Catch::Approx(70.0).margin(1e-6));
}

TEST_CASE("a constant weight yields no interior dissipation", "[lyapunov]") {
  const BeamParameters p = hesse2012();
  const LyapunovCertificate cert =
      certificate(p, near_transparent_K(p), 1.5,
                  shift_by(constant_weight(0.0, p.length), 0.0),
                  WVariant::sqrt_pair, 50);
  REQUIRE_FALSE(cert.verdict);
  REQUIRE(cert.failed == "interior");
  REQUIRE(std::abs(cert.interior.max_eig_Sbar) < 1e-10);

  // With w = 0 the functional collapses to rho times the energy.
  const Mesh mesh{p.length, 3};
  const TimeGrid grid{0.2, 21};
  const Trajectory traj =
      simulate(p, mesh, grid, Mat6::Zero(), helix_force_state(p, mesh));
  const std::vector<double> e = energy(traj);
  const std::vector<double> l0 = lyapunov_series(traj, cert, 0);
  REQUIRE(l0.size() == e.size());
  for (size_t k = 0; k < e.size(); ++k)
    REQUIRE(l0[k] == Catch::Approx(1.5 * e[k]).epsilon(1e-12));

  const std::vector<double> l1 = lyapunov_series(traj, cert, 1);
  REQUIRE(l1.size() == static_cast<size_t>(grid.steps));
  for (double v : l1) REQUIRE(v >= 0.0);
  REQUIRE_THROWS_AS(lyapunov_series(traj, cert, 2), ParameterError);
}

TEST_CASE("profile constants for the stiff reference beam", "[lyapunov]") {
  const BeamParameters p = hesse2012();
  const Mat6 K = near_transparent_K(p);
  const CertificateConstants cc =
      certificate_constants(p, K, WVariant::sqrt_pair, 200);

  REQUIRE(cc.C_lambda == Catch::Approx(0.01).margin(1e-12));
  REQUIRE(cc.C_xi == Catch::Approx(100.0).margin(1e-9));
  REQUIRE(cc.C_theta == Catch::Approx(1.0).margin(1e-12));
  const double kappa = std::pow(2.0, 0.25);
  REQUIRE(cc.C_mu == Catch::Approx(kappa + 1.0 / kappa).margin(1e-9));
  REQUIRE(cc.eta == Catch::Approx(1e4).epsilon(1e-9));
  REQUIRE(cc.chi == Catch::Approx(1.0 / (kappa + 1.0 / kappa)).margin(1e-9));

  // Singular feedback: no boundary constant, amplitude capped by C_theta.
  const CertificateConstants cc0 =
      certificate_constants(p, Mat6::Zero(), WVariant::sqrt_pair, 50);
  REQUIRE(cc0.C_mu == 0.0);
  REQUIRE(cc0.chi == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("margins improve monotonically in the functional weight rho",
          "[lyapunov]") {
  const BeamParameters p = hesse2012();
  const Mat6 K = near_transparent_K(p);
  double prev_qbar = -1.0, prev_mu = 1.0;
  bool first = true;
  for (double rho : {1.5, 2.0, 3.0}) {
    const LyapunovCertificate cert = certificate(
        p, K, rho, ramp_weight(0.7, p.length), WVariant::sqrt_pair, 100);
    REQUIRE(cert.verdict);
    if (!first) {
      REQUIRE(cert.interior.min_eig_Qbar > prev_qbar);
      REQUIRE(cert.max_eig_mu < prev_mu);
    }
    prev_qbar = cert.interior.min_eig_Qbar;
    prev_mu = cert.max_eig_mu;
    first = false;
  }
}

TEST_CASE("certificate rejects invalid inputs", "[lyapunov]") {
  const BeamParameters p = hesse2012();
  const ShiftedWeight w = ramp_weight(0.7, p.length);
  REQUIRE_THROWS_AS(
      certificate(p, Mat6::Zero(), 0.0, w, WVariant::sqrt_pair, 100),
      ParameterError);
  Mat6 lopsided = Mat6::Zero();
  lopsided(0, 1) = 1.0;
  REQUIRE_THROWS_AS(
      certificate(p, lopsided, 1.0, w, WVariant::sqrt_pair, 100),
      ParameterError);
  REQUIRE_THROWS_AS(certificate(p, Mat6(-Mat6::Identity()), 1.0, w,
                                WVariant::sqrt_pair, 100),
                    ParameterError);
  REQUIRE_THROWS_AS(
      certificate(p, Mat6::Zero(), 1.0, ramp_weight(0.7, 2.0),
                  WVariant::sqrt_pair, 100),
      ParameterError);
  REQUIRE_THROWS_AS(
      certificate(p, Mat6::Zero(), 1.0, w, WVariant::sqrt_pair, 1),
      ParameterError);
}

TEST_CASE("decay-rate fits: exact series, constants, noise robustness",
          "[lyapunov]") {
  std::mt19937 rng(161);
  const TimeGrid grid{2.0, 201};

  const std::vector<double> clean =
      oracle::exp_series(3.0, 4.0, grid.T, grid.steps, 0.0, rng);
  const FitResult fr = fit_decay(clean, grid, 0.2, 1.8);
  REQUIRE(fr.beta == Catch::Approx(2.0).epsilon(1e-12));
  REQUIRE(fr.r_squared >= 1.0 - 1e-12);

  const std::vector<double> flat(grid.steps, 5.0);
  const FitResult fc = fit_decay(flat, grid, 0.0, 2.0);
  REQUIRE(fc.beta == Catch::Approx(0.0).margin(1e-14));
  REQUIRE(fc.r_squared == 1.0);

  const std::vector<double> noisy =
      oracle::exp_series(3.0, 4.0, grid.T, grid.steps, 0.01, rng);
  const FitResult fn = fit_decay(noisy, grid, 0.2, 1.8);
  REQUIRE(std::abs(fn.beta - 2.0) < 0.1);
  REQUIRE(fn.r_squared > 0.999);
}

TEST_CASE("decay-rate fits reject broken input", "[lyapunov]") {
  const TimeGrid grid{1.0, 11};
  std::vector<double> s(grid.steps, 1.0);
  s[5] = 0.0;
  REQUIRE_THROWS_AS(fit_decay(s, grid, 0.0, 1.0), ParameterError);
  std::vector<double> ok(grid.steps, 1.0);
  REQUIRE_THROWS_AS(fit_decay(ok, grid, 0.42, 0.43), ParameterError);
  REQUIRE_THROWS_AS(fit_decay(std::vector<double>(5, 1.0), grid, 0.0, 1.0),
                    ShapeError);
}
