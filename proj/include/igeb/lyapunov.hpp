#pragma once

// Quadratic Lyapunov candidates for a beam clamped at x = 0 with velocity
// feedback z(ell) = -K v(ell):
//
//   L(t) = int_0^ell y^T Qbar(x) y dx,   Qbar = rho Q^P + w(x) Omega,
//   Omega = [[0, W], [W^T, 0]].
//
// Along solutions, d/dt L = [ -y^T Qbar A y ]_0^ell + int y^T Sbar y dx with
//   Qbar A = -rho J - w Lambda,     Lambda = blockdiag(W C^{-1}, W^T M^{-1}),
//   Sbar  = -w' Lambda - (Qbar Bbar + Bbar^T Qbar),
// so the certificate checks: (i) Qbar positive definite, (ii) Qbar A
// symmetric, (iii) Sbar negative definite, (iv) dissipative boundary terms,
// which at the controlled end reduce to
//   mu = -2 rho K + |w(ell)| (Lambda_I + K Lambda_II K)  negative semidefinite
// and at the clamped end to w(0) >= 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "igeb/beam.hpp"
#include "igeb/fem.hpp"
#include "igeb/integrate.hpp"
#include "igeb/weights.hpp"

namespace igeb {

enum class WVariant { identity, mass_flex, sqrt_pair };

inline std::string to_string(WVariant v) {
  switch (v) {
    case WVariant::identity: return "identity";
    case WVariant::mass_flex: return "mc";
    case WVariant::sqrt_pair: return "sqrt";
  }
  return "?";
}

// Coupling block W of Omega. identity: W = I. mass_flex: W = M C, giving
// Lambda = blockdiag(M, C). sqrt_pair: W = M^{1/2} C^{1/2}, which makes the
// positivity threshold of Qbar exactly |w| < rho; it requires M and C to
// commute so that Lambda stays symmetric.
inline Mat6 build_W(WVariant variant, const Mat6& m, const Mat6& c) {
  switch (variant) {
    case WVariant::identity:
      return Mat6::Identity();
    case WVariant::mass_flex:
      return m * c;
    case WVariant::sqrt_pair: {
      const Mat6 comm = m * c - c * m;
      const double scale = std::max(1.0, (m * c).cwiseAbs().maxCoeff());
      if (comm.cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw UnsupportedError(
            "build_W: sqrt variant needs commuting mass and flexibility");
      return spd_sqrt(m, "mass matrix") * spd_sqrt(c, "flexibility matrix");
    }
  }
  throw ParameterError("build_W: unknown variant");
}

inline Mat6 build_W(const BeamParameters& params, WVariant variant,
                    double x = 0.0) {
  return build_W(variant, params.mass(x), params.flexibility(x));
}

struct LambdaXi {
  Mat6 lambda_I;   // W C^{-1}
  Mat6 lambda_II;  // W^T M^{-1}
  Mat12 lambda;    // blockdiag(lambda_I, lambda_II)
  Mat12 xi;        // sign_w * blockdiag(-E1, E2); see below
};

// Interior dissipation decomposition Sbar = -w' Lambda + |w| Xi, where with
// E1 = Lambda_I E^T + (Lambda_I E^T)^T and E2 = Lambda_II E + (Lambda_II E)^T
// the precurvature contribution is Xi = sign_w * blockdiag(-E1, E2).
inline LambdaXi lambda_xi(const Mat6& w_mat, const BeamParameters& params,
                          int sign_w, double x = 0.0) {
  const Mat6 m = params.mass(x);
  const Mat6 c = params.flexibility(x);
  const Mat6 e = build_E(params.precurvature(x));

  LambdaXi out;
  out.lambda_I = w_mat * c.ldlt().solve(Mat6::Identity());
  out.lambda_II = w_mat.transpose() * m.ldlt().solve(Mat6::Identity());
  out.lambda = Mat12::Zero();
  out.lambda.topLeftCorner<6, 6>() = out.lambda_I;
  out.lambda.bottomRightCorner<6, 6>() = out.lambda_II;

  const Mat6 e1 =
      out.lambda_I * e.transpose() + (out.lambda_I * e.transpose()).transpose();
  const Mat6 e2 = out.lambda_II * e + (out.lambda_II * e).transpose();
  out.xi = Mat12::Zero();
  out.xi.topLeftCorner<6, 6>() = -static_cast<double>(sign_w) * e1;
  out.xi.bottomRightCorner<6, 6>() = static_cast<double>(sign_w) * e2;
  return out;
}

struct InteriorConditions {
  double min_eig_Qbar = 0.0;   // smallest eigenvalue of Qbar over the grid
  double max_asym_QbarA = 0.0; // worst relative asymmetry of Qbar A
  double max_eig_Sbar = 0.0;   // largest eigenvalue of Sbar over the grid
  double Sbar_scale = 1.0;     // max(1, largest |Sbar| entry) over the grid
  bool positivity_ok = false;
  bool symmetry_ok = false;
  bool dissipation_ok = false;
};

// Scan conditions (i)-(iii) on a uniform grid over [0, ell] for a per-beam
// weight w; shared between the single-beam and the network certificates.
inline InteriorConditions scan_interior(const BeamParameters& params,
                                        double rho, const ShiftedWeight& weight,
                                        WVariant variant, int grid_pts) {
  if (grid_pts < 2)
    throw ParameterError("certificate: need at least 2 grid points");
  InteriorConditions ic;
  ic.min_eig_Qbar = std::numeric_limits<double>::infinity();
  ic.max_eig_Sbar = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid_pts; ++j) {
    const double x =
        params.length * static_cast<double>(j) / (grid_pts - 1);
    const Mat6 m = params.mass(x);
    const Mat6 c = params.flexibility(x);
    const Mat6 w_mat = build_W(variant, m, c);
    const double w = weight.w(x);
    const double wp = weight.wprime(x);

    Mat12 omega = Mat12::Zero();
    omega.topRightCorner<6, 6>() = w_mat;
    omega.bottomLeftCorner<6, 6>() = w_mat.transpose();

    const Mat12 qbar = rho * params.QP(x) + w * omega;
    ic.min_eig_Qbar = std::min(ic.min_eig_Qbar, min_eig_sym(qbar));

    const auto [A, Bbar] = build_A_Bbar(params, x);
    const Mat12 qa = qbar * A;
    ic.max_asym_QbarA = std::max(ic.max_asym_QbarA, max_asymmetry(qa));

    const LambdaXi lx = lambda_xi(w_mat, params, w < 0.0 ? -1 : 1, x);
    const Mat12 sbar =
        -wp * lx.lambda - (qbar * Bbar + (qbar * Bbar).transpose());
    ic.max_eig_Sbar = std::max(ic.max_eig_Sbar, max_eig_sym(sbar));
    ic.Sbar_scale = std::max(ic.Sbar_scale, sbar.cwiseAbs().maxCoeff());
  }
  ic.positivity_ok = ic.min_eig_Qbar > 0.0;
  ic.symmetry_ok = ic.max_asym_QbarA <= 1e-10;
  ic.dissipation_ok = ic.max_eig_Sbar <= -1e-12 * ic.Sbar_scale;
  return ic;
}

// Constants used to pick weight parameters:
//   C_lambda = max_x lambda_min(Lambda),   C_xi = max_x lambda_max(Xi),
//   C_theta  = max_x lambda_max(M^{-1/2} W C^{-1} W^T M^{-1/2}),
//   C_mu     = lambda_max(K^{-1/2} Lambda_I K^{-1/2} + K^{1/2} Lambda_II
//              K^{1/2}) at x = ell (only when K is positive definite).
// Suggested profile: slope ratio eta = C_xi / C_lambda, amplitude
// |w| < chi rho with chi = min(C_theta^{-1/2}, 1 / C_mu).
struct CertificateConstants {
  double C_lambda = 0.0;
  double C_xi = 0.0;
  double C_theta = 0.0;
  double C_mu = 0.0;  // 0 when K is singular
  double eta = 0.0;
  double chi = 0.0;
};

inline CertificateConstants certificate_constants(const BeamParameters& params,
                                                  const Mat6& K,
                                                  WVariant variant,
                                                  int grid_pts = 1000) {
  CertificateConstants cc;
  cc.C_lambda = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid_pts; ++j) {
    const double x = params.length * static_cast<double>(j) / (grid_pts - 1);
    const Mat6 m = params.mass(x);
    const Mat6 c = params.flexibility(x);
    const Mat6 w_mat = build_W(variant, m, c);
    const LambdaXi lx = lambda_xi(w_mat, params, 1, x);
    cc.C_lambda = std::max(cc.C_lambda, min_eig_sym(lx.lambda));
    cc.C_xi = std::max(cc.C_xi, max_eig_sym(lx.xi));
    const Mat6 m_inv_half = spd_inv_sqrt(m, "mass matrix");
    const Mat6 theta = m_inv_half * w_mat *
                       c.ldlt().solve(w_mat.transpose()) * m_inv_half;
    cc.C_theta = std::max(cc.C_theta, max_eig_sym(theta));
  }
  const double x_end = params.length;
  const LambdaXi lx_end = lambda_xi(
      build_W(variant, params.mass(x_end), params.flexibility(x_end)), params,
      1, x_end);
  if (min_eig_sym(K) > 0.0) {
    const Mat6 k_half = spd_sqrt(K, "feedback matrix");
    const Mat6 k_inv_half = spd_inv_sqrt(K, "feedback matrix");
    cc.C_mu = max_eig_sym(k_inv_half * lx_end.lambda_I * k_inv_half +
                          k_half * lx_end.lambda_II * k_half);
  }
  cc.eta = cc.C_lambda > 0.0 ? cc.C_xi / cc.C_lambda : 0.0;
  const double from_theta =
      cc.C_theta > 0.0 ? 1.0 / std::sqrt(cc.C_theta)
                       : std::numeric_limits<double>::infinity();
  const double from_mu = cc.C_mu > 0.0
                             ? 1.0 / cc.C_mu
                             : std::numeric_limits<double>::infinity();
  cc.chi = std::min(from_theta, from_mu);
  return cc;
}

struct LyapunovCertificate {
  double rho = 1.0;
  ShiftedWeight weight;
  WVariant variant = WVariant::identity;
  Mat6 K = Mat6::Zero();

  InteriorConditions interior;
  double w_at_start = 0.0;
  double max_eig_mu = 0.0;
  bool boundary_ok = false;

  CertificateConstants constants;

  bool verdict = false;
  std::string failed;  // empty, or the first failing condition
};

inline LyapunovCertificate certificate(const BeamParameters& params,
                                       const Mat6& K, double rho,
                                       const ShiftedWeight& weight,
                                       WVariant variant, int grid_pts = 1000) {
  params.validate();
  if (!(rho > 0.0)) throw ParameterError("certificate: rho must be > 0");
  require_symmetric(K, 1e-12, "feedback matrix K");
  if (min_eig_sym(K) < -1e-12 * std::max(1.0, K.cwiseAbs().maxCoeff()))
    throw ParameterError("certificate: feedback K must be positive "
                         "semidefinite");
  if (std::abs(weight.ell() - params.length) >
      1e-12 * std::max(1.0, params.length))
    throw ParameterError("certificate: weight domain does not match length");

  LyapunovCertificate cert;
  cert.rho = rho;
  cert.weight = weight;
  cert.variant = variant;
  cert.K = K;
  cert.interior = scan_interior(params, rho, weight, variant, grid_pts);
  cert.constants = certificate_constants(params, K, variant, grid_pts);

  const double x_end = params.length;
  const double w_end = weight.w(x_end);
  const LambdaXi lx_end = lambda_xi(
      build_W(variant, params.mass(x_end), params.flexibility(x_end)), params,
      1, x_end);
  const Mat6 mu = -2.0 * rho * K + std::abs(w_end) * lx_end.lambda_I +
                  std::abs(w_end) * K * lx_end.lambda_II * K;
  cert.w_at_start = weight.w(0.0);
  cert.max_eig_mu = max_eig_sym(mu);
  const double mu_scale = std::max(1.0, mu.cwiseAbs().maxCoeff());
  const bool clamped_end_ok = cert.w_at_start >= -1e-12;
  const bool controlled_end_ok = cert.max_eig_mu <= 1e-10 * mu_scale;
  cert.boundary_ok = clamped_end_ok && controlled_end_ok;

  if (!cert.interior.positivity_ok)
    cert.failed = "positivity";
  else if (!cert.interior.symmetry_ok)
    cert.failed = "symmetry";
  else if (!cert.interior.dissipation_ok)
    cert.failed = "interior";
  else if (!clamped_end_ok)
    cert.failed = "boundary";
  else if (!controlled_end_ok)
    cert.failed = "mu";
  cert.verdict = cert.failed.empty();
  return cert;
}

// Discrete energy E(t_k) = y_k^T M y_k (the FEM quadrature of the continuous
// energy integral int y^T Q^P y dx).
inline std::vector<double> energy(const Trajectory& traj) {
  const AssembledSystem& sys = *traj.system;
  std::vector<double> e;
  e.reserve(traj.states.size());
  for (const VecX& y : traj.states) e.push_back(y.dot(sys.M * y));
  return e;
}

// Discrete Lyapunov series L_order(t_k), the Qbar-weighted quadratic form of
// the order-th time derivative of the state. Qbar_h is the FEM matrix of
// Qbar frozen, like every other coefficient, at element midpoints. order 1
// differentiates the state by central differences (one-sided endpoints);
// higher orders are not offered since repeated discrete differentiation
// amplifies noise.
inline std::vector<double> lyapunov_series(const Trajectory& traj,
                                           const LyapunovCertificate& cert,
                                           int order = 0) {
  if (order != 0 && order != 1)
    throw ParameterError("lyapunov_series: order must be 0 or 1");
  const AssembledSystem& sys = *traj.system;
  const BeamParameters& params = sys.params;
  const SpMat qbar_h = assemble_weighted_mass(sys.mesh, [&](double x) {
    const Mat6 m = params.mass(x);
    const Mat6 c = params.flexibility(x);
    const Mat6 w_mat = build_W(cert.variant, m, c);
    Mat12 omega = Mat12::Zero();
    omega.topRightCorner<6, 6>() = w_mat;
    omega.bottomLeftCorner<6, 6>() = w_mat.transpose();
    return Mat12(cert.rho * params.QP(x) + cert.weight.w(x) * omega);
  });

  const int n = static_cast<int>(traj.states.size());
  std::vector<double> series;
  series.reserve(traj.states.size());
  if (order == 0) {
    for (const VecX& y : traj.states) series.push_back(y.dot(qbar_h * y));
    return series;
  }
  if (n < 2)
    throw ParameterError("lyapunov_series: need at least 2 time points");
  const double h = traj.grid.h();
  for (int k = 0; k < n; ++k) {
    VecX dy;
    if (k == 0)
      dy = (traj.states[1] - traj.states[0]) / h;
    else if (k == n - 1)
      dy = (traj.states[n - 1] - traj.states[n - 2]) / h;
    else
      dy = (traj.states[k + 1] - traj.states[k - 1]) / (2.0 * h);
    series.push_back(dy.dot(qbar_h * dy));
  }
  return series;
}

struct FitResult {
  double beta = 0.0;       // series(t) ~ C exp(-2 beta t) on the window
  double r_squared = 0.0;  // coefficient of determination of the log fit
};

// Least-squares fit of log(series) against time on [t_lo, t_hi]; the decay
// rate is reported as beta = -slope/2, matching quadratic functionals of
// solutions that decay like exp(-beta t). Nonpositive samples inside the
// window are an error.
inline FitResult fit_decay(const std::vector<double>& series,
                           const TimeGrid& grid, double t_lo, double t_hi) {
  if (static_cast<int>(series.size()) != grid.steps)
    throw ShapeError("fit_decay: series length does not match the time grid");
  std::vector<double> ts, ys;
  for (int k = 0; k < grid.steps; ++k) {
    const double t = grid.t(k);
    if (t < t_lo || t > t_hi) continue;
    if (!(series[k] > 0.0))
      throw ParameterError("fit_decay: nonpositive value inside the window");
    ts.push_back(t);
    ys.push_back(std::log(series[k]));
  }
  if (ts.size() < 3)
    throw ParameterError("fit_decay: fewer than 3 usable samples in window");
  const double n = static_cast<double>(ts.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += ys[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * ys[i];
  }
  const double denom = n * stt - st * st;
  if (!(std::abs(denom) > 0.0))
    throw ParameterError("fit_decay: degenerate time window");
  const double slope = (n * sty - st * sy) / denom;
  const double intercept = (sy - slope * st) / n;
  double ss_res = 0, ss_tot = 0;
  const double y_mean = sy / n;
  for (size_t i = 0; i < ts.size(); ++i) {
    const double fit = intercept + slope * ts[i];
    ss_res += (ys[i] - fit) * (ys[i] - fit);
    ss_tot += (ys[i] - y_mean) * (ys[i] - y_mean);
  }
  FitResult out;
  out.beta = -0.5 * slope;
  // A series constant to rounding leaves nothing to explain; report a perfect
  // fit instead of amplifying ulp-level accumulation noise.
  const double tot_floor =
      n * std::pow(1e-14 * (1.0 + std::abs(y_mean)), 2);
  out.r_squared = ss_tot > tot_floor ? 1.0 - ss_res / ss_tot : 1.0;
  return out;
}

}  // namespace igeb
