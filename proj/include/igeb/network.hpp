#pragma once

// Lyapunov boundary conditions for networks of beams, checked node by node in
// Riemann (characteristic) coordinates r = L y, where the transport operator
// becomes diag(-D, D). Each beam carries the sqrt-pair weight structure, for
// which the Lyapunov density splits exactly into characteristic channels:
//
//   y^T Qbar y = (r-)^T Q- (r-) + (r+)^T Q+ (r+),
//   Q-(x) = (rho + w(x))/2 D^{-2},   Q+(x) = (rho - w(x))/2 D^{-2}.
//
// At a node, channels arriving from the beam are inputs, channels leaving
// into the beam are outputs (r+ arrives at x = ell, r- arrives at x = 0).
// Rigid coupling with velocity feedback -K V yields a reflection matrix B
// with r_out = B r_in, and the node dissipates the weighted flux iff
//
//   M_n = B^T Q_out Dbar B - Q_in Dbar   is negative semidefinite,
//
// with Dbar the characteristic speeds and the end-adjusted weight values
// w_bar_i = +w_i(ell) (node at x = ell) or -w_i(0) (node at x = 0).
// This module restricts to beams with diagonal mass and flexibility, where
// the channel splitting is exact.

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "igeb/diagonal.hpp"
#include "igeb/lyapunov.hpp"
#include "igeb/weights.hpp"

namespace igeb {

enum class NodeKind { simple_free, simple_clamped, simple_controlled,
                      multiple };
enum class BeamEnd { start, finish };  // x = 0 resp. x = ell

inline std::string to_string(NodeKind k) {
  switch (k) {
    case NodeKind::simple_free: return "free";
    case NodeKind::simple_clamped: return "clamped";
    case NodeKind::simple_controlled: return "controlled";
    case NodeKind::multiple: return "multiple";
  }
  return "?";
}

struct IncidentBeam {
  int beam_index = 0;
  BeamEnd end = BeamEnd::finish;
  Mat6 R = Mat6::Identity();  // beam frame -> node frame (orthogonal)
};

struct NodeSpec {
  NodeKind kind = NodeKind::simple_free;
  std::vector<IncidentBeam> beams;
  // Velocity feedback gain, expressed in the frame of beams[0].
  Mat6 K = Mat6::Zero();
};

struct NetworkBeam {
  BeamParameters params;
  ShiftedWeight weight;
};

// Per-node geometric data shared by the reflection and flux matrices.
struct NodalMatrices {
  int k = 0;                   // number of incident beams (node degree)
  std::vector<Mat6> gamma;     // R_i C_i^{1/2} U_i^T : velocity chart per beam
  std::vector<Mat6> sigma;     // node-frame impedance per beam
  std::vector<double> w_bar;   // end-adjusted weight values
  VecX speeds;                 // stacked diagonal of Dbar (6k)
  MatX G;                      // blockdiag(gamma_i), 6k x 6k
  Mat6 sigma_sum;              // sum of sigma_i
  Mat6 K_bar;                  // feedback rotated into the node frame
  double gamma_condition = 1;  // worst condition number among the gamma_i
};

inline NodalMatrices nodal_matrices(const std::vector<NetworkBeam>& beams,
                                    const NodeSpec& node, double rho) {
  if (node.beams.empty())
    throw ParameterError("network node: no incident beams");
  if (node.kind == NodeKind::multiple && node.beams.size() < 2)
    throw ParameterError("network node: a multiple node needs degree >= 2");
  if (node.kind != NodeKind::multiple && node.beams.size() != 1)
    throw ParameterError("network node: a simple node has exactly one beam");
  if (!(rho > 0.0)) throw ParameterError("network: rho must be > 0");
  require_symmetric(node.K, 1e-12, "node feedback matrix K");
  if (min_eig_sym(node.K) < -1e-12 * std::max(1.0, node.K.cwiseAbs().maxCoeff()))
    throw ParameterError(
        "network node: feedback K must be positive semidefinite");

  NodalMatrices nm;
  nm.k = static_cast<int>(node.beams.size());
  nm.speeds = VecX::Zero(6 * nm.k);
  nm.G = MatX::Zero(6 * nm.k, 6 * nm.k);
  nm.sigma_sum = Mat6::Zero();
  for (int i = 0; i < nm.k; ++i) {
    const IncidentBeam& ib = node.beams[i];
    if (ib.beam_index < 0 || ib.beam_index >= static_cast<int>(beams.size()))
      throw ParameterError("network node: beam index out of range");
    const NetworkBeam& nb = beams[static_cast<size_t>(ib.beam_index)];
    if ((ib.R * ib.R.transpose() - Mat6::Identity()).cwiseAbs().maxCoeff() >
        1e-10)
      throw ParameterError("network node: incidence frame is not a rotation");
    const double x_node = ib.end == BeamEnd::finish ? nb.params.length : 0.0;
    if (!is_diagonal(nb.params.mass(x_node)) ||
        !is_diagonal(nb.params.flexibility(x_node)))
      throw UnsupportedError(
          "network certificate: beams must have diagonal mass and "
          "flexibility matrices");
    const Diagonalization dg = diagonalize(nb.params, x_node);
    const Mat6 c_inv_half_u = dg.C_inv_half * dg.U.transpose();
    nm.gamma.push_back(ib.R * dg.C_half * dg.U.transpose());
    nm.sigma.push_back(ib.R * c_inv_half_u * dg.D.inverse() *
                       c_inv_half_u.transpose() * ib.R.transpose());
    if (min_eig_sym(nm.sigma.back()) <= 0.0)
      throw DefinitenessError("network node: impedance sigma must be SPD");
    nm.sigma_sum += nm.sigma.back();
    nm.w_bar.push_back(ib.end == BeamEnd::finish
                           ? nb.weight.w(nb.params.length)
                           : -nb.weight.w(0.0));
    if (std::abs(nm.w_bar.back()) >= rho)
      throw ParameterError(
          "network certificate: |w| at a node end must stay below rho");
    nm.speeds.segment<6>(6 * i) = dg.D.diagonal();
    nm.G.block<6, 6>(6 * i, 6 * i) = nm.gamma.back();

    const Eigen::JacobiSVD<Mat6> svd(nm.gamma.back());
    const double smin = svd.singularValues().minCoeff();
    if (!(smin > 0.0))
      throw DefinitenessError("network node: chart gamma is singular");
    nm.gamma_condition = std::max(
        nm.gamma_condition, svd.singularValues().maxCoeff() / smin);
  }
  nm.K_bar = node.beams[0].R * node.K * node.beams[0].R.transpose();
  return nm;
}

// Reflection r_out = B r_in. Clamped: the common velocity vanishes, so every
// channel bounces with a sign flip, B = -I. Otherwise the rigid coupling with
// feedback gives, in node-frame charts g = gamma r,
//   g_out,i = 2 (sigma_sum + K_bar)^{-1} sum_j sigma_j g_in,j - g_in,i,
// conjugated back by G = blockdiag(gamma_i). For a single beam this reduces
// to gamma^{-1} (sigma + K)^{-1} (sigma - K) gamma; free ends (K = 0) give
// the identity.
inline MatX reflection(const NodalMatrices& nm, NodeKind kind) {
  const int n = 6 * nm.k;
  if (kind == NodeKind::simple_clamped) return -MatX::Identity(n, n);
  if (kind == NodeKind::simple_free &&
      nm.K_bar.cwiseAbs().maxCoeff() > 0.0)
    throw ParameterError("network node: a free end cannot carry feedback");

  const Mat6 holder = nm.sigma_sum + nm.K_bar;
  if (min_eig_sym(holder) <= 0.0)
    throw DefinitenessError(
        "network node: sigma_sum + K_bar must be positive definite");
  const Mat6 holder_inv = holder.ldlt().solve(Mat6::Identity());

  MatX b = -MatX::Identity(n, n);
  for (int i = 0; i < nm.k; ++i)
    for (int j = 0; j < nm.k; ++j)
      b.block<6, 6>(6 * i, 6 * j) += 2.0 * nm.gamma[i].inverse() * holder_inv *
                                     nm.sigma[j] * nm.gamma[j];
  return b;
}

// Weighted flux balance M_n = B^T Q_out Dbar B - Q_in Dbar.
inline MatX M_n(const NodalMatrices& nm, const MatX& b, double rho) {
  const int n = 6 * nm.k;
  if (b.rows() != n || b.cols() != n)
    throw ShapeError("M_n: reflection size does not match the node");
  VecX q_out(n), q_in(n);
  for (int i = 0; i < nm.k; ++i)
    for (int d = 0; d < 6; ++d) {
      const double inv_speed = 1.0 / nm.speeds(6 * i + d);
      q_out(6 * i + d) = 0.5 * (rho + nm.w_bar[i]) * inv_speed;
      q_in(6 * i + d) = 0.5 * (rho - nm.w_bar[i]) * inv_speed;
    }
  return b.transpose() * q_out.asDiagonal() * b - MatX(q_in.asDiagonal());
}

// Reduced verdict matrices, congruent to M_n within each node class.
//  - simple free / clamped: M_n itself equals w_bar D^{-1};
//  - simple controlled: diag over channels of rho (f_j - 1) + w_bar (f_j + 1),
//    f_j = (1 - ups_j)^2 / (1 + ups_j)^2 with ups_j the eigenvalues of
//    D^{1/2} gamma^T K_bar gamma D^{1/2};
//  - multiple: the quadratic form of the coupled-velocity variables,
//    congruent to M_n through u_i = (sigma_sum + K_bar)^{-1} sigma_i g_in,i.
inline MatX M_tilde(const NodalMatrices& nm, NodeKind kind, double rho) {
  if (kind == NodeKind::simple_free || kind == NodeKind::simple_clamped) {
    MatX m = MatX::Zero(6, 6);
    for (int d = 0; d < 6; ++d) m(d, d) = nm.w_bar[0] / nm.speeds(d);
    return m;
  }
  if (kind == NodeKind::simple_controlled) {
    const Mat6 d_half = nm.speeds.head<6>().cwiseSqrt().asDiagonal();
    const Mat6 core =
        d_half * nm.gamma[0].transpose() * nm.K_bar * nm.gamma[0] * d_half;
    const VecX ups = Eigen::SelfAdjointEigenSolver<Mat6>(core).eigenvalues();
    MatX m = MatX::Zero(6, 6);
    for (int d = 0; d < 6; ++d) {
      const double u = ups(d);
      const double f = (1.0 - u) * (1.0 - u) / ((1.0 + u) * (1.0 + u));
      m(d, d) = rho * (f - 1.0) + nm.w_bar[0] * (f + 1.0);
    }
    return m;
  }

  // Multiple node: with ones = (ones_k x I6), rep(X) = I_k kron X,
  // S = blockdiag(sigma_i), w = blockdiag(w_bar_i I6), H = sigma_sum + K_bar:
  //   M~ = -2 rho/k ones rep(K_bar) ones + 2 ones w S ones
  //        - ones w rep(H) - rep(H) w ones + w rep(H) S^{-1} rep(H).
  const int n = 6 * nm.k;
  const Mat6 hold = nm.sigma_sum + nm.K_bar;
  MatX m = MatX::Zero(n, n);
  Mat6 weighted_sigma = Mat6::Zero();
  for (int l = 0; l < nm.k; ++l) weighted_sigma += nm.w_bar[l] * nm.sigma[l];
  for (int i = 0; i < nm.k; ++i)
    for (int j = 0; j < nm.k; ++j) {
      Mat6 blk = (-2.0 * rho / nm.k) * nm.K_bar + 2.0 * weighted_sigma;
      blk -= nm.w_bar[j] * hold;  // ones w rep(H)
      blk -= nm.w_bar[i] * hold;  // rep(H) w ones
      if (i == j)
        blk += nm.w_bar[i] * hold *
               nm.sigma[i].ldlt().solve(Mat6::Identity()) * hold;
      m.block<6, 6>(6 * i, 6 * j) = blk;
    }
  return m;
}

struct NodalCertificate {
  NodeKind kind = NodeKind::simple_free;
  NodalMatrices data;
  MatX B;        // reflection
  MatX M;        // flux balance matrix
  MatX M_red;    // reduced verdict matrix for the node class
  double max_eig_M = 0.0;
  double controlled_margin = 0.0;  // rho C_K + w_bar (controlled nodes only)
  bool ok = false;
};

inline NodalCertificate certify_node(const std::vector<NetworkBeam>& beams,
                                     const NodeSpec& node, double rho) {
  NodalCertificate nc;
  nc.kind = node.kind;
  nc.data = nodal_matrices(beams, node, rho);
  nc.B = reflection(nc.data, node.kind);
  nc.M = M_n(nc.data, nc.B, rho);
  nc.M_red = M_tilde(nc.data, node.kind, rho);
  nc.max_eig_M = max_eig_sym(nc.M);
  const double scale = std::max(1.0, nc.M.cwiseAbs().maxCoeff());
  nc.ok = nc.max_eig_M <= 1e-10 * scale;
  if (node.kind == NodeKind::simple_controlled) {
    // C_K = max_j (f_j - 1)/(f_j + 1); the node dissipates iff
    // rho C_K + w_bar <= 0.
    const Mat6 d_half = nc.data.speeds.head<6>().cwiseSqrt().asDiagonal();
    const Mat6 core = d_half * nc.data.gamma[0].transpose() * nc.data.K_bar *
                      nc.data.gamma[0] * d_half;
    const VecX ups = Eigen::SelfAdjointEigenSolver<Mat6>(core).eigenvalues();
    double ck = -std::numeric_limits<double>::infinity();
    for (int d = 0; d < 6; ++d) {
      const double u = ups(d);
      const double f = (1.0 - u) * (1.0 - u) / ((1.0 + u) * (1.0 + u));
      ck = std::max(ck, (f - 1.0) / (f + 1.0));
    }
    nc.controlled_margin = rho * ck + nc.data.w_bar[0];
  }
  return nc;
}

// A star: beam 0 runs from the root node (its x = 0) to the center (x = ell);
// beams 1..N-1 run from the center (x = 0) to their outer node (x = ell).
// With one beam there is no center and the outer node sits at x = ell.
struct StarNetwork {
  std::vector<NetworkBeam> beams;
  NodeKind root_kind = NodeKind::simple_clamped;
  Mat6 root_K = Mat6::Zero();
  std::vector<NodeKind> outer_kinds;  // size N-1 (N >= 2) or 1 (N == 1)
  std::vector<Mat6> outer_K;
  double rho = 1.0;
  int grid_pts = 1000;
};

struct StarCertificate {
  std::vector<InteriorConditions> interior;  // one per beam
  std::vector<NodalCertificate> nodes;       // root, [center,] outer...
  std::vector<std::string> node_names;
  bool verdict = false;
  std::string failed;  // empty, or the first failing beam/node
};

inline StarCertificate star_certificate(const StarNetwork& net) {
  const int n_beams = static_cast<int>(net.beams.size());
  if (n_beams < 1) throw ParameterError("star network: need at least 1 beam");
  const int n_outer = n_beams == 1 ? 1 : n_beams - 1;
  if (static_cast<int>(net.outer_kinds.size()) != n_outer ||
      static_cast<int>(net.outer_K.size()) != n_outer)
    throw ParameterError(
        "star network: outer node list must match the beam count");
  if (net.root_kind == NodeKind::multiple)
    throw UnsupportedError("star network: the root node must be simple");
  for (NodeKind k : net.outer_kinds)
    if (k == NodeKind::multiple)
      throw UnsupportedError("star network: outer nodes must be simple");

  StarCertificate sc;
  for (int i = 0; i < n_beams; ++i) {
    const NetworkBeam& nb = net.beams[i];
    if (std::abs(nb.weight.ell() - nb.params.length) >
        1e-12 * std::max(1.0, nb.params.length))
      throw ParameterError("star network: weight domain does not match beam");
    sc.interior.push_back(scan_interior(nb.params, net.rho, nb.weight,
                                        WVariant::sqrt_pair, net.grid_pts));
  }

  std::vector<NodeSpec> specs;
  std::vector<std::string> names;
  {
    NodeSpec root;
    root.kind = net.root_kind;
    root.beams.push_back({0, BeamEnd::start, Mat6::Identity()});
    root.K = net.root_K;
    specs.push_back(root);
    names.push_back("root");
  }
  if (n_beams >= 2) {
    NodeSpec center;
    center.kind = NodeKind::multiple;
    center.beams.push_back({0, BeamEnd::finish, Mat6::Identity()});
    for (int i = 1; i < n_beams; ++i)
      center.beams.push_back({i, BeamEnd::start, Mat6::Identity()});
    specs.push_back(center);
    names.push_back("center");
  }
  for (int j = 0; j < n_outer; ++j) {
    NodeSpec outer;
    outer.kind = net.outer_kinds[static_cast<size_t>(j)];
    const int beam = n_beams == 1 ? 0 : j + 1;
    outer.beams.push_back({beam, BeamEnd::finish, Mat6::Identity()});
    outer.K = net.outer_K[static_cast<size_t>(j)];
    specs.push_back(outer);
    names.push_back("outer " + std::to_string(beam));
  }

  for (size_t s = 0; s < specs.size(); ++s) {
    sc.nodes.push_back(certify_node(net.beams, specs[s], net.rho));
    sc.node_names.push_back(names[s]);
  }

  for (int i = 0; i < n_beams && sc.failed.empty(); ++i) {
    const InteriorConditions& ic = sc.interior[static_cast<size_t>(i)];
    if (!(ic.positivity_ok && ic.symmetry_ok && ic.dissipation_ok))
      sc.failed = "beam " + std::to_string(i) + " interior";
  }
  for (size_t s = 0; s < sc.nodes.size() && sc.failed.empty(); ++s)
    if (!sc.nodes[s].ok) sc.failed = "node " + sc.node_names[s];
  sc.verdict = sc.failed.empty();
  return sc;
}

}  // namespace igeb
