#pragma once

// Quadratic finite-element semi-discretization of a single beam, clamped at
// x = 0 and with velocity feedback z(ell, t) = -K v(ell, t) (K = 0: free end).
// The semi-discrete system on the reduced coefficient vector y (clamped
// velocities dropped) reads
//
//   M dy/dt + K_total y + Q(y) y = 0,      K_total = K1 + K2 + K3,
//
// with M the block mass matrix, K1 the (integrated-by-parts) transport term,
// K2 the precurvature coupling, K3 the boundary feedback block, and Q(y) the
// quadratic term. Coefficients are frozen at element midpoints throughout.

#include <Eigen/Sparse>
#include <utility>
#include <vector>

#include "igeb/beam.hpp"
#include "igeb/errors.hpp"
#include "igeb/linalg.hpp"
#include "igeb/mesh.hpp"

namespace igeb {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Reference quadratic shape functions on [0, 1] and their derivatives.
inline std::pair<Vec3, Vec3> reference_shape(double xi) {
  if (!(xi >= 0.0 && xi <= 1.0))
    throw ParameterError("reference_shape: argument outside [0, 1]");
  Vec3 n((1.0 - xi) * (1.0 - 2.0 * xi), 4.0 * xi * (1.0 - xi),
         xi * (2.0 * xi - 1.0));
  Vec3 d(4.0 * xi - 3.0, 4.0 - 8.0 * xi, 4.0 * xi - 1.0);
  return {n, d};
}

// Exact reference-interval integrals of shape-function products:
//   Me(k,p)   = int N_k N_p,  Ke(k,p) = int N_k' N_p (derivative on the row),
//   Pn(k,p)   = int N_n N_k N_p.
struct ElementMatrices {
  Mat3 Me, Ke, P1, P2, P3;
};

inline const ElementMatrices& element_matrices() {
  static const ElementMatrices em = [] {
    ElementMatrices m;
    m.Me << 4, 2, -1, 2, 16, 2, -1, 2, 4;
    m.Me /= 30.0;
    m.Ke << -3, -4, 1, 4, 0, -4, -1, 4, 3;
    m.Ke /= 6.0;
    m.P1 << 39, 20, -3, 20, 16, -8, -3, -8, -3;
    m.P1 /= 420.0;
    m.P2 << 5, 4, -2, 4, 48, 4, -2, 4, 5;
    m.P2 /= 105.0;
    // P3 is P1 read backwards in both indices (mirror symmetry of the nodes).
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m.P3(i, j) = m.P1(2 - i, 2 - j);
    return m;
  }();
  return em;
}

// Energy-form coefficients of the semilinear system
//   Q^P dy/dt + bA dy/dx + bB y + bG(x, y) y = 0,
// obtained by multiplying the first-order form by Q^P:
//   bA = -[[0, I], [I, 0]],   bB = [[0, -E], [E^T, 0]]  (skew).
inline Mat12 bold_A() {
  Mat12 a = Mat12::Zero();
  a.topRightCorner<6, 6>() = -Mat6::Identity();
  a.bottomLeftCorner<6, 6>() = -Mat6::Identity();
  return a;
}

inline Mat12 bold_B(const Mat6& e) {
  Mat12 b = Mat12::Zero();
  b.topRightCorner<6, 6>() = -e;
  b.bottomLeftCorner<6, 6>() = e.transpose();
  return b;
}

// Block factors of the quadratic term: for w = (w1, w2),
//   L1(w) = [[hat(w2), 0], [hat(w1), hat(w2)]],
//   L2(w) = [[0, hat(w1)], [hat(w1), hat(w2)]].
inline Mat6 L1_of(const Vec6& w) {
  Mat6 l = Mat6::Zero();
  l.topLeftCorner<3, 3>() = hat(w.tail<3>());
  l.bottomLeftCorner<3, 3>() = hat(w.head<3>());
  l.bottomRightCorner<3, 3>() = hat(w.tail<3>());
  return l;
}

inline Mat6 L2_of(const Vec6& w) {
  Mat6 l = Mat6::Zero();
  l.topRightCorner<3, 3>() = hat(w.head<3>());
  l.bottomLeftCorner<3, 3>() = hat(w.head<3>());
  l.bottomRightCorner<3, 3>() = hat(w.tail<3>());
  return l;
}

// bG(x, u) = -G(u) Q^P(x) = [[L1(v) M, L2(z) C], [0, -L1(v)^T C]].
inline Mat12 bold_G(const Mat6& m, const Mat6& c, const Vec12& u) {
  const Vec6 v = u.head<6>();
  const Vec6 z = u.tail<6>();
  Mat12 g = Mat12::Zero();
  g.topLeftCorner<6, 6>() = L1_of(v) * m;
  g.topRightCorner<6, 6>() = L2_of(z) * c;
  g.bottomRightCorner<6, 6>() = -L1_of(v).transpose() * c;
  return g;
}

// Transposed pairing: bG(x, y) ybar = bGdagger(x, ybar) y for all y, ybar,
//   bGdagger(x, u) = [[-L2(M v), -L1(C z)], [L1(C z)^T, 0]].
inline Mat12 bold_G_dagger(const Mat6& m, const Mat6& c, const Vec12& u) {
  const Vec6 mv = m * u.head<6>();
  const Vec6 cz = c * u.tail<6>();
  Mat12 g = Mat12::Zero();
  g.topLeftCorner<6, 6>() = -L2_of(mv);
  g.topRightCorner<6, 6>() = -L1_of(cz);
  g.bottomLeftCorner<6, 6>() = L1_of(cz).transpose();
  return g;
}

struct AssembledSystem {
  BeamParameters params;
  Mesh mesh;
  Mat6 K_feedback = Mat6::Zero();
  int dof_count = 0;  // reduced size N_f = 12 Nx - 6

  SpMat M;            // reduced mass
  SpMat K;            // K1 + K2 + K3
  SpMat K1, K2, K3;   // kept separately for diagnostics and tests

  // Per-element frozen coefficients (evaluated at the element midpoint).
  std::vector<Mat6> elem_mass, elem_flex;

  // When false the quadratic term is dropped: the scheme integrates the
  // linearized system. Useful for oracle tests and linear studies.
  bool nonlinear = true;

  // Extract the 12 coefficients of node a (0-based) from a reduced vector;
  // the clamped velocities at node 0 read as zero.
  Vec12 node_state(const VecX& y, int a) const {
    Vec12 u = Vec12::Zero();
    if (a == 0) {
      u.tail<6>() = y.segment<6>(0);
    } else {
      u = y.segment<12>(12 * a - 6);
    }
    return u;
  }
};

namespace detail {

// Scatter a 12x12 block at (node row_a, node col_b) of the full numbering
// into reduced-index triplets, dropping the six clamped dofs. keep_zeros
// retains structural zeros so that repeated assemblies share one sparsity
// pattern (required to reuse a symbolic factorization across Newton steps).
inline void scatter_block(std::vector<Triplet>& out, int row_node, int col_node,
                          const Mat12& block, bool keep_zeros = false) {
  const int r0 = 12 * row_node - 6;
  const int c0 = 12 * col_node - 6;
  for (int i = 0; i < 12; ++i) {
    const int r = r0 + i;
    if (r < 0) continue;
    for (int j = 0; j < 12; ++j) {
      const int c = c0 + j;
      if (c < 0) continue;
      const double v = block(i, j);
      if (keep_zeros || v != 0.0) out.emplace_back(r, c, v);
    }
  }
}

inline SpMat from_triplets(int n, const std::vector<Triplet>& t) {
  SpMat s(n, n);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

}  // namespace detail

// Assemble the reduced mass matrix for an arbitrary 12x12 coefficient field
// frozen at element midpoints. The plain mass matrix uses Q^P; Lyapunov
// functionals reuse this with their own weight matrix.
template <typename MatrixField>
inline SpMat assemble_weighted_mass(const Mesh& mesh, MatrixField&& field) {
  mesh.validate();
  const ElementMatrices& em = element_matrices();
  const double he = mesh.he();
  std::vector<Triplet> tm;
  for (int e = 0; e < mesh.elements; ++e) {
    const Mat12 q = field(mesh.element_midpoint(e));
    for (int n = 0; n < 3; ++n)
      for (int m = 0; m < 3; ++m)
        detail::scatter_block(tm, 2 * e + n, 2 * e + m, he * em.Me(n, m) * q);
  }
  return detail::from_triplets(mesh.reduced_dof_count(), tm);
}

inline AssembledSystem assemble(const BeamParameters& params, const Mesh& mesh,
                                const Mat6& K_feedback) {
  params.validate();
  mesh.validate();
  require_symmetric(K_feedback, 1e-12, "feedback matrix K");

  AssembledSystem sys;
  sys.params = params;
  sys.mesh = mesh;
  sys.K_feedback = K_feedback;
  sys.dof_count = mesh.reduced_dof_count();

  const ElementMatrices& em = element_matrices();
  const double he = mesh.he();
  const Mat12 bA = bold_A();

  std::vector<Triplet> tm, t1, t2, t3;
  for (int e = 0; e < mesh.elements; ++e) {
    const double xm = mesh.element_midpoint(e);
    sys.elem_mass.push_back(params.mass(xm));
    sys.elem_flex.push_back(params.flexibility(xm));

    Mat12 qp = Mat12::Zero();
    qp.topLeftCorner<6, 6>() = sys.elem_mass.back();
    qp.bottomRightCorner<6, 6>() = sys.elem_flex.back();
    const Mat12 bB = bold_B(build_E(params.precurvature(xm)));

    for (int n = 0; n < 3; ++n)
      for (int m = 0; m < 3; ++m) {
        detail::scatter_block(tm, 2 * e + n, 2 * e + m, he * em.Me(n, m) * qp);
        detail::scatter_block(t2, 2 * e + n, 2 * e + m, he * em.Me(n, m) * bB);
        detail::scatter_block(t1, 2 * e + n, 2 * e + m, em.Ke(n, m) * (-bA));
      }
  }

  // Boundary feedback block at the last node: the boundary term of the
  // integration by parts with z(ell) = -K v(ell) substituted contributes
  // K on the velocity rows and -I coupling on the force rows.
  {
    const int last = mesh.node_count() - 1;
    Mat12 b = Mat12::Zero();
    b.topLeftCorner<6, 6>() = K_feedback;
    b.bottomLeftCorner<6, 6>() = -Mat6::Identity();
    detail::scatter_block(t3, last, last, b);
  }

  const int n = sys.dof_count;
  sys.M = detail::from_triplets(n, tm);
  sys.K1 = detail::from_triplets(n, t1);
  sys.K2 = detail::from_triplets(n, t2);
  sys.K3 = detail::from_triplets(n, t3);
  sys.K = sys.K1 + sys.K2;
  sys.K += sys.K3;
  return sys;
}

namespace detail {

// Shared element loop of the quadratic term. For each element the local
// 36x36 contribution is sum_n he * kron(P^{n}, B_n) where B_n depends on the
// state at local node n (bG for Q, bGdagger with the index roles of n and the
// column swapped for Qdagger).
template <typename BlockFn>
inline void quadratic_blocks(const AssembledSystem& sys, const VecX& y,
                             bool dagger, BlockFn&& emit) {
  const ElementMatrices& em = element_matrices();
  const Mat3* P[3] = {&em.P1, &em.P2, &em.P3};
  const double he = sys.mesh.he();
  for (int e = 0; e < sys.mesh.elements; ++e) {
    const Mat6& m = sys.elem_mass[e];
    const Mat6& c = sys.elem_flex[e];
    Mat12 g[3];
    for (int n = 0; n < 3; ++n) {
      const Vec12 u = sys.node_state(y, 2 * e + n);
      g[n] = dagger ? bold_G_dagger(m, c, u) : bold_G(m, c, u);
    }
    for (int k = 0; k < 3; ++k)
      for (int p = 0; p < 3; ++p) {
        // Q:       row k, col p, weight P^n(k,p), coefficient state at n.
        // Qdagger: row k, col n, weight P^n(k,p), coefficient state at p;
        // both emitted here as (row, col, block).
        if (!dagger) {
          Mat12 b = Mat12::Zero();
          for (int n = 0; n < 3; ++n) b += he * (*P[n])(k, p) * g[n];
          emit(e, 2 * e + k, 2 * e + p, b);
        } else {
          Mat12 b = Mat12::Zero();
          for (int n = 0; n < 3; ++n) b += he * (*P[p])(k, n) * g[n];
          emit(e, 2 * e + k, 2 * e + p, b);
        }
      }
  }
}

}  // namespace detail

// Assembled quadratic term Q(y) as a sparse matrix (reduced indices).
inline SpMat eval_Q(const AssembledSystem& sys, const VecX& y) {
  if (y.size() != sys.dof_count)
    throw ShapeError("eval_Q: state size does not match the assembled system");
  std::vector<Triplet> t;
  if (sys.nonlinear)
    detail::quadratic_blocks(
        sys, y, false, [&](int, int rn, int cn, const Mat12& b) {
          detail::scatter_block(t, rn, cn, b, /*keep_zeros=*/true);
        });
  return detail::from_triplets(sys.dof_count, t);
}

// Transposed-pairing variant: Q(y) ybar = Qdagger(ybar) y for all y, ybar.
inline SpMat eval_Qdagger(const AssembledSystem& sys, const VecX& ybar) {
  if (ybar.size() != sys.dof_count)
    throw ShapeError(
        "eval_Qdagger: state size does not match the assembled system");
  std::vector<Triplet> t;
  if (sys.nonlinear)
    detail::quadratic_blocks(
        sys, ybar, true, [&](int, int rn, int cn, const Mat12& b) {
          detail::scatter_block(t, rn, cn, b, /*keep_zeros=*/true);
        });
  return detail::from_triplets(sys.dof_count, t);
}

// Matrix-free product Q(y) b, avoiding sparse assembly in inner loops.
inline VecX apply_Q(const AssembledSystem& sys, const VecX& y, const VecX& b) {
  if (y.size() != sys.dof_count || b.size() != sys.dof_count)
    throw ShapeError("apply_Q: state size does not match the assembled system");
  VecX out = VecX::Zero(sys.dof_count);
  if (!sys.nonlinear) return out;
  const ElementMatrices& em = element_matrices();
  const Mat3* P[3] = {&em.P1, &em.P2, &em.P3};
  const double he = sys.mesh.he();
  for (int e = 0; e < sys.mesh.elements; ++e) {
    const Mat6& m = sys.elem_mass[e];
    const Mat6& c = sys.elem_flex[e];
    Mat12 g[3];
    Vec12 bloc[3];
    for (int n = 0; n < 3; ++n) {
      g[n] = bold_G(m, c, sys.node_state(y, 2 * e + n));
      bloc[n] = sys.node_state(b, 2 * e + n);
    }
    for (int k = 0; k < 3; ++k) {
      Vec12 acc = Vec12::Zero();
      for (int n = 0; n < 3; ++n) {
        Vec12 wb = Vec12::Zero();
        for (int p = 0; p < 3; ++p) wb += (*P[n])(k, p) * bloc[p];
        acc += g[n] * wb;
      }
      acc *= he;
      const int node = 2 * e + k;
      const int r0 = 12 * node - 6;
      for (int i = 0; i < 12; ++i) {
        const int r = r0 + i;
        if (r >= 0) out(r) += acc(i);
      }
    }
  }
  return out;
}

}  // namespace igeb
