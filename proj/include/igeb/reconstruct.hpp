#pragma once

// Recovery of the centerline position p(x, t) and cross-section rotation
// R(x, t) from the velocity/internal-force coefficients of a simulation.
//
// Time marching (per node, x fixed): with W = angular velocity v2,
//   dq/dt = U(W) q,        dp/dt = R(q) v1,
// Space marching (per time, t fixed): with s = C z (strains),
//   dq/dx = U(s2 + Upsilon_c) q,   dp/dx = R(q) (s1 + e1).
// Quaternions advance by the norm-preserving Cayley midpoint update;
// positions by the trapezoid rule using the already-updated rotations.

#include <utility>
#include <vector>

#include "igeb/integrate.hpp"
#include "igeb/quaternion.hpp"

namespace igeb {

struct Frame {
  Vec3 p = Vec3::Zero();
  Quaternion q;
  Mat3 R() const { return quat_to_rot(q); }
};

// Frames indexed by (mesh node, time step), stored step-major.
struct FrameField {
  int nodes = 0;
  int steps = 0;
  std::vector<Frame> data;

  FrameField() = default;
  FrameField(int nodes_, int steps_)
      : nodes(nodes_), steps(steps_),
        data(static_cast<size_t>(nodes_) * steps_) {}

  Frame& at(int node, int k) { return data[static_cast<size_t>(k) * nodes + node]; }
  const Frame& at(int node, int k) const {
    return data[static_cast<size_t>(k) * nodes + node];
  }
};

namespace detail {

inline void keep_sign_continuity(Quaternion& next, const Quaternion& prev) {
  if (next.dot(prev) < 0.0) next = next.negated();
}

}  // namespace detail

// March every mesh node forward in time from its initial frame.
inline FrameField reconstruct_time(const Trajectory& traj,
                                   const std::vector<Vec3>& p0,
                                   const std::vector<Mat3>& R0,
                                   const Mesh& mesh, const TimeGrid& grid) {
  const AssembledSystem& sys = *traj.system;
  const int nodes = mesh.node_count();
  if (static_cast<int>(p0.size()) != nodes ||
      static_cast<int>(R0.size()) != nodes)
    throw ShapeError("reconstruct_time: initial frame count != node count");
  if (static_cast<int>(traj.states.size()) != grid.steps ||
      sys.mesh.node_count() != nodes)
    throw ShapeError("reconstruct_time: trajectory does not match mesh/grid");

  FrameField field(nodes, grid.steps);
  const double h = grid.h();
  for (int a = 0; a < nodes; ++a) {
    Frame f;
    f.p = p0[a];
    f.q = rot_to_quat(R0[a]);
    field.at(a, 0) = f;
    Mat3 r_prev = quat_to_rot(f.q);
    for (int k = 0; k + 1 < grid.steps; ++k) {
      const Vec12 uk = sys.node_state(traj.states[k], a);
      const Vec12 un = sys.node_state(traj.states[k + 1], a);
      Frame g;
      g.q = advance_quaternion(field.at(a, k).q, uk.segment<3>(3),
                               un.segment<3>(3), h);
      detail::keep_sign_continuity(g.q, field.at(a, k).q);
      const Mat3 r_next = quat_to_rot(g.q);
      g.p = field.at(a, k).p +
            (0.5 * h) * (r_prev * uk.head<3>() + r_next * un.head<3>());
      field.at(a, k + 1) = g;
      r_prev = r_next;
    }
  }
  return field;
}

// March along the beam at one stored state, starting from the frame at x = 0.
inline std::vector<Frame> reconstruct_space(const AssembledSystem& sys,
                                            const VecX& y, const Vec3& p_start,
                                            const Mat3& R_start) {
  if (y.size() != sys.dof_count)
    throw ShapeError("reconstruct_space: state size does not match the mesh");
  const Mesh& mesh = sys.mesh;
  const int nodes = mesh.node_count();
  const double dx = 0.5 * mesh.he();

  // Nodal curvature w(x) = s2 + Upsilon_c and stretch t(x) = s1 + e1,
  // with strains s = C(x) z evaluated at the true node coordinate.
  std::vector<Vec3> wv(nodes), tv(nodes);
  for (int a = 0; a < nodes; ++a) {
    const double x = mesh.node_x(a);
    const Vec6 s = sys.params.flexibility(x) * sys.node_state(y, a).tail<6>();
    wv[a] = s.tail<3>() + sys.params.precurvature(x);
    tv[a] = s.head<3>() + Vec3::UnitX();
  }

  std::vector<Frame> out(nodes);
  out[0].p = p_start;
  out[0].q = rot_to_quat(R_start);
  Mat3 r_prev = quat_to_rot(out[0].q);
  for (int a = 0; a + 1 < nodes; ++a) {
    Frame g;
    g.q = advance_quaternion(out[a].q, wv[a], wv[a + 1], dx);
    detail::keep_sign_continuity(g.q, out[a].q);
    const Mat3 r_next = quat_to_rot(g.q);
    g.p = out[a].p + (0.5 * dx) * (r_prev * tv[a] + r_next * tv[a + 1]);
    out[a + 1] = g;
    r_prev = r_next;
  }
  return out;
}

// Space marching at every stored time. For a beam clamped at x = 0 the frame
// there never moves, so one fixed starting frame serves all times.
inline FrameField reconstruct_space_all(const Trajectory& traj,
                                        const Vec3& p_start,
                                        const Mat3& R_start) {
  const AssembledSystem& sys = *traj.system;
  const int nodes = sys.mesh.node_count();
  FrameField field(nodes, traj.grid.steps);
  for (int k = 0; k < traj.grid.steps; ++k) {
    const std::vector<Frame> col =
        reconstruct_space(sys, traj.states[k], p_start, R_start);
    for (int a = 0; a < nodes; ++a) field.at(a, k) = col[a];
  }
  return field;
}

// Largest position / rotation gap between two frame fields of equal shape;
// used to cross-check the time march against the space march.
inline std::pair<double, double> frame_field_difference(const FrameField& a,
                                                        const FrameField& b) {
  if (a.nodes != b.nodes || a.steps != b.steps)
    throw ShapeError("frame_field_difference: shapes differ");
  double dp = 0.0, dr = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    dp = std::max(dp, (a.data[i].p - b.data[i].p).norm());
    dr = std::max(dr,
                  (quat_to_rot(a.data[i].q) - quat_to_rot(b.data[i].q)).norm());
  }
  return {dp, dr};
}

}  // namespace igeb
