#pragma once

// Implicit midpoint time stepping for the semi-discrete beam system
//   M dy/dt + K y + Q(y) y = 0.
// One step solves F(zeta) = 0 for zeta = y^{k+1} by Newton iteration, where
//
//   F(zeta) = (M + h/2 K) zeta - (M - h/2 K) y^k
//             + h/4 [ Q(y^k) y^k + Q(y^k) zeta + Q(zeta) y^k + Q(zeta) zeta ],
//
// i.e. the quadratic term is evaluated at the midpoint (y^k + zeta)/2. The
// Jacobian uses the transposed pairing Q(y) ybar = Qdagger(ybar) y:
//
//   dF/dzeta = M + h/2 K + h/4 [ Q(y^k + zeta) + Qdagger(y^k + zeta) ].

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "igeb/errors.hpp"
#include "igeb/fem.hpp"

namespace igeb {

struct TimeGrid {
  double T = 1.0;  // final time
  int steps = 2;   // number of stored time points Nt (>= 2)

  void validate() const {
    if (!(T > 0.0)) throw ParameterError("time grid: final time must be > 0");
    if (steps < 2) throw ParameterError("time grid: need at least 2 points");
  }
  double h() const { return T / static_cast<double>(steps - 1); }
  double t(int k) const { return h() * static_cast<double>(k); }
};

struct NewtonSettings {
  int max_iter = 20;
  double tol_rel = 1e-10;
  // Absolute floor for the residual norm; values <= 0 select an automatic
  // floor of 1e-12 * sqrt(dof_count).
  double tol_abs = 0.0;

  double effective_tol_abs(int dof_count) const {
    if (tol_abs > 0.0) return tol_abs;
    return 1e-12 * std::sqrt(static_cast<double>(dof_count));
  }
};

struct Trajectory {
  TimeGrid grid;
  std::shared_ptr<const AssembledSystem> system;
  std::vector<VecX> states;        // states[k] = y at t(k), size Nt
  std::vector<int> newton_iters;   // per accepted step, size Nt - 1
  std::vector<double> residuals;   // final Newton residual norms, size Nt - 1
};

inline VecX residual(const AssembledSystem& sys, double h, const VecX& yk,
                     const VecX& zeta) {
  VecX f = sys.M * (zeta - yk) + (0.5 * h) * (sys.K * (zeta + yk));
  f += (0.25 * h) * (apply_Q(sys, yk, yk) + apply_Q(sys, yk, zeta) +
                     apply_Q(sys, zeta, yk) + apply_Q(sys, zeta, zeta));
  return f;
}

// dF/dzeta; by bilinearity Q(y^k) + Q(zeta) = Q(y^k + zeta), and likewise for
// the transposed pairing, so two sparse evaluations suffice.
inline SpMat jacobian(const AssembledSystem& sys, double h, const VecX& yk,
                      const VecX& zeta) {
  SpMat j = sys.M + (0.5 * h) * sys.K;
  const VecX s = yk + zeta;
  j += (0.25 * h) * eval_Q(sys, s);
  j += (0.25 * h) * eval_Qdagger(sys, s);
  return j;
}

namespace detail {

struct NewtonWorkspace {
  Eigen::SparseLU<SpMat> solver;
  bool analyzed = false;
};

inline VecX newton_step(const AssembledSystem& sys, double h, const VecX& yk,
                        const NewtonSettings& settings, NewtonWorkspace& ws,
                        int* iters_out, double* residual_out) {
  const double tol =
      settings.effective_tol_abs(sys.dof_count) +
      settings.tol_rel * residual(sys, h, yk, yk).norm();
  VecX zeta = yk;
  VecX f = residual(sys, h, yk, zeta);
  int it = 0;
  while (f.norm() > tol) {
    if (it >= settings.max_iter)
      throw SolverError("Newton iteration did not converge", -1, f.norm());
    SpMat j = jacobian(sys, h, yk, zeta);
    if (!ws.analyzed) {
      ws.solver.analyzePattern(j);
      ws.analyzed = true;
    }
    ws.solver.factorize(j);
    if (ws.solver.info() != Eigen::Success)
      throw SolverError("Newton Jacobian factorization failed", -1, f.norm());
    zeta -= ws.solver.solve(f);
    f = residual(sys, h, yk, zeta);
    ++it;
  }
  if (iters_out) *iters_out = it;
  if (residual_out) *residual_out = f.norm();
  return zeta;
}

}  // namespace detail

inline VecX step(const AssembledSystem& sys, double h, const VecX& yk,
                 const NewtonSettings& settings, int* iters_out = nullptr,
                 double* residual_out = nullptr) {
  detail::NewtonWorkspace ws;
  return detail::newton_step(sys, h, yk, settings, ws, iters_out,
                             residual_out);
}

inline Trajectory simulate(const BeamParameters& params, const Mesh& mesh,
                           const TimeGrid& grid, const Mat6& K_feedback,
                           const VecX& y0,
                           const NewtonSettings& settings = {}) {
  grid.validate();
  auto sys = std::make_shared<AssembledSystem>(assemble(params, mesh,
                                                        K_feedback));
  if (y0.size() != sys->dof_count)
    throw ShapeError("simulate: initial state size does not match the mesh");

  Trajectory traj;
  traj.grid = grid;
  traj.system = sys;
  traj.states.reserve(grid.steps);
  traj.newton_iters.reserve(grid.steps - 1);
  traj.residuals.reserve(grid.steps - 1);
  traj.states.push_back(y0);

  detail::NewtonWorkspace ws;
  const double h = grid.h();
  for (int k = 0; k + 1 < grid.steps; ++k) {
    int iters = 0;
    double res = 0.0;
    try {
      traj.states.push_back(detail::newton_step(*sys, h, traj.states.back(),
                                                settings, ws, &iters, &res));
    } catch (const SolverError& e) {
      throw SolverError(std::string(e.what()) + " at step " +
                            std::to_string(k + 1),
                        k + 1, e.last_residual);
    }
    traj.newton_iters.push_back(iters);
    traj.residuals.push_back(res);
  }
  return traj;
}

}  // namespace igeb
