#pragma once

// Uniform quadratic-element mesh on [0, ell]: element e (0-based) spans
// [x_{2e}, x_{2e+2}] with nodes at both ends and the midpoint, so Ne elements
// give Nx = 2 Ne + 1 nodes spaced he/2 apart.

#include "igeb/errors.hpp"

namespace igeb {

struct Mesh {
  double length = 1.0;
  int elements = 1;

  void validate() const {
    if (!(length > 0.0)) throw ParameterError("mesh length must be positive");
    if (elements < 1) throw ParameterError("mesh needs at least one element");
  }

  int node_count() const { return 2 * elements + 1; }
  double he() const { return length / elements; }
  double node_x(int a) const { return 0.5 * he() * a; }           // a = 0..2Ne
  double element_midpoint(int e) const { return node_x(2 * e + 1); }

  // Degrees of freedom: 12 per node, minus the six clamped velocities at x=0.
  int full_dof_count() const { return 12 * node_count(); }
  int reduced_dof_count() const { return full_dof_count() - 6; }
};

// 1-based component/node to 1-based full index, matching the classical
// FEM bookkeeping eta(i, k) = 12 (k - 1) + i.
inline int eta(int i, int k) { return 12 * (k - 1) + i; }

// Same map on the clamped (reduced) numbering; valid for eta(i,k) > 6.
inline int eta_bar(int i, int k) { return eta(i, k) - 6; }

// 1-based local element dof p = 1..36 of element e = 1..Ne to full index.
inline int element_dof(int p, int e) { return 24 * (e - 1) + p; }

}  // namespace igeb
