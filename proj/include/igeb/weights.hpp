#pragma once

// Scalar weight functions q(x) on [0, ell] used to build Lyapunov candidates.
// Both families satisfy the slope bounds that the interior dissipation
// argument needs:
//   increasing-positive family:  q' (x) > eta (q(x) - q(0)),
//   increasing-negative family:  q' (x) > eta (q(ell) - q(x)).
// A ShiftedWeight w(x) = q(x) - offset places the zero of the weight at a
// chosen anchor (typically one end of the beam).

#include <cmath>

#include "igeb/errors.hpp"

namespace igeb {

enum class WeightKind { exp_pos, exp_neg, poly_minus, poly_plus, constant };

struct WeightFunction {
  WeightKind kind = WeightKind::exp_pos;
  double a = 0.0;   // exp families: value anchor at x = 0
  double b = 1.0;   // exp families: value anchor at x = ell
  double eta = 1.0;
  double ell = 1.0;
  int n = 2;        // poly families: exponent

  double value(double x) const {
    switch (kind) {
      case WeightKind::exp_pos:
        return a + std::exp(-eta * (ell - x)) * (x / ell) * (b - a);
      case WeightKind::exp_neg:
        return -std::exp(-eta * x) * (b - a) * (1.0 - x / ell) + b;
      case WeightKind::poly_minus: {
        const double base = 0.5 - (eta / n) * x;
        return -std::pow(base, n);
      }
      case WeightKind::poly_plus: {
        const double base = 0.5 + (eta / n) * (x - ell);
        return std::pow(2.0, -n) + std::pow(base, n);
      }
      case WeightKind::constant:
        return a;
    }
    throw ParameterError("weight: unknown kind");
  }

  double deriv(double x) const {
    switch (kind) {
      case WeightKind::exp_pos:
        return (b - a) * std::exp(-eta * (ell - x)) * (1.0 + eta * x) / ell;
      case WeightKind::exp_neg:
        return (b - a) * std::exp(-eta * x) * (eta * (ell - x) + 1.0) / ell;
      case WeightKind::poly_minus: {
        const double base = 0.5 - (eta / n) * x;
        return eta * std::pow(base, n - 1);
      }
      case WeightKind::poly_plus: {
        const double base = 0.5 + (eta / n) * (x - ell);
        return eta * std::pow(base, n - 1);
      }
      case WeightKind::constant:
        return 0.0;
    }
    throw ParameterError("weight: unknown kind");
  }
};

// Exponential family. sign = +1 selects the increasing-positive profile
// (requires 0 <= a < b); sign = -1 the increasing-negative one (a < b <= 0).
inline WeightFunction exp_weight(double a, double b, double eta, double ell,
                                 int sign) {
  if (!(ell > 0.0)) throw ParameterError("weight: ell must be > 0");
  if (!(eta > 0.0)) throw ParameterError("weight: eta must be > 0");
  WeightFunction w;
  w.a = a;
  w.b = b;
  w.eta = eta;
  w.ell = ell;
  if (sign > 0) {
    if (!(a >= 0.0 && a < b))
      throw ParameterError("exp_weight(+): needs 0 <= a < b");
    w.kind = WeightKind::exp_pos;
  } else {
    if (!(a < b && b <= 0.0))
      throw ParameterError("exp_weight(-): needs a < b <= 0");
    w.kind = WeightKind::exp_neg;
  }
  return w;
}

// Polynomial family of exponent n; admissible only while 2 eta ell < n.
// sign = -1 gives p(x) = -(1/2 - eta x / n)^n (negative on [0, n/(2 eta))),
// sign = +1 gives p(x) = 2^{-n} + (1/2 + eta (x - ell)/n)^n (positive).
inline WeightFunction poly_weight(int n, double eta, double ell, int sign) {
  if (!(ell > 0.0)) throw ParameterError("weight: ell must be > 0");
  if (!(eta > 0.0)) throw ParameterError("weight: eta must be > 0");
  if (n < 2) throw ParameterError("poly_weight: exponent must be >= 2");
  if (!(2.0 * eta * ell < n))
    throw ParameterError("poly_weight: requires 2 eta ell < n");
  WeightFunction w;
  w.eta = eta;
  w.ell = ell;
  w.n = n;
  w.kind = sign > 0 ? WeightKind::poly_plus : WeightKind::poly_minus;
  return w;
}

// Degenerate constant profile (w' = 0); not admissible for a decay
// certificate, but useful to express the unweighted functional rho E.
inline WeightFunction constant_weight(double value, double ell) {
  if (!(ell > 0.0)) throw ParameterError("weight: ell must be > 0");
  WeightFunction w;
  w.kind = WeightKind::constant;
  w.a = value;
  w.b = value;
  w.ell = ell;
  return w;
}

// w(x) = q(x) - offset. The offset vanishes at whichever anchor the helpers
// pick; network couplings need explicit control over the junction value.
struct ShiftedWeight {
  WeightFunction q;
  double offset = 0.0;

  double w(double x) const { return q.value(x) - offset; }
  double wprime(double x) const { return q.deriv(x); }
  double ell() const { return q.ell; }
};

inline ShiftedWeight shift_at_start(const WeightFunction& q) {
  return {q, q.value(0.0)};
}

inline ShiftedWeight shift_at_end(const WeightFunction& q) {
  return {q, q.value(q.ell)};
}

inline ShiftedWeight shift_by(const WeightFunction& q, double offset) {
  return {q, offset};
}

}  // namespace igeb
