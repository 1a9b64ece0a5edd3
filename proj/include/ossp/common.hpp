#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace ossp {

using Real = double;

// +inf is a distinguished sentinel ("not yet reachable"), not a large float.
inline constexpr Real kInf = std::numeric_limits<Real>::infinity();

inline bool is_inf(Real x) { return std::isinf(x); }

// Saturating addition: anything + inf = inf.
inline Real sat_add(Real a, Real b) {
  if (std::isinf(a) || std::isinf(b)) return kInf;
  return a + b;
}

struct NonConvergence : std::runtime_error {
  Real residual;
  explicit NonConvergence(Real r)
      : std::runtime_error("iteration budget exhausted, residual " + std::to_string(r)),
        residual(r) {}
};

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by builders/solvers that require a monotone-causality certificate
// which the given costs/geometry do not provide.
struct CausalityRefused : ModelError {
  using ModelError::ModelError;
};

// Golden-section minimization of a unimodal f on [a,b].
// Returns (argmin, min). f may be merely Lipschitz, so no derivative methods.
template <class F>
std::pair<Real, Real> golden_min(F&& f, Real a, Real b, Real tol = 1e-10) {
  static const Real invphi = (std::sqrt(5.0) - 1.0) / 2.0;   // 1/phi
  static const Real invphi2 = (3.0 - std::sqrt(5.0)) / 2.0;  // 1/phi^2
  Real h = b - a;
  if (h <= tol) {
    Real m = 0.5 * (a + b);
    return {m, f(m)};
  }
  int n = static_cast<int>(std::ceil(std::log(tol / h) / std::log(invphi)));
  Real c = a + invphi2 * h, d = a + invphi * h;
  Real yc = f(c), yd = f(d);
  for (int k = 0; k < n; ++k) {
    if (yc < yd) {
      b = d;
      d = c;
      yd = yc;
      h = invphi * h;
      c = a + invphi2 * h;
      yc = f(c);
    } else {
      a = c;
      c = d;
      yc = yd;
      h = invphi * h;
      d = a + invphi * h;
      yd = f(d);
    }
  }
  Real m = yc < yd ? 0.5 * (a + d) : 0.5 * (c + b);
  return {m, f(m)};
}

}  // namespace ossp
