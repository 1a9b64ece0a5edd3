#include "ossp/solvers.hpp"

#include <cmath>

namespace ossp {

namespace {

ValueFunction initial_values(const OsspModel& m) {
  ValueFunction w;
  w.values.assign(m.n + 1, kInf);
  w.values[m.n] = 0;
  return w;
}

// Sup-norm difference under the +inf sentinel: inf vs inf contributes 0,
// inf vs finite contributes +inf (the sweep is not converged).
Real diff(Real a, Real b) {
  if (is_inf(a) && is_inf(b)) return 0;
  if (is_inf(a) || is_inf(b)) return kInf;
  return std::abs(a - b);
}

Policy greedy_policy(const OsspModel& m, const ValueFunction& w) {
  Policy pol;
  pol.choices.resize(m.n);
  for (int i = 0; i < m.n; ++i)
    if (!is_inf(w.values[i])) pol.choices[i] = bellman_update(m, i, w).second;
  return pol;
}

}  // namespace

SolveResult value_iteration(const OsspModel& m, Real tol, int max_iters) {
  if (max_iters < 0) max_iters = 10 * std::max(m.n, 100);
  ValueFunction w = initial_values(m);
  int effective = 0;
  Real resid = kInf;
  for (int it = 0; it < max_iters; ++it) {
    ValueFunction next = w;
    resid = 0;
    for (int i = 0; i < m.n; ++i) {
      next.values[i] = bellman_update(m, i, w).first;
      resid = std::max(resid, diff(next.values[i], w.values[i]));
    }
    w = std::move(next);
    if (resid > tol) {
      ++effective;
    } else {
      Policy pol = greedy_policy(m, w);
      return {std::move(w), std::move(pol), effective};
    }
  }
  throw NonConvergence(resid);
}

SolveResult gauss_seidel_solve(const OsspModel& m, const std::vector<int>& ordering,
                               Real tol, int max_sweeps) {
  if (max_sweeps < 0) max_sweeps = 10 * std::max(m.n, 100);
  ValueFunction w = initial_values(m);
  int effective = 0;
  for (int it = 0; it < max_sweeps; ++it) {
    Real resid = 0;
    for (int i : ordering) {
      Real v = bellman_update(m, i, w).first;
      resid = std::max(resid, diff(v, w.values[i]));
      w.values[i] = v;
    }
    if (resid <= tol) {
      Policy pol = greedy_policy(m, w);
      return {std::move(w), std::move(pol), effective};
    }
    ++effective;
  }
  Real resid = 0;
  for (int i : ordering) resid = std::max(resid, diff(bellman_update(m, i, w).first, w.values[i]));
  throw NonConvergence(resid);
}

Real bellman_residual(const OsspModel& m, const ValueFunction& u) {
  Real r = 0;
  for (int i = 0; i < m.n; ++i) {
    if (is_inf(u.values[i])) continue;
    r = std::max(r, std::abs(u.values[i] - bellman_update(m, i, u).first));
  }
  return r;
}

}  // namespace ossp
