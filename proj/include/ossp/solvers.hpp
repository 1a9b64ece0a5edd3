#pragma once

#include "ossp/model.hpp"

namespace ossp {

struct SolveResult {
  ValueFunction values;
  Policy policy;
  int iterations = 0;  // sweeps that changed at least one value
};

// Jacobi-style value iteration from W0 = +inf (0 at target).  `iterations` counts
// effective sweeps; throws NonConvergence when max_iters runs out.
SolveResult value_iteration(const OsspModel& m, Real tol = 1e-10, int max_iters = -1);

// Gauss-Seidel relaxation sweeping `ordering` (a permutation of the non-target nodes).
SolveResult gauss_seidel_solve(const OsspModel& m, const std::vector<int>& ordering,
                               Real tol = 1e-10, int max_sweeps = -1);

// max_i |U_i - min_a F_i(a, U)| over nodes with finite U_i.
Real bellman_residual(const OsspModel& m, const ValueFunction& u);

}  // namespace ossp
