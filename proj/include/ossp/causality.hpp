#pragma once

#include <functional>

#include "ossp/model.hpp"

namespace ossp {

struct NotMonotoneCausal : ModelError {
  using ModelError::ModelError;
};
struct MissingDeterministicAction : ModelError {
  using ModelError::ModelError;
};
struct ConditionNotViolated : ModelError {
  using ModelError::ModelError;
};

enum class Criterion { Improved, Simplified };

struct CausalityViolation {
  int node = -1;
  int action = -1;
  Real urgency_p = -1;  // >= 0 when the violating point is a mode table/sample entry
  int r = -1;           // successor node index of the binding constraint
  Real gap = 0;         // RHS - LHS of the violated inequality, > 0
};

struct CausalityReport {
  Criterion criterion = Criterion::Improved;
  Real delta = 0;
  bool satisfied = true;
  std::vector<CausalityViolation> violations;  // sorted by node, worst gap first
  std::vector<Real> node_max_delta;            // delta* per node; +inf = deterministic-only
  Real max_delta = kInf;                       // Delta(X) = min over nodes
};

// Theorem 3.1, Eq (3.3): C(x,a) >= (1 - xi_r) Ccheck(gamma_r) + xi_r * delta for every
// r in the action's support; deterministic actions must satisfy C >= delta.
// Interval urgency modes are sampled at `interval_samples` urgencies.
CausalityReport check_mc_improved(const OsspModel& m, Real delta,
                                  int interval_samples = 1001);

// Theorem 3.2, Eq (3.4): C(x,a) >= sum_{j != r} xi_j C_j + xi_r * delta, with C_j the
// cheapest deterministic action to z_j.  Throws MissingDeterministicAction when the
// OSSP property (Eq 2.6) fails at a stochastic successor.
CausalityReport check_mc_simplified(const OsspModel& m, Real delta,
                                    int interval_samples = 1001);

// Proposition 3.3 (m = 2): delta* = min(delta_1, delta_2) via the finite quotients of
// Eq (3.5); smooth interval modes use delta_1 = K(1) - K'(1), delta_2 = K(0) + K'(0).
// Requires all of the node's actions to lead into a common two-successor set and the
// delta = 0 precondition (throws NotMonotoneCausal otherwise).
Real max_delta_m2(const OsspModel& m, int node);

// Delta(X): min over nodes of the per-node maximal admissible delta; nodes with only
// deterministic actions contribute +inf (spec convention).
Real model_max_delta(const OsspModel& m, int interval_samples = 1001);

struct HomogeneousVerdict {
  bool eq36_holds = true;
  bool eq37_holds = true;   // checked for m = 2 only (Prop 3.6 implication)
  Real worst_margin36 = kInf;
  Real worst_margin37 = kInf;
};

// Proposition 3.6: sample Eq (3.6), dC/dxi_j - (d-1) C > delta, over a simplex grid;
// gradient via callback or central differences (step 1e-6).  For m = 2 additionally
// checks Eq (3.7): C(xi) >= max(C1 xi1 + delta xi2, delta xi1 + C2 xi2).
HomogeneousVerdict check_homogeneous_mc(
    const std::function<Real(const std::vector<Real>&)>& C, int m, Real degree,
    Real delta, int samples,
    const std::function<std::vector<Real>(const std::vector<Real>&)>& grad = nullptr);

// Theorem 3.5 sharpness construction.  Nodes: x_i = 0, z_1..z_m = 1..m, target m+1.
// U(z_r) = 2 delta + (Blow + Bhigh)/2, U(z_{j != r}) = 2 delta (costs floored at 1e-9
// to respect A5'); deterministic e_j actions cost 10x everything else.  r is 0-based
// into xi (default: last coordinate).  Throws ConditionNotViolated when
// C_a >= (1 - xi_r) C_tilde + xi_r delta.
OsspModel build_sharpness_counterexample(int m, const std::vector<Real>& xi, Real C_a,
                                         Real C_tilde, Real delta, int r = -1);

}  // namespace ossp
