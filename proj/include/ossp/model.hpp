#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ossp/curve.hpp"

namespace ossp {

// Explicit action: positive cost, probability distribution over successors.
struct FiniteAction {
  Real cost = 0;
  std::vector<std::pair<int, Real>> transitions;  // (successor, prob > 0)

  bool deterministic() const { return transitions.size() == 1; }
};

// Parametric two-successor lane-change style mode with cost curve K(p);
// p = 0 stays, p = 1 switches.
struct UrgencyMode {
  int stay = -1, swtch = -1;
  CostCurve curve;
  std::vector<Real> support;  // finite increasing, contains 0 and 1; empty = [0,1]

  bool interval() const { return support.empty(); }
};

// Continuous mode over the simplex spanned by 2 or 3 successors (HJB semi-Lagrangian
// modes).  cost(xi) evaluates C^s at barycentric coordinates over `successors`.
struct SimplexAction {
  std::vector<int> successors;
  std::function<Real(const std::vector<Real>&)> cost;
};

using Action = std::variant<FiniteAction, UrgencyMode, SimplexAction>;

std::vector<int> successors_of(const Action& a);

struct OsspModel {
  int n = 0;  // non-target nodes are 0..n-1; target is node n
  std::vector<std::vector<Action>> actions;  // size n
  std::vector<std::string> labels;           // optional, size n+1 when present

  int target() const { return n; }
};

struct ValueFunction {
  std::vector<Real> values;  // size n+1, values[target] = 0

  Real operator[](int i) const { return values[i]; }
};

// Chosen action per node: index into the node's action list, plus the parameter
// (urgency p* or simplex coordinates) when the action is parametric.
struct PolicyChoice {
  int action = -1;
  Real p = -1;              // urgency modes
  std::vector<Real> xi;     // simplex actions
};

struct Policy {
  std::vector<PolicyChoice> choices;  // size n
};

// Minimize C^s(xi) + sum_j xi_j vals[j] over the simplex (golden-section, tol 1e-10).
// vals aligns with a.successors.  `allowed`, when given, restricts the support:
// coordinates with allowed[j] == 0 are pinned to zero (face-restricted updates).
std::pair<Real, std::vector<Real>> minimize_simplex(const SimplexAction& a,
                                                    const std::vector<Real>& vals,
                                                    const std::vector<char>* allowed = nullptr);

// F_i(a, W) = C + sum_j p_ij W_j (Eq 2.4); +inf if any successor value is +inf.
Real expected_cost(const FiniteAction& a, const std::vector<Real>& values);
Real expected_cost(const OsspModel& m, int node, int action, const ValueFunction& w);

// min over the node's action set; ties toward lowest action index, then smaller p.
std::pair<Real, PolicyChoice> bellman_update(const OsspModel& m, int node,
                                             const ValueFunction& w);

struct ValidationIssue {
  enum class Code {
    NonPositiveCost,
    BadProbability,
    SelfTransition,
    BadIndex,
    EmptyActionSet,
    TargetUnreachable,
    NotOssp,
  };
  Code code;
  int node = -1, action = -1;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  bool hard_ok() const;  // everything except reachability / OSSP-property flags
};

ValidationReport validate_model(const OsspModel& m);

// Cycle detection on the union transition digraph; topo order (target last ordering
// convention: returned order lists non-target nodes such that every arc goes to a
// later node or the target).
std::pair<bool, std::vector<int>> is_explicitly_causal(const OsspModel& m);

void to_json(nlohmann::json& j, const OsspModel& m);
void from_json(const nlohmann::json& j, OsspModel& m);

OsspModel load_model(const std::string& path);       // rejects hard violations
void save_model(const OsspModel& m, const std::string& path);

}  // namespace ossp
