#pragma once

#include "ossp/model.hpp"

namespace ossp {

struct DegenerateSelfLoop : ModelError {
  using ModelError::ModelError;
};
struct DegenerateProjection : ModelError {
  using ModelError::ModelError;
};
struct OutsideHull : ModelError {
  using ModelError::ModelError;
};

// A (relaxed) action embedded into the probability simplex over an ordered
// successor list.  action_index points back into the node's action list;
// urgency_p >= 0 marks points that came from a finite-support urgency mode.
struct SimplexPoint {
  std::vector<Real> xi;
  Real cost = 0;
  int action_index = -1;
  Real urgency_p = -1;
};

struct Embedding {
  std::vector<int> successors;      // N(x_i), sorted by node index
  std::vector<SimplexPoint> points; // deterministically pruned (duplicates collapsed)
  std::vector<int> duplicate_actions;  // dropped as transition-equivalent
};

struct EnvelopeResult {
  Real value = kInf;                          // C-check(xi)
  std::vector<std::pair<int, Real>> mixture;  // (point index, lambda)
  bool extreme_point = false;  // meaningful when the query is an input point
};

// Self-transition removal (post-A6 display): C~ = C/(1-p_ii), p~_ij = p_ij/(1-p_ii).
OsspModel remove_self_transitions(const OsspModel& m);

// Map a node's finite actions (and, when include_modes, the table entries of its
// finite-support urgency modes) to simplex points over the union successor list.
// interval_samples > 0 additionally samples interval-supported modes at that many
// equispaced urgencies (used by the causality checkers).
Embedding embed_actions(const OsspModel& m, int node, bool include_modes = true,
                        int interval_samples = 0);

// Lower convex envelope of the lifted points {(xi_r, C_r)} at `query` (Eq 2.5).
// Solved by basis enumeration over affinely independent subsets after restricting
// to points supported inside the query's support; throws OutsideHull when the
// query is not representable.
EnvelopeResult convexified_cost(const std::vector<SimplexPoint>& points,
                                const std::vector<Real>& query);

enum class PruneReason { Useful, Duplicate, Dominated, Replaceable };

// Classify each point: extreme points of the epigraph of C-check stay useful.
std::vector<PruneReason> classify_points(const std::vector<SimplexPoint>& points);

// Indices of points that are extreme points of the epigraph of C-check.
std::vector<int> useful_actions(const std::vector<SimplexPoint>& points);

// gamma_{r,j} = xi_j / (1 - xi_r), gamma_{r,r} = 0.
std::vector<Real> oblique_projection(const std::vector<Real>& xi, int r);

struct ModeList {
  std::vector<std::vector<int>> modes;         // maximal successor-support sets
  std::vector<std::vector<int>> action_modes;  // per action: containing modes
};

ModeList extract_modes(const OsspModel& m, int node);

struct PruneReport {
  struct Entry {
    int node, action;
    Real urgency_p;  // -1 for whole actions, else the dropped mode table entry
    PruneReason reason;
  };
  std::vector<Entry> removed;
};

OsspModel prune_model(const OsspModel& m, PruneReport* report = nullptr);

}  // namespace ossp
