#pragma once

#include "ossp/model.hpp"

namespace ossp {

struct InvalidDelta : ModelError {
  using ModelError::ModelError;
};

struct SolveTrace {
  std::vector<int> acceptance_order;   // node indices in acceptance order (incl. target)
  std::vector<int> update_count;       // per-node number of successful relaxations
  long long total_updates = 0;
};

struct LabelSetResult {
  ValueFunction values;
  Policy policy;
  SolveTrace trace;
};

// OSSP Dijkstra: accept the smallest tentative node (ties by node index), update
// predecessors only through actions whose entire support is already accepted.
// Interval urgency modes admit p=0 once the stay successor is accepted and p=1 once
// the switch successor is; simplex modes minimize over the accepted face.
// Correct only on (delta-)monotone-causal models; not enforced.
LabelSetResult dijkstra_solve(const OsspModel& m);

// Dial's method: buckets of width delta anchored at 0, FIFO within a bucket, the
// whole lowest nonempty bucket accepted simultaneously.
LabelSetResult dial_solve(const OsspModel& m, Real delta);

// Classic deterministic shortest path to `target` over arcs[i] = {(j, C_ij)}.
// Policy stores the chosen arc index per node.
std::pair<ValueFunction, Policy> deterministic_shortest_path(
    const std::vector<std::vector<std::pair<int, Real>>>& arcs, int target);

}  // namespace ossp
