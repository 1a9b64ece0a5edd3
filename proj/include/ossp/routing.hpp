#pragma once

#include <array>
#include <map>

#include "ossp/model.hpp"

namespace ossp {

struct LaneNode {
  int lane = 0;
  Real x = 0;           // longitudinal position in meters (schematic index on rings)
  std::string segment;  // "lane0", "virtual", "outer", "inner", "mini1", "approach2", ...
  std::string tag;      // unique name
};

struct ForwardArc {
  int from = -1, to = -1;
  Real cost = 0;
};

struct LaneChangeMode {
  int from = -1, stay = -1, swtch = -1;
  CostCurve curve;
};

// Lane-level road network: deterministic forward arcs plus parametric lane-change
// modes whose stay successor always coincides with the forward successor.
struct LaneNetwork {
  Real D = 10;  // cell length, meters
  std::vector<LaneNode> nodes;
  std::vector<ForwardArc> arcs;
  std::vector<LaneChangeMode> modes;
  int target = -1;
  std::map<std::string, int> poi;  // named points of interest (entries, onramp, probes)

  int add_node(int lane, Real x, const std::string& segment, const std::string& tag);
  int node_id(const std::string& tag) const;  // throws ModelError when unknown

  OsspModel compile() const;

  // Deterministic relaxation used for the SP baseline: forward arcs kept as-is,
  // every lane-change mode pinned at the forced cost K(1).
  std::vector<std::vector<std::pair<int, Real>>> sp_arcs() const;

 private:
  std::map<std::string, int> by_tag_;
};

enum class LsmFamily { Escalating, Jones, Quadratic, Rbc };

struct HighwayConfig {
  Real length_m = 1500;
  Real D = 10;
  int lanes = 3;
  Real eps = 0.1;    // stay-in-lane cost g = D (1 + i eps), lanes enumerated right-to-left
  Real alpha = 0.01;  // tentative-LSM success rate, ptilde = 1 - exp(-alpha D)
  Real g1 = 3;
  Real mu = 35;  // onramp slow-down surcharge on the right lane
  Real onramp_from_target_m = 1000;
  int target_lane = -1;  // -1 = leftmost
  LsmFamily family = LsmFamily::Escalating;
  Real p2 = 0.2, Y2 = 2, Y3 = 40;  // escalating tail, Example-1 defaults
  Real g2 = 40;                    // jones forced-LSM penalty
  Real beta = 2;                   // quadratic coefficient
  Real rbc_delta = 0;              // RBC construction delta
};

// Straight multi-lane highway with a target offramp in the final column and an
// onramp merge zone 1 km upstream of it.  Non-target final-column nodes feed a
// virtual post-target column block where only LSMs toward the target lane remain.
LaneNetwork build_highway(const HighwayConfig& cfg = {});

struct RoundaboutConfig {
  int outer = 24, inner = 12, mini = 4, approach_cols = 6;
  Real gamma_outer = 3, gamma_inner = 6.8, gamma_mini = 1, gamma_app = 1;
  Real beta_app = 1;
  Real f = 5;  // entry surcharge at the road entrance nodes
  // roads in order {N, SE, SW}; the outer ring is clockwise, the inner
  // counterclockwise, anchors give each road's attachment index on each ring
  std::array<int, 3> outer_anchor = {0, 9, 20};
  std::array<int, 3> inner_anchor = {0, 7, 2};
  int exit_road = 1;    // target sits on the SE exit's left lane
  int exit_offset = 2;  // the exit leaves the outer ring at anchor + offset
};

// Interconnected ("magic") roundabout: clockwise outer ring, counterclockwise
// inner ring, mini-rings bridging them at each road, two-lane approaches whose
// left lane enters the outer ring and right lane enters a mini-ring.
// Throws CausalityRefused when beta > gamma + f at any lane-change node.
LaneNetwork build_roundabout(const RoundaboutConfig& cfg = {});

enum class RingChoice { Outer, Inner };

// Which ring is cheaper to be in when entering from road `road` (0=N, 1=SE, 2=SW),
// judged by the value function at the road's two entry points.
RingChoice entry_preference(const LaneNetwork& net, const ValueFunction& u, int road);

struct StpSpComparison {
  Real median = 0, mean = 0, max = 0;
  std::vector<int> node_ids;    // nodes entering the aggregate
  std::vector<Real> reduction;  // (U_SP - U_STP) / U_SP, aligned with node_ids
  ValueFunction stp, sp;
};

// Solves the network twice (stochastic STP via Dijkstra, deterministic SP with
// lane changes at K(1)) and aggregates relative reductions over non-target nodes.
StpSpComparison compare_stp_sp(const LaneNetwork& net, bool include_virtual = false);

}  // namespace ossp
