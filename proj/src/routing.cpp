#include "ossp/routing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ossp/labelset.hpp"

namespace ossp {

namespace {

constexpr Real kExitCost = 1e-12;  // target offramp absorption, keeps A5' intact

std::string lane_tag(int c, int l) { return "c" + std::to_string(c) + "l" + std::to_string(l); }

}  // namespace

int LaneNetwork::add_node(int lane, Real x, const std::string& segment,
                          const std::string& tag) {
  if (by_tag_.count(tag)) throw ModelError("duplicate node tag: " + tag);
  int id = static_cast<int>(nodes.size());
  nodes.push_back({lane, x, segment, tag});
  by_tag_[tag] = id;
  return id;
}

int LaneNetwork::node_id(const std::string& tag) const {
  auto it = by_tag_.find(tag);
  if (it == by_tag_.end()) throw ModelError("unknown node tag: " + tag);
  return it->second;
}

OsspModel LaneNetwork::compile() const {
  OsspModel m;
  m.n = static_cast<int>(nodes.size());
  m.actions.resize(m.n);
  for (const auto& a : arcs)
    m.actions[a.from].push_back(FiniteAction{a.cost, {{a.to, 1.0}}});
  for (const auto& md : modes) {
    bool stay_is_forward = false;
    for (const auto& a : arcs)
      if (a.from == md.from && a.to == md.stay) stay_is_forward = true;
    if (!stay_is_forward)
      throw ModelError("lane-change mode at " + nodes[md.from].tag +
                       " does not stay on the forward arc");
    UrgencyMode u;
    u.stay = md.stay;
    u.swtch = md.swtch;
    u.curve = md.curve;
    if (!md.curve.smooth()) u.support = md.curve.support_points();
    m.actions[md.from].push_back(std::move(u));
  }
  if (target < 0 || target >= m.n) throw ModelError("network has no target node");
  m.actions[target].push_back(FiniteAction{kExitCost, {{m.target(), 1.0}}});
  m.labels.reserve(m.n + 1);
  for (const auto& nd : nodes) m.labels.push_back(nd.tag);
  m.labels.push_back("t");
  return m;
}

std::vector<std::vector<std::pair<int, Real>>> LaneNetwork::sp_arcs() const {
  std::vector<std::vector<std::pair<int, Real>>> out(nodes.size() + 1);
  for (const auto& a : arcs) out[a.from].push_back({a.to, a.cost});
  for (const auto& md : modes) out[md.from].push_back({md.swtch, md.curve(1.0)});
  out[target].push_back({static_cast<int>(nodes.size()), kExitCost});
  return out;
}

namespace {

CostCurve highway_curve(const HighwayConfig& cfg, Real K0) {
  Real ptilde = 1.0 - std::exp(-cfg.alpha * cfg.D);
  switch (cfg.family) {
    case LsmFamily::Jones:
      return jones_cost(K0, cfg.alpha, cfg.D, cfg.g1, cfg.g2);
    case LsmFamily::Quadratic:
      return quadratic_cost(cfg.beta, K0);
    case LsmFamily::Escalating:
      return escalating_cost(K0, {ptilde, cfg.p2, 1.0}, {ptilde * cfg.g1, cfg.Y2, cfg.Y3});
    case LsmFamily::Rbc: {
      auto esc = escalating_cost(K0, {ptilde, cfg.p2, 1.0}, {ptilde * cfg.g1, cfg.Y2, cfg.Y3});
      return rbc_cost(rbc_fit(K0, {cfg.p2, esc(cfg.p2)}, esc(1.0), cfg.rbc_delta));
    }
  }
  throw ModelError("unknown LSM family");
}

}  // namespace

LaneNetwork build_highway(const HighwayConfig& cfg) {
  int cols = static_cast<int>(std::llround(cfg.length_m / cfg.D));
  if (cols < 2 || std::abs(cols * cfg.D - cfg.length_m) > 1e-9)
    throw ModelError("highway length must be a multiple of D");
  int L = cfg.lanes;
  int tl = cfg.target_lane < 0 ? L - 1 : cfg.target_lane;
  if (L < 1 || tl < 0 || tl >= L) throw ModelError("bad lane configuration");

  LaneNetwork net;
  net.D = cfg.D;

  // cells of length D; nodes at cell centers, columns counted from the start
  for (int c = 0; c < cols; ++c)
    for (int l = 0; l < L; ++l)
      net.add_node(l, (c + 0.5) * cfg.D, "lane" + std::to_string(l), lane_tag(c, l));
  auto id = [&](int c, int l) { return c * L + l; };
  net.target = id(cols - 1, tl);

  // virtual post-target columns: enough room for forced merges from any lane
  auto vtag = [&](int k, int l) {
    return "v" + std::to_string(k) + "l" + std::to_string(l);
  };
  for (int k = 1; k < L; ++k)
    for (int l = 0; l < L; ++l)
      if (l != tl) net.add_node(l, (cols - 1 + k + 0.5) * cfg.D, "virtual", vtag(k, l));
  auto vid = [&](int k, int l) { return net.node_id(vtag(k, l)); };

  int c_hash = (cols - 1) - static_cast<int>(std::llround(cfg.onramp_from_target_m / cfg.D));
  auto g_of = [&](int c, int l) {
    Real g = cfg.D * (1.0 + l * cfg.eps);
    if (l == 0 && c >= 0 && std::abs(c - c_hash) <= 1) g += cfg.mu;  // merge slow-down
    return g;
  };
  if (c_hash >= 1) net.poi["onramp"] = id(c_hash, 0);

  // real columns
  for (int c = 0; c < cols; ++c)
    for (int l = 0; l < L; ++l) {
      if (c == cols - 1 && l == tl) continue;  // the target absorbs
      int fwd = c < cols - 1 ? id(c + 1, l) : vid(1, l);
      Real g = g_of(c, l);
      net.arcs.push_back({id(c, l), fwd, g});
      for (int dl : {1, -1}) {
        int l2 = l + dl;
        if (l2 < 0 || l2 >= L) continue;
        int sw = c < cols - 1 ? id(c + 1, l2) : (l2 == tl ? net.target : vid(1, l2));
        net.modes.push_back({id(c, l), fwd, sw, highway_curve(cfg, g)});
      }
    }

  // virtual columns: forward + target-ward LSMs only, then a forced-merge chain
  for (int k = 1; k < L; ++k)
    for (int l = 0; l < L; ++l) {
      if (l == tl) continue;
      int dir = tl > l ? 1 : -1;
      Real g = cfg.D * (1.0 + l * cfg.eps);
      if (k < L - 1) {
        int fwd = vid(k + 1, l);
        int sw = l + dir == tl ? net.target : vid(k + 1, l + dir);
        net.arcs.push_back({vid(k, l), fwd, g});
        net.modes.push_back({vid(k, l), fwd, sw, highway_curve(cfg, g)});
      } else {
        int to = l + dir == tl ? net.target : vid(k, l + dir);
        net.arcs.push_back({vid(k, l), to, highway_curve(cfg, g)(1.0)});
      }
    }
  return net;
}

LaneNetwork build_roundabout(const RoundaboutConfig& cfg) {
  if (cfg.beta_app > cfg.gamma_app)
    throw CausalityRefused("lane-change cost has beta > gamma + f; not monotone causal");
  LaneNetwork net;
  net.D = 10;

  auto Otag = [](int k) { return "O" + std::to_string(k); };
  auto Itag = [](int k) { return "I" + std::to_string(k); };
  auto Mtag = [](int j, int k) { return "M" + std::to_string(j) + "_" + std::to_string(k); };

  for (int k = 0; k < cfg.outer; ++k) net.add_node(0, k, "outer", Otag(k));
  for (int k = 0; k < cfg.inner; ++k) net.add_node(0, k, "inner", Itag(k));
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < cfg.mini; ++k)
      net.add_node(0, k, "mini" + std::to_string(j), Mtag(j, k));
  net.target = net.add_node(1, 0, "exit", "T");

  auto O = [&](int k) { return net.node_id(Otag((k % cfg.outer + cfg.outer) % cfg.outer)); };
  auto I = [&](int k) { return net.node_id(Itag((k % cfg.inner + cfg.inner) % cfg.inner)); };
  auto M = [&](int j, int k) { return net.node_id(Mtag(j, k)); };

  for (int k = 0; k < cfg.outer; ++k) net.arcs.push_back({O(k), O(k + 1), cfg.gamma_outer});
  for (int k = 0; k < cfg.inner; ++k) net.arcs.push_back({I(k), I(k + 1), cfg.gamma_inner});

  // mini-ring attachment slots: road entry, hand-off to inner, pick-up from
  // inner, hand-off back to outer
  int s_in = 1, s_from = cfg.mini / 2, s_out = cfg.mini - 1;
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < cfg.mini; ++k)
      net.arcs.push_back({M(j, k), M(j, (k + 1) % cfg.mini), cfg.gamma_mini});
    int a = cfg.outer_anchor[j], b = cfg.inner_anchor[j];
    net.arcs.push_back({O(a), M(j, 0), cfg.gamma_outer});
    net.arcs.push_back({M(j, s_in), I(b), cfg.gamma_mini});
    net.arcs.push_back({I(b), M(j, s_from), cfg.gamma_inner});
    net.arcs.push_back({M(j, s_out), O(a + 1), cfg.gamma_mini});
  }

  // target offramp on the exit road, reachable from the outer ring only
  net.arcs.push_back(
      {O(cfg.outer_anchor[cfg.exit_road] + cfg.exit_offset), net.target, cfg.gamma_outer});

  // two-lane approaches; the left lane (1) feeds the outer ring, the right (0)
  // feeds the road's mini-ring
  for (int j = 0; j < 3; ++j) {
    auto Atag = [&](int c, int l) {
      return "R" + std::to_string(j) + "c" + std::to_string(c) + (l ? "L" : "R");
    };
    for (int c = 0; c < cfg.approach_cols; ++c)
      for (int l = 0; l < 2; ++l)
        net.add_node(l, c * net.D, "approach" + std::to_string(j), Atag(c, l));
    for (int c = 0; c < cfg.approach_cols; ++c)
      for (int l = 0; l < 2; ++l) {
        bool entrance = c == cfg.approach_cols - 1;
        int fwd = entrance ? (l ? O(cfg.outer_anchor[j]) : M(j, 0))
                           : net.node_id(Atag(c + 1, l));
        int sw = entrance ? (l ? M(j, 0) : O(cfg.outer_anchor[j]))
                          : net.node_id(Atag(c + 1, 1 - l));
        Real f = entrance ? cfg.f : 0.0;
        int from = net.node_id(Atag(c, l));
        net.arcs.push_back({from, fwd, cfg.gamma_app + f});
        net.modes.push_back({from, fwd, sw, quadratic_cost(cfg.beta_app, cfg.gamma_app, f)});
      }
    net.poi["outer_entry" + std::to_string(j)] = O(cfg.outer_anchor[j]);
    net.poi["mini_entry" + std::to_string(j)] = M(j, 0);
    net.poi["probe" + std::to_string(j)] = net.node_id(Atag(cfg.approach_cols - 1, 0));
  }
  return net;
}

RingChoice entry_preference(const LaneNetwork& net, const ValueFunction& u, int road) {
  Real outer = u[net.poi.at("outer_entry" + std::to_string(road))];
  Real inner = u[net.poi.at("mini_entry" + std::to_string(road))];
  return outer <= inner ? RingChoice::Outer : RingChoice::Inner;
}

StpSpComparison compare_stp_sp(const LaneNetwork& net, bool include_virtual) {
  auto m = net.compile();
  StpSpComparison out;
  out.stp = dijkstra_solve(m).values;
  out.sp = deterministic_shortest_path(net.sp_arcs(), m.target()).first;
  for (int i = 0; i < m.n; ++i) {
    if (i == net.target) continue;
    if (!include_virtual && net.nodes[i].segment == "virtual") continue;
    out.node_ids.push_back(i);
    out.reduction.push_back((out.sp[i] - out.stp[i]) / out.sp[i]);
  }
  if (out.reduction.empty()) return out;
  std::vector<Real> sorted = out.reduction;
  std::sort(sorted.begin(), sorted.end());
  size_t n = sorted.size();
  out.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  out.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  out.max = sorted.back();
  return out;
}

}  // namespace ossp
