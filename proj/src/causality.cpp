#include "ossp/causality.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ossp/pruning.hpp"

namespace ossp {

namespace {

bool is_vertex(const std::vector<Real>& xi, int* which = nullptr) {
  for (size_t j = 0; j < xi.size(); ++j)
    if (xi[j] > 1 - 1e-12) {
      if (which) *which = (int)j;
      return true;
    }
  return false;
}

// Cheapest deterministic cost per successor (embedding vertices).
std::map<int, Real> det_costs(const Embedding& emb) {
  std::map<int, Real> out;
  for (const auto& pt : emb.points) {
    int v;
    if (!is_vertex(pt.xi, &v)) continue;
    int node = emb.successors[v];
    auto it = out.find(node);
    if (it == out.end() || pt.cost < it->second) out[node] = pt.cost;
  }
  return out;
}

// Per-node context handed to the criterion callbacks; envelope values at vertices
// are cached because interval-mode samples query the same faces repeatedly.
struct NodeCtx {
  const Embedding& emb;
  std::map<int, Real> det;           // cheapest deterministic cost per successor
  std::map<int, Real> vertex_env;    // cached Ccheck(e_v) by coordinate slot

  explicit NodeCtx(const Embedding& e) : emb(e), det(det_costs(e)) {}

  Real env_at(const std::vector<Real>& gamma) {
    int v;
    if (is_vertex(gamma, &v)) {
      auto it = vertex_env.find(v);
      if (it != vertex_env.end()) return it->second;
      Real val = convexified_cost(emb.points, gamma).value;
      vertex_env[v] = val;
      return val;
    }
    return convexified_cost(emb.points, gamma).value;
  }
};

// Shared walk over all embedded points of all nodes.  `rhs` computes the
// delta-independent part of the bound for (point, r); ok=false skips it.
template <class Rhs>
CausalityReport run_check(const OsspModel& m, Real delta, int interval_samples,
                          Criterion crit, Rhs&& rhs) {
  CausalityReport rep;
  rep.criterion = crit;
  rep.delta = delta;
  rep.node_max_delta.assign(m.n, kInf);
  for (int i = 0; i < m.n; ++i) {
    auto emb = embed_actions(m, i, true, interval_samples);
    NodeCtx ctx(emb);
    std::vector<CausalityViolation> node_viol;
    bool has_stochastic = false;
    for (const auto& pt : emb.points) {
      int v;
      if (is_vertex(pt.xi, &v)) {
        // deterministic action: the transition must improve by at least delta
        if (pt.cost < delta - 1e-12)
          node_viol.push_back({i, pt.action_index, pt.urgency_p, emb.successors[v],
                               delta - pt.cost});
        continue;
      }
      has_stochastic = true;
      for (size_t r = 0; r < pt.xi.size(); ++r) {
        if (pt.xi[r] <= 1e-14) continue;
        auto [bound_at_0, ok] = rhs(ctx, pt, (int)r);  // RHS with delta = 0
        if (!ok) continue;
        Real bound = bound_at_0 + pt.xi[r] * delta;
        if (pt.cost < bound - 1e-12)
          node_viol.push_back({i, pt.action_index, pt.urgency_p, emb.successors[r],
                               bound - pt.cost});
        // max admissible delta for this constraint
        rep.node_max_delta[i] =
            std::min(rep.node_max_delta[i], (pt.cost - bound_at_0) / pt.xi[r]);
      }
    }
    if (has_stochastic)
      for (const auto& pt : emb.points) {
        int v;
        if (is_vertex(pt.xi, &v))
          rep.node_max_delta[i] = std::min(rep.node_max_delta[i], pt.cost);
      }
    std::sort(node_viol.begin(), node_viol.end(),
              [](const auto& a, const auto& b) { return a.gap > b.gap; });
    rep.violations.insert(rep.violations.end(), node_viol.begin(), node_viol.end());
  }
  rep.satisfied = rep.violations.empty();
  for (int i = 0; i < m.n; ++i) rep.max_delta = std::min(rep.max_delta, rep.node_max_delta[i]);
  return rep;
}

}  // namespace

CausalityReport check_mc_improved(const OsspModel& m, Real delta, int interval_samples) {
  return run_check(m, delta, interval_samples, Criterion::Improved,
                   [](NodeCtx& ctx, const SimplexPoint& pt, int r)
                       -> std::pair<Real, bool> {
                     auto gamma = oblique_projection(pt.xi, r);
                     try {
                       return {(1 - pt.xi[r]) * ctx.env_at(gamma), true};
                     } catch (const OutsideHull&) {
                       return {0, false};  // Lambda(gamma_r) empty: no constraint
                     }
                   });
}

CausalityReport check_mc_simplified(const OsspModel& m, Real delta, int interval_samples) {
  return run_check(
      m, delta, interval_samples, Criterion::Simplified,
      [](NodeCtx& ctx, const SimplexPoint& pt, int r) -> std::pair<Real, bool> {
        Real acc = 0;
        for (size_t j = 0; j < pt.xi.size(); ++j) {
          if ((int)j == r || pt.xi[j] <= 1e-14) continue;
          auto it = ctx.det.find(ctx.emb.successors[j]);
          if (it == ctx.det.end())
            throw MissingDeterministicAction(
                "no deterministic action to node " +
                std::to_string(ctx.emb.successors[j]) + " (Eq 2.6)");
          acc += pt.xi[j] * it->second;
        }
        return {acc, true};
      });
}

Real max_delta_m2(const OsspModel& m, int node) {
  auto emb = embed_actions(m, node, true, 0);
  if (emb.successors.size() != 2)
    throw ModelError("max_delta_m2: node's actions must lead into two successors");
  auto dc = det_costs(emb);
  if (dc.size() != 2)
    throw MissingDeterministicAction("max_delta_m2 needs deterministic actions to both successors");
  Real C1 = dc[emb.successors[0]], C2 = dc[emb.successors[1]];
  Real d1 = kInf, d2 = kInf;
  auto feed = [&](Real cost, Real x1, Real x2) {
    if (!(cost >= x2 * C2 - 1e-12 && cost >= x1 * C1 - 1e-12))
      throw NotMonotoneCausal("Eq (3.4) fails at delta = 0");
    if (x1 > 1e-14) d1 = std::min(d1, (cost - x2 * C2) / x1);
    if (x2 > 1e-14) d2 = std::min(d2, (cost - x1 * C1) / x2);
  };
  for (const auto& pt : emb.points) feed(pt.cost, pt.xi[0], pt.xi[1]);
  // smooth interval modes: Prop 3.3 derivative formulas in p-coordinates
  for (const auto& a : m.actions[node]) {
    auto* um = std::get_if<UrgencyMode>(&a);
    if (!um || !um->interval()) continue;
    if (um->curve.smooth()) {
      Real dd1 = um->curve(1) - um->curve.deriv(1);  // K(1) - K'(1)
      Real dd2 = um->curve(0) + um->curve.deriv(0);  // K(0) + K'(0)
      // p-coordinates are oriented stay -> x1-slot: map onto the sorted successors
      bool stay_first = um->stay == emb.successors[0];
      if (stay_first) {
        d1 = std::min(d1, dd1);
        d2 = std::min(d2, dd2);
      } else {
        d1 = std::min(d1, dd2);
        d2 = std::min(d2, dd1);
      }
    } else {
      for (int k = 0; k <= 1000; ++k) {
        Real p = k / 1000.0;
        Real x_stay = 1 - p, x_sw = p;
        bool stay_first = um->stay == emb.successors[0];
        feed(um->curve(p), stay_first ? x_stay : x_sw, stay_first ? x_sw : x_stay);
      }
    }
  }
  Real dstar = std::min(d1, d2);
  if (dstar < -1e-12) throw NotMonotoneCausal("Eq (3.4) fails at delta = 0");
  return std::max(dstar, 0.0);
}

Real model_max_delta(const OsspModel& m, int interval_samples) {
  auto rep = check_mc_improved(m, 0.0, interval_samples);
  Real out = kInf;
  for (int i = 0; i < m.n; ++i) {
    Real di = rep.node_max_delta[i];
    // prefer the exact Prop 3.3 value where it applies
    bool stochastic = false;
    for (const auto& a : m.actions[i]) {
      if (auto* fa = std::get_if<FiniteAction>(&a); fa && !fa->deterministic())
        stochastic = true;
      if (std::holds_alternative<UrgencyMode>(a) ||
          std::holds_alternative<SimplexAction>(a))
        stochastic = true;
    }
    if (!stochastic) continue;  // deterministic-only nodes do not cap Delta(X)
    try {
      di = max_delta_m2(m, i);
    } catch (const ModelError&) {
      // not a two-successor node: keep the sampled bound
    }
    out = std::min(out, di);
  }
  return out;
}

HomogeneousVerdict check_homogeneous_mc(
    const std::function<Real(const std::vector<Real>&)>& C, int m, Real degree,
    Real delta, int samples,
    const std::function<std::vector<Real>(const std::vector<Real>&)>& grad) {
  HomogeneousVerdict out;
  auto gradient = [&](const std::vector<Real>& xi) {
    if (grad) return grad(xi);
    std::vector<Real> g(xi.size());
    const Real h = 1e-6;
    for (size_t j = 0; j < xi.size(); ++j) {
      auto hi = xi, lo = xi;
      hi[j] += h;
      lo[j] -= h;
      g[j] = (C(hi) - C(lo)) / (2 * h);
    }
    return g;
  };
  auto test_point = [&](const std::vector<Real>& xi, bool interior) {
    if (interior) {
      Real c = C(xi);
      auto g = gradient(xi);
      for (size_t j = 0; j < xi.size(); ++j) {
        Real margin = g[j] - (degree - 1) * c - delta;
        out.worst_margin36 = std::min(out.worst_margin36, margin);
        if (margin <= -1e-10) out.eq36_holds = false;
      }
    }
    if (m == 2) {
      Real C1 = C({1.0, 0.0}), C2 = C({0.0, 1.0});
      Real rhs = std::max(C1 * xi[0] + delta * xi[1], delta * xi[0] + C2 * xi[1]);
      Real margin = C(xi) - rhs;
      out.worst_margin37 = std::min(out.worst_margin37, margin);
      if (margin < -1e-10) out.eq37_holds = false;
    }
  };
  if (m == 2) {
    for (int k = 0; k < samples; ++k) {
      Real x = Real(k) / (samples - 1);
      test_point({1 - x, x}, k > 0 && k < samples - 1);
    }
  } else {
    int N = std::max(2, (int)std::round(std::sqrt(2.0 * samples)));
    for (int i = 0; i <= N; ++i)
      for (int j = 0; i + j <= N; ++j) {
        Real x1 = Real(i) / N, x2 = Real(j) / N, x3 = 1 - x1 - x2;
        bool interior = i > 0 && j > 0 && i + j < N;
        test_point({x1, x2, x3}, interior);
      }
  }
  return out;
}

OsspModel build_sharpness_counterexample(int m, const std::vector<Real>& xi, Real C_a,
                                         Real C_tilde, Real delta, int r) {
  if (r < 0) r = m - 1;
  if ((int)xi.size() != m || r >= m) throw ModelError("bad sharpness parameters");
  Real xr = xi[r];
  if (!(xr > 0 && xr < 1)) throw ModelError("xi_r must be in (0,1)");
  if (C_a >= (1 - xr) * C_tilde + xr * delta - 1e-15)
    throw ConditionNotViolated("Eq (3.3) holds: C_a >= (1-xi_r) C_tilde + xi_r delta");
  const Real Blow = (C_a - delta) / (1 - xr);
  const Real Bhigh = (C_tilde - C_a) / xr;
  const Real B = 0.5 * (Blow + Bhigh);
  const Real floor_cost = 1e-9;  // A5' requires strictly positive costs
  // z values per the Theorem 3.5 proof
  std::vector<Real> Uz(m, 2 * delta);
  Uz[r] = 2 * delta + B;

  OsspModel out;
  out.n = m + 1;  // x_i = 0, z_1..z_m = 1..m, target m+1
  out.actions.resize(out.n);
  out.labels.resize(out.n + 1);
  out.labels[0] = "x_i";
  out.labels[out.n] = "t";
  for (int j = 0; j < m; ++j) {
    out.labels[j + 1] = "z_" + std::to_string(j + 1);
    out.actions[j + 1].push_back(
        FiniteAction{std::max(Uz[j], floor_cost), {{out.n, 1.0}}});
  }
  // a: the action violating Eq (3.3)
  FiniteAction a{C_a, {}};
  for (int j = 0; j < m; ++j)
    if (xi[j] > 0) a.transitions.push_back({j + 1, xi[j]});
  out.actions[0].push_back(std::move(a));
  // a-tilde: distribution gamma_r over the other successors, cost C_tilde
  FiniteAction at{C_tilde, {}};
  for (int j = 0; j < m; ++j)
    if (j != r && xi[j] > 0) at.transitions.push_back({j + 1, xi[j] / (1 - xr)});
  out.actions[0].push_back(std::move(at));
  // expensive deterministic actions keep the model an OSSP without being optimal
  Real sum = C_a + C_tilde;
  for (Real u : Uz) sum += std::max(u, floor_cost);
  for (int j = 0; j < m; ++j)
    out.actions[0].push_back(FiniteAction{10 * sum, {{j + 1, 1.0}}});
  return out;
}

}  // namespace ossp
