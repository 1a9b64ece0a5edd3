#include "ossp/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace ossp {

std::vector<int> successors_of(const Action& a) {
  return std::visit(
      [](const auto& act) -> std::vector<int> {
        using T = std::decay_t<decltype(act)>;
        if constexpr (std::is_same_v<T, FiniteAction>) {
          std::vector<int> s;
          s.reserve(act.transitions.size());
          for (auto& [j, p] : act.transitions) s.push_back(j);
          return s;
        } else if constexpr (std::is_same_v<T, UrgencyMode>) {
          return {act.stay, act.swtch};
        } else {
          return act.successors;
        }
      },
      a);
}

Real expected_cost(const FiniteAction& a, const std::vector<Real>& values) {
  Real acc = a.cost;
  for (auto& [j, p] : a.transitions) {
    if (is_inf(values[j])) return kInf;
    acc += p * values[j];
  }
  return acc;
}

std::pair<Real, std::vector<Real>> minimize_simplex(const SimplexAction& a,
                                                    const std::vector<Real>& vals,
                                                    const std::vector<char>* allowed) {
  const size_t m = a.successors.size();
  std::vector<int> free_idx;
  for (size_t j = 0; j < m; ++j)
    if ((!allowed || (*allowed)[j]) && !is_inf(vals[j])) free_idx.push_back((int)j);
  if (free_idx.empty()) return {kInf, std::vector<Real>(m, 0.0)};

  auto value_at = [&](const std::vector<Real>& xi) {
    Real acc = a.cost(xi);
    for (size_t j = 0; j < m; ++j)
      if (xi[j] > 0) acc += xi[j] * vals[j];
    return acc;
  };

  std::vector<Real> xi(m, 0.0);
  if (free_idx.size() == 1) {
    xi[free_idx[0]] = 1.0;
    return {value_at(xi), xi};
  }
  if (free_idx.size() == 2) {
    int i0 = free_idx[0], i1 = free_idx[1];
    auto f = [&](Real p) {
      std::vector<Real> x(m, 0.0);
      x[i0] = 1 - p;
      x[i1] = p;
      return value_at(x);
    };
    auto [p, v] = golden_min(f, 0.0, 1.0, 1e-10);
    // endpoints, with ties toward the earlier successor
    Real v0 = f(0), v1 = f(1);
    if (v0 <= v) {
      p = 0;
      v = v0;
    }
    if (v1 < v) {
      p = 1;
      v = v1;
    }
    xi[i0] = 1 - p;
    xi[i1] = p;
    return {v, xi};
  }
  // m = 3: nested golden-section over (xi_a, share of the remainder).
  int i0 = free_idx[0], i1 = free_idx[1], i2 = free_idx[2];
  auto inner = [&](Real x0) {
    auto g = [&](Real s) {
      std::vector<Real> x(m, 0.0);
      x[i0] = x0;
      x[i1] = s * (1 - x0);
      x[i2] = (1 - s) * (1 - x0);
      return value_at(x);
    };
    return golden_min(g, 0.0, 1.0, 1e-10);
  };
  auto outer = [&](Real x0) { return inner(x0).second; };
  auto [x0, v] = golden_min(outer, 0.0, 1.0, 1e-8);
  auto [s, v2] = inner(x0);
  xi[i0] = x0;
  xi[i1] = s * (1 - x0);
  xi[i2] = (1 - s) * (1 - x0);
  // sharpen against the vertices (golden can stall slightly off a corner)
  Real best = v2;
  std::vector<Real> best_xi = xi;
  for (int k : free_idx) {
    std::vector<Real> e(m, 0.0);
    e[k] = 1.0;
    Real ve = value_at(e);
    if (ve < best) {
      best = ve;
      best_xi = e;
    }
  }
  return {best, best_xi};
}

Real expected_cost(const OsspModel& m, int node, int action, const ValueFunction& w) {
  const Action& a = m.actions[node][action];
  if (auto* fa = std::get_if<FiniteAction>(&a)) return expected_cost(*fa, w.values);
  if (auto* um = std::get_if<UrgencyMode>(&a))
    return minimize_urgency(um->curve, um->support, w.values[um->stay], w.values[um->swtch]).second;
  const auto& sa = std::get<SimplexAction>(a);
  std::vector<Real> vals;
  vals.reserve(sa.successors.size());
  for (int j : sa.successors) vals.push_back(w.values[j]);
  return minimize_simplex(sa, vals).first;
}

std::pair<Real, PolicyChoice> bellman_update(const OsspModel& m, int node,
                                             const ValueFunction& w) {
  Real best = kInf;
  PolicyChoice choice;
  const auto& acts = m.actions[node];
  for (int ai = 0; ai < (int)acts.size(); ++ai) {
    const Action& a = acts[ai];
    Real v;
    PolicyChoice c;
    c.action = ai;
    if (auto* fa = std::get_if<FiniteAction>(&a)) {
      v = expected_cost(*fa, w.values);
    } else if (auto* um = std::get_if<UrgencyMode>(&a)) {
      auto [p, val] = minimize_urgency(um->curve, um->support, w.values[um->stay],
                                       w.values[um->swtch]);
      v = val;
      c.p = p;
    } else {
      const auto& sa = std::get<SimplexAction>(a);
      std::vector<Real> vals;
      vals.reserve(sa.successors.size());
      for (int j : sa.successors) vals.push_back(w.values[j]);
      auto [val, xi] = minimize_simplex(sa, vals);
      v = val;
      c.xi = xi;
    }
    if (v < best) {
      best = v;
      choice = c;
    }
  }
  return {best, choice};
}

bool ValidationReport::hard_ok() const {
  for (auto& is : issues)
    if (is.code != ValidationIssue::Code::TargetUnreachable &&
        is.code != ValidationIssue::Code::NotOssp)
      return false;
  return true;
}

ValidationReport validate_model(const OsspModel& m) {
  using C = ValidationIssue::Code;
  ValidationReport rep;
  auto flag = [&](C c, int node, int action, std::string d) {
    rep.issues.push_back({c, node, action, std::move(d)});
  };
  if ((int)m.actions.size() != m.n) {
    flag(C::BadIndex, -1, -1, "actions list size != n");
    return rep;
  }
  for (int i = 0; i < m.n; ++i) {
    const auto& acts = m.actions[i];
    if (acts.empty()) flag(C::EmptyActionSet, i, -1, "node has no actions");
    for (int ai = 0; ai < (int)acts.size(); ++ai) {
      const Action& a = acts[ai];
      if (auto* fa = std::get_if<FiniteAction>(&a)) {
        if (!(fa->cost > 0)) flag(C::NonPositiveCost, i, ai, "cost must be > 0 (A5')");
        Real sum = 0;
        std::set<int> seen;
        for (auto& [j, p] : fa->transitions) {
          if (j < 0 || j > m.n) flag(C::BadIndex, i, ai, "successor out of range");
          if (j == i) flag(C::SelfTransition, i, ai, "p(x,a,x) > 0 violates A6");
          if (!(p > 0 && p <= 1 + 1e-12)) flag(C::BadProbability, i, ai, "probability outside (0,1]");
          if (!seen.insert(j).second) flag(C::BadIndex, i, ai, "duplicate successor");
          sum += p;
        }
        if (fa->transitions.empty() || std::abs(sum - 1.0) > 1e-12)
          flag(C::BadProbability, i, ai, "probabilities must sum to 1");
      } else if (auto* um = std::get_if<UrgencyMode>(&a)) {
        if (um->stay == um->swtch) flag(C::BadIndex, i, ai, "stay == switch");
        for (int j : {um->stay, um->swtch}) {
          if (j < 0 || j > m.n) flag(C::BadIndex, i, ai, "mode successor out of range");
          if (j == i) flag(C::SelfTransition, i, ai, "mode successor is the source");
        }
        if (!um->interval()) {
          if (um->support.front() != 0.0 || um->support.back() != 1.0 ||
              !std::is_sorted(um->support.begin(), um->support.end()))
            flag(C::BadProbability, i, ai, "support must be increasing with p=0 and p=1");
          for (Real p : um->support)
            if (!(um->curve(p) > 0)) flag(C::NonPositiveCost, i, ai, "K(p) must be > 0");
        } else {
          for (int k = 0; k <= 10; ++k)
            if (!(um->curve(k / 10.0) > 0)) {
              flag(C::NonPositiveCost, i, ai, "K(p) must be > 0");
              break;
            }
        }
      } else {
        const auto& sa = std::get<SimplexAction>(a);
        if (sa.successors.size() < 2 || sa.successors.size() > 3)
          flag(C::BadIndex, i, ai, "simplex action needs 2 or 3 successors");
        for (int j : sa.successors) {
          if (j < 0 || j > m.n) flag(C::BadIndex, i, ai, "successor out of range");
          if (j == i) flag(C::SelfTransition, i, ai, "successor is the source");
        }
        std::vector<Real> center(sa.successors.size(), 1.0 / sa.successors.size());
        if (!(sa.cost(center) > 0)) flag(C::NonPositiveCost, i, ai, "C^s must be > 0");
      }
    }
  }
  if (!rep.hard_ok()) return rep;

  // A4: target reachable from every node (reverse BFS over the union digraph).
  std::vector<std::vector<int>> preds(m.n + 1);
  for (int i = 0; i < m.n; ++i)
    for (auto& a : m.actions[i])
      for (int j : successors_of(a)) preds[j].push_back(i);
  std::vector<char> reach(m.n + 1, 0);
  std::deque<int> q{m.n};
  reach[m.n] = 1;
  while (!q.empty()) {
    int j = q.front();
    q.pop_front();
    for (int i : preds[j])
      if (!reach[i]) {
        reach[i] = 1;
        q.push_back(i);
      }
  }
  for (int i = 0; i < m.n; ++i)
    if (!reach[i]) flag(C::TargetUnreachable, i, -1, "no path to target");

  // OSSP property (Eq 2.6): every stochastically reachable successor must also be
  // reachable deterministically.  Modes and simplex actions carry their own
  // deterministic sub-actions (p in {0,1}, simplex vertices).
  for (int i = 0; i < m.n; ++i) {
    std::set<int> det;
    for (auto& a : m.actions[i]) {
      if (auto* fa = std::get_if<FiniteAction>(&a)) {
        if (fa->deterministic()) det.insert(fa->transitions[0].first);
      } else {
        for (int j : successors_of(a)) det.insert(j);
      }
    }
    for (int ai = 0; ai < (int)m.actions[i].size(); ++ai) {
      auto* fa = std::get_if<FiniteAction>(&m.actions[i][ai]);
      if (!fa || fa->deterministic()) continue;
      for (auto& [j, p] : fa->transitions)
        if (!det.count(j))
          flag(C::NotOssp, i, ai, "stochastic successor " + std::to_string(j) +
                                      " lacks a deterministic action (Eq 2.6)");
    }
  }
  return rep;
}

std::pair<bool, std::vector<int>> is_explicitly_causal(const OsspModel& m) {
  // Kahn's algorithm on the union digraph, peeling nodes whose non-target
  // successors are all peeled: the returned order lists each node after all of
  // its successors, which is the single-sweep Gauss-Seidel ordering.
  std::vector<std::vector<int>> preds(m.n);
  std::vector<int> outdeg(m.n, 0);
  for (int i = 0; i < m.n; ++i) {
    std::set<int> succ;
    for (auto& a : m.actions[i])
      for (int j : successors_of(a))
        if (j != m.n) succ.insert(j);
    outdeg[i] = (int)succ.size();
    for (int j : succ) preds[j].push_back(i);
  }
  std::deque<int> q;
  for (int i = 0; i < m.n; ++i)
    if (outdeg[i] == 0) q.push_back(i);
  std::vector<int> order;
  while (!q.empty()) {
    int j = q.front();
    q.pop_front();
    order.push_back(j);
    for (int i : preds[j])
      if (--outdeg[i] == 0) q.push_back(i);
  }
  if ((int)order.size() != m.n) return {false, {}};
  return {true, order};
}

void to_json(nlohmann::json& j, const OsspModel& m) {
  j = nlohmann::json{{"format", 1}, {"n", m.n}, {"target", m.n}};
  nlohmann::json acts = nlohmann::json::array();
  for (int i = 0; i < m.n; ++i) {
    nlohmann::json node = nlohmann::json::array();
    for (auto& a : m.actions[i]) {
      if (auto* fa = std::get_if<FiniteAction>(&a)) {
        node.push_back({{"cost", fa->cost}, {"to", fa->transitions}});
      } else if (auto* um = std::get_if<UrgencyMode>(&a)) {
        nlohmann::json mode = {{"stay", um->stay}, {"switch", um->swtch},
                               {"curve", um->curve}};
        if (um->interval())
          mode["support"] = "interval";
        else
          mode["support"] = um->support;
        node.push_back({{"mode", mode}});
      } else {
        throw ModelError("simplex actions are not serializable");
      }
    }
    acts.push_back(std::move(node));
  }
  j["actions"] = std::move(acts);
  if (!m.labels.empty()) j["labels"] = m.labels;
}

void from_json(const nlohmann::json& j, OsspModel& m) {
  m = OsspModel{};
  m.n = j.at("n");
  if (j.at("target").get<int>() != m.n)
    throw ModelError("target must be node n");
  m.actions.resize(m.n);
  const auto& acts = j.at("actions");
  if ((int)acts.size() != m.n) throw ModelError("actions list size != n");
  for (int i = 0; i < m.n; ++i) {
    for (const auto& ja : acts[i]) {
      if (ja.contains("mode")) {
        const auto& jm = ja.at("mode");
        UrgencyMode um;
        um.stay = jm.at("stay");
        um.swtch = jm.at("switch");
        um.curve = jm.at("curve").get<CostCurve>();
        if (!(jm.at("support").is_string() && jm.at("support") == "interval"))
          um.support = jm.at("support").get<std::vector<Real>>();
        m.actions[i].push_back(std::move(um));
      } else {
        FiniteAction fa;
        fa.cost = ja.at("cost");
        fa.transitions = ja.at("to").get<std::vector<std::pair<int, Real>>>();
        m.actions[i].push_back(std::move(fa));
      }
    }
  }
  if (j.contains("labels")) m.labels = j.at("labels").get<std::vector<std::string>>();
}

OsspModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file: " + path);
  nlohmann::json j;
  in >> j;
  OsspModel m = j.get<OsspModel>();
  auto rep = validate_model(m);
  if (!rep.hard_ok()) {
    const auto& is = rep.issues.front();
    throw ModelError("model rejected: node " + std::to_string(is.node) + " action " +
                     std::to_string(is.action) + ": " + is.detail);
  }
  return m;
}

void save_model(const OsspModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write model file: " + path);
  nlohmann::json j = m;
  out << j.dump(2) << "\n";
}

}  // namespace ossp
