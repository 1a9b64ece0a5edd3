#pragma once

// Shared helpers for the test suites: tiny model builders and a random OSSP
// generator whose stochastic costs can be forced to satisfy the simplified
// monotone delta-causality condition (Eq 3.4), which implies the improved one.

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "ossp/model.hpp"

namespace ossp::testutil {

inline FiniteAction det(Real cost, int to) { return FiniteAction{cost, {{to, cost ? 1.0 : 1.0}}}; }

inline FiniteAction sto(Real cost, std::vector<std::pair<int, Real>> tr) {
  return FiniteAction{cost, std::move(tr)};
}

// Chain x_0 -> x_1 -> ... -> x_{n-1} -> t with unit (or given) arc costs.
inline OsspModel chain(int n, Real arc_cost = 1.0) {
  OsspModel m;
  m.n = n;
  m.actions.resize(n);
  for (int i = 0; i < n; ++i) m.actions[i].push_back(det(arc_cost, i + 1));
  return m;
}

struct GenOptions {
  int n = 30;
  Real delta = 0;         // certify at this bucket width
  bool force_mc = true;   // enforce Eq (3.4) on stochastic costs
  bool with_modes = true; // mix in quadratic urgency modes
  int max_succ = 4;
};

// Random OSSP: each node gets deterministic actions to a few higher-index nodes
// (guaranteeing target reachability), stochastic actions supported on those
// deterministic successors (Eq 2.6), and optionally quadratic urgency modes.
inline OsspModel random_ossp(std::mt19937& rng, const GenOptions& opt) {
  std::uniform_real_distribution<Real> U(0, 1);
  OsspModel m;
  m.n = opt.n;
  m.actions.resize(opt.n);
  std::vector<Real> det_cost(opt.n + 1, 0.0);  // min det cost out of each node
  for (int i = opt.n - 1; i >= 0; --i) {
    std::set<int> succ{opt.n};  // always allow the target
    int extra = 1 + (int)(U(rng) * (opt.max_succ - 1));
    for (int k = 0; k < extra; ++k) succ.insert(i + 1 + (int)(U(rng) * (opt.n - i)));
    std::vector<int> sv(succ.begin(), succ.end());
    std::map<int, Real> dcost;
    for (int j : sv) {
      Real c = 0.5 + 4 * U(rng);
      if (opt.force_mc) c = std::max(c, opt.delta + 0.05);  // det actions need C >= delta
      dcost[j] = c;
      m.actions[i].push_back(det(c, j));
    }
    // a couple of stochastic actions over subsets of the deterministic successors
    int nsto = (int)(U(rng) * 3);
    for (int k = 0; k < nsto && sv.size() >= 2; ++k) {
      std::vector<int> sup = sv;
      std::shuffle(sup.begin(), sup.end(), rng);
      sup.resize(2 + (int)(U(rng) * std::min<size_t>(sup.size() - 1, 2)));
      std::sort(sup.begin(), sup.end());
      std::vector<Real> xi(sup.size());
      Real tot = 0;
      for (auto& x : xi) tot += (x = 0.1 + U(rng));
      for (auto& x : xi) x /= tot;
      Real cost = 0.5 + 2 * U(rng);
      if (opt.force_mc) {
        // Eq (3.4): C >= sum_{j != r} xi_j C_j + xi_r delta, for every r
        Real need = 0;
        for (size_t r = 0; r < sup.size(); ++r) {
          Real rhs = xi[r] * opt.delta;
          for (size_t j = 0; j < sup.size(); ++j)
            if (j != r) rhs += xi[j] * dcost[sup[j]];
          need = std::max(need, rhs);
        }
        cost = need + 0.01 + U(rng);
      }
      std::vector<std::pair<int, Real>> tr;
      for (size_t j = 0; j < sup.size(); ++j) tr.push_back({sup[j], xi[j]});
      m.actions[i].push_back(sto(cost, tr));
    }
    if (opt.with_modes && U(rng) < 0.4 && sv.size() >= 2) {
      UrgencyMode um;
      um.stay = sv[0];
      um.swtch = sv[1];
      Real gamma = std::max(dcost[sv[0]], dcost[sv[1]]) + 0.1 + U(rng);
      // beta + delta <= gamma keeps the mode delta-monotone-causal (Eq 5.6 criterion)
      Real beta = opt.force_mc ? 0.01 + U(rng) * std::max(0.01, gamma - opt.delta - 0.02)
                               : 0.5 + 2 * U(rng);
      if (opt.force_mc) beta = std::min(beta, std::max(0.01, gamma - opt.delta - 0.01));
      if (beta > 0) {
        um.curve = quadratic_cost(beta, gamma);
        if (U(rng) < 0.5) um.support = {0.0, 0.25, 0.5, 0.75, 1.0};
        m.actions[i].push_back(um);
      }
    }
    det_cost[i] = dcost.begin()->second;
  }
  return m;
}

inline Real max_abs_diff(const ValueFunction& a, const ValueFunction& b) {
  Real d = 0;
  for (size_t i = 0; i < a.values.size(); ++i) {
    if (is_inf(a.values[i]) && is_inf(b.values[i])) continue;
    d = std::max(d, std::abs(a.values[i] - b.values[i]));
  }
  return d;
}

}  // namespace ossp::testutil
