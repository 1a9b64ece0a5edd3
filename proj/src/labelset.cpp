#include "ossp/labelset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <queue>

namespace ossp {

namespace {

// Per-action bookkeeping shared by Dijkstra and Dial.
struct ActionState {
  int remaining = 0;               // unaccepted successors
  std::vector<char> accepted;      // per-successor flags (simplex actions)
};

struct Engine {
  const OsspModel& m;
  std::vector<Real> v;
  std::vector<char> done;
  Policy pol;
  SolveTrace trace;
  std::vector<std::vector<ActionState>> astate;
  // events[j]: actions (node, action index, successor slot) that listen on j
  std::vector<std::vector<std::array<int, 3>>> events;

  explicit Engine(const OsspModel& model) : m(model) {
    v.assign(m.n + 1, kInf);
    v[m.n] = 0;
    done.assign(m.n + 1, 0);
    pol.choices.resize(m.n);
    trace.update_count.assign(m.n + 1, 0);
    astate.resize(m.n);
    events.resize(m.n + 1);
    for (int i = 0; i < m.n; ++i) {
      astate[i].resize(m.actions[i].size());
      for (int ai = 0; ai < (int)m.actions[i].size(); ++ai) {
        auto succ = successors_of(m.actions[i][ai]);
        astate[i][ai].remaining = (int)succ.size();
        astate[i][ai].accepted.assign(succ.size(), 0);
        for (int s = 0; s < (int)succ.size(); ++s)
          events[succ[s]].push_back({i, ai, s});
      }
    }
  }

  // Candidate value of node i through action ai given the accepted successors.
  std::pair<Real, PolicyChoice> candidate(int i, int ai) {
    const Action& a = m.actions[i][ai];
    const ActionState& st = astate[i][ai];
    Real cand = kInf;
    PolicyChoice choice;
    choice.action = ai;
    if (auto* fa = std::get_if<FiniteAction>(&a)) {
      if (st.remaining > 0) return {kInf, choice};  // support must lie in K
      cand = expected_cost(*fa, v);
    } else if (auto* um = std::get_if<UrgencyMode>(&a)) {
      bool stay_ok = done[um->stay], switch_ok = done[um->swtch];
      if (stay_ok && switch_ok) {
        auto [p, val] = minimize_urgency(um->curve, um->support, v[um->stay], v[um->swtch]);
        cand = val;
        choice.p = p;
      } else if (stay_ok) {
        cand = sat_add(um->curve(0), v[um->stay]);
        choice.p = 0;
      } else if (switch_ok) {
        cand = sat_add(um->curve(1), v[um->swtch]);
        choice.p = 1;
      }
    } else {
      const auto& sa = std::get<SimplexAction>(a);
      std::vector<Real> vals(sa.successors.size());
      for (size_t s = 0; s < sa.successors.size(); ++s) vals[s] = v[sa.successors[s]];
      auto [val, xi] = minimize_simplex(sa, vals, &st.accepted);
      cand = val;
      choice.xi = std::move(xi);
    }
    return {cand, std::move(choice)};
  }

  // Mark x accepted and fire its events.  Events are grouped by listening node:
  // each (node, accepted successor) pair performs at most one update, matching
  // the paper's V_i := min(V_i, min_{a: x in I(a) subset K} F_i(a,V)) rule.
  void accept(int x, std::vector<int>* touched) {
    done[x] = 1;
    trace.acceptance_order.push_back(x);
    for (auto& [i, ai, slot] : events[x]) {
      auto& st = astate[i][ai];
      if (!st.accepted[slot]) {
        st.accepted[slot] = 1;
        --st.remaining;
      }
    }
    // events[x] lists each node's actions contiguously (built in index order)
    for (size_t k = 0; k < events[x].size();) {
      int i = events[x][k][0];
      Real best = kInf;
      PolicyChoice best_choice;
      for (; k < events[x].size() && events[x][k][0] == i; ++k) {
        if (done[i]) continue;
        auto [cand, choice] = candidate(i, events[x][k][1]);
        if (cand < best) {
          best = cand;
          best_choice = std::move(choice);
        }
      }
      if (best < v[i]) {
        v[i] = best;
        pol.choices[i] = std::move(best_choice);
        ++trace.update_count[i];
        ++trace.total_updates;
        if (touched) touched->push_back(i);
      }
    }
  }

  LabelSetResult result() {
    LabelSetResult r;
    r.values.values = std::move(v);
    r.policy = std::move(pol);
    r.trace = std::move(trace);
    return r;
  }
};

}  // namespace

LabelSetResult dijkstra_solve(const OsspModel& m) {
  Engine eng(m);
  using Entry = std::pair<Real, int>;  // (value, node index): the tie-break contract
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  pq.push({0.0, m.n});
  while (!pq.empty()) {
    auto [val, x] = pq.top();
    pq.pop();
    if (eng.done[x] || val > eng.v[x]) continue;  // stale entry
    std::vector<int> touched;
    eng.accept(x, &touched);
    for (int i : touched) pq.push({eng.v[i], i});
  }
  return eng.result();
}

LabelSetResult dial_solve(const OsspModel& m, Real delta) {
  if (!(delta > 0)) throw InvalidDelta("dial_solve: bucket width must be positive");
  Engine eng(m);
  auto bucket_of = [&](Real val) { return (long long)std::floor(val / delta); };
  std::map<long long, std::deque<int>> buckets;
  buckets[0].push_back(m.n);
  while (!buckets.empty()) {
    auto it = buckets.begin();  // lowest nonempty bucket
    long long b = it->first;
    std::deque<int> batch = std::move(it->second);
    buckets.erase(it);
    // drop stale entries (node migrated or already accepted), keep FIFO order
    std::vector<int> accepted_now;
    for (int x : batch) {
      if (eng.done[x] || bucket_of(eng.v[x]) != b) continue;
      if (std::find(accepted_now.begin(), accepted_now.end(), x) != accepted_now.end())
        continue;
      accepted_now.push_back(x);
    }
    // the whole bucket is accepted simultaneously...
    for (int x : accepted_now) eng.done[x] = 1;
    // ...then processed FIFO; improved nodes re-enter their buckets
    for (int x : accepted_now) {
      eng.done[x] = 0;  // accept() re-marks and records the order
      std::vector<int> touched;
      eng.accept(x, &touched);
      for (int i : touched) buckets[bucket_of(eng.v[i])].push_back(i);
    }
  }
  return eng.result();
}

std::pair<ValueFunction, Policy> deterministic_shortest_path(
    const std::vector<std::vector<std::pair<int, Real>>>& arcs, int target) {
  const int n = (int)arcs.size();
  ValueFunction u;
  u.values.assign(n, kInf);
  Policy pol;
  pol.choices.resize(n);
  // Dijkstra from the target over reversed arcs
  std::vector<std::vector<std::array<Real, 3>>> rev(n);  // (pred, cost, arc idx)
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < (int)arcs[i].size(); ++k)
      rev[arcs[i][k].first].push_back({(Real)i, arcs[i][k].second, (Real)k});
  using Entry = std::pair<Real, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  u.values[target] = 0;
  pq.push({0.0, target});
  std::vector<char> done(n, 0);
  while (!pq.empty()) {
    auto [val, j] = pq.top();
    pq.pop();
    if (done[j]) continue;
    done[j] = 1;
    for (auto& [fi, c, fk] : rev[j]) {
      int i = (int)fi;
      if (c + val < u.values[i]) {
        u.values[i] = c + val;
        pol.choices[i].action = (int)fk;
        pq.push({u.values[i], i});
      }
    }
  }
  return {std::move(u), std::move(pol)};
}

}  // namespace ossp
