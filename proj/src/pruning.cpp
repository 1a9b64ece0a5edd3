#include "ossp/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Dense>

namespace ossp {

OsspModel remove_self_transitions(const OsspModel& m) {
  OsspModel out = m;
  for (int i = 0; i < m.n; ++i) {
    for (auto& a : out.actions[i]) {
      auto* fa = std::get_if<FiniteAction>(&a);
      if (!fa) continue;
      Real pii = 0;
      for (auto& [j, p] : fa->transitions)
        if (j == i) pii += p;
      if (pii == 0) continue;
      if (pii >= 1 - 1e-15)
        throw DegenerateSelfLoop("p_ii = 1 at node " + std::to_string(i));
      FiniteAction na;
      na.cost = fa->cost / (1 - pii);
      for (auto& [j, p] : fa->transitions)
        if (j != i) na.transitions.push_back({j, p / (1 - pii)});
      *fa = std::move(na);
    }
  }
  return out;
}

namespace {

std::vector<Real> embed_distribution(const std::vector<int>& succ,
                                     const std::vector<std::pair<int, Real>>& tr) {
  std::vector<Real> xi(succ.size(), 0.0);
  for (auto& [j, p] : tr) {
    auto it = std::lower_bound(succ.begin(), succ.end(), j);
    xi[it - succ.begin()] += p;
  }
  return xi;
}

bool same_xi(const std::vector<Real>& a, const std::vector<Real>& b) {
  for (size_t j = 0; j < a.size(); ++j)
    if (std::abs(a[j] - b[j]) > 1e-12) return false;
  return true;
}

}  // namespace

Embedding embed_actions(const OsspModel& m, int node, bool include_modes,
                        int interval_samples) {
  Embedding emb;
  std::set<int> succ;
  const auto& acts = m.actions[node];
  for (const auto& a : acts) {
    if (std::holds_alternative<UrgencyMode>(a) && !include_modes) continue;
    for (int j : successors_of(a)) succ.insert(j);
  }
  emb.successors.assign(succ.begin(), succ.end());

  auto add_point = [&](std::vector<Real> xi, Real cost, int ai, Real p) {
    for (auto& pt : emb.points) {
      if (!same_xi(pt.xi, xi)) continue;
      if (cost < pt.cost - 1e-12) {
        // keep the cheaper representative, record the displaced one
        if (pt.urgency_p < 0) emb.duplicate_actions.push_back(pt.action_index);
        pt = {std::move(xi), cost, ai, p};
      } else if (p < 0) {
        emb.duplicate_actions.push_back(ai);
      }
      return;
    }
    emb.points.push_back({std::move(xi), cost, ai, p});
  };

  for (int ai = 0; ai < (int)acts.size(); ++ai) {
    if (auto* fa = std::get_if<FiniteAction>(&acts[ai])) {
      add_point(embed_distribution(emb.successors, fa->transitions), fa->cost, ai, -1);
    } else if (auto* um = std::get_if<UrgencyMode>(&acts[ai])) {
      if (!include_modes) continue;
      auto at_p = [&](Real p) {
        std::vector<Real> xi(emb.successors.size(), 0.0);
        auto pos = [&](int j) {
          return std::lower_bound(emb.successors.begin(), emb.successors.end(), j) -
                 emb.successors.begin();
        };
        xi[pos(um->stay)] += 1 - p;
        xi[pos(um->swtch)] += p;
        add_point(std::move(xi), um->curve(p), ai, p);
      };
      if (!um->interval()) {
        for (Real p : um->support) at_p(p);
      } else if (interval_samples > 0) {
        for (int k = 0; k < interval_samples; ++k) at_p(k / Real(interval_samples - 1));
      } else {
        at_p(0);
        at_p(1);
      }
    }
    // SimplexActions are continuous HJB modes; they are not embedded here.
  }
  return emb;
}

EnvelopeResult convexified_cost(const std::vector<SimplexPoint>& points,
                                const std::vector<Real>& query) {
  const size_t m = query.size();
  // coordinates with mass in the query; admissible points live on that face
  std::vector<int> free_c;
  for (size_t j = 0; j < m; ++j)
    if (query[j] > 1e-14) free_c.push_back((int)j);
  std::vector<int> adm;
  for (size_t r = 0; r < points.size(); ++r) {
    bool ok = points[r].xi.size() == m;
    for (size_t j = 0; ok && j < m; ++j)
      if (query[j] <= 1e-14 && points[r].xi[j] > 1e-9) ok = false;
    if (ok) adm.push_back((int)r);
  }
  const int d = (int)free_c.size();
  EnvelopeResult best;
  bool found = false;

  if (d == 1) {
    // vertex query: every admissible point sits on the vertex itself
    for (int r : adm)
      if (!found || points[r].cost < best.value) {
        found = true;
        best.value = points[r].cost;
        best.mixture = {{r, 1.0}};
      }
    if (!found) throw OutsideHull("query distribution not representable by the given points");
  } else if (d == 2) {
    // 1D lower hull along the edge; O(n log n) instead of basis enumeration
    std::vector<std::pair<Real, int>> xs;
    xs.reserve(adm.size());
    for (int r : adm) xs.push_back({points[r].xi[free_c[1]], r});
    std::sort(xs.begin(), xs.end(), [&](auto& a, auto& b) {
      return a.first != b.first ? a.first < b.first : points[a.second].cost < points[b.second].cost;
    });
    std::vector<int> hull;  // indices into xs
    for (int i = 0; i < (int)xs.size(); ++i) {
      if (!hull.empty() && xs[hull.back()].first == xs[i].first) continue;  // keep cheapest per x
      while (hull.size() >= 2) {
        Real x1 = xs[hull[hull.size() - 2]].first, y1 = points[xs[hull[hull.size() - 2]].second].cost;
        Real x2 = xs[hull.back()].first, y2 = points[xs[hull.back()].second].cost;
        Real x3 = xs[i].first, y3 = points[xs[i].second].cost;
        if ((y2 - y1) * (x3 - x1) >= (y3 - y1) * (x2 - x1)) hull.pop_back();
        else break;
      }
      hull.push_back(i);
    }
    Real xq = query[free_c[1]];
    if (hull.empty() || xq < xs[hull.front()].first - 1e-9 || xq > xs[hull.back()].first + 1e-9)
      throw OutsideHull("query distribution not representable by the given points");
    found = true;
    // locate the bracketing hull segment
    size_t hi = 0;
    while (hi + 1 < hull.size() && xs[hull[hi + 1]].first < xq) ++hi;
    int ra = xs[hull[hi]].second;
    if (hi + 1 == hull.size() || std::abs(xs[hull[hi]].first - xq) <= 1e-12) {
      // clamp to the nearer endpoint when the query coincides with a hull vertex
      if (hi + 1 < hull.size() &&
          std::abs(xs[hull[hi + 1]].first - xq) < std::abs(xs[hull[hi]].first - xq))
        ra = xs[hull[hi + 1]].second;
      best.value = points[ra].cost;
      best.mixture = {{ra, 1.0}};
    } else {
      int rb = xs[hull[hi + 1]].second;
      Real xa = points[ra].xi[free_c[1]], xb = points[rb].xi[free_c[1]];
      Real lam = (xq - xa) / (xb - xa);
      best.value = (1 - lam) * points[ra].cost + lam * points[rb].cost;
      best.mixture = {{ra, 1 - lam}, {rb, lam}};
    }
  }
  if (found) {
    for (size_t r = 0; r < points.size(); ++r) {
      if (!same_xi(points[r].xi, query)) continue;
      std::vector<SimplexPoint> others;
      for (size_t s = 0; s < points.size(); ++s)
        if (s != r && !same_xi(points[s].xi, query)) others.push_back(points[s]);
      try {
        best.extreme_point = convexified_cost(others, query).value > points[r].cost + 1e-9;
      } catch (const OutsideHull&) {
        best.extreme_point = true;
      }
      break;
    }
    return best;
  }

  // basis enumeration: a vertex of the mixing LP has at most d positive lambdas
  std::vector<int> subset;
  auto try_subset = [&]() {
    const int k = (int)subset.size();
    Eigen::MatrixXd A(d + 1, k);
    Eigen::VectorXd b(d + 1);
    for (int row = 0; row < d; ++row) {
      for (int c = 0; c < k; ++c) A(row, c) = points[subset[c]].xi[free_c[row]];
      b(row) = query[free_c[row]];
    }
    for (int c = 0; c < k; ++c) A(d, c) = 1.0;
    b(d) = 1.0;
    Eigen::VectorXd lam = A.colPivHouseholderQr().solve(b);
    if ((A * lam - b).cwiseAbs().maxCoeff() > 1e-9) return;
    Real val = 0;
    for (int c = 0; c < k; ++c) {
      if (lam(c) < -1e-10) return;
      val += lam(c) * points[subset[c]].cost;
    }
    if (!found || val < best.value) {
      found = true;
      best.value = val;
      best.mixture.clear();
      for (int c = 0; c < k; ++c)
        if (lam(c) > 1e-12) best.mixture.push_back({subset[c], lam(c)});
    }
  };
  std::function<void(size_t, int)> rec = [&](size_t start, int remaining) {
    if (!subset.empty()) try_subset();
    if (remaining == 0) return;
    for (size_t i = start; i < adm.size(); ++i) {
      subset.push_back(adm[i]);
      rec(i + 1, remaining - 1);
      subset.pop_back();
    }
  };
  rec(0, std::max(1, d));
  if (!found) throw OutsideHull("query distribution not representable by the given points");

  // extreme iff the query is an input point that every certifying mixture needs
  for (size_t r = 0; r < points.size(); ++r) {
    if (!same_xi(points[r].xi, query)) continue;
    std::vector<SimplexPoint> others;
    for (size_t s = 0; s < points.size(); ++s)
      if (s != r && !same_xi(points[s].xi, query)) others.push_back(points[s]);
    try {
      best.extreme_point = convexified_cost(others, query).value > points[r].cost + 1e-9;
    } catch (const OutsideHull&) {
      best.extreme_point = true;
    }
    break;
  }
  return best;
}

std::vector<PruneReason> classify_points(const std::vector<SimplexPoint>& points) {
  std::vector<PruneReason> out(points.size(), PruneReason::Useful);
  for (size_t r = 0; r < points.size(); ++r) {
    // transition-equivalent duplicates first
    bool dup = false;
    for (size_t s = 0; s < points.size() && !dup; ++s) {
      if (s == r || !same_xi(points[s].xi, points[r].xi)) continue;
      if (points[s].cost < points[r].cost - 1e-12 ||
          (std::abs(points[s].cost - points[r].cost) <= 1e-12 && s < r))
        dup = true;
    }
    if (dup) {
      out[r] = PruneReason::Duplicate;
      continue;
    }
    std::vector<SimplexPoint> others;
    for (size_t s = 0; s < points.size(); ++s)
      if (s != r && !same_xi(points[s].xi, points[r].xi)) others.push_back(points[s]);
    try {
      Real env = convexified_cost(others, points[r].xi).value;
      if (env < points[r].cost - 1e-9)
        out[r] = PruneReason::Dominated;
      else if (env <= points[r].cost + 1e-9)
        out[r] = PruneReason::Replaceable;
    } catch (const OutsideHull&) {
      // no competing mixture reaches this distribution: extreme point
    }
  }
  return out;
}

std::vector<int> useful_actions(const std::vector<SimplexPoint>& points) {
  auto reasons = classify_points(points);
  std::vector<int> keep;
  for (size_t r = 0; r < points.size(); ++r)
    if (reasons[r] == PruneReason::Useful) keep.push_back((int)r);
  return keep;
}

std::vector<Real> oblique_projection(const std::vector<Real>& xi, int r) {
  if (xi[r] >= 1 - 1e-15)
    throw DegenerateProjection("xi_r = 1: projection undefined");
  std::vector<Real> g(xi.size());
  for (size_t j = 0; j < xi.size(); ++j) g[j] = xi[j] / (1 - xi[r]);
  g[r] = 0;
  return g;
}

ModeList extract_modes(const OsspModel& m, int node) {
  const auto& acts = m.actions[node];
  std::vector<std::vector<int>> supports(acts.size());
  for (size_t a = 0; a < acts.size(); ++a) {
    supports[a] = successors_of(acts[a]);
    std::sort(supports[a].begin(), supports[a].end());
    supports[a].erase(std::unique(supports[a].begin(), supports[a].end()),
                      supports[a].end());
  }
  auto subset = [](const std::vector<int>& a, const std::vector<int>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
  };
  ModeList out;
  std::set<std::vector<int>> uniq(supports.begin(), supports.end());
  for (const auto& s : uniq) {
    bool maximal = true;
    for (const auto& t : uniq)
      if (t != s && subset(s, t)) {
        maximal = false;
        break;
      }
    if (maximal) out.modes.push_back(s);
  }
  std::sort(out.modes.begin(), out.modes.end());
  out.action_modes.resize(acts.size());
  for (size_t a = 0; a < acts.size(); ++a)
    for (size_t s = 0; s < out.modes.size(); ++s)
      if (subset(supports[a], out.modes[s])) out.action_modes[a].push_back((int)s);
  return out;
}

namespace {

// 1D lower convex hull of a mode's (p, K) table; endpoints always kept.
std::vector<int> lower_hull_1d(const std::vector<std::pair<Real, Real>>& pts) {
  std::vector<int> hull;
  for (int i = 0; i < (int)pts.size(); ++i) {
    while (hull.size() >= 2) {
      auto [x1, y1] = pts[hull[hull.size() - 2]];
      auto [x2, y2] = pts[hull.back()];
      auto [x3, y3] = pts[i];
      // drop the middle point when it is on or above the chord
      if ((y2 - y1) * (x3 - x1) >= (y3 - y1) * (x2 - x1) - 1e-15 * std::abs(x3 - x1))
        hull.pop_back();
      else
        break;
    }
    hull.push_back(i);
  }
  return hull;
}

}  // namespace

OsspModel prune_model(const OsspModel& m, PruneReport* report) {
  OsspModel out;
  out.n = m.n;
  out.labels = m.labels;
  out.actions.resize(m.n);
  for (int i = 0; i < m.n; ++i) {
    auto emb = embed_actions(m, i, true);
    auto reasons = classify_points(emb.points);
    std::vector<char> drop(m.actions[i].size(), 0);
    for (int ai : emb.duplicate_actions) {
      drop[ai] = 1;
      if (report) report->removed.push_back({i, ai, -1, PruneReason::Duplicate});
    }
    for (size_t r = 0; r < emb.points.size(); ++r) {
      const auto& pt = emb.points[r];
      if (pt.urgency_p >= 0) continue;  // mode entries handled by the hull filter
      if (reasons[r] == PruneReason::Dominated || reasons[r] == PruneReason::Replaceable) {
        drop[pt.action_index] = 1;
        if (report) report->removed.push_back({i, pt.action_index, -1, reasons[r]});
      }
    }
    for (size_t ai = 0; ai < m.actions[i].size(); ++ai) {
      if (drop[ai]) continue;
      const Action& a = m.actions[i][ai];
      if (auto* um = std::get_if<UrgencyMode>(&a);
          um && !um->interval() && !um->curve.smooth()) {
        // discrete-convexity filter on the mode table (post-Eq 5.4 test)
        std::vector<std::pair<Real, Real>> tab;
        for (Real p : um->support) tab.push_back({p, um->curve(p)});
        auto hull = lower_hull_1d(tab);
        if (hull.size() < tab.size()) {
          UrgencyMode num = *um;
          num.curve.kind = CostCurve::Kind::Table;
          num.curve.points.clear();
          num.support.clear();
          std::set<int> kept(hull.begin(), hull.end());
          for (int k = 0; k < (int)tab.size(); ++k) {
            if (kept.count(k)) {
              num.curve.points.push_back(tab[k]);
              num.support.push_back(tab[k].first);
            } else if (report) {
              report->removed.push_back({i, (int)ai, tab[k].first, PruneReason::Dominated});
            }
          }
          num.curve.convex_flag = true;
          out.actions[i].push_back(std::move(num));
          continue;
        }
      }
      out.actions[i].push_back(a);
    }
  }
  return out;
}

}  // namespace ossp
