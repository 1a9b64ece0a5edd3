#include "ossp/curve.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace ossp {

std::pair<Real, Real> RbcCurve::at_t(Real t) const {
  Real b0 = (1 - t) * (1 - t), b1 = 2 * t * (1 - t) * w1, b2 = t * t;
  Real den = b0 + b1 + b2;
  Real p = (b1 * p1x + b2) / den;
  Real K = (b0 * K0 + b1 * K0 + b2 * KL) / den;
  return {p, K};
}

Real RbcCurve::t_of_p(Real p) const {
  if (p <= 0) return 0;
  if (p >= 1) return 1;
  Real lo = 0, hi = 1;
  for (int it = 0; it < 200; ++it) {
    Real mid = 0.5 * (lo + hi);
    if (at_t(mid).first < p)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-16) break;
  }
  return 0.5 * (lo + hi);
}

Real RbcCurve::eval(Real p) const { return at_t(t_of_p(p)).second; }

Real RbcCurve::deriv(Real p) const {
  // dK/dp = K'(t)/p'(t) via central differences in t (the rational quadratic is smooth).
  Real t = t_of_p(p);
  Real h = 1e-7;
  Real t0 = std::max(0.0, t - h), t1 = std::min(1.0, t + h);
  auto [pa, Ka] = at_t(t0);
  auto [pb, Kb] = at_t(t1);
  return (Kb - Ka) / (pb - pa);
}

Real CostCurve::operator()(Real p) const {
  switch (kind) {
    case Kind::Quadratic:
      return beta * p * p + gamma + offset;
    case Kind::Rbc:
      return rbc.eval(p);
    default: {
      // piecewise-linear through the table points
      if (points.empty()) throw ModelError("empty cost table");
      if (p <= points.front().first) return points.front().second;
      if (p >= points.back().first) return points.back().second;
      auto it = std::upper_bound(points.begin(), points.end(), p,
                                 [](Real v, const auto& pt) { return v < pt.first; });
      auto [p1, K1] = *std::prev(it);
      auto [p2, K2] = *it;
      Real s = (p - p1) / (p2 - p1);
      return K1 + s * (K2 - K1);
    }
  }
}

Real CostCurve::deriv(Real p) const {
  switch (kind) {
    case Kind::Quadratic:
      return 2 * beta * p;
    case Kind::Rbc:
      return rbc.deriv(p);
    default:
      throw ModelError("derivative requested for non-smooth cost curve");
  }
}

std::vector<Real> CostCurve::support_points() const {
  std::vector<Real> s;
  s.reserve(points.size());
  for (auto& pt : points) s.push_back(pt.first);
  return s;
}

CostCurve jones_cost(Real g, Real alpha, Real D, Real g1, Real g2) {
  Real pt = 1 - std::exp(-alpha * D);
  CostCurve c;
  c.kind = CostCurve::Kind::Table;
  c.points = {{0.0, g}, {pt, g + pt * g1}, {1.0, g + g1 + (1 - pt) * g2}};
  if (pt == 0) c.points.erase(c.points.begin() + 1);  // alpha = 0 degenerates
  return c;
}

static bool divided_difference_convex(const std::vector<std::pair<Real, Real>>& pts) {
  for (size_t l = 2; l < pts.size(); ++l) {
    Real d1 = (pts[l - 1].second - pts[l - 2].second) / (pts[l - 1].first - pts[l - 2].first);
    Real d2 = (pts[l].second - pts[l - 1].second) / (pts[l].first - pts[l - 1].first);
    if (d2 < d1 - 1e-12) return false;
  }
  return true;
}

CostCurve escalating_cost(Real K0, const std::vector<Real>& probs,
                          const std::vector<Real>& penalties) {
  if (probs.size() != penalties.size() || probs.empty())
    throw ModelError("escalating_cost: need matching nonempty probs/penalties");
  if (std::abs(probs.back() - 1.0) > 1e-12)
    throw ModelError("escalating_cost: p_L must be 1");
  CostCurve c;
  c.kind = CostCurve::Kind::Escalating;
  c.K0 = K0;
  c.probs = probs;
  c.penalties = penalties;
  c.points.push_back({0.0, K0});
  Real prev_p = 0, K = K0;
  for (size_t l = 0; l < probs.size(); ++l) {
    K += (1 - prev_p) * penalties[l];
    c.points.push_back({probs[l], K});
    prev_p = probs[l];
  }
  c.convex_flag = divided_difference_convex(c.points);
  return c;
}

CostCurve quadratic_cost(Real beta, Real gamma, Real offset) {
  CostCurve c;
  c.kind = CostCurve::Kind::Quadratic;
  c.beta = beta;
  c.gamma = gamma;
  c.offset = offset;
  return c;
}

RbcCurve rbc_fit(Real K0, std::pair<Real, Real> mid, Real KL, Real delta) {
  auto [pm, Km] = mid;
  if (!(K0 < Km && Km < KL)) throw NoFit("rbc_fit: need K0 < K_mid < KL");
  RbcCurve c;
  c.K0 = K0;
  c.KL = KL;
  c.p1x = (K0 - delta) / (KL - delta);
  // Eliminate w1 from the K-equation: for parameter t of the middle datapoint,
  //   (1-t)^2 (K0-Km) + 2t(1-t) w1 (K0-Km) + t^2 (KL-Km) = 0.
  auto w1_of_t = [&](Real t) {
    return -((1 - t) * (1 - t) * (K0 - Km) + t * t * (KL - Km)) /
           (2 * t * (1 - t) * (K0 - Km));
  };
  auto p_resid = [&](Real t) {
    RbcCurve tmp = c;
    tmp.w1 = w1_of_t(t);
    return tmp.at_t(t).first - pm;
  };
  Real lo = 1e-12, hi = 1 - 1e-12;
  Real flo = p_resid(lo), fhi = p_resid(hi);
  if (flo * fhi > 0) throw NoFit("rbc_fit: middle point not bracketed by the control triangle");
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    Real m = 0.5 * (lo + hi);
    if (p_resid(m) * flo <= 0)
      hi = m;
    else
      lo = m;
  }
  c.t_mid = 0.5 * (lo + hi);
  c.w1 = w1_of_t(c.t_mid);
  if (c.w1 < -1e-9) throw NoFit("rbc_fit: negative middle weight (point outside control triangle)");
  return c;
}

CostCurve rbc_cost(const RbcCurve& rc) {
  CostCurve c;
  c.kind = CostCurve::Kind::Rbc;
  c.rbc = rc;
  return c;
}

std::pair<Real, Real> minimize_urgency(const CostCurve& curve,
                                       const std::vector<Real>& support,
                                       Real u_stay, Real u_switch) {
  auto val = [&](Real p) {
    return sat_add(curve(p), sat_add((1 - p) * u_stay, p * u_switch));
  };
  if (!support.empty()) {
    Real best_p = support.front(), best = val(best_p);
    for (Real p : support) {
      Real v = val(p);
      if (v < best) {
        best = v;
        best_p = p;
      }
    }
    return {best_p, best};
  }
  if (curve.kind == CostCurve::Kind::Quadratic && curve.beta > 0 &&
      !is_inf(u_stay) && !is_inf(u_switch)) {
    Real p = std::clamp((u_stay - u_switch) / (2 * curve.beta), 0.0, 1.0);
    return {p, val(p)};
  }
  if (is_inf(u_stay) || is_inf(u_switch)) {
    // endpoint-only candidates remain meaningful under the +inf sentinel
    Real v0 = val(0), v1 = val(1);
    return v1 < v0 ? std::pair{1.0, v1} : std::pair{0.0, v0};
  }
  auto [pg, vg] = golden_min(val, 0.0, 1.0, 1e-10);
  Real best_p = 0, best = val(0);
  if (vg < best) {
    best = vg;
    best_p = pg;
  }
  if (val(1) < best) {
    best = val(1);
    best_p = 1;
  }
  return {best_p, best};
}

void to_json(nlohmann::json& j, const CostCurve& c) {
  switch (c.kind) {
    case CostCurve::Kind::Table:
      j = {{"kind", "table"}, {"points", c.points}};
      break;
    case CostCurve::Kind::Escalating:
      j = {{"kind", "escalating"}, {"K0", c.K0}, {"probs", c.probs}, {"penalties", c.penalties}};
      break;
    case CostCurve::Kind::Quadratic:
      j = {{"kind", "quadratic"}, {"beta", c.beta}, {"gamma", c.gamma}, {"offset", c.offset}};
      break;
    case CostCurve::Kind::Rbc:
      j = {{"kind", "rbc"},   {"K0", c.rbc.K0},   {"KL", c.rbc.KL},
           {"p1x", c.rbc.p1x}, {"w1", c.rbc.w1},   {"t_mid", c.rbc.t_mid}};
      break;
  }
}

void from_json(const nlohmann::json& j, CostCurve& c) {
  std::string kind = j.at("kind");
  if (kind == "table") {
    c.kind = CostCurve::Kind::Table;
    c.points = j.at("points").get<std::vector<std::pair<Real, Real>>>();
    c.convex_flag = divided_difference_convex(c.points);
  } else if (kind == "escalating") {
    c = escalating_cost(j.at("K0"), j.at("probs"), j.at("penalties"));
  } else if (kind == "quadratic") {
    c = quadratic_cost(j.at("beta"), j.at("gamma"), j.value("offset", 0.0));
  } else if (kind == "rbc") {
    RbcCurve rc;
    rc.K0 = j.at("K0");
    rc.KL = j.at("KL");
    rc.p1x = j.at("p1x");
    rc.w1 = j.at("w1");
    rc.t_mid = j.value("t_mid", 0.0);
    c = rbc_cost(rc);
  } else {
    throw ModelError("unknown cost curve kind: " + kind);
  }
}

}  // namespace ossp
