#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ossp/common.hpp"

namespace ossp {

// Quadratic rational Bezier curve through (0,K0), (p1x,K0), (1,KL) with unit end
// weights and solved middle weight w1.  p1x sits at the intersection of the lines
// K = K0 and K = p*KL + (1-p)*delta.
struct RbcCurve {
  Real K0 = 0, KL = 0;
  Real p1x = 0;   // middle control point abscissa
  Real w1 = 1;    // solved middle weight
  Real t_mid = 0; // curve parameter of the interpolated middle datapoint

  // Point on the curve at parameter t: (p(t), K(t)).
  std::pair<Real, Real> at_t(Real t) const;
  // Invert p(t) = p (monotone) and evaluate K.
  Real t_of_p(Real p) const;
  Real eval(Real p) const;
  Real deriv(Real p) const;  // dK/dp
};

struct NoFit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CostCurve {
  enum class Kind { Table, Escalating, Quadratic, Rbc };
  Kind kind = Kind::Table;

  // Table / escalating: increasing support points (p_l, K_l), p_0 = 0, p_L = 1.
  std::vector<std::pair<Real, Real>> points;

  // Escalating parameters (kept for serialization).
  Real K0 = 0;
  std::vector<Real> probs, penalties;
  bool convex_flag = true;  // divided-difference test, escalating/table kinds

  // Quadratic: K(p) = beta*p^2 + gamma + offset.
  Real beta = 0, gamma = 0, offset = 0;

  RbcCurve rbc;

  Real operator()(Real p) const;  // table kinds interpolate linearly
  bool smooth() const { return kind == Kind::Quadratic || kind == Kind::Rbc; }
  Real deriv(Real p) const;  // smooth kinds only

  // Support abscissas for table kinds.
  std::vector<Real> support_points() const;
};

// Eq (5.1): 3-point table K(0)=g, K(ptilde)=g+ptilde*g1, K(1)=g+g1+(1-ptilde)*g2,
// with ptilde = 1 - exp(-alpha*D).
CostCurve jones_cost(Real g, Real alpha, Real D, Real g1, Real g2);

// Eq (5.4): K(p_l) = K(p_{l-1}) + (1 - p_{l-1}) Y_l, p_0 = 0.
CostCurve escalating_cost(Real K0, const std::vector<Real>& probs,
                          const std::vector<Real>& penalties);

CostCurve quadratic_cost(Real beta, Real gamma, Real offset = 0);

// Fit the RBC through (0,K0), (p_mid,K_mid), (1,KL); middle control point from delta.
RbcCurve rbc_fit(Real K0, std::pair<Real, Real> mid, Real KL, Real delta);

CostCurve rbc_cost(const RbcCurve& c);

// min over admissible p of K(p) + (1-p) U_stay + p U_switch.
// support empty => interval [0,1].  Ties broken toward smaller p.
std::pair<Real, Real> minimize_urgency(const CostCurve& curve,
                                       const std::vector<Real>& support,
                                       Real u_stay, Real u_switch);

void to_json(nlohmann::json& j, const CostCurve& c);
void from_json(const nlohmann::json& j, CostCurve& c);

}  // namespace ossp
