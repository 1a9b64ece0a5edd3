#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>

#include "ossp/model.hpp"
#include "ossp/solvers.hpp"
#include "util.hpp"

using namespace ossp;
using namespace ossp::testutil;

TEST_CASE("expected_cost basics") {
  // two-successor split and a deterministic arc
  OsspModel m;
  m.n = 3;  // x0, z1=1, z2=2, target 3
  m.actions.resize(3);
  m.actions[0].push_back(sto(2.0, {{1, 0.5}, {2, 0.5}}));
  m.actions[0].push_back(det(3.0, 3));
  m.actions[1].push_back(det(1.0, 3));
  m.actions[2].push_back(det(1.0, 3));
  ValueFunction w{{0, 0.0, 4.0, 0.0}};
  w.values[0] = kInf;
  CHECK(expected_cost(m, 0, 0, w) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(expected_cost(m, 0, 1, w) == doctest::Approx(3.0).epsilon(1e-14));

  // +inf successor saturates
  ValueFunction winf{{kInf, kInf, 4.0, 0.0}};
  CHECK(is_inf(expected_cost(m, 0, 0, winf)));
}

TEST_CASE("urgency mode expected cost at a fixed p") {
  auto K = quadratic_cost(1.0, 2.0);  // K(p) = p^2 + 2
  Real p = 0.5, w_stay = 1.0, w_switch = 0.0;
  CHECK(K(p) + (1 - p) * w_stay + p * w_switch == doctest::Approx(2.75).epsilon(1e-14));
}

TEST_CASE("bellman_update enumerates actions and modes") {
  OsspModel m;
  m.n = 2;  // A=0, B=1, t=2
  m.actions.resize(2);
  m.actions[0].push_back(det(3.0, 2));
  m.actions[0].push_back(sto(1.0, {{2, 0.5}, {1, 0.5}}));
  m.actions[1].push_back(det(1.0, 2));
  ValueFunction w{{kInf, 1.0, 0.0}};
  auto [v, c] = bellman_update(m, 0, w);
  CHECK(v == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(c.action == 1);

  // quadratic interval mode: minimizer clips at p = 1
  OsspModel mm;
  mm.n = 3;  // x=0, stay=1, switch=2, t=3
  mm.actions.resize(3);
  UrgencyMode um;
  um.stay = 1;
  um.swtch = 2;
  um.curve = quadratic_cost(1.0, 2.0);
  mm.actions[0].push_back(um);
  mm.actions[1].push_back(det(1.0, 3));
  mm.actions[2].push_back(det(1.0, 3));
  ValueFunction w2{{kInf, 10.0, 0.0, 0.0}};
  auto [v2, c2] = bellman_update(mm, 0, w2);
  CHECK(v2 == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(c2.p == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("tie-break toward the lowest action index / smaller p") {
  OsspModel m;
  m.n = 1;
  m.actions.resize(1);
  m.actions[0].push_back(det(2.0, 1));
  m.actions[0].push_back(det(2.0, 1));
  ValueFunction w{{kInf, 0.0}};
  CHECK(bellman_update(m, 0, w).second.action == 0);

  auto flat = quadratic_cost(1e-12, 1.0);
  auto [p, v] = minimize_urgency(flat, {}, 1.0, 1.0);  // switching buys nothing
  CHECK(p == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("value_iteration: chain, fixed point, iteration count") {
  auto m = chain(1);
  auto res = value_iteration(m);
  CHECK(res.values[0] == doctest::Approx(1.0));
  CHECK(res.iterations == 1);

  OsspModel m2;
  m2.n = 2;
  m2.actions.resize(2);
  m2.actions[0].push_back(det(3.0, 2));
  m2.actions[0].push_back(sto(1.0, {{2, 0.5}, {1, 0.5}}));
  m2.actions[1].push_back(det(1.0, 2));
  auto r2 = value_iteration(m2);
  CHECK(r2.values[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(r2.values[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gauss_seidel sweep counts depend on the ordering") {
  auto m = chain(3);  // x0 -> x1 -> x2 -> t, acyclic
  auto fwd = gauss_seidel_solve(m, {2, 1, 0});  // reverse-topological
  CHECK(fwd.iterations == 1);
  auto bwd = gauss_seidel_solve(m, {0, 1, 2});  // anti-topological
  CHECK(bwd.iterations == 3);
  CHECK(max_abs_diff(fwd.values, bwd.values) <= 1e-12);
}

TEST_CASE("vi and gs agree on random models") {
  std::mt19937 rng(7);
  for (int k = 0; k < 20; ++k) {
    GenOptions opt;
    opt.n = 25;
    opt.force_mc = false;
    auto m = random_ossp(rng, opt);
    REQUIRE(validate_model(m).ok());
    auto vi = value_iteration(m, 1e-10);
    std::vector<int> order(m.n);
    for (int i = 0; i < m.n; ++i) order[i] = i;
    auto gs = gauss_seidel_solve(m, order, 1e-10);
    CHECK(max_abs_diff(vi.values, gs.values) <= 1e-9);
    CHECK(bellman_residual(m, vi.values) <= 1e-9);
  }
}

TEST_CASE("bellman operator is monotone") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<Real> U(0, 5);
  GenOptions opt;
  opt.n = 15;
  opt.force_mc = false;
  auto m = random_ossp(rng, opt);
  for (int k = 0; k < 50; ++k) {
    ValueFunction w, w2;
    w.values.resize(m.n + 1);
    w2.values.resize(m.n + 1);
    for (int i = 0; i <= m.n; ++i) {
      w.values[i] = U(rng);
      w2.values[i] = w.values[i] + U(rng);
    }
    w.values[m.n] = w2.values[m.n] = 0;
    for (int i = 0; i < m.n; ++i)
      CHECK(bellman_update(m, i, w).first <= bellman_update(m, i, w2).first + 1e-12);
  }
}

TEST_CASE("validate_model flags the paper assumptions") {
  OsspModel m;
  m.n = 2;
  m.actions.resize(2);
  m.actions[0].push_back(sto(1.0, {{0, 0.3}, {2, 0.7}}));  // self transition
  m.actions[1].push_back(det(1.0, 2));
  auto rep = validate_model(m);
  bool has_self = false;
  for (auto& is : rep.issues)
    has_self |= is.code == ValidationIssue::Code::SelfTransition && is.node == 0;
  CHECK(has_self);

  OsspModel m2;  // stochastic successor without a deterministic action (Eq 2.6)
  m2.n = 3;
  m2.actions.resize(3);
  m2.actions[0].push_back(sto(1.0, {{1, 0.5}, {2, 0.5}}));
  m2.actions[0].push_back(det(1.0, 1));
  m2.actions[1].push_back(det(1.0, 3));
  m2.actions[2].push_back(det(1.0, 3));
  auto rep2 = validate_model(m2);
  bool has_ossp = false;
  for (auto& is : rep2.issues) has_ossp |= is.code == ValidationIssue::Code::NotOssp;
  CHECK(has_ossp);
  CHECK(rep2.hard_ok());

  std::mt19937 rng(3);
  GenOptions opt;
  auto ok = random_ossp(rng, opt);
  CHECK(validate_model(ok).ok());
}

TEST_CASE("is_explicitly_causal") {
  auto m = chain(3);
  auto [acyclic, order] = is_explicitly_causal(m);
  CHECK(acyclic);
  REQUIRE(order.size() == 3);
  CHECK(order[0] == 2);  // successors first
  CHECK(gauss_seidel_solve(m, order).iterations == 1);

  OsspModel cyc;  // x0 <-> x1 plus exits
  cyc.n = 2;
  cyc.actions.resize(2);
  cyc.actions[0].push_back(det(1.0, 1));
  cyc.actions[0].push_back(det(5.0, 2));
  cyc.actions[1].push_back(det(1.0, 0));
  cyc.actions[1].push_back(det(1.0, 2));
  CHECK(!is_explicitly_causal(cyc).first);
}

TEST_CASE("model JSON round trip") {
  std::mt19937 rng(5);
  GenOptions opt;
  opt.n = 12;
  auto m = random_ossp(rng, opt);
  std::string path = "roundtrip_model.json";
  save_model(m, path);
  auto m2 = load_model(path);
  REQUIRE(m2.n == m.n);
  for (int i = 0; i < m.n; ++i) {
    REQUIRE(m2.actions[i].size() == m.actions[i].size());
    for (size_t a = 0; a < m.actions[i].size(); ++a)
      CHECK(successors_of(m2.actions[i][a]) == successors_of(m.actions[i][a]));
  }
  auto v1 = value_iteration(m).values;
  auto v2 = value_iteration(m2).values;
  CHECK(max_abs_diff(v1, v2) == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("cost curve constructions") {
  auto jones = jones_cost(4.0, 0.01, 10.0, 3.0, 40.0);
  Real pt = 1 - std::exp(-0.1);
  REQUIRE(jones.points.size() == 3);
  CHECK(jones.points[1].first == doctest::Approx(pt).epsilon(1e-14));
  CHECK(jones.points[0].second == doctest::Approx(4.0));
  CHECK(jones.points[1].second == doctest::Approx(4.0 + pt * 3).epsilon(1e-14));
  CHECK(jones.points[2].second == doctest::Approx(4.0 + 3 + (1 - pt) * 40).epsilon(1e-14));

  // Example-1 right-lane escalating table
  auto esc = escalating_cost(10.0, {pt, 0.2, 1.0}, {3 * pt, 2.0, 40.0});
  REQUIRE(esc.points.size() == 4);
  CHECK(esc.points[1].second == doctest::Approx(10 + 3 * pt).epsilon(1e-12));
  CHECK(esc.points[2].second == doctest::Approx(10 + 3 * pt + (1 - pt) * 2).epsilon(1e-12));
  CHECK(esc.points[3].second ==
        doctest::Approx(10 + 3 * pt + (1 - pt) * 2 + 0.8 * 40).epsilon(1e-12));

  // L=2 with Y2 = g2 + g1 recovers the Jones table's endpoint structure
  auto esc2 = escalating_cost(4.0, {pt, 1.0}, {3 * pt, (40.0 - 3.0 * 0) * 0 + 43.0});
  // K(1) = 4 + 3pt + (1-pt)*43 vs jones 4 + 3 + (1-pt)*40: equal iff Y2 = g1 + g2
  CHECK(esc2.points.back().second ==
        doctest::Approx(jones.points.back().second).epsilon(1e-12));
}

TEST_CASE("rbc fit interpolates and stays monotone") {
  // anchors from a convex escalating table
  Real K0 = 10, Km = 12.0952, KL = 44.0952, pm = 0.2;
  auto c = rbc_fit(K0, {pm, Km}, KL, 0.0);
  CHECK(c.eval(0) == doctest::Approx(K0).epsilon(1e-9));
  CHECK(c.eval(1) == doctest::Approx(KL).epsilon(1e-9));
  CHECK(c.eval(pm) == doctest::Approx(Km).epsilon(1e-7));
  Real prev = c.eval(0);
  for (int k = 1; k <= 100; ++k) {
    Real v = c.eval(k / 100.0);
    CHECK(v >= prev - 1e-9);
    prev = v;
  }

  // collinear middle point degenerates to the chord
  auto lin = rbc_fit(1.0, {0.4, 1.0 + 0.4 * 9.0}, 10.0, 0.0);
  for (int k = 0; k <= 10; ++k) {
    Real p = k / 10.0;
    CHECK(lin.eval(p) == doctest::Approx(1 + 9 * p).epsilon(1e-6));
  }
}

TEST_CASE("minimize_urgency paths") {
  // finite table, forced switch
  auto jones = jones_cost(4.0, 0.01, 10.0, 3.0, 40.0);
  auto [p1, v1] = minimize_urgency(jones, jones.support_points(), 1000.0, 0.0);
  CHECK(p1 == doctest::Approx(1.0));

  // quadratic analytic minimizer vs grid search
  auto q = quadratic_cost(1.0, 1.0);
  auto [p2, v2] = minimize_urgency(q, {}, 1.0, 0.0);
  CHECK(p2 == doctest::Approx(0.5).epsilon(1e-12));
  Real best = kInf;
  for (int k = 0; k <= 10000; ++k) {
    Real p = k / 10000.0;
    best = std::min(best, q(p) + (1 - p) * 1.0);
  }
  CHECK(v2 == doctest::Approx(best).epsilon(1e-7));
}
