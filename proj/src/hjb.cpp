#include "ossp/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "ossp/labelset.hpp"
#include "ossp/solvers.hpp"

namespace ossp {

namespace {

constexpr Real kContainTol = 1e-9;

Real cross2(const Vec3& a, const Vec3& b) { return a.x() * b.y() - a.y() * b.x(); }

// Directions sweeping the sector from a to b (unit vectors, angle < pi).
std::vector<Vec3> sector_dirs(const Vec3& a, const Vec3& b, int samples) {
  std::vector<Vec3> out;
  out.reserve(samples);
  for (int k = 0; k < samples; ++k) {
    Real t = samples > 1 ? Real(k) / (samples - 1) : 0.0;
    Vec3 d = (1 - t) * a + t * b;
    Real n = d.norm();
    if (n < 1e-14) continue;  // opposite directions; skip the midpoint
    out.push_back(d / n);
  }
  return out;
}

// Decompose v = theta_1 v1 + theta_2 v2 in their common plane.
Eigen::Vector2d decompose2(const Vec3& v1, const Vec3& v2, const Vec3& v) {
  Eigen::Matrix2d G;
  G << v1.dot(v1), v1.dot(v2), v2.dot(v1), v2.dot(v2);
  if (std::abs(G.determinant()) < 1e-14 * G.norm() * G.norm())
    throw DegenerateSimplex("simplex velocities are colinear");
  return G.ldlt().solve(Eigen::Vector2d(v1.dot(v), v2.dot(v)));
}

// Max of the linear functional g . v over the elliptic arc between v1 and v2
// (closed form: unconstrained elliptic maximum if it falls inside the sector,
// otherwise the endpoint values).
Real elliptic_arc_max(const SpeedProfile& pr, const Vec3& v1, const Vec3& v2,
                      const Eigen::Vector2d& g) {
  Eigen::Matrix2d M2 = pr.M.topLeftCorner<2, 2>();
  Eigen::Matrix2d Minv = M2.inverse();
  Real peak = std::sqrt(g.dot(Minv * g));
  Eigen::Vector2d vstar2 = Minv * g / peak;
  Vec3 vstar(vstar2.x(), vstar2.y(), 0.0);
  Real sgn = cross2(v1, v2) >= 0 ? 1.0 : -1.0;
  bool inside = sgn * cross2(v1, vstar) >= -1e-14 && sgn * cross2(vstar, v2) >= -1e-14;
  Real at1 = g.dot(Eigen::Vector2d(v1.x(), v1.y()));
  Real at2 = g.dot(Eigen::Vector2d(v2.x(), v2.y()));
  Real best = std::max(at1, at2);
  return inside ? std::max(best, peak) : best;
}

// The two half-plane functionals of Theorems 4.2 / 4.6 as linear forms in v:
// theta_1(v) = cross(v, v2) / cross(v1, v2) and symmetric.
std::pair<Eigen::Vector2d, Eigen::Vector2d> theta_forms(const Vec3& v1, const Vec3& v2) {
  Real det = cross2(v1, v2);
  if (std::abs(det) < 1e-14 * v1.norm() * v2.norm())
    throw DegenerateSimplex("simplex velocities are colinear");
  Eigen::Vector2d g1(v2.y() / det, -v2.x() / det);
  Eigen::Vector2d g2(-v1.y() / det, v1.x() / det);
  return {g1, g2};
}

ContainmentVerdict halfplane_check_2d(const SimplexGeometry& g, const SpeedProfile& pr,
                                      const Eigen::Vector2d& h1,
                                      const Eigen::Vector2d& h2, int samples) {
  ContainmentVerdict out;
  if (pr.kind == SpeedProfile::Kind::Elliptic) {
    out.max_coeff = std::max(elliptic_arc_max(pr, g.v[0], g.v[1], h1),
                             elliptic_arc_max(pr, g.v[0], g.v[1], h2));
  } else {
    for (const auto& a : sector_dirs(g.z[0].normalized(), g.z[1].normalized(), samples)) {
      Vec3 v = pr.velocity(a);
      Eigen::Vector2d v2(v.x(), v.y());
      out.max_coeff = std::max({out.max_coeff, h1.dot(v2), h2.dot(v2)});
    }
  }
  out.satisfied = out.max_coeff <= 1 + kContainTol;
  return out;
}

// Eq (4.7) for one ordered vertex pair: delta_1 = C_2 (v2.n1)/(v1.n1).
Real delta_pair(const SpeedProfile& pr, const Vec3& v1, const Vec3& v2, Real C2) {
  Vec3 n1 = pr.normal(v1);
  return C2 * v2.dot(n1) / v1.dot(n1);
}

std::mt19937& cert_rng() {
  static std::mt19937 rng(12345);
  return rng;
}

}  // namespace

SpeedProfile SpeedProfile::isotropic(Real F, int dim) {
  SpeedProfile p;
  p.kind = Kind::Isotropic;
  p.dim = dim;
  p.F = F;
  p.f1 = p.f2 = F;
  return p;
}

SpeedProfile SpeedProfile::ellipse(Real a, Real b, Real theta) {
  SpeedProfile p;
  p.kind = Kind::Elliptic;
  p.dim = 2;
  Eigen::Matrix3d R = Eigen::AngleAxisd(theta, Vec3::UnitZ()).toRotationMatrix();
  Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
  D(0, 0) = 1 / (a * a);
  D(1, 1) = 1 / (b * b);
  p.M = R * D * R.transpose();
  p.f1 = std::min(a, b);
  p.f2 = std::max(a, b);
  return p;
}

SpeedProfile SpeedProfile::ellipsoid(Real a, Real b, Real c, const Eigen::Matrix3d& R) {
  SpeedProfile p;
  p.kind = Kind::Elliptic;
  p.dim = 3;
  Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
  D(0, 0) = 1 / (a * a);
  D(1, 1) = 1 / (b * b);
  D(2, 2) = 1 / (c * c);
  p.M = R * D * R.transpose();
  p.f1 = std::min({a, b, c});
  p.f2 = std::max({a, b, c});
  return p;
}

SpeedProfile SpeedProfile::sampled2d(std::vector<std::pair<Real, Real>> table) {
  std::sort(table.begin(), table.end());
  auto fn = [table](const Vec3& a) {
    const Real twopi = 2 * M_PI;
    Real phi = std::atan2(a.y(), a.x());
    if (phi < table.front().first) phi += twopi;
    auto it = std::upper_bound(table.begin(), table.end(), std::make_pair(phi, kInf));
    Real a0, f0, a1, f1;
    if (it == table.begin() || it == table.end()) {  // wrap-around segment
      a0 = table.back().first;
      f0 = table.back().second;
      a1 = table.front().first + twopi;
      f1 = table.front().second;
      if (phi < a0) phi += twopi;
    } else {
      a0 = (it - 1)->first;
      f0 = (it - 1)->second;
      a1 = it->first;
      f1 = it->second;
    }
    Real t = a1 > a0 ? (phi - a0) / (a1 - a0) : 0.0;
    return f0 + t * (f1 - f0);
  };
  SpeedProfile p;
  p.kind = Kind::Sampled;
  p.dim = 2;
  p.fn = fn;
  p.f1 = kInf;
  p.f2 = 0;
  for (auto& [ang, f] : table) {
    (void)ang;
    p.f1 = std::min(p.f1, f);
    p.f2 = std::max(p.f2, f);
  }
  return p;
}

SpeedProfile SpeedProfile::from_function(int dim, std::function<Real(const Vec3&)> f) {
  SpeedProfile p;
  p.kind = Kind::Sampled;
  p.dim = dim;
  p.fn = std::move(f);
  p.f1 = kInf;
  p.f2 = 0;
  if (dim == 2) {
    for (int k = 0; k < 2048; ++k) {
      Real phi = 2 * M_PI * k / 2048;
      Real v = p.fn(Vec3(std::cos(phi), std::sin(phi), 0));
      p.f1 = std::min(p.f1, v);
      p.f2 = std::max(p.f2, v);
    }
  } else {
    for (int i = 0; i < 128; ++i)
      for (int j = 0; j < 64; ++j) {
        Real phi = 2 * M_PI * i / 128, th = M_PI * (j + 0.5) / 64;
        Vec3 a(std::sin(th) * std::cos(phi), std::sin(th) * std::sin(phi), std::cos(th));
        Real v = p.fn(a);
        p.f1 = std::min(p.f1, v);
        p.f2 = std::max(p.f2, v);
      }
  }
  return p;
}

Real SpeedProfile::speed(const Vec3& dir) const {
  Vec3 a = dir.normalized();
  switch (kind) {
    case Kind::Isotropic: return F;
    case Kind::Elliptic: return 1 / std::sqrt(a.dot(M * a));
    case Kind::Sampled: return fn(a);
  }
  return F;
}

Vec3 SpeedProfile::velocity(const Vec3& dir) const {
  Vec3 a = dir.normalized();
  return speed(a) * a;
}

Vec3 SpeedProfile::normal(const Vec3& v) const {
  switch (kind) {
    case Kind::Isotropic: return v.normalized();
    case Kind::Elliptic: return (M * v).normalized();
    case Kind::Sampled: break;
  }
  throw NormalUnavailable("sampled profiles carry no tangent information");
}

SimplexGeometry make_simplex(const SpeedProfile& pr, const Vec3& z1, const Vec3& z2) {
  SimplexGeometry g;
  g.m = 2;
  g.z = {z1, z2, Vec3::Zero()};
  for (int j = 0; j < 2; ++j) {
    g.f[j] = pr.speed(g.z[j]);
    g.C[j] = g.z[j].norm() / g.f[j];
    g.v[j] = pr.velocity(g.z[j]);
  }
  return g;
}

SimplexGeometry make_simplex(const SpeedProfile& pr, const Vec3& z1, const Vec3& z2,
                             const Vec3& z3) {
  SimplexGeometry g;
  g.m = 3;
  g.z = {z1, z2, z3};
  for (int j = 0; j < 3; ++j) {
    g.f[j] = pr.speed(g.z[j]);
    g.C[j] = g.z[j].norm() / g.f[j];
    g.v[j] = pr.velocity(g.z[j]);
  }
  return g;
}

Real simplex_cost(const SimplexGeometry& g, const SpeedProfile& pr,
                  const std::vector<Real>& xi) {
  Vec3 x = Vec3::Zero();
  for (int j = 0; j < g.m; ++j) x += xi[j] * g.z[j];
  Real n = x.norm();
  return n / pr.speed(x / n);
}

std::pair<Real, std::vector<Real>> simplex_update(const SimplexGeometry& g,
                                                  const SpeedProfile& pr,
                                                  const std::vector<Real>& U) {
  auto value_at = [&](const std::vector<Real>& xi) {
    Real acc = simplex_cost(g, pr, xi);
    for (int j = 0; j < g.m; ++j) acc += xi[j] * U[j];
    return acc;
  };
  if (g.m == 2) {
    Real best_p = 0;
    Real best = g.C[0] + U[0];
    auto consider = [&](Real p, Real val) {
      if (val < best - 1e-15 || (val <= best + 1e-15 && p < best_p)) {
        best = std::min(best, val);
        best_p = p;
      }
    };
    consider(1.0, g.C[1] + U[1]);
    if (pr.kind == SpeedProfile::Kind::Isotropic) {
      // stationarity x~ . D = b |x~| with b = -F (U2 - U1); squared -> quadratic
      Vec3 A = g.z[0], D = g.z[1] - g.z[0];
      Real b = -pr.F * (U[1] - U[0]);
      Real AD = A.dot(D), DD = D.squaredNorm(), AA = A.squaredNorm();
      Real a2 = DD * DD - b * b * DD;
      Real a1 = 2 * AD * DD - 2 * b * b * AD;
      Real a0 = AD * AD - b * b * AA;
      std::vector<Real> roots;
      if (std::abs(a2) > 1e-14 * DD * DD) {
        Real disc = a1 * a1 - 4 * a2 * a0;
        if (disc >= 0) {
          Real sq = std::sqrt(disc);
          roots = {(-a1 - sq) / (2 * a2), (-a1 + sq) / (2 * a2)};
        }
      } else if (std::abs(a1) > 1e-300) {
        roots = {-a0 / a1};
      }
      for (Real p : roots) {
        if (!(p > 0 && p < 1)) continue;
        Vec3 x = A + p * D;
        if (x.dot(D) * b < -1e-14) continue;  // squaring artifact
        consider(p, value_at({1 - p, p}));
      }
    } else {
      auto f = [&](Real p) { return value_at({1 - p, p}); };
      auto [p, val] = golden_min(f, 0.0, 1.0, 1e-10);
      consider(p, val);
    }
    return {best, {1 - best_p, best_p}};
  }

  // m = 3: the three edges, then an interior nested search.
  Real best = kInf;
  std::vector<Real> best_xi(3, 0.0);
  const int pairs[3][2] = {{0, 1}, {1, 2}, {0, 2}};
  for (auto [i, j] : pairs) {
    auto sub = make_simplex(pr, g.z[i], g.z[j]);
    auto [val, sxi] = simplex_update(sub, pr, {U[i], U[j]});
    if (val < best) {
      best = val;
      best_xi.assign(3, 0.0);
      best_xi[i] = sxi[0];
      best_xi[j] = sxi[1];
    }
  }
  auto inner = [&](Real x0) {
    auto f = [&](Real s) { return value_at({x0, s * (1 - x0), (1 - s) * (1 - x0)}); };
    return golden_min(f, 0.0, 1.0, 1e-10);
  };
  auto [x0, vout] = golden_min([&](Real x0) { return inner(x0).second; }, 0.0, 1.0, 1e-8);
  auto [s, val] = inner(x0);
  if (val < best) {
    best = val;
    best_xi = {x0, s * (1 - x0), (1 - s) * (1 - x0)};
  }
  return {best, best_xi};
}

ContainmentVerdict check_parallelogram_2d(const SimplexGeometry& g,
                                          const SpeedProfile& pr, int samples) {
  auto [h1, h2] = theta_forms(g.v[0], g.v[1]);
  return halfplane_check_2d(g, pr, h1, h2, samples);
}

TangentVerdict check_tangent_2d(const SimplexGeometry& g, const SpeedProfile& pr) {
  TangentVerdict out;
  out.d12 = g.v[0].dot(pr.normal(g.v[1]));
  out.d21 = g.v[1].dot(pr.normal(g.v[0]));
  out.min_dot = std::min(out.d12, out.d21);
  out.satisfied = out.min_dot >= -1e-12;
  return out;
}

ContainmentVerdict check_delta_quad_2d(const SimplexGeometry& g, const SpeedProfile& pr,
                                       Real delta, int samples) {
  if (delta > std::min(g.C[0], g.C[1]) * (1 + 1e-12))
    throw DeltaTooLarge("delta exceeds min(C_1, C_2)");
  auto [g1, g2] = theta_forms(g.v[0], g.v[1]);
  Eigen::Vector2d h1 = g1 + (delta / g.C[1]) * g2;  // theta_1 + theta_2 delta / C_2
  Eigen::Vector2d h2 = g2 + (delta / g.C[0]) * g1;
  return halfplane_check_2d(g, pr, h1, h2, samples);
}

Real max_delta_simplex_2d(const SimplexGeometry& g, const SpeedProfile& pr) {
  Real d1 = delta_pair(pr, g.v[0], g.v[1], g.C[1]);
  Real d2 = delta_pair(pr, g.v[1], g.v[0], g.C[0]);
  return std::max(0.0, std::min(d1, d2));
}

Real isotropic_delta_3d(Real h, Real F2) {
  auto pr = SpeedProfile::isotropic(F2, 3);
  auto g = make_simplex(pr, Vec3(h, 0, 0), Vec3(h, h, 0), Vec3(h, h, h));
  Real best = kInf;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) best = std::min(best, delta_pair(pr, g.v[i], g.v[j], g.C[j]));
  return std::max(0.0, best);
}

ContainmentVerdict check_3d(const SimplexGeometry& g, const SpeedProfile& pr,
                            int samples) {
  ContainmentVerdict out;
  if (std::abs(g.v[0].cross(g.v[1]).dot(g.v[2])) <
      1e-12 * g.v[0].norm() * g.v[1].norm() * g.v[2].norm())
    throw DegenerateSimplex("simplex velocities are coplanar with the origin");

  // sampled convexity of the profile region within the simplex cone
  std::uniform_real_distribution<Real> Urand(0, 1);
  auto& rng = cert_rng();
  auto random_xi = [&]() {
    Real a = Urand(rng), b = Urand(rng);
    if (a + b > 1) {
      a = 1 - a;
      b = 1 - b;
    }
    return std::vector<Real>{a, b, 1 - a - b};
  };
  auto dir_of = [&](const std::vector<Real>& xi) {
    Vec3 x = xi[0] * g.z[0] + xi[1] * g.z[1] + xi[2] * g.z[2];
    return x.normalized();
  };
  for (int k = 0; k < samples * samples / 8; ++k) {
    Vec3 u = pr.velocity(dir_of(random_xi()));
    Vec3 w = pr.velocity(dir_of(random_xi()));
    Vec3 mid = 0.5 * (u + w);
    if (mid.norm() > pr.speed(mid) + kContainTol) {
      out.convex = false;
      out.satisfied = false;
    }
  }

  // V^r inside Pi^r for each coordinate pair (Theorem 4.2 applied slice-wise)
  const int pairs[3][2] = {{1, 2}, {0, 2}, {0, 1}};
  for (int r = 0; r < 3; ++r) {
    int i = pairs[r][0], j = pairs[r][1];
    for (const auto& a : sector_dirs(g.z[i].normalized(), g.z[j].normalized(), samples)) {
      auto th = decompose2(g.v[i], g.v[j], pr.velocity(a));
      out.max_coeff = std::max({out.max_coeff, th(0), th(1)});
    }
  }

  // Psi^r containment: (1 - xi_r) C(gamma_r) / C(xi) <= 1 on a simplex grid
  const int N = samples;
  for (int i = 1; i < N; ++i)
    for (int j = 1; i + j < N; ++j) {
      std::vector<Real> xi = {Real(i) / N, Real(j) / N, Real(N - i - j) / N};
      Real Cxi = simplex_cost(g, pr, xi);
      for (int r = 0; r < 3; ++r) {
        std::vector<Real> gamma(3, 0.0);
        for (int l = 0; l < 3; ++l)
          if (l != r) gamma[l] = xi[l] / (1 - xi[r]);
        Real coeff = (1 - xi[r]) * simplex_cost(g, pr, gamma) / Cxi;
        out.max_coeff = std::max(out.max_coeff, coeff);
      }
    }
  out.satisfied = out.convex && out.max_coeff <= 1 + kContainTol;
  return out;
}

TangentVerdict check_3d_normals(const SimplexGeometry& g, const SpeedProfile& pr,
                                int samples) {
  TangentVerdict out;
  out.min_dot = kInf;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      out.min_dot = std::min(out.min_dot, g.v[i].dot(pr.normal(g.v[j])));
  const int pairs[3][2] = {{1, 2}, {0, 2}, {0, 1}};
  for (int r = 0; r < 3; ++r) {
    int i = pairs[r][0], j = pairs[r][1];
    for (const auto& a : sector_dirs(g.z[i].normalized(), g.z[j].normalized(), samples)) {
      Vec3 vt = pr.velocity(a);
      out.min_dot = std::min(out.min_dot, g.v[r].dot(pr.normal(vt)));
    }
  }
  out.satisfied = out.min_dot >= -1e-12;
  return out;
}

bool Grid::on_boundary(int i, int j, int k) const {
  if (i == 0 || i == nx - 1 || j == 0 || j == ny - 1) return true;
  return dim == 3 && (k == 0 || k == nz - 1);
}

int Grid::nearest_node(Real x, Real y, Real z) const {
  auto clampi = [](long v, int hi) { return (int)std::clamp<long>(v, 0, hi - 1); };
  int i = clampi(std::lround(x / h), nx);
  int j = clampi(std::lround(y / h), ny);
  int k = dim == 3 ? clampi(std::lround(z / h), nz) : 0;
  return index(i, j, k);
}

Stencil Stencil::four_point() {
  Stencil s;
  s.m = 2;
  s.simplexes = {{{1, 0, 0}, {0, 1, 0}},
                 {{0, 1, 0}, {-1, 0, 0}},
                 {{-1, 0, 0}, {0, -1, 0}},
                 {{0, -1, 0}, {1, 0, 0}}};
  return s;
}

Stencil Stencil::eight_point() {
  Stencil s;
  s.m = 2;
  s.simplexes = {{{1, 0, 0}, {1, 1, 0}},   {{1, 1, 0}, {0, 1, 0}},
                 {{0, 1, 0}, {-1, 1, 0}},  {{-1, 1, 0}, {-1, 0, 0}},
                 {{-1, 0, 0}, {-1, -1, 0}}, {{-1, -1, 0}, {0, -1, 0}},
                 {{0, -1, 0}, {1, -1, 0}}, {{1, -1, 0}, {1, 0, 0}}};
  return s;
}

Stencil Stencil::six_point_3d() {
  Stencil s;
  s.m = 3;
  for (int sx : {1, -1})
    for (int sy : {1, -1})
      for (int sz : {1, -1})
        s.simplexes.push_back({{{sx, 0, 0}}, {{0, sy, 0}}, {{0, 0, sz}}});
  return s;
}

OsspModel discretize(const Grid& grid, const Stencil& st, const SpeedProfile& pr) {
  OsspModel m;
  m.n = grid.num_nodes();
  m.actions.resize(m.n);
  auto prp = std::make_shared<SpeedProfile>(pr);
  std::vector<char> is_target(m.n, 0);
  for (auto& t : grid.point_targets) is_target[grid.index(t[0], t[1], t[2])] = 1;
  const int nzz = grid.dim == 3 ? grid.nz : 1;
  for (int k = 0; k < nzz; ++k)
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) {
        int id = grid.index(i, j, k);
        if (is_target[id]) {
          m.actions[id].push_back(FiniteAction{1e-12, {{m.n, 1.0}}});
          continue;
        }
        if (grid.boundary_exit && grid.on_boundary(i, j, k)) {
          m.actions[id].push_back(FiniteAction{std::max(grid.q, 1e-12), {{m.n, 1.0}}});
          continue;
        }
        for (const auto& sim : st.simplexes) {
          bool ok = true;
          std::vector<int> succ;
          std::vector<Vec3> zz;
          for (const auto& off : sim) {
            int ii = i + off[0], jj = j + off[1], kk = k + off[2];
            if (!grid.in_grid(ii, jj, kk)) {
              ok = false;
              break;
            }
            succ.push_back(grid.index(ii, jj, kk));
            zz.push_back(Vec3(off[0], off[1], off[2]) * grid.h);
          }
          if (!ok) continue;
          SimplexAction sa;
          sa.successors = std::move(succ);
          sa.cost = [prp, zz](const std::vector<Real>& xi) {
            Vec3 x = Vec3::Zero();
            for (size_t l = 0; l < zz.size(); ++l) x += xi[l] * zz[l];
            Real n = x.norm();
            return n / prp->speed(x / n);
          };
          m.actions[id].push_back(std::move(sa));
        }
      }
  return m;
}

Real stencil_max_delta(const Grid& grid, const Stencil& st, const SpeedProfile& pr) {
  if (st.m != 2) throw ModelError("stencil_max_delta: 2D stencils only");
  Real best = kInf;
  for (const auto& sim : st.simplexes) {
    auto g = make_simplex(pr, Vec3(sim[0][0], sim[0][1], 0) * grid.h,
                          Vec3(sim[1][0], sim[1][1], 0) * grid.h);
    best = std::min(best, max_delta_simplex_2d(g, pr));
  }
  return best;
}

HjbResult hjb_solve(const Grid& grid, const Stencil& st, const SpeedProfile& pr,
                    HjbMethod method, Real delta, bool force) {
  if (!force && method != HjbMethod::VI) {
    // profile is x-independent: one certification per stencil simplex shape
    for (const auto& sim : st.simplexes) {
      if (st.m == 2) {
        auto g = make_simplex(pr, Vec3(sim[0][0], sim[0][1], 0) * grid.h,
                              Vec3(sim[1][0], sim[1][1], 0) * grid.h);
        if (!check_parallelogram_2d(g, pr).satisfied)
          throw CausalityRefused("stencil simplex fails the Theorem 4.2 containment");
      } else {
        auto g = make_simplex(pr, Vec3(sim[0][0], sim[0][1], sim[0][2]) * grid.h,
                              Vec3(sim[1][0], sim[1][1], sim[1][2]) * grid.h,
                              Vec3(sim[2][0], sim[2][1], sim[2][2]) * grid.h);
        if (!check_3d(g, pr).satisfied)
          throw CausalityRefused("stencil simplex fails the Theorem 4.4 containment");
      }
    }
    if (method == HjbMethod::Dial) {
      if (st.m != 2)
        throw CausalityRefused(
            "Dial in 3D is not certified on this stencil (orthant simplexes have "
            "Delta = 0)");
      Real D = stencil_max_delta(grid, st, pr);
      if (!(delta > 0) || delta > D * (1 + 1e-12))
        throw CausalityRefused("bucket width exceeds the certified Delta(X)");
    }
  }
  OsspModel m = discretize(grid, st, pr);
  ValueFunction vals;
  Policy pol;
  switch (method) {
    case HjbMethod::Dijkstra: {
      auto r = dijkstra_solve(m);
      vals = std::move(r.values);
      pol = std::move(r.policy);
      break;
    }
    case HjbMethod::Dial: {
      auto r = dial_solve(m, delta);
      vals = std::move(r.values);
      pol = std::move(r.policy);
      break;
    }
    case HjbMethod::VI: {
      auto r = value_iteration(m);
      vals = std::move(r.values);
      pol = std::move(r.policy);
      break;
    }
  }
  HjbResult out;
  out.delta_used = delta;
  out.values.values.assign(vals.values.begin(), vals.values.begin() + m.n);
  out.direction.assign(m.n, Vec3::Zero());
  out.xi.resize(m.n);
  const int nzz = grid.dim == 3 ? grid.nz : 1;
  for (int k = 0; k < nzz; ++k)
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) {
        int id = grid.index(i, j, k);
        const auto& ch = pol.choices[id];
        if (ch.action < 0) continue;
        const auto* sa = std::get_if<SimplexAction>(&m.actions[id][ch.action]);
        if (!sa || ch.xi.empty()) continue;
        Vec3 x = Vec3::Zero();
        for (size_t l = 0; l < sa->successors.size(); ++l) {
          int s = sa->successors[l];
          int si = s % grid.nx, sj = (s / grid.nx) % grid.ny, sk = s / (grid.nx * grid.ny);
          x += ch.xi[l] * Vec3(si - i, sj - j, sk - k);
        }
        if (x.norm() > 1e-14) out.direction[id] = x.normalized();
        out.xi[id] = ch.xi;
      }
  return out;
}

SpeedProfile counterexample_profile(Real f_hat) {
  Vec3 vhat = f_hat * Vec3(1, 1, 1).normalized();
  std::array<Vec3, 3> e = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  auto fn = [vhat, e](const Vec3& dir) {
    Vec3 a = dir.cwiseAbs().normalized();  // octant symmetry
    Real best = 0;
    const int pairs[3][2] = {{0, 1}, {1, 2}, {0, 2}};
    for (auto [i, j] : pairs) {
      Vec3 p0 = vhat, p1 = e[i], p2 = e[j];
      Vec3 n = (p1 - p0).cross(p2 - p0);
      Real denom = n.dot(a);
      if (std::abs(denom) < 1e-14) continue;
      Real t = n.dot(p0) / denom;
      if (t <= 0) continue;
      Vec3 q = t * a;  // barycentric containment test
      Eigen::Matrix3d B;
      B << p0, p1, p2;
      Vec3 lam = B.fullPivLu().solve(q);
      if (lam.minCoeff() >= -1e-9) best = std::max(best, t);
    }
    return best;
  };
  return SpeedProfile::from_function(3, fn);
}

OsspModel counterexample_43_model() {
  OsspModel m;
  m.n = 4;  // x = 0, z_1..z_3 = 1..3, target 4
  m.actions.resize(4);
  m.actions[0].push_back(
      FiniteAction{1.0 / 3, {{1, 1.0 / 3}, {2, 1.0 / 3}, {3, 1.0 / 3}}});
  for (int z = 1; z <= 3; ++z) m.actions[0].push_back(FiniteAction{1.0, {{z, 1.0}}});
  m.actions[1].push_back(FiniteAction{1e-12, {{4, 1.0}}});
  m.actions[2].push_back(FiniteAction{0.25, {{4, 1.0}}});
  m.actions[3].push_back(FiniteAction{1.5, {{4, 1.0}}});
  m.labels = {"x", "z_1", "z_2", "z_3", "t"};
  return m;
}

}  // namespace ossp
