#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>

#include "ossp/model.hpp"

namespace ossp {

struct DegenerateSimplex : ModelError {
  using ModelError::ModelError;
};
struct NormalUnavailable : ModelError {
  using ModelError::ModelError;
};
struct DeltaTooLarge : ModelError {
  using ModelError::ModelError;
};

using Vec3 = Eigen::Vector3d;

// Direction-dependent speed f(a); 2D profiles live in the z = 0 plane.
struct SpeedProfile {
  enum class Kind { Isotropic, Elliptic, Sampled };
  Kind kind = Kind::Isotropic;
  int dim = 2;
  Real F = 1;                                          // isotropic speed
  Eigen::Matrix3d M = Eigen::Matrix3d::Identity();     // elliptic: v' M v = 1
  std::function<Real(const Vec3&)> fn;                 // sampled: unit dir -> speed
  Real f1 = 1, f2 = 1;                                 // cached bounds F1 <= f <= F2

  static SpeedProfile isotropic(Real F, int dim = 2);
  static SpeedProfile ellipse(Real a, Real b, Real theta);
  static SpeedProfile ellipsoid(Real a, Real b, Real c,
                                const Eigen::Matrix3d& R = Eigen::Matrix3d::Identity());
  // piecewise-linear-in-angle polar table (angle, speed); wraps around 2 pi
  static SpeedProfile sampled2d(std::vector<std::pair<Real, Real>> table);
  static SpeedProfile from_function(int dim, std::function<Real(const Vec3&)> f);

  Real speed(const Vec3& dir) const;  // dir need not be normalized
  Vec3 velocity(const Vec3& dir) const;
  bool smooth() const { return kind != Kind::Sampled; }
  Vec3 normal(const Vec3& v) const;  // outward unit normal at v on the profile
  Real F1() const { return f1; }
  Real F2() const { return f2; }
};

// One stencil simplex (x = 0, z_1, ..., z_m) with per-vertex speeds/costs.
struct SimplexGeometry {
  int m = 2;
  std::array<Vec3, 3> z{};
  std::array<Real, 3> f{}, C{};
  std::array<Vec3, 3> v{};
};

SimplexGeometry make_simplex(const SpeedProfile& pr, const Vec3& z1, const Vec3& z2);
SimplexGeometry make_simplex(const SpeedProfile& pr, const Vec3& z1, const Vec3& z2,
                             const Vec3& z3);

// C^s(xi) = |sum_j xi_j z_j| / f(a_xi)
Real simplex_cost(const SimplexGeometry& g, const SpeedProfile& pr,
                  const std::vector<Real>& xi);

// Eq (4.2) single-simplex update: min over Xi_m of C^s(xi) + sum xi_j U_j.
std::pair<Real, std::vector<Real>> simplex_update(const SimplexGeometry& g,
                                                  const SpeedProfile& pr,
                                                  const std::vector<Real>& U);

struct ContainmentVerdict {
  bool satisfied = true;
  bool convex = true;   // sampled convexity of the profile (3D check only)
  Real max_coeff = 0;   // largest theta-type coefficient encountered
};
struct TangentVerdict {
  bool satisfied = true;
  Real d12 = 0;      // v_1 . n_2
  Real d21 = 0;      // v_2 . n_1
  Real min_dot = 0;  // worst dot product over all tested pairs/samples
};

// Theorem 4.2: V_s inside the parallelogram (0, v1, v2, v1+v2); theta_i <= 1.
// Elliptic profiles use closed-form sector extrema, other kinds are sampled.
ContainmentVerdict check_parallelogram_2d(const SimplexGeometry& g,
                                          const SpeedProfile& pr, int samples = 256);

// Proposition 4.3, Eq (4.5): v1.n2 >= 0 and v2.n1 >= 0.
TangentVerdict check_tangent_2d(const SimplexGeometry& g, const SpeedProfile& pr);

// Theorem 4.6: half-plane tests theta_1 + theta_2 d/C2 <= 1 and symmetric.
ContainmentVerdict check_delta_quad_2d(const SimplexGeometry& g, const SpeedProfile& pr,
                                       Real delta, int samples = 256);

// Proposition 4.7, Eq (4.7): Delta(x,s) = min(delta_1, delta_2), floored at 0.
Real max_delta_simplex_2d(const SimplexGeometry& g, const SpeedProfile& pr);

// Theorem 4.4: planar slices V^r inside Pi^r plus Psi^r containment via the
// coefficient (1 - xi_r) C(gamma_r) / C(xi) <= 1 on a simplex grid.
ContainmentVerdict check_3d(const SimplexGeometry& g, const SpeedProfile& pr,
                            int samples = 64);

// Proposition 4.5: v_i . n(v_j) >= 0 and v_r . n(v~) >= 0 over each slice.
TangentVerdict check_3d_normals(const SimplexGeometry& g, const SpeedProfile& pr,
                                int samples = 64);

// Tsitsiklis's 3D bucket width, recovered from the staircase simplex
// (h,0,0), (h,h,0), (h,h,h) via the pairwise Eq (4.7) bounds: h / (F2 sqrt(3)).
Real isotropic_delta_3d(Real h, Real F2);

struct Grid {
  int dim = 2;
  int nx = 2, ny = 2, nz = 1;
  Real h = 1.0;
  bool boundary_exit = false;  // wire boundary nodes to t at cost max(q, 1e-12)
  Real q = 0;
  std::vector<std::array<int, 3>> point_targets;

  int num_nodes() const { return nx * ny * (dim == 3 ? nz : 1); }
  int index(int i, int j, int k = 0) const { return (k * ny + j) * nx + i; }
  bool in_grid(int i, int j, int k = 0) const {
    return i >= 0 && i < nx && j >= 0 && j < ny && k >= 0 && k < (dim == 3 ? nz : 1);
  }
  bool on_boundary(int i, int j, int k = 0) const;
  Vec3 pos(int i, int j, int k = 0) const { return {i * h, j * h, k * h}; }
  int nearest_node(Real x, Real y, Real z = 0) const;
};

struct Stencil {
  int m = 2;
  std::vector<std::vector<std::array<int, 3>>> simplexes;  // integer offsets

  static Stencil four_point();
  static Stencil eight_point();
  static Stencil six_point_3d();
};

// Eq (4.2) as an OSSP: simplex modes at interior nodes, deterministic exit
// actions on the boundary / at point targets (cost floored at 1e-12 for A5').
OsspModel discretize(const Grid& grid, const Stencil& st, const SpeedProfile& pr);

// Delta(X) = min over stencil simplexes of Eq (4.7); 2D smooth profiles only.
Real stencil_max_delta(const Grid& grid, const Stencil& st, const SpeedProfile& pr);

enum class HjbMethod { Dijkstra, Dial, VI };

struct HjbResult {
  ValueFunction values;               // per grid node, row-major
  std::vector<Vec3> direction;        // optimal direction of motion (0 at exits)
  std::vector<std::vector<Real>> xi;  // minimizer per node (empty at exits)
  Real delta_used = 0;
};

// Dijkstra requires stencil-wide MC certification, Dial additionally
// delta <= Delta(X); both refuse otherwise unless force is set.
HjbResult hjb_solve(const Grid& grid, const Stencil& st, const SpeedProfile& pr,
                    HjbMethod method, Real delta = 0, bool force = false);

// The section-4.3 counterexample profile: speeds 1 along the axes, f_hat along
// (1,1,1)/sqrt(3), triangulated in between (three flat facets).
SpeedProfile counterexample_profile(Real f_hat);

// The same counterexample as a finite OSSP: x = 0, z_1..z_3 = 1..3, target 4;
// deterministic x -> z_j at cost 1, uniform stochastic action at cost 1/3,
// z-exit costs (eps, 1/4, 3/2).  Value-iteration fixed point has U(x) = 11/12.
OsspModel counterexample_43_model();

}  // namespace ossp
