#pragma once

#include <array>
#include <vector>

#include "microlam/linalg.hpp"

namespace microlam {

inline constexpr double kGeomEps = 1e-12;

// n . x <= c with |n| = 1.
struct Halfspace {
  Vec3 n;
  double c;
  static Halfspace make(const Vec3& normal, double offset);
};

struct Facet {
  Vec3 normal;  // outward unit normal
  double offset = 0.0;
  std::vector<Vec3> poly;  // counter-clockwise seen from outside
  double area = 0.0;
};

struct PolyGeom {
  std::vector<Vec3> verts;
  std::vector<Facet> facets;
  double volume = 0.0;
  Vec3 centroid = Vec3::Zero();
  Vec3 lo = Vec3::Zero(), hi = Vec3::Zero();
  bool empty() const { return volume <= 0.0; }
};

// Bounded convex polytope given as an intersection of halfspaces.
class Polytope {
 public:
  Polytope() = default;
  explicit Polytope(std::vector<Halfspace> hs) : hs_(std::move(hs)) {}
  static Polytope box(const Vec3& lo, const Vec3& hi);

  Polytope clipped(const Halfspace& h) const;
  Polytope clipped(const Vec3& normal, double offset) const { return clipped(Halfspace::make(normal, offset)); }
  const std::vector<Halfspace>& halfspaces() const { return hs_; }
  bool contains(const Vec3& p, double tol = kGeomEps) const;
  PolyGeom geometry() const;

 private:
  std::vector<Halfspace> hs_;
};

// Tetrahedra (centroid fan over facet fans) covering the polytope.
struct Tet {
  std::array<Vec3, 4> v;
  double volume;
};
std::vector<Tet> tetrahedralize(const PolyGeom& g);

// Exact integral of |a(x)|^2 for affine a(x) = a0 + G x (a0 in R^q, G q x 3).
double integrate_affine_sq(const PolyGeom& g, const Vec& a0, const Eigen::Matrix<double, Eigen::Dynamic, 3>& grad);

// Convex polygon clipping in a plane: returns the intersection polygon (2-D coordinates).
using Poly2 = std::vector<Eigen::Vector2d>;
Poly2 clip_convex(const Poly2& subject, const Poly2& clip);
double polygon_area(const Poly2& p);

// Orthonormal in-plane basis (u, w) with u x w = n.
std::pair<Vec3, Vec3> plane_basis(const Vec3& n);

}  // namespace microlam
