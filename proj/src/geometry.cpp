#include "microlam/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "microlam/errors.hpp"

namespace microlam {

Halfspace Halfspace::make(const Vec3& normal, double offset) {
  const double len = normal.norm();
  require(len > 0.0 && std::isfinite(len), ErrorCode::invalid_input, "halfspace normal must be nonzero");
  return {normal / len, offset / len};
}

Polytope Polytope::box(const Vec3& lo, const Vec3& hi) {
  std::vector<Halfspace> hs;
  for (int a = 0; a < 3; ++a) {
    hs.push_back({Vec3::Unit(a), hi(a)});
    hs.push_back({-Vec3::Unit(a), -lo(a)});
  }
  return Polytope(std::move(hs));
}

Polytope Polytope::clipped(const Halfspace& h) const {
  Polytope p = *this;
  p.hs_.push_back(h);
  return p;
}

bool Polytope::contains(const Vec3& p, double tol) const {
  for (const auto& h : hs_)
    if (h.n.dot(p) > h.c + tol) return false;
  return true;
}

std::pair<Vec3, Vec3> plane_basis(const Vec3& n) {
  Eigen::Index k;
  n.cwiseAbs().minCoeff(&k);
  Vec3 u = n.cross(Vec3::Unit(k)).normalized();
  Vec3 w = n.cross(u);
  return {u, w};
}

PolyGeom Polytope::geometry() const {
  PolyGeom g;
  const std::size_t nh = hs_.size();
  // Vertices from plane triples.
  for (std::size_t i = 0; i < nh; ++i)
    for (std::size_t j = i + 1; j < nh; ++j) {
      const Vec3 nij = hs_[j].n.cross(hs_[i].n);
      if (nij.squaredNorm() < 1e-24) continue;
      for (std::size_t k = j + 1; k < nh; ++k) {
        const Vec3& ni = hs_[i].n;
        const Vec3& nj = hs_[j].n;
        const Vec3& nk = hs_[k].n;
        const double det = ni.dot(nj.cross(nk));
        if (std::abs(det) < 1e-12) continue;
        const Vec3 x = (hs_[i].c * nj.cross(nk) + hs_[j].c * nk.cross(ni) + hs_[k].c * ni.cross(nj)) / det;
        if (!contains(x, kGeomEps)) continue;
        bool dup = false;
        for (const auto& v : g.verts)
          if ((v - x).squaredNorm() < 1e-22) {
            dup = true;
            break;
          }
        if (!dup) g.verts.push_back(x);
      }
    }
  if (g.verts.size() < 4) return g;
  Vec3 center = Vec3::Zero();
  for (const auto& v : g.verts) center += v;
  center /= static_cast<double>(g.verts.size());
  g.lo = g.hi = g.verts[0];
  for (const auto& v : g.verts) {
    g.lo = g.lo.cwiseMin(v);
    g.hi = g.hi.cwiseMax(v);
  }
  // Facets, one per distinct supporting plane.
  double vol = 0.0;
  Vec3 moment = Vec3::Zero();
  for (std::size_t i = 0; i < nh; ++i) {
    const auto& h = hs_[i];
    bool seen = false;
    for (std::size_t q = 0; q < i; ++q)
      if ((hs_[q].n - h.n).squaredNorm() < 1e-24 && std::abs(hs_[q].c - h.c) < 1e-13) {
        seen = true;
        break;
      }
    if (seen) continue;
    std::vector<Vec3> on;
    for (const auto& v : g.verts)
      if (std::abs(h.n.dot(v) - h.c) <= 1e-11) on.push_back(v);
    if (on.size() < 3) continue;
    Vec3 fc = Vec3::Zero();
    for (const auto& v : on) fc += v;
    fc /= static_cast<double>(on.size());
    const auto [u, w] = plane_basis(h.n);
    std::sort(on.begin(), on.end(), [&](const Vec3& a, const Vec3& b) {
      return std::atan2((a - fc).dot(w), (a - fc).dot(u)) < std::atan2((b - fc).dot(w), (b - fc).dot(u));
    });
    double area = 0.0;
    for (std::size_t k = 1; k + 1 < on.size(); ++k) area += 0.5 * (on[k] - on[0]).cross(on[k + 1] - on[0]).dot(h.n);
    if (area <= 1e-300) continue;
    Facet f{h.n, h.c, std::move(on), area};
    // Pyramid over the facet with apex at center.
    const double height = h.c - h.n.dot(center);
    for (std::size_t k = 1; k + 1 < f.poly.size(); ++k) {
      const double ta = 0.5 * (f.poly[k] - f.poly[0]).cross(f.poly[k + 1] - f.poly[0]).dot(h.n);
      const double tv = ta * height / 3.0;
      vol += tv;
      moment += tv * (center + f.poly[0] + f.poly[k] + f.poly[k + 1]) / 4.0;
    }
    g.facets.push_back(std::move(f));
  }
  g.volume = vol > 0.0 ? vol : 0.0;
  g.centroid = vol > 0.0 ? Vec3(moment / vol) : center;
  return g;
}

std::vector<Tet> tetrahedralize(const PolyGeom& g) {
  std::vector<Tet> tets;
  if (g.empty()) return tets;
  const Vec3 c = g.centroid;
  for (const auto& f : g.facets)
    for (std::size_t k = 1; k + 1 < f.poly.size(); ++k) {
      const double v = std::abs((f.poly[0] - c).dot((f.poly[k] - c).cross(f.poly[k + 1] - c))) / 6.0;
      if (v > 0.0) tets.push_back({{c, f.poly[0], f.poly[k], f.poly[k + 1]}, v});
    }
  return tets;
}

double integrate_affine_sq(const PolyGeom& g, const Vec& a0, const Eigen::Matrix<double, Eigen::Dynamic, 3>& grad) {
  double total = 0.0;
  for (const auto& t : tetrahedralize(g)) {
    Vec sum = Vec::Zero(a0.size());
    double sq = 0.0;
    for (const auto& p : t.v) {
      const Vec val = a0 + grad * p;
      sum += val;
      sq += val.squaredNorm();
    }
    total += t.volume / 20.0 * (sq + sum.squaredNorm());
  }
  return total;
}

double polygon_area(const Poly2& p) {
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& x = p[i];
    const auto& y = p[(i + 1) % p.size()];
    a += x.x() * y.y() - x.y() * y.x();
  }
  return 0.5 * a;
}

Poly2 clip_convex(const Poly2& subject, const Poly2& clip) {
  Poly2 out = subject;
  const double orient = polygon_area(clip) >= 0.0 ? 1.0 : -1.0;
  for (std::size_t e = 0; e < clip.size() && !out.empty(); ++e) {
    const Eigen::Vector2d a = clip[e], b = clip[(e + 1) % clip.size()];
    auto side = [&](const Eigen::Vector2d& p) {
      return orient * ((b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x()));
    };
    Poly2 in = std::move(out);
    out.clear();
    for (std::size_t i = 0; i < in.size(); ++i) {
      const auto& p = in[i];
      const auto& q = in[(i + 1) % in.size()];
      const double sp = side(p), sq = side(q);
      if (sp >= 0.0) out.push_back(p);
      if ((sp >= 0.0) != (sq >= 0.0)) {
        const double t = sp / (sp - sq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  return out;
}

}  // namespace microlam
