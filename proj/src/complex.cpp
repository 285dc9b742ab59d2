#include "microlam/complex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "microlam/errors.hpp"

namespace microlam {

AffineValue AffineValue::of(const Mat& value) {
  AffineValue a;
  a.c0 = value;
  for (auto& g : a.grad) g = Mat::Zero(value.rows(), value.cols());
  a.constant = true;
  return a;
}

Mat AffineValue::at(const Vec3& x) const {
  if (constant) return c0;
  return c0 + x(0) * grad[0] + x(1) * grad[1] + x(2) * grad[2];
}

AffineValue AffineValue::shifted(const Vec3& s) const {
  AffineValue a = *this;
  if (!constant) a.c0 = at(s);
  return a;
}

Mat RegionComplex::value_at(int region, const Vec3& x) const {
  if (region == kExterior) return exterior;
  return regions[static_cast<std::size_t>(region)].u.at(x);
}

namespace {

struct FacetRef {
  int region;
  std::size_t facet;
  int side;  // +1: region lies on the minus side of the canonical normal
  Vec3 shift;
  Poly2 p2;
  double umin, umax, wmin, wmax;
  double area;
  double matched = 0.0;
};

using Key = std::array<long long, 4>;

Key plane_key(const Vec3& n, double c) {
  auto q = [](double x) { return static_cast<long long>(std::llround(x * 1e8)); };
  return {q(n(0)), q(n(1)), q(n(2)), q(c)};
}

}  // namespace

void RegionComplex::finalize() {
  require(!wells.empty(), ErrorCode::invalid_input, "region complex without wells");
  std::vector<Region> kept;
  geom.clear();
  for (auto& r : regions) {
    require(r.chi >= 0 && r.chi < static_cast<int>(wells.size()), ErrorCode::invalid_input, "region phase label out of range");
    PolyGeom g = r.shape.geometry();
    if (g.volume <= 1e-18) continue;
    kept.push_back(std::move(r));
    geom.push_back(std::move(g));
  }
  regions = std::move(kept);
  interfaces.clear();
  uncovered_area = overlap_area = 0.0;

  struct PlaneFacet {
    Vec3 cn;
    double cc;
    FacetRef ref;
  };
  std::map<Key, std::vector<PlaneFacet>> by_key;
  for (std::size_t ri = 0; ri < regions.size(); ++ri) {
    const auto& g = geom[ri];
    for (std::size_t fi = 0; fi < g.facets.size(); ++fi) {
      const Facet& f = g.facets[fi];
      Vec3 cn = f.normal;
      double cc = f.offset;
      int side = +1;
      for (int a = 0; a < 3; ++a) {
        if (std::abs(cn(a)) > 1e-9) {
          if (cn(a) < 0) {
            cn = -cn;
            cc = -cc;
            side = -1;
          }
          break;
        }
      }
      Vec3 shift = Vec3::Zero();
      bool skip = false;
      for (int a = 0; a < 3; ++a) {
        if (std::abs(std::abs(cn(a)) - 1.0) > 1e-12) continue;
        const bool at_lo = std::abs(cc - lo(a)) < 1e-12, at_hi = std::abs(cc - hi(a)) < 1e-12;
        if (!at_lo && !at_hi) continue;
        const bool outward = (at_lo && side == -1) || (at_hi && side == +1);
        if (!outward) continue;
        switch (boundary[static_cast<std::size_t>(a)]) {
          case BoundaryMode::extruded:
            skip = true;
            break;
          case BoundaryMode::exterior: {
            Interface itf;
            itf.minus = side == +1 ? static_cast<int>(ri) : kExterior;
            itf.plus = side == +1 ? kExterior : static_cast<int>(ri);
            itf.normal = cn;
            itf.area = f.area;
            itf.poly = f.poly;
            interfaces.push_back(std::move(itf));
            skip = true;
            break;
          }
          case BoundaryMode::periodic:
            if (at_hi) {
              shift = (hi(a) - lo(a)) * Vec3::Unit(a);
              cc = lo(a);
            }
            break;
        }
      }
      if (skip) continue;
      FacetRef ref{static_cast<int>(ri), fi, side, shift, {}, 1e300, -1e300, 1e300, -1e300, f.area};
      by_key[plane_key(cn, cc)].push_back({cn, cc, std::move(ref)});
    }
  }

  // Keys within one quantum of each other describe the same plane; merge them.
  std::map<Key, Key> parent;
  for (const auto& kv : by_key) parent[kv.first] = kv.first;
  std::function<Key(const Key&)> find = [&](const Key& k) {
    Key& p = parent[k];
    if (p != k) p = find(p);
    return p;
  };
  for (const auto& kv : by_key) {
    Key nb;
    for (int code = 0; code < 81; ++code) {
      int c = code;
      for (int i = 0; i < 4; ++i) {
        nb[static_cast<std::size_t>(i)] = kv.first[static_cast<std::size_t>(i)] + (c % 3) - 1;
        c /= 3;
      }
      if (nb == kv.first || !by_key.contains(nb)) continue;
      const Key a = find(kv.first), b = find(nb);
      if (a != b) parent[a] = b;
    }
  }
  std::map<Key, std::pair<std::vector<FacetRef>, std::pair<Vec3, double>>> groups;
  for (auto& [key, facets] : by_key) {
    auto& grp = groups[find(key)];
    for (auto& pf : facets) {
      if (grp.first.empty()) grp.second = {pf.cn, pf.cc};
      const auto [u, w] = plane_basis(grp.second.first);
      FacetRef& ref = pf.ref;
      const Vec3& shift = ref.shift;
      const Facet& f = geom[static_cast<std::size_t>(ref.region)].facets[ref.facet];
      for (const auto& p : f.poly) {
        const Vec3 q = p - shift;
        Eigen::Vector2d v(q.dot(u), q.dot(w));
        ref.p2.push_back(v);
        ref.umin = std::min(ref.umin, v.x());
        ref.umax = std::max(ref.umax, v.x());
        ref.wmin = std::min(ref.wmin, v.y());
        ref.wmax = std::max(ref.wmax, v.y());
      }
      if (polygon_area(ref.p2) < 0) std::reverse(ref.p2.begin(), ref.p2.end());
      grp.first.push_back(std::move(ref));
    }
  }
  // Overlaps below this area are round-off slivers between facets that only share an edge.
  const Vec3 ext = hi - lo;
  const double sliver = 1e-14 * std::max({ext(0) * ext(1), ext(1) * ext(2), ext(0) * ext(2)});

  for (auto& [key, grp] : groups) {
    auto& refs = grp.first;
    const Vec3 cn = grp.second.first;
    const double cc = grp.second.second;
    const auto [u, w] = plane_basis(cn);
    double ext_u = 0.0, ext_w = 0.0;
    for (const auto& r : refs) {
      ext_u += r.umax - r.umin;
      ext_w += r.wmax - r.wmin;
    }
    const bool sweep_w = ext_w < ext_u;
    auto lo1 = [&](const FacetRef& r) { return sweep_w ? r.wmin : r.umin; };
    auto hi1 = [&](const FacetRef& r) { return sweep_w ? r.wmax : r.umax; };
    auto lo2 = [&](const FacetRef& r) { return sweep_w ? r.umin : r.wmin; };
    auto hi2 = [&](const FacetRef& r) { return sweep_w ? r.umax : r.wmax; };
    std::vector<std::size_t> order(refs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lo1(refs[a]) < lo1(refs[b]); });
    std::vector<std::size_t> active_minus, active_plus;
    for (std::size_t idx : order) {
      FacetRef& cur = refs[idx];
      auto& other = cur.side == +1 ? active_plus : active_minus;
      auto& mine = cur.side == +1 ? active_minus : active_plus;
      const double x = lo1(cur);
      std::erase_if(other, [&](std::size_t o) { return hi1(refs[o]) < x - 1e-12; });
      for (std::size_t o : other) {
        FacetRef& oth = refs[o];
        if (hi2(oth) < lo2(cur) - 1e-12 || lo2(oth) > hi2(cur) + 1e-12) continue;
        const Poly2 inter = clip_convex(cur.p2, oth.p2);
        if (inter.size() < 3) continue;
        const double area = std::abs(polygon_area(inter));
        if (area <= std::max(sliver, 1e-9 * std::min(cur.area, oth.area))) continue;
        cur.matched += area;
        oth.matched += area;
        const FacetRef& mref = cur.side == +1 ? cur : oth;
        const FacetRef& pref = cur.side == +1 ? oth : cur;
        Interface itf;
        itf.minus = mref.region;
        itf.plus = pref.region;
        itf.normal = cn;
        itf.area = area;
        for (const auto& v : inter) itf.poly.push_back(cc * cn + v.x() * u + v.y() * w);
        itf.minus_shift = mref.shift;
        itf.plus_shift = pref.shift;
        interfaces.push_back(std::move(itf));
      }
      mine.push_back(idx);
    }
    for (const auto& r : refs) {
      uncovered_area += std::max(0.0, r.area - r.matched);
      overlap_area += std::max(0.0, r.matched - r.area);
    }
  }
}

InterfaceReport interface_check(const RegionComplex& rc, const OperatorSpec& op, double tol) {
  require(op.order() == 1, ErrorCode::unsupported_order, "interface check needs a first-order operator");
  InterfaceReport rep;
  rep.interfaces = rc.interfaces.size();
  rep.uncovered_area = rc.uncovered_area;
  rep.overlap_area = rc.overlap_area;
  // Per-interface scale: magnitude of the affine terms evaluated at the vertex, so round-off in c0 + g.x is tolerated.
  auto magnitude = [&](int region, const Vec3& x) {
    if (region == kExterior) return rc.exterior.norm();
    const AffineValue& u = rc.regions[static_cast<std::size_t>(region)].u;
    if (u.constant) return u.c0.norm();
    return u.c0.norm() + std::abs(x(0)) * u.grad[0].norm() + std::abs(x(1)) * u.grad[1].norm() + std::abs(x(2)) * u.grad[2].norm();
  };
  std::vector<double> res(rc.interfaces.size(), 0.0), scales(rc.interfaces.size(), 1.0);
  for (std::size_t i = 0; i < rc.interfaces.size(); ++i) {
    const auto& itf = rc.interfaces[i];
    Vec xi(op.d());
    for (int a = 0; a < op.d(); ++a) xi(a) = itf.normal(a);
    const Mat sym = symbol_eval(op, xi);
    for (const auto& p : itf.poly) {
      const Mat up = rc.value_at(itf.plus, p + itf.plus_shift);
      const Mat um = rc.value_at(itf.minus, p + itf.minus_shift);
      require(up.size() == op.n(), ErrorCode::dimension_mismatch, "region value size does not match the operator state");
      scales[i] = std::max({scales[i], magnitude(itf.plus, p + itf.plus_shift), magnitude(itf.minus, p + itf.minus_shift)});
      res[i] = std::max(res[i], (sym * flatten(up - um)).norm());
    }
  }
  rep.scale = 1.0;
  for (std::size_t i = 0; i < res.size(); ++i) {
    rep.max_residual = std::max(rep.max_residual, res[i]);
    rep.scale = std::max(rep.scale, scales[i]);
    if (res[i] > tol * scales[i]) rep.offending.push_back(i);
  }
  double total_area = 0.0;
  for (const auto& g : rc.geom)
    for (const auto& f : g.facets) total_area += f.area;
  const bool tiled = rc.uncovered_area <= 1e-9 * (1.0 + total_area) && rc.overlap_area <= 1e-9 * (1.0 + total_area);
  rep.pass = rep.offending.empty() && tiled;
  return rep;
}

ExactEnergies exact_energies(const RegionComplex& rc) {
  ExactEnergies e;
  e.phase_volume.assign(rc.wells.size(), 0.0);
  for (std::size_t i = 0; i < rc.regions.size(); ++i) {
    const auto& r = rc.regions[i];
    const auto& g = rc.geom[i];
    const Mat& w = rc.wells[static_cast<std::size_t>(r.chi)];
    e.volume += g.volume;
    e.phase_volume[static_cast<std::size_t>(r.chi)] += g.volume;
    if (r.u.constant) {
      const double dist = (r.u.c0 - w).squaredNorm();
      e.elastic += dist * g.volume;
      if (dist > 1e-24) e.off_wells_volume += g.volume;
    } else {
      Eigen::Matrix<double, Eigen::Dynamic, 3> grad(r.u.c0.size(), 3);
      for (int a = 0; a < 3; ++a) grad.col(a) = flatten(r.u.grad[static_cast<std::size_t>(a)]);
      e.elastic += integrate_affine_sq(g, flatten(r.u.c0 - w), grad);
      e.off_wells_volume += g.volume;
    }
  }
  for (const auto& itf : rc.interfaces) {
    if (itf.minus == kExterior || itf.plus == kExterior) continue;
    const int cm = rc.regions[static_cast<std::size_t>(itf.minus)].chi;
    const int cp = rc.regions[static_cast<std::size_t>(itf.plus)].chi;
    if (cm == cp) continue;
    const double jump = (rc.wells[static_cast<std::size_t>(cp)] - rc.wells[static_cast<std::size_t>(cm)]).norm();
    e.surface += jump * itf.area;
    e.surface_aniso += jump * itf.area * itf.normal.cwiseAbs().sum();
  }
  return e;
}

RegionComplex rotate_complex(const RegionComplex& rc, const Mat& r) {
  require(r.rows() == rc.d && r.cols() == rc.d, ErrorCode::dimension_mismatch, "rotation size must equal the complex dimension");
  Eigen::Matrix3d r3 = Eigen::Matrix3d::Identity();
  r3.topLeftCorner(rc.d, rc.d) = r;
  RegionComplex out = rc;
  auto rot_value = [&](const Mat& v) { return rotate_frame(v, r); };
  for (auto& w : out.wells) w = rot_value(w);
  out.exterior = rot_value(rc.exterior);
  for (auto& reg : out.regions) {
    std::vector<Halfspace> hs;
    for (const auto& h : reg.shape.halfspaces()) hs.push_back({r3.transpose() * h.n, h.c});
    reg.shape = Polytope(std::move(hs));
    AffineValue a = reg.u;
    a.c0 = rot_value(reg.u.c0);
    for (int k = 0; k < 3; ++k) {
      Mat g = Mat::Zero(reg.u.c0.rows(), reg.u.c0.cols());
      for (int i = 0; i < 3; ++i) g += r3(i, k) * reg.u.grad[static_cast<std::size_t>(i)];
      a.grad[static_cast<std::size_t>(k)] = rot_value(g);
    }
    reg.u = a;
  }
  for (auto& g : out.geom) g = PolyGeom{};
  for (std::size_t i = 0; i < out.regions.size(); ++i) out.geom[i] = out.regions[i].shape.geometry();
  for (auto& itf : out.interfaces) {
    itf.normal = r3.transpose() * itf.normal;
    for (auto& p : itf.poly) p = r3.transpose() * p;
    itf.minus_shift = r3.transpose() * itf.minus_shift;
    itf.plus_shift = r3.transpose() * itf.plus_shift;
  }
  return out;
}

nlohmann::json complex_to_json(const RegionComplex& rc) {
  auto mat_json = [](const Mat& m) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) rows[static_cast<std::size_t>(i)].push_back(m(i, j));
    return rows;
  };
  nlohmann::json j;
  j["d"] = rc.d;
  j["domain"] = {{"lo", {rc.lo(0), rc.lo(1), rc.lo(2)}}, {"hi", {rc.hi(0), rc.hi(1), rc.hi(2)}}};
  std::vector<std::string> modes;
  for (auto b : rc.boundary)
    modes.push_back(b == BoundaryMode::exterior ? "exterior" : b == BoundaryMode::periodic ? "periodic" : "extruded");
  j["boundary"] = modes;
  j["wells"] = nlohmann::json::array();
  for (const auto& w : rc.wells) j["wells"].push_back(mat_json(w));
  j["exterior"] = mat_json(rc.exterior);
  j["meta"] = rc.meta;
  j["regions"] = nlohmann::json::array();
  for (std::size_t i = 0; i < rc.regions.size(); ++i) {
    const auto& r = rc.regions[i];
    nlohmann::json jr;
    for (const auto& h : r.shape.halfspaces()) jr["halfspaces"].push_back({h.n(0), h.n(1), h.n(2), h.c});
    jr["chi"] = r.chi;
    jr["u0"] = mat_json(r.u.c0);
    if (!r.u.constant)
      jr["grad"] = {mat_json(r.u.grad[0]), mat_json(r.u.grad[1]), mat_json(r.u.grad[2])};
    if (i < rc.geom.size()) jr["volume"] = rc.geom[i].volume;
    j["regions"].push_back(std::move(jr));
  }
  j["interfaces"] = nlohmann::json::array();
  for (const auto& itf : rc.interfaces)
    j["interfaces"].push_back({{"minus", itf.minus},
                               {"plus", itf.plus},
                               {"normal", {itf.normal(0), itf.normal(1), itf.normal(2)}},
                               {"area", itf.area}});
  return j;
}

}  // namespace microlam
