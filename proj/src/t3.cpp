#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>

#include "microlam/constructions.hpp"
#include "microlam/errors.hpp"
#include "microlam/parallel.hpp"

namespace microlam {

namespace {

using Q = Rational;

constexpr int kTagPlain = -1;
constexpr int kTagCutoff = -2;

T3CellKind s_kind(int j) {
  T3CellKind k;
  k.type = T3CellKind::Type::S;
  k.j = j;
  return k;
}

T3CellKind leg_kind(int j, const Q& nu) {
  if (nu == 0) return s_kind(j);
  T3CellKind k;
  k.type = T3CellKind::Type::Leg;
  k.j = j;
  k.nu = nu;
  return k;
}

RMat leg_value(int j, const Q& nu) {
  const auto w = t3_wells();
  return nu * w.A[static_cast<std::size_t>(j - 1)] + (Q(1) - nu) * w.S[static_cast<std::size_t>(j - 1)];
}

}  // namespace

RMat T3CellKind::value() const {
  const auto w = t3_wells();
  switch (type) {
    case Type::S:
      return w.S[static_cast<std::size_t>(j - 1)];
    case Type::Leg:
      return leg_value(j, nu);
    case Type::Triangle:
      return lambda * leg_value(leg1, nu1) + (Q(1) - lambda) * leg_value(leg2, nu2);
  }
  return {};
}

std::string T3CellKind::tag() const {
  switch (type) {
    case Type::S:
      return "S" + std::to_string(j);
    case Type::Leg:
      return "Leg" + std::to_string(j) + "(" + to_string(nu) + ")";
    case Type::Triangle:
      return "Tri(" + to_string(lambda) + ";" + std::to_string(leg1) + ":" + to_string(nu1) + ";" + std::to_string(leg2) + ":" +
             to_string(nu2) + ")";
  }
  return {};
}

T3Split t3_split(const T3CellKind& kind) {
  const auto w = t3_wells();
  T3Split s;
  switch (kind.type) {
    case T3CellKind::Type::S: {
      const int next = kind.j % 3 + 1;
      s.P = w.A[static_cast<std::size_t>(next - 1)];
      s.Q = w.S[static_cast<std::size_t>(next - 1)];
      s.t = Q(1, 2);
      s.axis = next - 1;
      s.Q_child = s_kind(next);
      break;
    }
    case T3CellKind::Type::Leg:
      s.P = w.A[static_cast<std::size_t>(kind.j - 1)];
      s.Q = w.S[static_cast<std::size_t>(kind.j - 1)];
      s.t = kind.nu;
      s.axis = kind.j - 1;
      s.Q_child = s_kind(kind.j);
      break;
    case T3CellKind::Type::Triangle: {
      s.P = leg_value(kind.leg1, kind.nu1);
      s.Q = leg_value(kind.leg2, kind.nu2);
      s.t = kind.lambda;
      const RMat diff = s.Q - s.P;
      s.axis = -1;
      for (int a = 0; a < 3 && s.axis < 0; ++a)
        if (diff(a, a) == 0) s.axis = a;
      require(s.axis >= 0 && diff.is_diagonal(), ErrorCode::compatibility, "triangle split has no coordinate lamination normal");
      s.P_child = leg_kind(kind.leg1, kind.nu1);
      s.Q_child = leg_kind(kind.leg2, kind.nu2);
      break;
    }
  }
  return s;
}

T3Entry t3_entry(const RMat& F) {
  const HullDecomposition dec = hull_decompose(F, 0);
  T3Entry e;
  switch (dec.kind) {
    case HullDecomposition::Kind::vertex:
      e.kind = s_kind(dec.j);
      e.pre_levels = 0;
      break;
    case HullDecomposition::Kind::leg:
      e.kind = leg_kind(dec.j, dec.t);
      e.pre_levels = 1;
      break;
    case HullDecomposition::Kind::triangle:
      e.kind.type = T3CellKind::Type::Triangle;
      e.kind.lambda = dec.lambda;
      e.kind.leg1 = dec.j;
      e.kind.leg2 = dec.k;
      e.kind.nu1 = dec.nu1;
      e.kind.nu2 = dec.nu2;
      e.pre_levels = 2;
      break;
  }
  require(e.kind.value() == F, ErrorCode::membership, "hull decomposition does not reproduce F");
  return e;
}

T3Params T3Params::paper_schedule(double eps) {
  require(eps > 0.0 && eps < 1.0, ErrorCode::invalid_input, "eps must lie in (0, 1)");
  T3Params p;
  p.eps = eps;
  const double L = std::abs(std::log(eps));
  p.m = std::max(1, static_cast<int>(std::lround(std::sqrt(L / std::log(2.0)))));
  p.r_base = std::min(std::pow(eps, 1.0 / (p.m + 1)), 0.25);
  p.F = t3_wells().S[2];
  return p;
}

namespace {

struct ChildSlot {
  T3CellKind kind;
  Vec3 origin;
  Vec3 dims;
};

struct ClassData {
  T3CellKind kind;
  int depth = 1;
  Vec3 dims = Vec3::Ones();
  std::uint64_t multiplicity = 0;
  double parent_r = 1.0;
  double r = 0.0, t = 0.5, c0 = 0.0;
  int n = 0, axis = 0;
  Mat V, D, M, P, Q;
  std::array<Mat, 6> face_nxM;  // (inward normal) x M per face, order e1-, e1+, e2-, ...
  std::vector<Region> regions;  // finalized, local coordinates
  std::vector<ChildSlot> slots;
  std::vector<int> slot_of;     // index 2k + (0: P, 1: Q) -> slot or -1
  std::vector<int> slot_class;
  T3ClassInfo info;
};

const std::vector<Mat>& float_wells() {
  static const std::vector<Mat> w = t3_wellset().wells;
  return w;
}

// Rows n x m_i of a matrix of row vectors.
Mat cross_rows(const Vec3& n, const Mat& M) {
  Mat out(3, 3);
  for (int i = 0; i < 3; ++i) {
    const Vec3 m(M(i, 0), M(i, 1), M(i, 2));
    const Vec3 c = n.cross(m);
    for (int k = 0; k < 3; ++k) out(i, k) = c(k);
  }
  return out;
}

// Nearest-well pieces of an affine region; the pieces are halfspace clips of the region.
void voronoi_split(const Polytope& shape, const AffineValue& u, int tag, std::vector<Region>& out) {
  const auto& W = float_wells();
  if (u.constant) {
    out.push_back({shape, u, nearest_well(u.c0, W), tag});
    return;
  }
  for (std::size_t w = 0; w < W.size(); ++w) {
    Polytope piece = shape;
    bool empty = false;
    for (std::size_t v = 0; v < W.size() && !empty; ++v) {
      if (v == w) continue;
      const Mat delta = W[v] - W[w];
      Vec3 n;
      for (int k = 0; k < 3; ++k) n(k) = 2.0 * (u.grad[static_cast<std::size_t>(k)].array() * delta.array()).sum();
      const double off = W[v].squaredNorm() - W[w].squaredNorm() - 2.0 * (u.c0.array() * delta.array()).sum();
      if (n.norm() < 1e-14 * (1.0 + std::abs(off))) {
        if (off < 0.0) empty = true;
        continue;
      }
      piece = piece.clipped(n, off);
    }
    if (!empty) out.push_back({piece, u, static_cast<int>(w), tag});
  }
}

struct Slab {
  double lo, hi;
  bool is_p;
  ScalarAffine H;  // potential profile on this slab
  double dH;
};

std::vector<Slab> phase_slabs(double L, double c0, double r, double t, int axis, double from, double to) {
  std::vector<Slab> out;
  const Vec3 e = Vec3::Unit(axis);
  const long kmin = static_cast<long>(std::floor((from - c0) / r)) - 1;
  const long kmax = static_cast<long>(std::ceil((to - c0) / r)) + 1;
  for (long k = kmin; k <= kmax; ++k) {
    const double s0 = c0 + static_cast<double>(k) * r;
    const double pm = s0 + t * r, s1 = s0 + r;
    const double plo = std::max({s0, from, 0.0}), phi = std::min({pm, to, L});
    if (phi - plo > 1e-15 * L) out.push_back({plo, phi, true, {(1.0 - t) * s0, -(1.0 - t) * e}, -(1.0 - t)});
    const double qlo = std::max({pm, from, 0.0}), qhi = std::min({s1, to, L});
    if (qhi - qlo > 1e-15 * L) out.push_back({qlo, qhi, false, {-t * s1, t * e}, t});
  }
  return out;
}

// Cell-local complex: outer collar (u = V), cut-off band (affine), core slabs.
void build_local(ClassData& c, bool refine) {
  const T3Split split = t3_split(c.kind);
  const Vec3 L = c.dims;
  const double r = c.r, t = c.t;
  const int a = c.axis;
  const Vec3 ea = Vec3::Unit(a);
  c.V = c.kind.value().to_mat();
  const Mat P = split.P.to_mat(), Qm = split.Q.to_mat();
  c.P = P;
  c.Q = Qm;
  c.D = Qm - P;
  c.M = Mat(3, 3);
  for (int i = 0; i < 3; ++i) {
    const Vec3 di(c.D(i, 0), c.D(i, 1), c.D(i, 2));
    const Vec3 m = di.cross(ea);
    for (int k = 0; k < 3; ++k) c.M(i, k) = m(k);
  }
  c.c0 = 3.0 * r / 8.0;
  const auto& W = float_wells();

  struct Face {
    ScalarAffine d;
    Vec3 inward;
    int axis;
    bool lower;
  };
  std::vector<Face> faces;
  for (int i = 0; i < 3; ++i) {
    faces.push_back({{0.0, Vec3::Unit(i)}, Vec3::Unit(i), i, true});
    faces.push_back({{L(i), -Vec3::Unit(i)}, -Vec3::Unit(i), i, false});
  }
  const Polytope box = Polytope::box(Vec3::Zero(), L);
  std::vector<Region> regs;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    Polytope sector = box;
    for (std::size_t g = 0; g < faces.size(); ++g) {
      if (g == f) continue;
      sector = sector.clipped(faces[f].d.g - faces[g].d.g, faces[g].d.c0 - faces[f].d.c0);
    }
    const Face& fc = faces[f];
    // d_f <= r/8: collar.
    regs.push_back({sector.clipped(fc.d.g, r / 8.0 - fc.d.c0), AffineValue::of(c.V), nearest_well(c.V, W), kTagCutoff});
    const Polytope band = sector.clipped(-fc.d.g, fc.d.c0 - r / 8.0).clipped(fc.d.g, 3.0 * r / 8.0 - fc.d.c0);
    double from = r / 8.0, to = L(a) - r / 8.0;
    if (fc.axis == a) {
      from = fc.lower ? r / 8.0 : L(a) - 3.0 * r / 8.0;
      to = fc.lower ? 3.0 * r / 8.0 : L(a) - r / 8.0;
    }
    const Mat nxM = cross_rows(fc.inward, c.M);
    c.face_nxM[f] = nxM;
    const ScalarAffine phi{4.0 * fc.d.c0 / r - 0.5, 4.0 / r * fc.d.g};
    for (const Slab& s : phase_slabs(L(a), c.c0, r, t, a, from, to)) {
      const Polytope piece = band.clipped(-ea, -s.lo).clipped(ea, s.hi);
      const ScalarAffine Hs{4.0 / r * s.H.c0, 4.0 / r * s.H.g};
      const AffineValue u = affine_combination(c.V, {{Hs, nxM}, {phi, s.dH * c.D}});
      voronoi_split(piece, u, kTagCutoff, regs);
    }
  }
  // Core slabs: P slabs k = 0..n, Q slabs k = 0..n-1.
  Vec3 clo = Vec3::Constant(3.0 * r / 8.0), chi = L - Vec3::Constant(3.0 * r / 8.0);
  c.slot_of.assign(static_cast<std::size_t>(2 * (c.n + 1)), -1);
  for (int k = 0; k <= c.n; ++k)
    for (int phase = 0; phase < 2; ++phase) {
      if (phase == 1 && k == c.n) continue;
      const bool is_p = phase == 0;
      const double s0 = c.c0 + k * r;
      Vec3 lo = clo, hi = chi;
      lo(a) = is_p ? s0 : s0 + t * r;
      hi(a) = is_p ? s0 + t * r : s0 + r;
      const Mat& val = is_p ? P : Qm;
      const auto& child = is_p ? split.P_child : split.Q_child;
      int tag = kTagPlain;
      if (child && refine) {
        tag = static_cast<int>(c.slots.size());
        c.slot_of[static_cast<std::size_t>(2 * k + phase)] = tag;
        c.slots.push_back({*child, lo, hi - lo});
      }
      regs.push_back({Polytope::box(lo, hi), AffineValue::of(val), nearest_well(val, W), tag});
    }
  RegionComplex rc;
  rc.d = 3;
  rc.hi = L;
  rc.wells = W;
  rc.exterior = c.V;
  rc.regions = std::move(regs);
  rc.finalize();
  const ExactEnergies e = exact_energies(rc);
  T3ClassInfo& info = c.info;
  info.own_elastic = e.elastic;
  info.own_off_wells = e.off_wells_volume;
  info.own_surface = e.surface;
  info.own_surface_aniso = e.surface_aniso;
  info.volume = L.prod();
  for (std::size_t i = 0; i < rc.regions.size(); ++i) {
    const Region& reg = rc.regions[i];
    const double vol = rc.geom[i].volume;
    if (reg.tag == kTagCutoff) info.cutoff_volume += vol;
    if (reg.tag < 0) {
      const Mat& w = W[static_cast<std::size_t>(reg.chi)];
      for (const Vec3& v : rc.geom[i].verts) info.max_pointwise = std::max(info.max_pointwise, (reg.u.at(v) - w).squaredNorm());
      if (!reg.u.constant)
        for (const Mat& g : reg.u.grad) info.grad_sq += vol * g.squaredNorm();
    }
    if (reg.tag >= 0) {
      const double dist = (reg.u.c0 - W[static_cast<std::size_t>(reg.chi)]).squaredNorm();
      info.own_elastic -= dist * vol;
      if (dist > 1e-24) info.own_off_wells -= vol;
    }
  }
  const double leaf = (c.V - W[static_cast<std::size_t>(nearest_well(c.V, W))]).squaredNorm();
  info.leaf_elastic = leaf * info.volume;
  info.leaf_off_wells = leaf > 1e-24 ? info.volume : 0.0;
  for (const Interface& itf : rc.interfaces)
    if (itf.minus != kExterior && itf.plus != kExterior) info.interface_area += itf.area;
  info.local_regions = rc.regions.size();
  c.regions = std::move(rc.regions);
}

std::string class_key(const T3CellKind& kind, int depth, const Vec3& dims) {
  std::ostringstream os;
  os << kind.tag() << "|" << depth;
  for (int i = 0; i < 3; ++i) os << "|" << std::llround(dims(i) * 1e12);
  return os.str();
}

Region shifted_region(const Region& r, const Vec3& o) {
  std::vector<Halfspace> hs;
  for (const auto& h : r.shape.halfspaces()) hs.push_back({h.n, h.c + h.n.dot(o)});
  Region out{Polytope(std::move(hs)), r.u, r.chi, r.tag};
  if (!r.u.constant) out.u.c0 = r.u.c0 - o(0) * r.u.grad[0] - o(1) * r.u.grad[1] - o(2) * r.u.grad[2];
  return out;
}

void emit(const std::vector<ClassData>& classes, int id, const Vec3& origin, std::vector<Region>& out) {
  const ClassData& c = classes[static_cast<std::size_t>(id)];
  for (const Region& r : c.regions) {
    if (r.tag >= 0) {
      const auto slot = static_cast<std::size_t>(r.tag);
      emit(classes, c.slot_class[slot], origin + c.slots[slot].origin, out);
      continue;
    }
    Region s = shifted_region(r, origin);
    s.tag = kTagPlain;
    out.push_back(std::move(s));
  }
}

double cutoff_phi(double d, double r) { return std::clamp(4.0 * d / r - 0.5, 0.0, 1.0); }

// Periodic potential profile H with H' = -(1 - t) on P phases, t on Q phases, H = 0 at phase starts.
double profile(double xa, double c0, double r, double t) {
  const double s = xa - c0;
  const double ph = s - std::floor(s / r) * r;
  return ph < t * r ? -(1.0 - t) * ph : t * (ph - r);
}

Mat potential_at(const std::vector<ClassData>& classes, const Mat& F, const Vec3& x) {
  Mat v(3, 3);
  for (int i = 0; i < 3; ++i) {
    const Vec3 fi(F(i, 0), F(i, 1), F(i, 2));
    const Vec3 row = 0.5 * fi.cross(x);
    for (int k = 0; k < 3; ++k) v(i, k) = row(k);
  }
  int id = 0;
  Vec3 local = x;
  while (id >= 0) {
    const ClassData& c = classes[static_cast<std::size_t>(id)];
    bool inside = true;
    double d = 1e300;
    for (int i = 0; i < 3; ++i) {
      if (local(i) < 0.0 || local(i) > c.dims(i)) inside = false;
      d = std::min({d, local(i), c.dims(i) - local(i)});
    }
    if (!inside) break;
    v += cutoff_phi(d, c.r) * profile(local(c.axis), c.c0, c.r, c.t) * c.M;
    int next = -1;
    for (std::size_t s = 0; s < c.slots.size(); ++s) {
      const Vec3 rel = local - c.slots[s].origin;
      bool in = true;
      for (int i = 0; i < 3; ++i)
        if (rel(i) < 0.0 || rel(i) > c.slots[s].dims(i)) in = false;
      if (in) {
        next = c.slot_class[s];
        local = rel;
        break;
      }
    }
    id = next;
  }
  return v;
}

std::pair<Mat, int> sample_at(const std::vector<ClassData>& classes, const Mat& F, const Vec3& x) {
  const auto& W = float_wells();
  int id = 0;
  Vec3 local = x;
  for (;;) {
    const ClassData& c = classes[static_cast<std::size_t>(id)];
    std::size_t face = 0;
    double d = 1e300;
    for (int i = 0; i < 3; ++i) {
      if (local(i) < 0.0 || local(i) > c.dims(i)) return {F, nearest_well(F, W)};
      if (local(i) < d) {
        d = local(i);
        face = static_cast<std::size_t>(2 * i);
      }
      if (c.dims(i) - local(i) < d) {
        d = c.dims(i) - local(i);
        face = static_cast<std::size_t>(2 * i + 1);
      }
    }
    if (d <= c.r / 8.0) return {c.V, nearest_well(c.V, W)};
    const double s = local(c.axis) - c.c0;
    const double kf = std::floor(s / c.r);
    const bool is_p = s - kf * c.r < c.t * c.r;
    if (d < 3.0 * c.r / 8.0) {
      const double H = profile(local(c.axis), c.c0, c.r, c.t);
      const double dH = is_p ? -(1.0 - c.t) : c.t;
      const Mat u = c.V + (4.0 / c.r) * H * c.face_nxM[face] + (4.0 * d / c.r - 0.5) * dH * c.D;
      return {u, nearest_well(u, W)};
    }
    const int k = std::clamp(static_cast<int>(kf), 0, c.n);
    const int slot = c.slot_of.empty() ? -1 : c.slot_of[static_cast<std::size_t>(2 * k + (is_p ? 0 : 1))];
    if (slot < 0) {
      const Mat& v = is_p ? c.P : c.Q;
      return {v, nearest_well(v, W)};
    }
    local -= c.slots[static_cast<std::size_t>(slot)].origin;
    id = c.slot_class[static_cast<std::size_t>(slot)];
  }
}

}  // namespace

double raster_elastic_bound(double interface_area, double max_pointwise, double grad_sq, int d, double h) {
  return std::sqrt(static_cast<double>(d)) * h * interface_area * max_pointwise + d * h * h / 12.0 * grad_sq;
}

Raster rasterize_t3(const T3Result& res, int n) {
  require(static_cast<bool>(res.sample), ErrorCode::invalid_input, "T3 result carries no sampler");
  Raster out;
  out.grid = Grid{3, n};
  out.grid.validate();
  out.u = TensorField(out.grid, 3, 3);
  out.chi.grid = out.grid;
  out.chi.wells = float_wells();
  out.chi.labels.assign(out.grid.cells(), 0);
  out.region.assign(out.grid.cells(), 0);
  parallel_for(out.grid.cells(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto [u, chi] = res.sample(out.grid.center(i));
      out.u.set(i, u);
      out.chi.labels[i] = chi;
    }
  });
  return out;
}

T3Result build_t3_laminate(const T3Params& p, bool explicit_complex) {
  require(p.m >= 1, ErrorCode::invalid_input, "m must be at least 1");
  require(p.eps >= 0.0, ErrorCode::invalid_input, "eps must be nonnegative");
  const RMat F = p.F.rows() == 0 ? t3_wells().S[2] : p.F;
  const T3Entry entry = t3_entry(F);
  T3Result res;
  res.params = p;
  res.params.F = F;
  res.pre_levels = entry.pre_levels;
  res.levels = entry.pre_levels + p.m;
  if (!p.r.empty()) {
    require(static_cast<int>(p.r.size()) == res.levels, ErrorCode::sequencing,
            "r sequence has " + std::to_string(p.r.size()) + " entries, expected " + std::to_string(res.levels));
    res.r_target = p.r;
  } else {
    require(p.r_base > 0.0 && p.r_base < 0.5, ErrorCode::sequencing, "r must lie in (0, 1/2)");
    for (int k = 1; k <= res.levels; ++k) res.r_target.push_back(std::pow(p.r_base, k));
  }
  for (std::size_t k = 0; k < res.r_target.size(); ++k)
    require(res.r_target[k] > 0.0 && res.r_target[k] < 0.5, ErrorCode::sequencing,
            "r_" + std::to_string(k + 1) + " = " + fmt17(res.r_target[k]) + " violates r in (0, 1/2)");

  auto classes = std::make_shared<std::vector<ClassData>>();
  std::map<std::string, int> index;
  {
    ClassData root;
    root.kind = entry.kind;
    root.depth = 1;
    root.multiplicity = 1;
    root.parent_r = 1.0;
    classes->push_back(std::move(root));
    index[class_key(entry.kind, 1, Vec3::Ones())] = 0;
  }
  res.r_used.assign(static_cast<std::size_t>(res.levels), 0.0);
  for (std::size_t ci = 0; ci < classes->size(); ++ci) {
    ClassData& c = (*classes)[ci];
    const T3Split split = t3_split(c.kind);
    c.axis = split.axis;
    c.t = to_double(split.t);
    const double La = c.dims(c.axis);
    const double cap = std::min(res.r_target[static_cast<std::size_t>(c.depth - 1)], c.parent_r / 2.0 * (1.0 - 1e-12));
    // Round r down to the nearest admissible value L_a / (n + t + 3/4).
    long n = std::max(1L, static_cast<long>(std::ceil(La / cap - c.t - 0.75)));
    while (La / (static_cast<double>(n) + c.t + 0.75) > cap) ++n;
    require(n < 100000000L, ErrorCode::sequencing, "lamination count overflow at depth " + std::to_string(c.depth));
    c.n = static_cast<int>(n);
    c.r = La / (static_cast<double>(n) + c.t + 0.75);
    for (int i = 0; i < 3; ++i)
      require(c.dims(i) > 0.75 * c.r * (1.0 + 1e-9), ErrorCode::sequencing,
              "depth " + std::to_string(c.depth) + ": cell extent " + fmt17(c.dims(i)) + " along e" + std::to_string(i + 1) +
                  " leaves no core for r = " + fmt17(c.r) + " (needs extent > 3r/4)");
    if (res.r_used[static_cast<std::size_t>(c.depth - 1)] == 0.0) res.r_used[static_cast<std::size_t>(c.depth - 1)] = c.r;
    build_local(c, c.depth < res.levels);
    c.info.tag = c.kind.tag();
    c.info.depth = c.depth;
    c.info.dims = c.dims;
    c.info.r = c.r;
    c.info.periods = c.n;
    c.info.axis = c.axis;
    c.info.t = c.t;
    for (const ChildSlot& s : c.slots) {
      const std::string key = class_key(s.kind, c.depth + 1, s.dims);
      auto it = index.find(key);
      int child;
      if (it == index.end()) {
        ClassData cd;
        cd.kind = s.kind;
        cd.depth = c.depth + 1;
        cd.dims = s.dims;
        cd.parent_r = c.r;
        child = static_cast<int>(classes->size());
        index[key] = child;
        classes->push_back(std::move(cd));
      } else {
        child = it->second;
        auto& ex = (*classes)[static_cast<std::size_t>(child)];
        ex.parent_r = std::min(ex.parent_r, (*classes)[ci].r);
      }
      ClassData& cur = (*classes)[ci];  // reference may have moved
      cur.slot_class.push_back(child);
      (*classes)[static_cast<std::size_t>(child)].multiplicity += cur.multiplicity;
    }
  }

  res.elastic_by_depth.assign(static_cast<std::size_t>(res.levels), 0.0);
  res.surface_by_depth.assign(static_cast<std::size_t>(res.levels), 0.0);
  for (auto& c : *classes) {
    c.info.multiplicity = c.multiplicity;
    const double mult = static_cast<double>(c.multiplicity);
    res.elastic += mult * c.info.own_elastic;
    res.surface += mult * c.info.own_surface;
    res.surface_aniso += mult * c.info.own_surface_aniso;
    res.off_wells_volume += mult * c.info.own_off_wells;
    res.cutoff_volume += mult * c.info.cutoff_volume;
    res.interface_area += mult * c.info.interface_area;
    res.grad_sq += mult * c.info.grad_sq;
    res.max_pointwise = std::max(res.max_pointwise, c.info.max_pointwise);
    for (int k = 1; k <= res.levels; ++k) {
      const auto kk = static_cast<std::size_t>(k - 1);
      if (c.depth <= k) {
        res.elastic_by_depth[kk] += mult * c.info.own_elastic;
        res.surface_by_depth[kk] += mult * c.info.own_surface;
      }
      if (c.depth == k + 1) res.elastic_by_depth[kk] += mult * c.info.leaf_elastic;
    }
    res.classes.push_back(c.info);
  }
  {
    const auto& r = res.r_used;
    const int m = res.levels;
    double b = std::ldexp(1.0, -m) + r[0] + p.eps / r[static_cast<std::size_t>(m - 1)];
    for (int k = 2; k <= m; ++k) b += std::ldexp(1.0, -k) * r[static_cast<std::size_t>(k - 1)] / r[static_cast<std::size_t>(k - 2)];
    res.bound = b;
  }
  {
    const Mat Fm = F.to_mat();
    std::shared_ptr<const std::vector<ClassData>> cls = classes;
    res.sample = [cls, Fm](const Vec3& x) { return sample_at(*cls, Fm, x); };
  }
  if (explicit_complex) {
    double regions = 0.0;
    for (const auto& c : *classes) regions += static_cast<double>(c.multiplicity) * static_cast<double>(c.regions.size());
    require(regions <= 4e6, ErrorCode::invalid_input,
            "explicit T3 complex would hold about " + fmt17(regions) + " regions; use the class bookkeeping instead");
    RegionComplex rc;
    rc.d = 3;
    rc.wells = float_wells();
    rc.exterior = F.to_mat();
    emit(*classes, 0, Vec3::Zero(), rc.regions);
    rc.meta = {{"construction", "t3"}, {"levels", res.levels}, {"m", p.m}, {"pre_levels", res.pre_levels}};
    rc.finalize();
    res.complex = std::move(rc);
    const Mat Fm = F.to_mat();
    res.potential = [classes, Fm](const Vec3& x) { return potential_at(*classes, Fm, x); };
  }
  return res;
}

nlohmann::json T3Result::report() const {
  nlohmann::json cls = nlohmann::json::array();
  for (const auto& c : classes)
    cls.push_back({{"kind", c.tag},
                   {"depth", c.depth},
                   {"dims", {c.dims(0), c.dims(1), c.dims(2)}},
                   {"multiplicity", c.multiplicity},
                   {"r", c.r},
                   {"periods", c.periods},
                   {"axis", c.axis},
                   {"own_elastic", c.own_elastic},
                   {"own_surface", c.own_surface},
                   {"cutoff_volume", c.cutoff_volume},
                   {"local_regions", c.local_regions}});
  return {{"eps", params.eps},
          {"m", params.m},
          {"pre_levels", pre_levels},
          {"levels", levels},
          {"r_target", r_target},
          {"r_used", r_used},
          {"E_el_pair", elastic},
          {"E_surf", surface},
          {"E_total", total()},
          {"off_wells_volume", off_wells_volume},
          {"cutoff_volume", cutoff_volume},
          {"elastic_by_depth", elastic_by_depth},
          {"surface_by_depth", surface_by_depth},
          {"bound", bound},
          {"classes", cls}};
}

}  // namespace microlam
