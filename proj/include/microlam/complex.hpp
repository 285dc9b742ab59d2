#pragma once

#include <array>
#include <string>
#include <vector>

#include "json.hpp"
#include "microlam/geometry.hpp"
#include "microlam/symbol.hpp"

namespace microlam {

// u(x) = c0 + sum_i x_i grad[i].
struct AffineValue {
  Mat c0;
  std::array<Mat, 3> grad;
  bool constant = true;

  static AffineValue of(const Mat& value);
  Mat at(const Vec3& x) const;
  AffineValue shifted(const Vec3& s) const;  // x -> u(x + s)
};

struct Region {
  Polytope shape;
  AffineValue u;
  int chi = 0;  // index into RegionComplex::wells
  int tag = -1;  // builder-defined label, carried through finalize()
};

enum class BoundaryMode { exterior, periodic, extruded };

inline constexpr int kExterior = -1;

struct Interface {
  int minus = 0, plus = 0;  // region indices, kExterior for the outside datum
  Vec3 normal;              // points from minus to plus
  double area = 0.0;
  std::vector<Vec3> poly;   // in the plane frame
  Vec3 minus_shift = Vec3::Zero(), plus_shift = Vec3::Zero();  // side coordinates = poly point + shift
};

struct RegionComplex {
  int d = 3;  // 2: the x3 axis is a unit-thickness extrusion
  Vec3 lo = Vec3::Zero(), hi = Vec3::Ones();
  std::array<BoundaryMode, 3> boundary{BoundaryMode::exterior, BoundaryMode::exterior, BoundaryMode::exterior};
  std::vector<Mat> wells;
  Mat exterior;  // datum outside the domain
  std::vector<Region> regions;
  nlohmann::json meta = nlohmann::json::object();

  // Derived by finalize().
  std::vector<PolyGeom> geom;
  std::vector<Interface> interfaces;
  double uncovered_area = 0.0;
  double overlap_area = 0.0;

  // Drops empty regions, computes geometry and the interface list.
  void finalize();
  Mat value_at(int region, const Vec3& x) const;
};

struct InterfaceReport {
  bool pass = false;
  double max_residual = 0.0;
  double scale = 1.0;
  std::size_t interfaces = 0;
  double uncovered_area = 0.0;
  double overlap_area = 0.0;
  std::vector<std::size_t> offending;
};

// |symbol(n)[[u]]| at every interface vertex; pass iff each residual <= tol * max(1, |c0| + sum_k |x_k| |grad_k|) over
// both sides at the vertex (the round-off scale of the affine values) and no tiling gaps.
InterfaceReport interface_check(const RegionComplex& rc, const OperatorSpec& op, double tol = 1e-12);

struct ExactEnergies {
  double elastic = 0.0;        // sum of integrals |u - chi|^2
  double surface = 0.0;        // sum |[[chi]]|_F * area over interior (and periodic) interfaces
  double surface_aniso = 0.0;  // same with area weighted by |n|_1
  double volume = 0.0;
  double off_wells_volume = 0.0;  // volume where u differs from every well
  std::vector<double> phase_volume;
};

ExactEnergies exact_energies(const RegionComplex& rc);

// x -> u(R x) R on the rotated geometry; interfaces are carried over rather than recomputed.
RegionComplex rotate_complex(const RegionComplex& rc, const Mat& r);

nlohmann::json complex_to_json(const RegionComplex& rc);

}  // namespace microlam
