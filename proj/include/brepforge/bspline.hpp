#pragma once

#include <array>
#include <optional>
#include <variant>
#include <vector>

#include "brepforge/vec3.hpp"

namespace brepforge {

// Clamped cubic with knots {0,0,0,0,1,1,1,1}: a cubic Bezier segment.
struct CubicCurve {
  std::array<Vec3, 4> ctrl;
};

// Bi-cubic patch, clamped in both directions. Control grid is row-major:
// ctrl[i][j] pairs with parameters (u = i/3, v = j/3) at the Greville corners.
struct BicubicPatch {
  std::array<std::array<Vec3, 4>, 4> ctrl;

  BicubicPatch transposed() const {
    BicubicPatch t;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) t.ctrl[j][i] = ctrl[i][j];
    return t;
  }
};

struct Plane {
  Vec3 point;
  Vec3 normal;  // unit
};

struct Sphere {
  Vec3 center;
  double radius = 0.0;
};

struct Cylinder {
  Vec3 axis_point;
  Vec3 axis_dir;  // unit
  double radius = 0.0;
};

using Primitive = std::variant<Plane, Sphere, Cylinder>;

struct PrimitiveFit {
  Primitive primitive;
  double residual = 0.0;  // max point-to-surface distance
};

Vec3 eval_curve(const CubicCurve& c, double t);
Vec3 eval_curve_derivative(const CubicCurve& c, double t);
Vec3 eval_surface(const BicubicPatch& p, double u, double v);
void eval_surface_partials(const BicubicPatch& p, double u, double v, Vec3& su, Vec3& sv);

// Uniform parameter sampling, endpoints included. n >= 2 (n_u, n_v >= 2).
std::vector<Vec3> sample_curve(const CubicCurve& c, int n);
std::vector<std::vector<Vec3>> sample_surface(const BicubicPatch& p, int n_u, int n_v);

// Control-point bounding box; conservative for the surface by convexity.
Box3 ctrl_bbox(const BicubicPatch& p);

// Least-squares fit of a plane, sphere, or cylinder. Returns the candidate
// with the smallest max residual if it is within `threshold`, preferring the
// plane on ties; otherwise nullopt (caller keeps the spline).
std::optional<PrimitiveFit> fit_primitive(const std::vector<Vec3>& points, double threshold);

double distance_to_primitive(const Primitive& prim, const Vec3& p);

// Closest-point distance from p to the patch, parameters clamped to [0,1]^2.
double distance_to_patch(const BicubicPatch& patch, const Vec3& p);

}  // namespace brepforge
