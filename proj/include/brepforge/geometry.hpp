#pragma once

#include <array>
#include <optional>
#include <vector>

#include "brepforge/bspline.hpp"
#include "brepforge/topology.hpp"
#include "brepforge/vec3.hpp"

namespace brepforge {

// Geometric attributes in the control-point parameterization. Coordinates are
// normalized to [-1,1]^3 at ingestion so noise scales stay meaningful.
struct GeometryAttrs {
  std::vector<std::array<double, 6>> face_boxes;  // min xyz, max xyz
  std::vector<Vec3> verts;
  std::vector<std::array<Vec3, 4>> edge_ctrl;    // ctrl[0] sits at ev[e][0]
  std::vector<std::array<Vec3, 16>> face_ctrl;   // row-major 4x4 grid

  CubicCurve edge_curve(int e) const { return CubicCurve{edge_ctrl[e]}; }

  BicubicPatch face_patch(int f) const {
    BicubicPatch p;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) p.ctrl[i][j] = face_ctrl[f][i * 4 + j];
    return p;
  }
};

// Per-face surface choice after post-processing: a fitted primitive when the
// fit residual cleared the threshold, otherwise the generated spline patch.
struct FaceSurface {
  std::optional<Primitive> primitive;  // nullopt -> spline
  double fit_residual = 0.0;
};

struct BRepModel {
  Topology topology;
  GeometryAttrs geometry;
  std::vector<FaceSurface> face_surface;
};

inline bool geometry_shapes_consistent(const Topology& t, const GeometryAttrs& g) {
  return static_cast<int>(g.face_boxes.size()) == t.num_faces &&
         static_cast<int>(g.verts.size()) == t.num_verts &&
         static_cast<int>(g.edge_ctrl.size()) == t.num_edges &&
         static_cast<int>(g.face_ctrl.size()) == t.num_faces;
}

// Four anchor points spanning a face from its loop-ordered boundary vertices:
// quads use their corners, triangles a degenerate fourth corner, larger loops
// the corners of the in-plane bounding rectangle. Deterministic in the input.
std::array<Vec3, 4> face_anchor_points(const std::vector<Vec3>& loop);

// Row-major 4x4 grid of the bilinear patch spanned by four cyclic anchors;
// its boundary curves are the straight segments between consecutive anchors.
std::array<Vec3, 16> bilinear_grid(const std::array<Vec3, 4>& anchors);

}  // namespace brepforge
