#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "brepforge/geometry.hpp"

namespace brepforge {

struct SewingReport {
  bool watertight = false;
  double max_vertex_gap = 0.0;          // edge endpoints vs. vertex positions
  double max_edge_endpoint_gap = 0.0;   // spread between endpoints meeting at one vertex
  bool self_intersection_checked = false;  // detection is out of scope, always false
};

struct AssembleOptions {
  double fit_threshold_scale = 1e-3;  // threshold = scale x face sample bbox diagonal
  double sew_tol = 1e-3;
  bool require_watertight = false;  // raise instead of reporting a failed sew
  int boundary_samples = 16;        // per edge
  int interior_samples = 8;         // per patch direction
};

// Chooses primitive vs. spline per face from pooled boundary and interior
// samples, snaps edge endpoints onto their shared vertices (averaged), and
// reports sewing quality. Gap figures describe the geometry before snapping;
// the watertight flag also requires every edge curve to lie on both adjacent
// face surfaces after snapping.
std::pair<BRepModel, SewingReport> assemble(const Topology& t, const GeometryAttrs& g,
                                            const AssembleOptions& opts = {});

// Re-checks an assembled model: endpoint/vertex coincidence and edge-on-face
// agreement within tol.
SewingReport check_watertight(const BRepModel& m, double tol);

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
};

// Parameter-grid triangulation of every face patch; primitive faces reuse
// their spline grid, identical up to the fitting residual.
TriMesh tessellate(const BRepModel& m, int n_u, int n_v);

void write_obj(const TriMesh& mesh, std::ostream& out);

}  // namespace brepforge
