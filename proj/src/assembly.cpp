#include "brepforge/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "brepforge/error.hpp"
#include "brepforge/validate.hpp"

namespace brepforge {

namespace {

struct GapStats {
  double max_vertex_gap = 0.0;
  double max_endpoint_spread = 0.0;
};

// Endpoint ctrl[0] belongs to ev[e][0] and ctrl[3] to ev[e][1].
GapStats measure_gaps(const Topology& t, const GeometryAttrs& g) {
  GapStats stats;
  std::vector<std::vector<Vec3>> at_vertex(t.num_verts);
  for (int e = 0; e < t.num_edges; ++e) {
    at_vertex[t.ev[e][0]].push_back(g.edge_ctrl[e][0]);
    at_vertex[t.ev[e][1]].push_back(g.edge_ctrl[e][3]);
  }
  for (int v = 0; v < t.num_verts; ++v) {
    for (const auto& p : at_vertex[v])
      stats.max_vertex_gap = std::max(stats.max_vertex_gap, norm(p - g.verts[v]));
    for (size_t i = 0; i < at_vertex[v].size(); ++i)
      for (size_t j = i + 1; j < at_vertex[v].size(); ++j)
        stats.max_endpoint_spread =
            std::max(stats.max_endpoint_spread, norm(at_vertex[v][i] - at_vertex[v][j]));
  }
  return stats;
}

double face_surface_distance(const BRepModel& m, int face, const Vec3& p) {
  const auto& fs = m.face_surface[face];
  if (fs.primitive) return distance_to_primitive(*fs.primitive, p);
  return distance_to_patch(m.geometry.face_patch(face), p);
}

// Max distance from edge-curve samples to both adjacent face surfaces.
double edge_on_face_error(const BRepModel& m, int samples_per_edge = 9) {
  double worst = 0.0;
  for (int e = 0; e < m.topology.num_edges; ++e) {
    const auto pts = sample_curve(m.geometry.edge_curve(e), samples_per_edge);
    for (int side = 0; side < 2; ++side) {
      const int face = m.topology.ef[e][side];
      for (const auto& p : pts)
        worst = std::max(worst, face_surface_distance(m, face, p));
    }
  }
  return worst;
}

}  // namespace

std::pair<BRepModel, SewingReport> assemble(const Topology& t, const GeometryAttrs& g,
                                            const AssembleOptions& opts) {
  if (!validate(t).valid())
    raise(ErrorCode::InvalidTopology, "assemble requires a C1-C3 valid topology");
  if (!geometry_shapes_consistent(t, g))
    raise(ErrorCode::TopologyGeometryMismatch, "geometry shapes do not match topology counts");

  BRepModel m;
  m.topology = t;
  m.geometry = g;

  const GapStats gaps = measure_gaps(t, g);

  // Snap: vertex := mean of the endpoints that meet it, endpoints := vertex.
  std::vector<std::vector<std::pair<int, int>>> slots(t.num_verts);  // (edge, ctrl index)
  for (int e = 0; e < t.num_edges; ++e) {
    slots[t.ev[e][0]].push_back({e, 0});
    slots[t.ev[e][1]].push_back({e, 3});
  }
  for (int v = 0; v < t.num_verts; ++v) {
    if (slots[v].empty()) continue;
    Vec3 mean{};
    for (const auto& [e, k] : slots[v]) mean += m.geometry.edge_ctrl[e][k];
    mean = mean / static_cast<double>(slots[v].size());
    m.geometry.verts[v] = mean;
    for (const auto& [e, k] : slots[v]) m.geometry.edge_ctrl[e][k] = mean;
  }

  // Primitive vs. spline per face, from pooled boundary + interior samples.
  const auto fe = derive_face_edges(t);
  m.face_surface.resize(t.num_faces);
  for (int f = 0; f < t.num_faces; ++f) {
    std::vector<Vec3> pooled;
    for (int e : fe[f]) {
      const auto pts = sample_curve(m.geometry.edge_curve(e), opts.boundary_samples);
      pooled.insert(pooled.end(), pts.begin(), pts.end());
    }
    const auto grid =
        sample_surface(m.geometry.face_patch(f), opts.interior_samples, opts.interior_samples);
    for (const auto& row : grid) pooled.insert(pooled.end(), row.begin(), row.end());

    Box3 box;
    for (const auto& p : pooled) box.expand(p);
    const double threshold = opts.fit_threshold_scale * box.diagonal();
    auto& fs = m.face_surface[f];
    try {
      if (auto fit = fit_primitive(pooled, threshold)) {
        fs.primitive = fit->primitive;
        fs.fit_residual = fit->residual;
      } else {
        fs.fit_residual = threshold;  // best fit exceeded the threshold
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateConfiguration) throw;
      fs.fit_residual = std::numeric_limits<double>::infinity();
    }
  }

  SewingReport report;
  report.max_vertex_gap = gaps.max_vertex_gap;
  report.max_edge_endpoint_gap = gaps.max_endpoint_spread;
  report.self_intersection_checked = false;
  report.watertight = gaps.max_vertex_gap <= opts.sew_tol &&
                      gaps.max_endpoint_spread <= opts.sew_tol &&
                      edge_on_face_error(m) <= opts.sew_tol;
  if (opts.require_watertight && !report.watertight)
    raise(ErrorCode::GapExceedsTolerance,
          "sewing gaps exceed tolerance " + std::to_string(opts.sew_tol) +
              " (vertex gap " + std::to_string(report.max_vertex_gap) + ")");
  return {std::move(m), report};
}

SewingReport check_watertight(const BRepModel& m, double tol) {
  const GapStats gaps = measure_gaps(m.topology, m.geometry);
  SewingReport report;
  report.max_vertex_gap = gaps.max_vertex_gap;
  report.max_edge_endpoint_gap = gaps.max_endpoint_spread;
  report.self_intersection_checked = false;
  report.watertight = gaps.max_vertex_gap <= tol && gaps.max_endpoint_spread <= tol &&
                      edge_on_face_error(m) <= tol;
  return report;
}

TriMesh tessellate(const BRepModel& m, int n_u, int n_v) {
  if (n_u < 2 || n_v < 2) raise(ErrorCode::TooFewSamples, "tessellation grid must be >= 2x2");
  TriMesh mesh;
  for (int f = 0; f < m.topology.num_faces; ++f) {
    const auto grid = sample_surface(m.geometry.face_patch(f), n_u, n_v);
    const int base = static_cast<int>(mesh.vertices.size());
    for (const auto& row : grid) mesh.vertices.insert(mesh.vertices.end(), row.begin(), row.end());
    auto id = [&](int i, int j) { return base + i * n_v + j; };
    for (int i = 0; i + 1 < n_u; ++i) {
      for (int j = 0; j + 1 < n_v; ++j) {
        mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
        mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      }
    }
  }
  return mesh;
}

void write_obj(const TriMesh& mesh, std::ostream& out) {
  for (const auto& v : mesh.vertices) out << "v " << v.x << " " << v.y << " " << v.z << "\n";
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

}  // namespace brepforge
