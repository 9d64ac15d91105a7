#pragma once

#include <vector>

#include "brepforge/geometry.hpp"
#include "brepforge/topology.hpp"
#include "brepforge/vec3.hpp"

namespace brepforge::testing {

// Unit-ish cube centered at the origin. Faces: 0 bottom, 1 top, 2 front
// (y=-h), 3 right (x=+h), 4 back, 5 left. Vertices 0-3 bottom ring, 4-7 top.
inline Topology cube_topology() {
  std::vector<IdPair> ef = {
      {0, 2}, {0, 3}, {0, 4}, {0, 5},  // bottom ring
      {1, 2}, {1, 3}, {1, 4}, {1, 5},  // top ring
      {2, 5}, {2, 3}, {3, 4}, {4, 5},  // verticals
  };
  std::vector<IdPair> ev = {
      {0, 1}, {1, 2}, {2, 3}, {3, 0},
      {4, 5}, {5, 6}, {6, 7}, {7, 4},
      {0, 4}, {1, 5}, {2, 6}, {3, 7},
  };
  return build_topology(std::move(ef), std::move(ev));
}

inline std::vector<Vec3> cube_vertices(double half = 0.5, Vec3 center = {}) {
  std::vector<Vec3> v = {
      {-half, -half, -half}, {half, -half, -half}, {half, half, -half}, {-half, half, -half},
      {-half, -half, half},  {half, -half, half},  {half, half, half},  {-half, half, half},
  };
  for (auto& p : v) p += center;
  return v;
}

// Triangular prism: faces 0 bottom, 1 top, 2-4 sides; 9 edges, 6 vertices.
inline Topology triangular_prism_topology() {
  std::vector<IdPair> ef = {
      {0, 2}, {0, 3}, {0, 4},  // bottom ring
      {1, 2}, {1, 3}, {1, 4},  // top ring
      {2, 4}, {2, 3}, {3, 4},  // verticals
  };
  std::vector<IdPair> ev = {
      {0, 1}, {1, 2}, {2, 0},
      {3, 4}, {4, 5}, {5, 3},
      {0, 3}, {1, 4}, {2, 5},
  };
  return build_topology(std::move(ef), std::move(ev));
}

// Square pyramid: base face 0 (4 edges), sides 1-4 (3 edges each); apex is
// vertex 4. Exercises face reordering by edge count.
inline Topology square_pyramid_topology() {
  std::vector<IdPair> ef = {
      {0, 1}, {0, 2}, {0, 3}, {0, 4},  // base ring
      {4, 1}, {1, 2}, {2, 3}, {3, 4},  // slant edges
  };
  std::vector<IdPair> ev = {
      {0, 1}, {1, 2}, {2, 3}, {3, 0},
      {0, 4}, {1, 4}, {2, 4}, {3, 4},
  };
  return build_topology(std::move(ef), std::move(ev));
}

// Two pillow solids sharing nothing: faces 0/1 bound the quad loop of edges
// {2,4,5,7} with the endpoint labeling of the worked serialization example;
// faces 2/3 take the remaining edges {0,1,3,6}.
inline Topology worked_example_topology() {
  std::vector<IdPair> ef(8);
  std::vector<IdPair> ev(8);
  ef[2] = {0, 1};
  ev[2] = {0, 1};  // endpoints 4,5
  ef[4] = {0, 1};
  ev[4] = {1, 2};  // endpoints 8,9
  ef[7] = {0, 1};
  ev[7] = {3, 2};  // endpoints 14,15
  ef[5] = {0, 1};
  ev[5] = {0, 3};  // endpoints 10,11
  // second pillow on vertices 4..7
  ef[0] = {2, 3};
  ev[0] = {4, 5};
  ef[1] = {2, 3};
  ev[1] = {5, 6};
  ef[6] = {2, 3};
  ev[6] = {7, 6};
  ef[3] = {2, 3};
  ev[3] = {4, 7};
  return build_topology(std::move(ef), std::move(ev));
}

// Geometry for the hand-built cube fixture: straight edges and planar faces.
inline GeometryAttrs cube_geometry(double half = 0.5, Vec3 center = {}) {
  const Topology t = cube_topology();
  const auto verts = cube_vertices(half, center);
  GeometryAttrs g;
  g.verts = verts;
  g.edge_ctrl.resize(t.num_edges);
  for (int e = 0; e < t.num_edges; ++e)
    for (int k = 0; k < 4; ++k)
      g.edge_ctrl[e][k] = lerp(verts[t.ev[e][0]], verts[t.ev[e][1]], k / 3.0);

  // Loop-ordered corners per face, oriented to match the fixture's rings.
  const std::vector<std::array<int, 4>> corners = {
      {0, 1, 2, 3}, {4, 5, 6, 7}, {0, 1, 5, 4}, {1, 2, 6, 5}, {2, 3, 7, 6}, {3, 0, 4, 7},
  };
  g.face_ctrl.resize(t.num_faces);
  g.face_boxes.resize(t.num_faces);
  for (int f = 0; f < t.num_faces; ++f) {
    const std::array<Vec3, 4> anchors = {verts[corners[f][0]], verts[corners[f][1]],
                                         verts[corners[f][2]], verts[corners[f][3]]};
    g.face_ctrl[f] = bilinear_grid(anchors);
    Box3 box;
    for (const auto& p : g.face_ctrl[f]) box.expand(p);
    g.face_boxes[f] = box.flat();
  }
  return g;
}

}  // namespace brepforge::testing
