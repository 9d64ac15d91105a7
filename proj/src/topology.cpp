#include "brepforge/topology.hpp"

#include <string>

#include "brepforge/error.hpp"

namespace brepforge {

Topology build_topology(std::vector<IdPair> ef, std::vector<IdPair> ev, bool unchecked) {
  if (ef.size() != ev.size())
    raise(ErrorCode::MalformedLength,
          "ef and ev must have one row per edge (got " + std::to_string(ef.size()) + " vs " +
              std::to_string(ev.size()) + ")");
  if (ef.empty()) raise(ErrorCode::EmptyTopology, "topology has no edges");

  int max_face = -1;
  int max_vert = -1;
  for (size_t i = 0; i < ef.size(); ++i) {
    const auto& [f0, f1] = ef[i];
    const auto& [v0, v1] = ev[i];
    if (f0 < 0 || f1 < 0 || v0 < 0 || v1 < 0)
      raise(ErrorCode::MalformedPair, "negative ID in edge row " + std::to_string(i));
    if (!unchecked && f0 == f1)
      raise(ErrorCode::MalformedPair,
            "edge " + std::to_string(i) + " lists face " + std::to_string(f0) + " twice");
    if (!unchecked && v0 == v1)
      raise(ErrorCode::MalformedPair,
            "edge " + std::to_string(i) + " lists vertex " + std::to_string(v0) + " twice");
    max_face = std::max({max_face, f0, f1});
    max_vert = std::max({max_vert, v0, v1});
  }

  Topology t;
  t.num_faces = max_face + 1;
  t.num_verts = max_vert + 1;
  t.num_edges = static_cast<int>(ef.size());
  t.ef = std::move(ef);
  t.ev = std::move(ev);
  return t;
}

FefMatrix derive_fef(const Topology& t) {
  FefMatrix m(t.num_faces);
  for (const auto& [f0, f1] : t.ef) {
    if (f0 == f1) continue;  // defined only for distinct-face rows
    m.at(f0, f1) += 1;
    m.at(f1, f0) += 1;
  }
  return m;
}

std::vector<std::vector<int>> derive_face_edges(const Topology& t) {
  std::vector<std::vector<int>> fe(t.num_faces);
  for (int e = 0; e < t.num_edges; ++e) {
    fe[t.ef[e][0]].push_back(e);
    if (t.ef[e][1] != t.ef[e][0]) fe[t.ef[e][1]].push_back(e);
  }
  // push order is ascending already; keep it explicit for unchecked inputs
  return fe;
}

}  // namespace brepforge
