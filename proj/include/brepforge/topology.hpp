#pragma once

#include <array>
#include <vector>

namespace brepforge {

using IdPair = std::array<int, 2>;

// Incidence record of a closed B-rep: one face pair and one vertex pair per
// edge. Counts are always inferred from the pair lists, never stored
// separately, so they cannot drift out of sync.
struct Topology {
  int num_faces = 0;
  int num_edges = 0;
  int num_verts = 0;
  std::vector<IdPair> ef;  // per-edge incident faces
  std::vector<IdPair> ev;  // per-edge endpoint vertices
};

// Symmetric face-by-face matrix of shared-edge counts, zero diagonal.
struct FefMatrix {
  int n = 0;
  std::vector<int> entries;  // row-major n*n

  FefMatrix() = default;
  explicit FefMatrix(int size) : n(size), entries(static_cast<size_t>(size) * size, 0) {}

  int& at(int k, int l) { return entries[static_cast<size_t>(k) * n + l]; }
  int at(int k, int l) const { return entries[static_cast<size_t>(k) * n + l]; }

  int upper_triangle_sum() const {
    int s = 0;
    for (int k = 0; k < n; ++k)
      for (int l = k + 1; l < n; ++l) s += at(k, l);
    return s;
  }

  bool operator==(const FefMatrix& o) const { return n == o.n && entries == o.entries; }
};

// Builds a topology from raw pair lists. Counts are inferred as 1 + max ID.
// Rows with a repeated ID violate C1/C2 and are rejected unless `unchecked`
// is set; the unchecked path exists so the validator can be fed bad inputs.
Topology build_topology(std::vector<IdPair> ef, std::vector<IdPair> ev, bool unchecked = false);

// entry[k][l] = number of edges whose face pair is {k,l}.
FefMatrix derive_fef(const Topology& t);

// Face k's incident edge IDs in ascending order (the FE view dual to EF).
std::vector<std::vector<int>> derive_face_edges(const Topology& t);

inline bool operator==(const Topology& a, const Topology& b) {
  return a.num_faces == b.num_faces && a.num_edges == b.num_edges &&
         a.num_verts == b.num_verts && a.ef == b.ef && a.ev == b.ev;
}

}  // namespace brepforge
