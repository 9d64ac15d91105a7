#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brepforge/topology.hpp"

namespace brepforge {

struct Violation {
  std::string constraint;  // "C1", "C2", "C3", "manifold"
  std::vector<int> ids;    // offending edge/face/vertex IDs
};

struct ValidityReport {
  bool c1_ok = false;
  bool c2_ok = false;
  bool c3_ok = false;
  bool manifold_ok = false;
  std::vector<Violation> violations;

  bool valid() const { return c1_ok && c2_ok && c3_ok && manifold_ok; }
};

struct TopoHash {
  uint64_t digest = 0;
  int rounds = 0;

  bool operator==(const TopoHash& o) const { return digest == o.digest; }
};

// C1: every edge sits in two distinct faces and every face has at least a
// (possibly degenerate two-edge) loop's worth of edges. C2: every edge joins
// two distinct vertices. C3: within each face's edge multiset every vertex
// has degree exactly two. Manifold: the edge-face fan around each vertex is
// a single closed cycle.
ValidityReport validate(const Topology& t);

// Weisfeiler-Lehman color refinement on the typed face/edge/vertex incidence
// graph; equal for isomorphic topologies, distinct with high probability
// otherwise.
TopoHash topology_hash(const Topology& t);

struct NoveltyMetrics {
  double novel_pct = 0.0;
  double unique_pct = 0.0;
  double valid_pct = 0.0;
};

// Novel/Unique/Valid applied to topology structure. Hashes are computed for
// valid topologies only; invalid samples count against all three rates.
NoveltyMetrics novelty_metrics(const std::vector<Topology>& generated,
                               const std::vector<Topology>& training);

}  // namespace brepforge
