#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "brepforge/error.hpp"
#include "brepforge/topology.hpp"

namespace brepforge {

inline constexpr int kLoopEnd = -1;
inline constexpr int kFaceEnd = -2;
inline constexpr int kDefaultMaxSharedEdges = 5;  // M_e
inline constexpr int kDefaultMaxFaces = 30;       // M_f

// Row-major upper triangle of the zero-padded m_f x m_f shared-edge matrix.
struct EfSequence {
  std::vector<int> tokens;
  int m_f = 0;
};

// Endpoint-ID token stream: values in [0, 2*N_e) plus kLoopEnd / kFaceEnd.
struct EvSequence {
  std::vector<int> tokens;

  bool operator==(const EvSequence& o) const { return tokens == o.tokens; }
};

struct TieBreak {
  enum class Kind { Deterministic, Seeded };
  Kind kind = Kind::Deterministic;
  uint64_t seed = 0;

  static TieBreak deterministic() { return {}; }
  static TieBreak seeded(uint64_t s) { return {Kind::Seeded, s}; }
};

struct CanonicalResult {
  Topology topology;
  std::vector<int> face_map;  // old face ID -> new face ID
  std::vector<int> edge_map;
  std::vector<int> vert_map;
};

// Relabels faces ascending by edge count, edges lexicographically by their
// sorted face pairs, and vertices by first appearance in the canonical
// edge-vertex traversal. EF rows come out sorted ascending. Ties follow the
// original index (Deterministic) or a seeded shuffle (Seeded).
CanonicalResult canonicalize_with_maps(const Topology& t, TieBreak tie = TieBreak::deterministic());
Topology canonicalize(const Topology& t, TieBreak tie = TieBreak::deterministic());

EfSequence ef_to_sequence(const FefMatrix& f, int m_f,
                          int max_shared = kDefaultMaxSharedEdges);
FefMatrix sequence_to_fef(const EfSequence& s);

// Serializes edge connectivity face by face: per face, loops are walked from
// the smallest unvisited edge's even endpoint, always continuing along the
// smaller connecting edge; each closed loop ends with kLoopEnd and each face
// with kFaceEnd. Endpoint 2j maps to ev[j][0] and 2j+1 to ev[j][1].
EvSequence ev_to_sequence(const Topology& t);

// Incremental decoder for edge-vertex token streams. Mirrors the
// reconstruction state used by sequence_to_ev exactly; the sampler uses the
// same object for feasibility masking.
class EvStreamDecoder {
 public:
  EvStreamDecoder(std::vector<std::vector<int>> face_edges, int num_edges);
  static EvStreamDecoder from_fef(const FefMatrix& f);

  // Consumes one token, throwing on any constraint violation.
  void feed(int token);
  // True iff feed(token) would succeed in the current state.
  bool token_allowed(int token) const;

  bool complete() const { return current_face_ >= num_faces(); }
  int num_faces() const { return static_cast<int>(face_edges_.size()); }
  int num_edges() const { return num_edges_; }
  int num_endpoints() const { return 2 * num_edges_; }
  int current_face() const { return current_face_; }
  bool in_loop() const { return in_loop_; }
  const std::vector<int>& tokens() const { return tokens_; }

  // Final vertex label per endpoint, numbered by first appearance in the
  // token stream. Only meaningful once complete.
  std::vector<int> endpoint_vertices() const;

 private:
  int find(int endpoint) const;
  std::optional<ErrorCode> merge_violation(int a, int b) const;
  void unite(int a, int b);
  ErrorCode endpoint_token_violation(int token) const;

  std::vector<std::vector<int>> face_edges_;
  std::vector<std::set<int>> remaining_;  // unconsumed edges per face
  std::vector<std::vector<int>> edge_faces_;
  int num_edges_ = 0;

  mutable std::vector<int> parent_;  // union-find with path halving
  std::vector<int> rank_;
  // Per-root count of endpoint slots each face owns inside the component;
  // a component may never hold more than two slots of any single face (C3).
  std::vector<std::map<int, int>> slots_;

  int current_face_ = 0;
  bool in_loop_ = false;
  int loop_first_ = -1;
  int last_token_ = -1;
  std::vector<int> tokens_;
};

// Rebuilds a topology from a token stream and the face-edge incidence implied
// by the shared-edge matrix (edges laid out lexicographically by face pair).
// Exact inverse of ev_to_sequence on canonical inputs.
Topology sequence_to_ev(const EvSequence& s, const FefMatrix& f);

// Loop-ordered vertex IDs for one face (first loop first), as visited by the
// canonical traversal. Requires a C1-C3-valid topology.
std::vector<std::vector<int>> face_loops(const Topology& t, int face);

}  // namespace brepforge
