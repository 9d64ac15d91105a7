#include "brepforge/serialize.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

namespace brepforge {

namespace {

int edge_of(int endpoint) { return endpoint >> 1; }
int opposite(int endpoint) { return endpoint ^ 1; }

// Endpoint of edge e that sits at vertex v under the 2j <-> ev[j][0] rule.
int endpoint_at(const Topology& t, int e, int v) {
  return 2 * e + (t.ev[e][0] == v ? 0 : 1);
}

// Walks every face's loops in canonical order, invoking `emit` with each
// appended endpoint token and loop/face markers. Shared by ev_to_sequence,
// canonicalize (vertex relabeling) and face_loops.
template <typename EmitToken, typename EmitMark>
void walk_faces(const Topology& t, EmitToken&& emit, EmitMark&& mark) {
  const auto fe = derive_face_edges(t);
  for (int face = 0; face < t.num_faces; ++face) {
    std::set<int> rest(fe[face].begin(), fe[face].end());
    while (!rest.empty()) {
      const int start = *rest.begin();
      rest.erase(rest.begin());
      emit(face, 2 * start);
      const int v_start = t.ev[start][0];
      int v_cur = t.ev[start][1];
      while (true) {
        int next = -1;
        for (int e : rest) {
          if (t.ev[e][0] == v_cur || t.ev[e][1] == v_cur) {
            next = e;
            break;  // std::set iterates ascending; first hit is the smallest
          }
        }
        if (next < 0) {
          if (v_cur != v_start)
            raise(ErrorCode::OpenLoop, "face " + std::to_string(face) +
                                           " has no closed loop through vertex " +
                                           std::to_string(v_cur));
          mark(face, kLoopEnd);
          break;
        }
        rest.erase(next);
        emit(face, endpoint_at(t, next, v_cur));
        v_cur = t.ev[next][0] == v_cur ? t.ev[next][1] : t.ev[next][0];
      }
    }
    mark(face, kFaceEnd);
  }
}

std::vector<int> invert_permutation(const std::vector<int>& new_to_old) {
  std::vector<int> old_to_new(new_to_old.size());
  for (size_t i = 0; i < new_to_old.size(); ++i) old_to_new[new_to_old[i]] = static_cast<int>(i);
  return old_to_new;
}

}  // namespace

CanonicalResult canonicalize_with_maps(const Topology& t, TieBreak tie) {
  std::mt19937_64 rng(tie.seed);

  // Faces ascend by edge count; ties keep original order or get shuffled.
  std::vector<int> face_degree(t.num_faces, 0);
  for (const auto& [f0, f1] : t.ef) {
    face_degree[f0]++;
    face_degree[f1]++;
  }
  std::vector<int> face_order(t.num_faces);
  std::iota(face_order.begin(), face_order.end(), 0);
  if (tie.kind == TieBreak::Kind::Seeded) std::shuffle(face_order.begin(), face_order.end(), rng);
  std::stable_sort(face_order.begin(), face_order.end(),
                   [&](int a, int b) { return face_degree[a] < face_degree[b]; });
  const std::vector<int> face_map = invert_permutation(face_order);

  // Edges ascend lexicographically by their sorted new face pairs.
  std::vector<int> edge_order(t.num_edges);
  std::iota(edge_order.begin(), edge_order.end(), 0);
  if (tie.kind == TieBreak::Kind::Seeded) std::shuffle(edge_order.begin(), edge_order.end(), rng);
  auto edge_key = [&](int e) {
    int a = face_map[t.ef[e][0]];
    int b = face_map[t.ef[e][1]];
    if (a > b) std::swap(a, b);
    return std::pair<int, int>(a, b);
  };
  std::stable_sort(edge_order.begin(), edge_order.end(),
                   [&](int a, int b) { return edge_key(a) < edge_key(b); });
  const std::vector<int> edge_map = invert_permutation(edge_order);

  Topology relabeled;
  relabeled.num_faces = t.num_faces;
  relabeled.num_edges = t.num_edges;
  relabeled.num_verts = t.num_verts;
  relabeled.ef.resize(t.num_edges);
  relabeled.ev.resize(t.num_edges);
  for (int e = 0; e < t.num_edges; ++e) {
    const int old_e = edge_order[e];
    auto [a, b] = edge_key(old_e);
    relabeled.ef[e] = {a, b};
    relabeled.ev[e] = t.ev[old_e];  // old vertex IDs, remapped below
  }

  // Vertices take IDs by first appearance in the canonical traversal.
  std::vector<int> vert_map(t.num_verts, -1);
  int next_vert = 0;
  walk_faces(
      relabeled,
      [&](int, int endpoint) {
        const int v = relabeled.ev[edge_of(endpoint)][endpoint & 1];
        if (vert_map[v] < 0) vert_map[v] = next_vert++;
      },
      [](int, int) {});
  if (next_vert != t.num_verts)
    raise(ErrorCode::InvalidTopology, "traversal did not visit every vertex");
  for (auto& row : relabeled.ev) row = {vert_map[row[0]], vert_map[row[1]]};

  return CanonicalResult{std::move(relabeled), face_map, edge_map, vert_map};
}

Topology canonicalize(const Topology& t, TieBreak tie) {
  return canonicalize_with_maps(t, tie).topology;
}

EfSequence ef_to_sequence(const FefMatrix& f, int m_f, int max_shared) {
  if (f.n > m_f)
    raise(ErrorCode::TooManyFaces, std::to_string(f.n) + " faces exceed the padding size " +
                                       std::to_string(m_f));
  EfSequence s;
  s.m_f = m_f;
  s.tokens.reserve(static_cast<size_t>(m_f) * (m_f - 1) / 2);
  for (int k = 0; k < m_f; ++k) {
    for (int l = k + 1; l < m_f; ++l) {
      const int value = (k < f.n && l < f.n) ? f.at(k, l) : 0;
      if (value > max_shared)
        raise(ErrorCode::SharedEdgeOverflow,
              "faces " + std::to_string(k) + "," + std::to_string(l) + " share " +
                  std::to_string(value) + " edges, limit " + std::to_string(max_shared));
      s.tokens.push_back(value);
    }
  }
  return s;
}

FefMatrix sequence_to_fef(const EfSequence& s) {
  const size_t expected = static_cast<size_t>(s.m_f) * (s.m_f - 1) / 2;
  if (s.m_f < 1 || s.tokens.size() != expected)
    raise(ErrorCode::MalformedLength, "sequence length " + std::to_string(s.tokens.size()) +
                                          " does not match m_f " + std::to_string(s.m_f));
  FefMatrix padded(s.m_f);
  size_t idx = 0;
  for (int k = 0; k < s.m_f; ++k) {
    for (int l = k + 1; l < s.m_f; ++l) {
      padded.at(k, l) = s.tokens[idx];
      padded.at(l, k) = s.tokens[idx];
      ++idx;
    }
  }
  int n = s.m_f;
  auto row_empty = [&](int k) {
    for (int l = 0; l < s.m_f; ++l)
      if (padded.at(k, l) != 0) return false;
    return true;
  };
  while (n > 0 && row_empty(n - 1)) --n;
  if (n == 0) raise(ErrorCode::EmptyTopology, "sequence encodes no faces");
  FefMatrix f(n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) f.at(k, l) = padded.at(k, l);
  return f;
}

EvSequence ev_to_sequence(const Topology& t) {
  EvSequence s;
  walk_faces(
      t, [&](int, int endpoint) { s.tokens.push_back(endpoint); },
      [&](int, int marker) { s.tokens.push_back(marker); });
  return s;
}

std::vector<std::vector<int>> face_loops(const Topology& t, int face) {
  std::vector<std::vector<int>> loops;
  std::vector<int> current;
  walk_faces(
      t,
      [&](int f, int endpoint) {
        if (f != face) return;
        current.push_back(t.ev[edge_of(endpoint)][endpoint & 1]);
      },
      [&](int f, int marker) {
        if (f != face || marker != kLoopEnd) return;
        loops.push_back(current);
        current.clear();
      });
  return loops;
}

// ---------------------------------------------------------------------------
// EvStreamDecoder

EvStreamDecoder::EvStreamDecoder(std::vector<std::vector<int>> face_edges, int num_edges)
    : face_edges_(std::move(face_edges)), num_edges_(num_edges) {
  remaining_.reserve(face_edges_.size());
  edge_faces_.assign(num_edges_, {});
  for (size_t f = 0; f < face_edges_.size(); ++f) {
    remaining_.emplace_back(face_edges_[f].begin(), face_edges_[f].end());
    for (int e : face_edges_[f]) edge_faces_[e].push_back(static_cast<int>(f));
  }
  parent_.resize(2 * num_edges_);
  std::iota(parent_.begin(), parent_.end(), 0);
  rank_.assign(2 * num_edges_, 0);
  slots_.resize(2 * num_edges_);
  for (int e = 0; e < num_edges_; ++e)
    for (int f : edge_faces_[e]) {
      slots_[2 * e][f] += 1;
      slots_[2 * e + 1][f] += 1;
    }
}

EvStreamDecoder EvStreamDecoder::from_fef(const FefMatrix& f) {
  std::vector<std::vector<int>> face_edges(f.n);
  int edge = 0;
  for (int k = 0; k < f.n; ++k) {
    for (int l = k + 1; l < f.n; ++l) {
      for (int c = 0; c < f.at(k, l); ++c) {
        face_edges[k].push_back(edge);
        face_edges[l].push_back(edge);
        ++edge;
      }
    }
  }
  return EvStreamDecoder(std::move(face_edges), edge);
}

int EvStreamDecoder::find(int endpoint) const {
  while (endpoint != parent_[endpoint]) {
    parent_[endpoint] = parent_[parent_[endpoint]];
    endpoint = parent_[endpoint];
  }
  return endpoint;
}

std::optional<ErrorCode> EvStreamDecoder::merge_violation(int a, int b) const {
  const int ra = find(a);
  const int rb = find(b);
  if (ra == rb) return std::nullopt;  // no-op union is always consistent
  // C2: the two endpoints of one edge must never land in the same component.
  for (int e = 0; e < num_edges_; ++e) {
    const int r0 = find(2 * e);
    const int r1 = find(2 * e + 1);
    if ((r0 == ra && r1 == rb) || (r0 == rb && r1 == ra)) return ErrorCode::SelfUnion;
  }
  // C3: a vertex may carry at most two endpoint slots of any single face.
  const auto& sa = slots_[ra];
  const auto& sb = slots_[rb];
  const auto& small = sa.size() <= sb.size() ? sa : sb;
  const auto& large = sa.size() <= sb.size() ? sb : sa;
  for (const auto& [face, count] : small) {
    auto it = large.find(face);
    if (it != large.end() && count + it->second > 2) return ErrorCode::LoopPinch;
  }
  return std::nullopt;
}

void EvStreamDecoder::unite(int a, int b) {
  int ra = find(a);
  int rb = find(b);
  if (ra == rb) return;
  if (rank_[ra] < rank_[rb]) std::swap(ra, rb);
  parent_[rb] = ra;
  if (rank_[ra] == rank_[rb]) ++rank_[ra];
  for (const auto& [face, count] : slots_[rb]) slots_[ra][face] += count;
  slots_[rb].clear();
}

ErrorCode EvStreamDecoder::endpoint_token_violation(int token) const {
  const int e = edge_of(token);
  const auto& faces = edge_faces_[e];
  if (std::find(faces.begin(), faces.end(), current_face_) == faces.end())
    return ErrorCode::FaceMismatch;
  if (remaining_[current_face_].count(e) == 0) return ErrorCode::EdgeReuse;
  if (in_loop_) {
    if (auto v = merge_violation(opposite(last_token_), token)) return *v;
  }
  return ErrorCode::MalformedSequence;  // sentinel: no violation
}

bool EvStreamDecoder::token_allowed(int token) const {
  if (complete()) return false;
  if (token == kFaceEnd) return !in_loop_ && remaining_[current_face_].empty();
  if (token == kLoopEnd)
    return in_loop_ && !merge_violation(opposite(last_token_), loop_first_).has_value();
  if (token < 0 || token >= num_endpoints()) return false;
  return endpoint_token_violation(token) == ErrorCode::MalformedSequence;
}

void EvStreamDecoder::feed(int token) {
  if (complete())
    raise(ErrorCode::MalformedSequence, "token after the final face marker");
  if (token == kFaceEnd) {
    if (in_loop_)
      raise(ErrorCode::OpenLoop,
            "face marker inside an open loop of face " + std::to_string(current_face_));
    if (!remaining_[current_face_].empty())
      raise(ErrorCode::OpenLoop, "face " + std::to_string(current_face_) + " still has " +
                                     std::to_string(remaining_[current_face_].size()) +
                                     " unplaced edges");
    ++current_face_;
    tokens_.push_back(token);
    return;
  }
  if (token == kLoopEnd) {
    if (!in_loop_)
      raise(ErrorCode::MalformedSequence, "loop marker outside a loop");
    if (auto v = merge_violation(opposite(last_token_), loop_first_))
      raise(*v, "closing the loop would merge inconsistent endpoints");
    unite(opposite(last_token_), loop_first_);
    in_loop_ = false;
    loop_first_ = -1;
    last_token_ = -1;
    tokens_.push_back(token);
    return;
  }
  if (token < 0 || token >= num_endpoints())
    raise(ErrorCode::MalformedSequence, "endpoint token " + std::to_string(token) +
                                            " outside [0, " + std::to_string(num_endpoints()) +
                                            ")");
  const int e = edge_of(token);
  const auto& faces = edge_faces_[e];
  if (std::find(faces.begin(), faces.end(), current_face_) == faces.end())
    raise(ErrorCode::FaceMismatch, "edge " + std::to_string(e) + " is not incident to face " +
                                       std::to_string(current_face_));
  if (remaining_[current_face_].count(e) == 0)
    raise(ErrorCode::EdgeReuse,
          "edge " + std::to_string(e) + " already placed in face " +
              std::to_string(current_face_));
  if (in_loop_) {
    if (auto v = merge_violation(opposite(last_token_), token))
      raise(*v, *v == ErrorCode::SelfUnion
                    ? "connection would merge the two endpoints of one edge"
                    : "connection would give a face more than two slots at one vertex");
    unite(opposite(last_token_), token);
  } else {
    in_loop_ = true;
    loop_first_ = token;
  }
  remaining_[current_face_].erase(e);
  last_token_ = token;
  tokens_.push_back(token);
}

std::vector<int> EvStreamDecoder::endpoint_vertices() const {
  std::vector<int> label(num_endpoints(), -1);
  std::vector<int> root_label(num_endpoints(), -1);
  int next = 0;
  for (int tok : tokens_) {
    if (tok < 0) continue;
    const int r = find(tok);
    if (root_label[r] < 0) root_label[r] = next++;
  }
  for (int p = 0; p < num_endpoints(); ++p) {
    int r = find(p);
    if (root_label[r] < 0) root_label[r] = next++;  // endpoints never referenced
    label[p] = root_label[r];
  }
  return label;
}

Topology sequence_to_ev(const EvSequence& s, const FefMatrix& f) {
  EvStreamDecoder decoder = EvStreamDecoder::from_fef(f);
  for (int token : s.tokens) decoder.feed(token);
  if (!decoder.complete())
    raise(ErrorCode::MalformedSequence,
          "stream ended after " + std::to_string(decoder.current_face()) + " of " +
              std::to_string(decoder.num_faces()) + " faces");

  const std::vector<int> vert = decoder.endpoint_vertices();
  Topology t;
  t.num_faces = f.n;
  t.num_edges = decoder.num_edges();
  t.ef.reserve(t.num_edges);
  for (int k = 0; k < f.n; ++k)
    for (int l = k + 1; l < f.n; ++l)
      for (int c = 0; c < f.at(k, l); ++c) t.ef.push_back({k, l});
  t.ev.reserve(t.num_edges);
  int max_vert = -1;
  for (int e = 0; e < t.num_edges; ++e) {
    t.ev.push_back({vert[2 * e], vert[2 * e + 1]});
    max_vert = std::max({max_vert, vert[2 * e], vert[2 * e + 1]});
  }
  t.num_verts = max_vert + 1;
  return t;
}

}  // namespace brepforge
