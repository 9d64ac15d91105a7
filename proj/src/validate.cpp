#include "brepforge/validate.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "brepforge/error.hpp"

namespace brepforge {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t mix(uint64_t h, uint64_t v) { return splitmix64(h ^ splitmix64(v)); }

}  // namespace

ValidityReport validate(const Topology& t) {
  ValidityReport r;
  r.c1_ok = r.c2_ok = r.c3_ok = r.manifold_ok = true;

  std::vector<int> face_degree(t.num_faces, 0);
  for (int e = 0; e < t.num_edges; ++e) {
    if (t.ef[e][0] == t.ef[e][1]) {
      r.c1_ok = false;
      r.violations.push_back({"C1", {e}});
    } else {
      face_degree[t.ef[e][0]]++;
      face_degree[t.ef[e][1]]++;
    }
    if (t.ev[e][0] == t.ev[e][1]) {
      r.c2_ok = false;
      r.violations.push_back({"C2", {e}});
    }
  }
  // A closed face needs at least a degenerate two-edge loop.
  for (int f = 0; f < t.num_faces; ++f) {
    if (face_degree[f] < 2) {
      r.c1_ok = false;
      r.violations.push_back({"C1", {f}});
    }
  }

  // C3: degree-exactly-2 inside each face's edge multiset.
  const auto fe = derive_face_edges(t);
  for (int f = 0; f < t.num_faces; ++f) {
    std::map<int, int> degree;
    for (int e : fe[f]) {
      degree[t.ev[e][0]]++;
      degree[t.ev[e][1]]++;
    }
    std::vector<int> bad;
    for (const auto& [v, d] : degree)
      if (d != 2) bad.push_back(v);
    if (!bad.empty()) {
      r.c3_ok = false;
      Violation viol{"C3", {f}};
      viol.ids.insert(viol.ids.end(), bad.begin(), bad.end());
      r.violations.push_back(std::move(viol));
    }
  }

  // Manifoldness: the faces incident to a vertex, linked by the vertex's
  // edges, must form one closed cycle (every face node degree 2, connected).
  if (r.c1_ok && r.c2_ok) {
    std::vector<std::vector<int>> vert_edges(t.num_verts);
    for (int e = 0; e < t.num_edges; ++e) {
      vert_edges[t.ev[e][0]].push_back(e);
      vert_edges[t.ev[e][1]].push_back(e);
    }
    for (int v = 0; v < t.num_verts; ++v) {
      const auto& edges = vert_edges[v];
      if (edges.size() < 2) {
        r.manifold_ok = false;
        r.violations.push_back({"manifold", {v}});
        continue;
      }
      std::map<int, int> fan_degree;
      for (int e : edges) {
        fan_degree[t.ef[e][0]]++;
        fan_degree[t.ef[e][1]]++;
      }
      bool cycle = true;
      for (const auto& [f, d] : fan_degree)
        if (d != 2) cycle = false;
      if (cycle) {
        // connectivity of the fan multigraph
        std::map<int, std::vector<int>> adj;
        for (int e : edges) {
          adj[t.ef[e][0]].push_back(t.ef[e][1]);
          adj[t.ef[e][1]].push_back(t.ef[e][0]);
        }
        std::set<int> seen;
        std::vector<int> stack{adj.begin()->first};
        while (!stack.empty()) {
          int f = stack.back();
          stack.pop_back();
          if (!seen.insert(f).second) continue;
          for (int g : adj[f]) stack.push_back(g);
        }
        cycle = seen.size() == fan_degree.size();
      }
      if (!cycle) {
        r.manifold_ok = false;
        r.violations.push_back({"manifold", {v}});
      }
    }
  } else {
    r.manifold_ok = false;
  }

  return r;
}

TopoHash topology_hash(const Topology& t) {
  if (!validate(t).valid())
    raise(ErrorCode::InvalidTopology, "topology hash requires a valid topology");

  const int n_nodes = t.num_faces + t.num_edges + t.num_verts;
  auto face_node = [&](int f) { return f; };
  auto edge_node = [&](int e) { return t.num_faces + e; };
  auto vert_node = [&](int v) { return t.num_faces + t.num_edges + v; };

  std::vector<std::vector<int>> adj(n_nodes);
  for (int e = 0; e < t.num_edges; ++e) {
    for (int f : t.ef[e]) {
      adj[edge_node(e)].push_back(face_node(f));
      adj[face_node(f)].push_back(edge_node(e));
    }
    for (int v : t.ev[e]) {
      adj[edge_node(e)].push_back(vert_node(v));
      adj[vert_node(v)].push_back(edge_node(e));
    }
  }

  std::vector<uint64_t> color(n_nodes);
  for (int f = 0; f < t.num_faces; ++f)
    color[face_node(f)] = mix(0xFACE, adj[face_node(f)].size());
  for (int e = 0; e < t.num_edges; ++e) color[edge_node(e)] = mix(0xED6E, 4);
  for (int v = 0; v < t.num_verts; ++v)
    color[vert_node(v)] = mix(0x7E27, adj[vert_node(v)].size());

  auto distinct = [&]() {
    std::unordered_set<uint64_t> s(color.begin(), color.end());
    return s.size();
  };

  int rounds = 0;
  size_t classes = distinct();
  std::vector<uint64_t> next(n_nodes);
  for (int round = 0; round < n_nodes; ++round) {
    for (int i = 0; i < n_nodes; ++i) {
      std::vector<uint64_t> neigh;
      neigh.reserve(adj[i].size());
      for (int j : adj[i]) neigh.push_back(color[j]);
      std::sort(neigh.begin(), neigh.end());
      uint64_t h = mix(0xC01089, color[i]);
      for (uint64_t c : neigh) h = mix(h, c);
      next[i] = h;
    }
    color.swap(next);
    ++rounds;
    const size_t refined = distinct();
    if (refined == classes) break;
    classes = refined;
  }

  std::vector<uint64_t> sorted(color);
  std::sort(sorted.begin(), sorted.end());
  uint64_t digest = mix(mix(mix(0xB4E9, t.num_faces), t.num_edges), t.num_verts);
  for (uint64_t c : sorted) digest = mix(digest, c);
  return TopoHash{digest, rounds};
}

NoveltyMetrics novelty_metrics(const std::vector<Topology>& generated,
                               const std::vector<Topology>& training) {
  if (generated.empty()) raise(ErrorCode::EmptySet, "no generated topologies to score");

  std::unordered_set<uint64_t> train_hashes;
  for (const auto& t : training)
    if (validate(t).valid()) train_hashes.insert(topology_hash(t).digest);

  const size_t n = generated.size();
  std::vector<bool> is_valid(n, false);
  std::vector<uint64_t> hashes(n, 0);
  std::unordered_map<uint64_t, int> counts;
  size_t valid_count = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!validate(generated[i]).valid()) continue;
    is_valid[i] = true;
    ++valid_count;
    hashes[i] = topology_hash(generated[i]).digest;
    counts[hashes[i]]++;
  }

  size_t unique_count = 0;
  size_t novel_count = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!is_valid[i]) continue;
    if (counts[hashes[i]] == 1) ++unique_count;
    if (train_hashes.find(hashes[i]) == train_hashes.end()) ++novel_count;
  }

  NoveltyMetrics m;
  m.valid_pct = 100.0 * static_cast<double>(valid_count) / static_cast<double>(n);
  m.unique_pct = 100.0 * static_cast<double>(unique_count) / static_cast<double>(n);
  m.novel_pct = 100.0 * static_cast<double>(novel_count) / static_cast<double>(n);
  return m;
}

}  // namespace brepforge
