#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "brepforge/diffusion.hpp"
#include "brepforge/generate.hpp"
#include "brepforge/geometry.hpp"

namespace brepforge {

inline constexpr int kCorpusSchemaVersion = 1;

struct CorpusRecord {
  std::string id;
  Topology topology;
  std::optional<GeometryAttrs> geometry;
};

std::vector<CorpusRecord> load_corpus(const std::string& path);
void save_corpus(const std::vector<CorpusRecord>& records, const std::string& path);

struct FilterResult {
  std::vector<CorpusRecord> kept;
  int rejected_too_many_faces = 0;
  int rejected_face_edge_overflow = 0;
};

// Drops records with more faces than max_faces or any face carrying more
// than max_edges_per_face edges.
FilterResult filter_corpus(const std::vector<CorpusRecord>& records, int max_faces = 50,
                           int max_edges_per_face = 30);

enum class ShapeKind { Box, Prism };

struct ShapeWeight {
  ShapeKind kind = ShapeKind::Box;
  int sides = 4;  // prisms only
  double weight = 1.0;
};

struct SynthSpec {
  int n_models = 100;
  std::vector<ShapeWeight> mix = {{ShapeKind::Box, 4, 0.40},
                                  {ShapeKind::Prism, 3, 0.25},
                                  {ShapeKind::Prism, 4, 0.15},
                                  {ShapeKind::Prism, 5, 0.10},
                                  {ShapeKind::Prism, 6, 0.10}};
  double min_half_extent = 0.25;
  double max_half_extent = 0.75;
  double max_center_offset = 0.15;
};

// Closed prismatic solids in canonical labeling with control-point geometry:
// straight four-point edges, planar 4x4 face grids. Every record validates
// and assembles watertight. Deterministic per (seed, record index).
std::vector<CorpusRecord> gen_synthetic_corpus(const SynthSpec& spec, uint64_t seed);

// Everything the CLI needs to run the pipeline: token models for both
// topology stages plus the four stage denoisers with their schedule.
struct ModelBundle {
  int m_f = kDefaultMaxFaces;
  int max_shared = kDefaultMaxSharedEdges;
  CountModel ef_model;
  CountModel ev_model;
  std::vector<ToyDenoiser> denoisers;  // FaceBox, Vertex, EdgeGeom, FaceGeom
};

void save_model_bundle(const ModelBundle& bundle, const std::string& path);
ModelBundle load_model_bundle(const std::string& path);

}  // namespace brepforge
