#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "brepforge/geometry.hpp"
#include "brepforge/topology.hpp"

namespace brepforge {

// Linear-beta DDPM coefficients for T steps; index 0 holds step t=1.
struct DiffusionSchedule {
  int steps = 0;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;

  double beta_at(int t) const { return beta[t - 1]; }
  double alpha_at(int t) const { return alpha[t - 1]; }
  double alpha_bar_at(int t) const { return alpha_bar[t - 1]; }
};

DiffusionSchedule linear_schedule(int steps, double beta_start = 1e-4, double beta_end = 2e-2);

// Dense row-major matrix; one row per element of a generation stage.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
};

enum class Stage { FaceBox = 0, Vertex = 1, EdgeGeom = 2, FaceGeom = 3 };

constexpr const char* stage_name(Stage s) {
  switch (s) {
    case Stage::FaceBox: return "face_box";
    case Stage::Vertex: return "vertex";
    case Stage::EdgeGeom: return "edge_geom";
    case Stage::FaceGeom: return "face_geom";
  }
  return "unknown";
}

// Exactly the inputs each stage may see, nothing else: the shared-edge matrix
// for face boxes, vertex adjacency for vertices, adjacent boxes plus endpoint
// coordinates for edges, and the face's own box plus loop-ordered boundary
// vertices and boundary edge geometry for faces.
struct ConditioningBundle {
  Stage stage = Stage::FaceBox;
  int num_elements = 0;

  FefMatrix fef;                                          // FaceBox
  std::vector<std::vector<int>> vertex_adjacency;         // Vertex
  std::vector<std::array<double, 12>> adjacent_face_boxes;  // EdgeGeom
  std::vector<std::array<double, 6>> endpoint_coords;       // EdgeGeom
  std::vector<std::array<double, 6>> own_box;               // FaceGeom
  std::vector<std::vector<Vec3>> boundary_loop_verts;       // FaceGeom, loop order
  std::vector<std::vector<std::array<Vec3, 4>>> boundary_edge_ctrl;  // FaceGeom
};

ConditioningBundle conditioning_for_face_boxes(const Topology& t);
ConditioningBundle conditioning_for_vertices(const Topology& t);
ConditioningBundle conditioning_for_edges(const Topology& t,
                                          const std::vector<std::array<double, 6>>& face_boxes,
                                          const std::vector<Vec3>& verts);
ConditioningBundle conditioning_for_faces(const Topology& t,
                                          const std::vector<std::array<double, 6>>& face_boxes,
                                          const std::vector<Vec3>& verts,
                                          const std::vector<std::array<Vec3, 4>>& edge_ctrl);

class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Mat predict_noise(const Mat& x_t, int t, const ConditioningBundle& cond) const = 0;
  // Stage binding when the denoiser is stage-specific; the cascade refuses
  // denoisers wired to the wrong slot.
  virtual std::optional<Stage> stage() const { return std::nullopt; }
};

// x_t = sqrt(abar_t) x0 + sqrt(1-abar_t) eps; returns (x_t, eps).
std::pair<Mat, Mat> forward_noise(const Mat& x0, int t, const DiffusionSchedule& s,
                                  std::mt19937_64& rng);

// Ancestral DDPM sampling from t=T down to 1, posterior variance
// beta_t * (1-abar_{t-1}) / (1-abar_t), no noise at the last step.
Mat reverse_sample(const Denoiser& d, int rows, int cols, const DiffusionSchedule& s,
                   const ConditioningBundle& cond, std::mt19937_64& rng);

// Fixed stage order FaceBox -> Vertex -> EdgeGeom -> FaceGeom, each stage
// conditioned on the topology and everything generated before it.
GeometryAttrs generate_geometry_cascade(const Topology& t,
                                        const std::array<const Denoiser*, 4>& denoisers,
                                        const DiffusionSchedule& s, std::mt19937_64& rng);

struct StageSample {
  Mat x0;
  ConditioningBundle cond;
};

struct ToyDenoiserConfig {
  int hidden = 96;
  int t_embed_dim = 64;
  int index_embed_dim = 8;
  double learning_rate = 2e-3;
  int epochs = 300;
  uint64_t seed = 1;
};

// Small feed-forward noise regressor: a linear skip plus one tanh layer maps
// (x_t, t embedding, flattened conditioning) to an x0 estimate, converted to
// the implied noise. Trained on noise-prediction squared error.
class ToyDenoiser : public Denoiser {
 public:
  struct Params {
    Stage stage = Stage::FaceBox;
    int in_dim = 0;
    int hidden = 0;
    int out_dim = 0;
    int t_embed_dim = 64;
    int index_embed_dim = 8;
    std::vector<double> w1, b1, w2, b2, ws;
    std::vector<double> alpha_bar;  // schedule the net was trained against
  };

  explicit ToyDenoiser(Params params) : params_(std::move(params)) {}

  Mat predict_noise(const Mat& x_t, int t, const ConditioningBundle& cond) const override;
  std::optional<Stage> stage() const override { return params_.stage; }

  Mat predict_x0(const Mat& x_t, int t, const ConditioningBundle& cond) const;
  const Params& params() const { return params_; }
  const std::vector<double>& epoch_losses() const { return epoch_losses_; }

  // Feature layout shared by training and inference.
  static int feature_dim(Stage stage, int t_embed_dim, int index_embed_dim);
  static std::vector<double> features(Stage stage, const Mat& x_t, int element, int t,
                                      const ConditioningBundle& cond, int t_embed_dim,
                                      int index_embed_dim);

 private:
  friend ToyDenoiser train_toy_denoiser(Stage stage, const std::vector<StageSample>& samples,
                                        const DiffusionSchedule& s,
                                        const ToyDenoiserConfig& cfg);
  Params params_;
  std::vector<double> epoch_losses_;
};

ToyDenoiser train_toy_denoiser(Stage stage, const std::vector<StageSample>& samples,
                               const DiffusionSchedule& s, const ToyDenoiserConfig& cfg = {});

}  // namespace brepforge
