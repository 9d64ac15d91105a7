#pragma once

#include <cstdint>
#include <random>
#include <unordered_set>
#include <vector>

#include "brepforge/assembly.hpp"
#include "brepforge/geometry.hpp"

namespace brepforge {

struct PointSet {
  std::vector<Vec3> pts;
};

// Area-weighted surface sampling over the tessellated model.
PointSet sample_points(const BRepModel& m, int n, std::mt19937_64& rng, int grid_res = 8);

// Symmetric squared-nearest-neighbor Chamfer distance:
// mean_x min_y |x-y|^2 + mean_y min_x |x-y|^2.
double chamfer(const PointSet& x, const PointSet& y);

struct CovMmd {
  double cov_pct = 0.0;  // fraction of ref matched as nearest neighbor of some gen
  double mmd = 0.0;      // mean over ref of min CD to gen
};

CovMmd cov_mmd(const std::vector<PointSet>& gen, const std::vector<PointSet>& ref, int jobs = 1);

// Jensen-Shannon divergence in bits between pooled voxel occupancy
// histograms over [-1,1]^3.
double jsd(const std::vector<PointSet>& gen, const std::vector<PointSet>& ref, int grid_res = 28);

struct CadMetricsResult {
  double novel_pct = 0.0;
  double unique_pct = 0.0;
  double valid_pct = 0.0;
};

// Valid: all-true validity report plus a watertight sew check. Novel/Unique:
// topology hash combined with vertex coordinates quantized to a 1/64 grid.
CadMetricsResult cad_metrics(const std::vector<BRepModel>& gen,
                             const std::unordered_set<uint64_t>& train_hashes,
                             double sew_tol = 1e-3);

uint64_t combined_model_hash(const BRepModel& m);

}  // namespace brepforge
