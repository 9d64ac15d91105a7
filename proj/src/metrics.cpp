#include "brepforge/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>
#include <unordered_map>

#include "brepforge/error.hpp"
#include "brepforge/validate.hpp"

namespace brepforge {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t mix(uint64_t h, uint64_t v) { return splitmix64(h ^ splitmix64(v)); }

double min_sq_dist(const Vec3& p, const std::vector<Vec3>& pts) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : pts) {
    const Vec3 d = p - q;
    best = std::min(best, dot(d, d));
  }
  return best;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& body) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> workers;
  std::atomic<int> next{0};
  for (int w = 0; w < jobs; ++w)
    workers.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  for (auto& t : workers) t.join();
}

}  // namespace

PointSet sample_points(const BRepModel& m, int n, std::mt19937_64& rng, int grid_res) {
  if (n < 1) raise(ErrorCode::EmptySet, "need at least one sample point");
  const TriMesh mesh = tessellate(m, grid_res, grid_res);

  std::vector<double> areas;
  areas.reserve(mesh.triangles.size());
  double total = 0.0;
  for (const auto& t : mesh.triangles) {
    const Vec3 a = mesh.vertices[t[0]];
    const Vec3 b = mesh.vertices[t[1]];
    const Vec3 c = mesh.vertices[t[2]];
    const double area = 0.5 * norm(cross(b - a, c - a));
    areas.push_back(area);
    total += area;
  }
  if (!(total > 0.0)) raise(ErrorCode::DegenerateSurface, "model surface has zero area");

  std::discrete_distribution<int> pick(areas.begin(), areas.end());
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  PointSet out;
  out.pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto& t = mesh.triangles[pick(rng)];
    const Vec3 a = mesh.vertices[t[0]];
    const Vec3 b = mesh.vertices[t[1]];
    const Vec3 c = mesh.vertices[t[2]];
    double r1 = std::sqrt(uni(rng));
    double r2 = uni(rng);
    out.pts.push_back(a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + c * (r1 * r2));
  }
  return out;
}

double chamfer(const PointSet& x, const PointSet& y) {
  if (x.pts.empty() || y.pts.empty()) raise(ErrorCode::EmptySet, "chamfer needs non-empty sets");
  double sum_x = 0.0;
  for (const auto& p : x.pts) sum_x += min_sq_dist(p, y.pts);
  double sum_y = 0.0;
  for (const auto& q : y.pts) sum_y += min_sq_dist(q, x.pts);
  return sum_x / static_cast<double>(x.pts.size()) + sum_y / static_cast<double>(y.pts.size());
}

CovMmd cov_mmd(const std::vector<PointSet>& gen, const std::vector<PointSet>& ref, int jobs) {
  if (gen.empty() || ref.empty()) raise(ErrorCode::EmptySet, "cov/mmd need non-empty lists");
  const int ng = static_cast<int>(gen.size());
  const int nr = static_cast<int>(ref.size());
  std::vector<double> cd(static_cast<size_t>(ng) * nr);
  parallel_for(ng, jobs, [&](int g) {
    for (int r = 0; r < nr; ++r) cd[static_cast<size_t>(g) * nr + r] = chamfer(gen[g], ref[r]);
  });

  std::unordered_set<int> covered;
  for (int g = 0; g < ng; ++g) {
    int best = 0;
    for (int r = 1; r < nr; ++r)
      if (cd[static_cast<size_t>(g) * nr + r] < cd[static_cast<size_t>(g) * nr + best]) best = r;
    covered.insert(best);
  }

  double mmd = 0.0;
  for (int r = 0; r < nr; ++r) {
    double best = cd[r];
    for (int g = 1; g < ng; ++g)
      best = std::min(best, cd[static_cast<size_t>(g) * nr + r]);
    mmd += best;
  }

  CovMmd out;
  out.cov_pct = 100.0 * static_cast<double>(covered.size()) / static_cast<double>(nr);
  out.mmd = mmd / static_cast<double>(nr);
  return out;
}

namespace {

std::vector<double> pooled_histogram(const std::vector<PointSet>& sets, int grid_res) {
  std::vector<double> h(static_cast<size_t>(grid_res) * grid_res * grid_res, 0.0);
  double total = 0.0;
  for (const auto& set : sets) {
    for (const auto& p : set.pts) {
      auto cell = [&](double x) {
        const int c = static_cast<int>((x + 1.0) * 0.5 * grid_res);
        return std::clamp(c, 0, grid_res - 1);
      };
      h[(static_cast<size_t>(cell(p.x)) * grid_res + cell(p.y)) * grid_res + cell(p.z)] += 1.0;
      total += 1.0;
    }
  }
  if (total > 0.0)
    for (double& v : h) v /= total;
  return h;
}

}  // namespace

double jsd(const std::vector<PointSet>& gen, const std::vector<PointSet>& ref, int grid_res) {
  if (gen.empty() || ref.empty()) raise(ErrorCode::EmptySet, "jsd needs non-empty lists");
  if (grid_res < 2) raise(ErrorCode::BadRange, "jsd grid resolution must be >= 2");
  const auto p = pooled_histogram(gen, grid_res);
  const auto q = pooled_histogram(ref, grid_res);
  double result = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) result += 0.5 * p[i] * std::log2(p[i] / m);
    if (q[i] > 0.0) result += 0.5 * q[i] * std::log2(q[i] / m);
  }
  return result;
}

uint64_t combined_model_hash(const BRepModel& m) {
  uint64_t h = topology_hash(m.topology).digest;
  for (const auto& v : m.geometry.verts) {
    h = mix(h, static_cast<uint64_t>(std::llround(v.x * 64.0)));
    h = mix(h, static_cast<uint64_t>(std::llround(v.y * 64.0)));
    h = mix(h, static_cast<uint64_t>(std::llround(v.z * 64.0)));
  }
  return h;
}

CadMetricsResult cad_metrics(const std::vector<BRepModel>& gen,
                             const std::unordered_set<uint64_t>& train_hashes, double sew_tol) {
  if (gen.empty()) raise(ErrorCode::EmptySet, "no generated models to score");
  const size_t n = gen.size();
  std::vector<bool> ok(n, false);
  std::vector<uint64_t> hashes(n, 0);
  std::unordered_map<uint64_t, int> counts;
  size_t valid_count = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!validate(gen[i].topology).valid()) continue;
    if (!check_watertight(gen[i], sew_tol).watertight) continue;
    ok[i] = true;
    ++valid_count;
    hashes[i] = combined_model_hash(gen[i]);
    counts[hashes[i]]++;
  }
  size_t unique_count = 0;
  size_t novel_count = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!ok[i]) continue;
    if (counts[hashes[i]] == 1) ++unique_count;
    if (!train_hashes.contains(hashes[i])) ++novel_count;
  }
  CadMetricsResult r;
  r.valid_pct = 100.0 * static_cast<double>(valid_count) / static_cast<double>(n);
  r.unique_pct = 100.0 * static_cast<double>(unique_count) / static_cast<double>(n);
  r.novel_pct = 100.0 * static_cast<double>(novel_count) / static_cast<double>(n);
  return r;
}

}  // namespace brepforge
