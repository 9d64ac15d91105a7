#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "brepforge/diffusion.hpp"
#include "brepforge/metrics.hpp"
#include "brepforge/topology.hpp"
#include "brepforge/vec3.hpp"

// Independent oracles for the test suites. Everything here is deliberately
// brute force and kept apart from the library implementations it checks.
namespace brepforge::testing {

inline Vec3 de_casteljau(std::vector<Vec3> pts, double t) {
  while (pts.size() > 1) {
    for (size_t i = 0; i + 1 < pts.size(); ++i) pts[i] = lerp(pts[i], pts[i + 1], t);
    pts.pop_back();
  }
  return pts[0];
}

inline Vec3 de_casteljau_curve(const std::array<Vec3, 4>& ctrl, double t) {
  return de_casteljau({ctrl.begin(), ctrl.end()}, t);
}

inline Vec3 de_casteljau_surface(const std::array<std::array<Vec3, 4>, 4>& ctrl, double u,
                                 double v) {
  std::vector<Vec3> rows;
  for (const auto& row : ctrl) rows.push_back(de_casteljau({row.begin(), row.end()}, v));
  return de_casteljau(rows, u);
}

// alpha_bar of the linear schedule via extended-precision accumulation.
inline std::vector<long double> alpha_bar_oracle(int steps, long double beta_start,
                                                 long double beta_end) {
  std::vector<long double> out(steps);
  long double running = 1.0L;
  for (int t = 1; t <= steps; ++t) {
    const long double b =
        steps == 1 ? beta_start : beta_start + (t - 1) * (beta_end - beta_start) / (steps - 1);
    running *= (1.0L - b);
    out[t - 1] = running;
  }
  return out;
}

// Exact noise predictor for data concentrated at a single point c.
class PointMassDenoiser : public Denoiser {
 public:
  PointMassDenoiser(Mat target, std::vector<double> alpha_bar)
      : target_(std::move(target)), alpha_bar_(std::move(alpha_bar)) {}

  Mat predict_noise(const Mat& x_t, int t, const ConditioningBundle&) const override {
    const double ab = alpha_bar_[t - 1];
    const double c0 = std::sqrt(ab);
    const double c1 = std::sqrt(1.0 - ab);
    Mat eps(x_t.rows, x_t.cols);
    for (size_t i = 0; i < x_t.v.size(); ++i) eps.v[i] = (x_t.v[i] - c0 * target_.v[i]) / c1;
    return eps;
  }

 private:
  Mat target_;
  std::vector<double> alpha_bar_;
};

// Optimal noise predictor for x0 ~ N(mu, sigma^2 I).
class GaussianDenoiser : public Denoiser {
 public:
  GaussianDenoiser(double mu, double sigma, std::vector<double> alpha_bar)
      : mu_(mu), sigma_(sigma), alpha_bar_(std::move(alpha_bar)) {}

  Mat predict_noise(const Mat& x_t, int t, const ConditioningBundle&) const override {
    const double ab = alpha_bar_[t - 1];
    const double var = ab * sigma_ * sigma_ + 1.0 - ab;
    Mat eps(x_t.rows, x_t.cols);
    for (size_t i = 0; i < x_t.v.size(); ++i)
      eps.v[i] = std::sqrt(1.0 - ab) * (x_t.v[i] - std::sqrt(ab) * mu_) / var;
    return eps;
  }

 private:
  double mu_;
  double sigma_;
  std::vector<double> alpha_bar_;
};

class ZeroDenoiser : public Denoiser {
 public:
  Mat predict_noise(const Mat& x_t, int, const ConditioningBundle&) const override {
    return Mat(x_t.rows, x_t.cols);
  }
};

// Direct-summation Chamfer distance (separate code path from the library).
inline double chamfer_oracle(const std::vector<Vec3>& x, const std::vector<Vec3>& y) {
  auto one_way = [](const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    double sum = 0.0;
    for (const auto& p : a) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : b) {
        const double d2 = dot(p - q, p - q);
        if (d2 < best) best = d2;
      }
      sum += best;
    }
    return sum / static_cast<double>(a.size());
  };
  return one_way(x, y) + one_way(y, x);
}

// Backtracking incidence-graph isomorphism between two topologies: searches
// a face bijection, then matches edges respecting face pairs and a growing
// vertex bijection.
inline bool isomorphic_oracle(const Topology& a, const Topology& b) {
  if (a.num_faces != b.num_faces || a.num_edges != b.num_edges || a.num_verts != b.num_verts)
    return false;

  auto degrees = [](const Topology& t) {
    std::vector<int> d(t.num_faces, 0);
    for (const auto& [f0, f1] : t.ef) {
      d[f0]++;
      d[f1]++;
    }
    return d;
  };
  const auto deg_a = degrees(a);
  const auto deg_b = degrees(b);
  {
    auto sa = deg_a, sb = deg_b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb) return false;
  }

  std::vector<int> face_map(a.num_faces, -1);
  std::vector<bool> face_used(b.num_faces, false);

  // Edge matching under a fixed face bijection.
  std::function<bool(int, std::vector<int>&, std::vector<bool>&, std::vector<int>&,
                     std::vector<int>&)>
      match_edges = [&](int e, std::vector<int>& edge_map, std::vector<bool>& edge_used,
                        std::vector<int>& vmap, std::vector<int>& vmap_rev) -> bool {
    if (e == a.num_edges) return true;
    const int fa0 = face_map[a.ef[e][0]];
    const int fa1 = face_map[a.ef[e][1]];
    for (int be = 0; be < b.num_edges; ++be) {
      if (edge_used[be]) continue;
      const int bf0 = b.ef[be][0];
      const int bf1 = b.ef[be][1];
      if (!((bf0 == fa0 && bf1 == fa1) || (bf0 == fa1 && bf1 == fa0))) continue;
      for (int orient = 0; orient < 2; ++orient) {
        const int av0 = a.ev[e][0];
        const int av1 = a.ev[e][1];
        const int bv0 = b.ev[be][orient];
        const int bv1 = b.ev[be][1 - orient];
        if ((vmap[av0] != -1 && vmap[av0] != bv0) || (vmap[av1] != -1 && vmap[av1] != bv1))
          continue;
        if ((vmap[av0] == -1 && vmap_rev[bv0] != -1) ||
            (vmap[av1] == -1 && vmap_rev[bv1] != -1))
          continue;
        if (av0 == av1 || bv0 == bv1) continue;
        const bool set0 = vmap[av0] == -1;
        const bool set1 = vmap[av1] == -1;
        if (set0 && set1 && bv0 == bv1) continue;
        if (set0) {
          vmap[av0] = bv0;
          vmap_rev[bv0] = av0;
        }
        if (set1) {
          vmap[av1] = bv1;
          vmap_rev[bv1] = av1;
        }
        edge_used[be] = true;
        edge_map[e] = be;
        if (match_edges(e + 1, edge_map, edge_used, vmap, vmap_rev)) return true;
        edge_used[be] = false;
        edge_map[e] = -1;
        if (set0) {
          vmap_rev[bv0] = -1;
          vmap[av0] = -1;
        }
        if (set1) {
          vmap_rev[bv1] = -1;
          vmap[av1] = -1;
        }
      }
    }
    return false;
  };

  std::function<bool(int)> match_faces = [&](int f) -> bool {
    if (f == a.num_faces) {
      std::vector<int> edge_map(a.num_edges, -1);
      std::vector<bool> edge_used(b.num_edges, false);
      std::vector<int> vmap(a.num_verts, -1);
      std::vector<int> vmap_rev(b.num_verts, -1);
      return match_edges(0, edge_map, edge_used, vmap, vmap_rev);
    }
    for (int bf = 0; bf < b.num_faces; ++bf) {
      if (face_used[bf] || deg_b[bf] != deg_a[f]) continue;
      face_used[bf] = true;
      face_map[f] = bf;
      if (match_faces(f + 1)) return true;
      face_used[bf] = false;
      face_map[f] = -1;
    }
    return false;
  };

  return match_faces(0);
}

}  // namespace brepforge::testing
