#include "brepforge/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace brepforge {

std::array<Vec3, 4> face_anchor_points(const std::vector<Vec3>& loop) {
  const size_t n = loop.size();
  if (n == 3) return {loop[0], loop[1], loop[2], loop[2]};
  if (n == 4) return {loop[0], loop[1], loop[2], loop[3]};
  if (n < 3) {
    // Degenerate input; collapse onto whatever is there.
    Vec3 a = n > 0 ? loop[0] : Vec3{};
    Vec3 b = n > 1 ? loop[1] : a;
    return {a, b, b, a};
  }

  // Best-fit plane, then the in-plane bounding rectangle of the loop.
  Vec3 c{};
  for (const auto& p : loop) c += p;
  c = c / static_cast<double>(n);
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (const auto& p : loop) {
    const Eigen::Vector3d d(p.x - c.x, p.y - c.y, p.z - c.z);
    m += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(m);
  Eigen::Vector3d nv = solver.eigenvectors().col(0);
  // Deterministic sign: largest-magnitude component positive.
  int arg = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(nv(i)) > std::abs(nv(arg))) arg = i;
  if (nv(arg) < 0.0) nv = -nv;
  const Vec3 normal{nv(0), nv(1), nv(2)};

  Vec3 u = std::abs(normal.z) < 0.9 ? normalized(cross(normal, Vec3{0, 0, 1}))
                                    : normalized(cross(normal, Vec3{1, 0, 0}));
  Vec3 v = cross(normal, u);

  double amin = std::numeric_limits<double>::infinity(), amax = -amin;
  double bmin = amin, bmax = -amin;
  for (const auto& p : loop) {
    const Vec3 rel = p - c;
    const double a = dot(rel, u);
    const double b = dot(rel, v);
    amin = std::min(amin, a);
    amax = std::max(amax, a);
    bmin = std::min(bmin, b);
    bmax = std::max(bmax, b);
  }
  return {c + u * amin + v * bmin, c + u * amax + v * bmin, c + u * amax + v * bmax,
          c + u * amin + v * bmax};
}

std::array<Vec3, 16> bilinear_grid(const std::array<Vec3, 4>& a) {
  std::array<Vec3, 16> grid;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double s = i / 3.0;
      const double t = j / 3.0;
      grid[i * 4 + j] = a[0] * ((1 - s) * (1 - t)) + a[1] * (s * (1 - t)) + a[2] * (s * t) +
                        a[3] * ((1 - s) * t);
    }
  }
  return grid;
}

}  // namespace brepforge
