#include "brepforge/bspline.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "brepforge/error.hpp"

namespace brepforge {

namespace {

void check_param(double t, const char* name) {
  if (!(t >= 0.0 && t <= 1.0))
    raise(ErrorCode::ParamOutOfRange, std::string(name) + " = " + std::to_string(t) +
                                          " outside [0,1]");
}

std::array<double, 4> bernstein3(double t) {
  const double s = 1.0 - t;
  return {s * s * s, 3.0 * t * s * s, 3.0 * t * t * s, t * t * t};
}

std::array<double, 3> bernstein2(double t) {
  const double s = 1.0 - t;
  return {s * s, 2.0 * t * s, t * t};
}

Eigen::Vector3d to_eigen(const Vec3& v) { return {v.x, v.y, v.z}; }
Vec3 from_eigen(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

Vec3 eval_curve(const CubicCurve& c, double t) {
  check_param(t, "t");
  const auto b = bernstein3(t);
  Vec3 p{};
  for (int i = 0; i < 4; ++i) p += c.ctrl[i] * b[i];
  return p;
}

Vec3 eval_curve_derivative(const CubicCurve& c, double t) {
  check_param(t, "t");
  const auto b = bernstein2(t);
  Vec3 d{};
  for (int i = 0; i < 3; ++i) d += (c.ctrl[i + 1] - c.ctrl[i]) * (3.0 * b[i]);
  return d;
}

Vec3 eval_surface(const BicubicPatch& p, double u, double v) {
  check_param(u, "u");
  check_param(v, "v");
  const auto bu = bernstein3(u);
  const auto bv = bernstein3(v);
  Vec3 s{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) s += p.ctrl[i][j] * (bu[i] * bv[j]);
  return s;
}

void eval_surface_partials(const BicubicPatch& p, double u, double v, Vec3& su, Vec3& sv) {
  check_param(u, "u");
  check_param(v, "v");
  const auto bu = bernstein3(u);
  const auto bv = bernstein3(v);
  const auto du = bernstein2(u);
  const auto dv = bernstein2(v);
  su = {};
  sv = {};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) su += (p.ctrl[i + 1][j] - p.ctrl[i][j]) * (3.0 * du[i] * bv[j]);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) sv += (p.ctrl[i][j + 1] - p.ctrl[i][j]) * (3.0 * bu[i] * dv[j]);
}

std::vector<Vec3> sample_curve(const CubicCurve& c, int n) {
  if (n < 2) raise(ErrorCode::TooFewSamples, "need at least 2 curve samples");
  std::vector<Vec3> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = eval_curve(c, static_cast<double>(i) / (n - 1));
  return pts;
}

std::vector<std::vector<Vec3>> sample_surface(const BicubicPatch& p, int n_u, int n_v) {
  if (n_u < 2 || n_v < 2) raise(ErrorCode::TooFewSamples, "need at least a 2x2 sample grid");
  std::vector<std::vector<Vec3>> grid(n_u, std::vector<Vec3>(n_v));
  for (int i = 0; i < n_u; ++i)
    for (int j = 0; j < n_v; ++j)
      grid[i][j] = eval_surface(p, static_cast<double>(i) / (n_u - 1),
                                static_cast<double>(j) / (n_v - 1));
  return grid;
}

Box3 ctrl_bbox(const BicubicPatch& p) {
  Box3 box;
  for (const auto& row : p.ctrl)
    for (const auto& c : row) box.expand(c);
  return box;
}

double distance_to_primitive(const Primitive& prim, const Vec3& p) {
  if (const auto* pl = std::get_if<Plane>(&prim)) {
    return std::abs(dot(p - pl->point, pl->normal));
  }
  if (const auto* sp = std::get_if<Sphere>(&prim)) {
    return std::abs(norm(p - sp->center) - sp->radius);
  }
  const auto& cy = std::get<Cylinder>(prim);
  const Vec3 d = p - cy.axis_point;
  const Vec3 radial = d - cy.axis_dir * dot(d, cy.axis_dir);
  return std::abs(norm(radial) - cy.radius);
}

namespace {

struct Scatter {
  Vec3 centroid;
  Eigen::Matrix3d cov;          // centered scatter
  Eigen::Vector3d eigvals;      // ascending
  Eigen::Matrix3d eigvecs;
};

Scatter compute_scatter(const std::vector<Vec3>& points) {
  Scatter s;
  Vec3 c{};
  for (const auto& p : points) c += p;
  c = c / static_cast<double>(points.size());
  s.centroid = c;
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d d = to_eigen(p - c);
    m += d * d.transpose();
  }
  s.cov = m;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(m);
  s.eigvals = solver.eigenvalues();
  s.eigvecs = solver.eigenvectors();
  return s;
}

double max_residual(const std::vector<Vec3>& points, const Primitive& prim) {
  double r = 0.0;
  for (const auto& p : points) r = std::max(r, distance_to_primitive(prim, p));
  return r;
}

std::optional<PrimitiveFit> fit_plane(const std::vector<Vec3>& points, const Scatter& s) {
  const Vec3 normal = from_eigen(s.eigvecs.col(0));
  Plane plane{s.centroid, normalized(normal)};
  return PrimitiveFit{plane, max_residual(points, plane)};
}

std::optional<PrimitiveFit> fit_sphere(const std::vector<Vec3>& points) {
  const size_t n = points.size();
  Eigen::MatrixXd a(n, 4);
  Eigen::VectorXd b(n);
  for (size_t i = 0; i < n; ++i) {
    const auto& p = points[i];
    a.row(i) << 2.0 * p.x, 2.0 * p.y, 2.0 * p.z, 1.0;
    b(i) = dot(p, p);
  }
  Eigen::Matrix4d ata = a.transpose() * a;
  Eigen::FullPivLU<Eigen::Matrix4d> lu(ata);
  if (!lu.isInvertible()) return std::nullopt;
  Eigen::Vector4d w = lu.solve(a.transpose() * b);
  const Vec3 center{w(0), w(1), w(2)};
  const double r2 = w(3) + dot(center, center);
  if (!(r2 > 0.0) || !std::isfinite(r2)) return std::nullopt;
  Sphere sphere{center, std::sqrt(r2)};
  return PrimitiveFit{sphere, max_residual(points, sphere)};
}

// Circle fit of points projected onto the plane orthogonal to `dir`.
// Returns max radial residual, or nullopt when the projected system is
// singular.
std::optional<Cylinder> fit_cylinder_for_axis(const std::vector<Vec3>& points, const Vec3& dir,
                                              const Vec3& origin) {
  Vec3 d = normalized(dir);
  if (norm(d) == 0.0) return std::nullopt;
  Vec3 u = std::abs(d.z) < 0.9 ? normalized(cross(d, Vec3{0, 0, 1}))
                               : normalized(cross(d, Vec3{1, 0, 0}));
  Vec3 v = cross(d, u);

  const size_t n = points.size();
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (size_t i = 0; i < n; ++i) {
    const Vec3 rel = points[i] - origin;
    const double pu = dot(rel, u);
    const double pv = dot(rel, v);
    a.row(i) << 2.0 * pu, 2.0 * pv, 1.0;
    b(i) = pu * pu + pv * pv;
  }
  Eigen::Matrix3d ata = a.transpose() * a;
  Eigen::FullPivLU<Eigen::Matrix3d> lu(ata);
  if (!lu.isInvertible()) return std::nullopt;
  Eigen::Vector3d w = lu.solve(a.transpose() * b);
  const double r2 = w(2) + w(0) * w(0) + w(1) * w(1);
  if (!(r2 > 0.0) || !std::isfinite(r2)) return std::nullopt;
  Cylinder cyl;
  cyl.axis_point = origin + u * w(0) + v * w(1);
  cyl.axis_dir = d;
  cyl.radius = std::sqrt(r2);
  return cyl;
}

Vec3 dir_from_angles(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

std::optional<PrimitiveFit> fit_cylinder(const std::vector<Vec3>& points, const Scatter& s) {
  // Seed directions: scatter eigenvectors plus a Fibonacci hemisphere, 32 total.
  std::vector<Vec3> seeds;
  for (int i = 0; i < 3; ++i) seeds.push_back(from_eigen(s.eigvecs.col(i)));
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; static_cast<int>(seeds.size()) < 32; ++i) {
    const double z = (i + 0.5) / 29.0;  // upper hemisphere only; sign is irrelevant
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double ang = golden * i;
    seeds.push_back({r * std::cos(ang), r * std::sin(ang), z});
  }

  std::optional<Cylinder> best;
  double best_res = std::numeric_limits<double>::infinity();
  for (const auto& seed : seeds) {
    auto cyl = fit_cylinder_for_axis(points, seed, s.centroid);
    if (!cyl) continue;
    const double res = max_residual(points, *cyl);
    if (res < best_res) {
      best_res = res;
      best = cyl;
    }
  }
  if (!best) return std::nullopt;

  // Gauss-Newton refinement over the axis angles; the circle fit is redone
  // per evaluation (variable projection), Jacobian by central differences.
  double theta = std::acos(std::clamp(best->axis_dir.z, -1.0, 1.0));
  double phi = std::atan2(best->axis_dir.y, best->axis_dir.x);
  auto eval = [&](double th, double ph) -> double {
    auto cyl = fit_cylinder_for_axis(points, dir_from_angles(th, ph), s.centroid);
    if (!cyl) return std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const auto& p : points) {
      const double d = distance_to_primitive(*cyl, p);
      sum += d * d;
    }
    return sum;
  };
  const double h = 1e-4;
  double step = 0.1;
  double cur = eval(theta, phi);
  for (int iter = 0; iter < 24; ++iter) {
    const double gt = (eval(theta + h, phi) - eval(theta - h, phi)) / (2.0 * h);
    const double gp = (eval(theta, phi + h) - eval(theta, phi - h)) / (2.0 * h);
    const double gn = std::sqrt(gt * gt + gp * gp);
    if (!(gn > 1e-14)) break;
    const double nt = theta - step * gt / gn;
    const double np = phi - step * gp / gn;
    const double next = eval(nt, np);
    if (next < cur) {
      theta = nt;
      phi = np;
      cur = next;
    } else {
      step *= 0.5;
      if (step < 1e-7) break;
    }
  }
  auto refined = fit_cylinder_for_axis(points, dir_from_angles(theta, phi), s.centroid);
  if (refined) {
    const double res = max_residual(points, *refined);
    if (res < best_res) {
      best_res = res;
      best = refined;
    }
  }
  return PrimitiveFit{*best, best_res};
}

}  // namespace

std::optional<PrimitiveFit> fit_primitive(const std::vector<Vec3>& points, double threshold) {
  if (points.size() < 4)
    raise(ErrorCode::TooFewPoints,
          "primitive fitting needs at least 4 points, got " + std::to_string(points.size()));

  const Scatter s = compute_scatter(points);
  const double scale = std::max(s.eigvals(2), 1e-300);
  if (s.eigvals(1) <= 1e-12 * scale || s.eigvals(2) <= 0.0)
    raise(ErrorCode::DegenerateConfiguration,
          "point set is (near) collinear; no surface is identifiable");

  std::optional<PrimitiveFit> best = fit_plane(points, s);
  if (points.size() >= 5) {
    if (auto sp = fit_sphere(points); sp && sp->residual < best->residual) best = sp;
  }
  if (points.size() >= 6) {
    if (auto cy = fit_cylinder(points, s); cy && cy->residual < best->residual) best = cy;
  }
  if (best && best->residual <= threshold) return best;
  return std::nullopt;
}

double distance_to_patch(const BicubicPatch& patch, const Vec3& p) {
  // Multi-start damped Gauss-Newton on the parameter square.
  double best = std::numeric_limits<double>::infinity();
  const int seeds = 8;
  for (int si = 0; si < seeds; ++si) {
    for (int sj = 0; sj < seeds; ++sj) {
      double u = si / (seeds - 1.0);
      double v = sj / (seeds - 1.0);
      double dist = norm(eval_surface(patch, u, v) - p);
      for (int iter = 0; iter < 40; ++iter) {
        Vec3 su, sv;
        eval_surface_partials(patch, u, v, su, sv);
        const Vec3 r = eval_surface(patch, u, v) - p;
        const double a = dot(su, su), b = dot(su, sv), c = dot(sv, sv);
        const double g0 = dot(r, su), g1 = dot(r, sv);
        const double det = a * c - b * b;
        double du, dv;
        if (std::abs(det) > 1e-18) {
          du = (-c * g0 + b * g1) / det;
          dv = (b * g0 - a * g1) / det;
        } else {
          const double gn = std::max(1e-18, a + c);
          du = -g0 / gn;
          dv = -g1 / gn;
        }
        // Backtrack until the step actually reduces the distance.
        double step = 1.0;
        bool moved = false;
        for (int bt = 0; bt < 20; ++bt, step *= 0.5) {
          const double nu = std::clamp(u + step * du, 0.0, 1.0);
          const double nv = std::clamp(v + step * dv, 0.0, 1.0);
          const double nd = norm(eval_surface(patch, nu, nv) - p);
          if (nd < dist) {
            u = nu;
            v = nv;
            dist = nd;
            moved = true;
            break;
          }
        }
        if (!moved) break;
      }
      best = std::min(best, dist);
    }
  }
  return best;
}

}  // namespace brepforge
