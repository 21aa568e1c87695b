#include "sketchcue/geometry.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace sketchcue {

double normalize_angle(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta + std::numbers::pi, two_pi);
  if (t < 0) t += two_pi;
  t -= std::numbers::pi;
  // fmod can land exactly on +pi after the shift back.
  if (t >= std::numbers::pi) t -= two_pi;
  return t;
}

std::array<Point2, 4> OrientedRect::corners() const {
  const Point2 along = direction(pose.theta) * (thickness / 2);
  const Point2 across = direction(pose.theta + std::numbers::pi / 2) * (width / 2);
  const Point2 c = pose.center;
  return {c - along - across, c + along - across, c + along + across, c - along + across};
}

bool OrientedRect::contains(Point2 p) const {
  const Point2 d = p - pose.center;
  const Point2 along = direction(pose.theta);
  const Point2 across{-along.y, along.x};
  return std::abs(dot(d, along)) <= thickness / 2 && std::abs(dot(d, across)) <= width / 2;
}

namespace {

// Projection interval of a rectangle onto `axis`.
std::pair<double, double> project(const std::array<Point2, 4>& corners, Point2 axis) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Point2& c : corners) {
    const double s = dot(c, axis);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return {lo, hi};
}

}  // namespace

bool rects_intersect(const OrientedRect& a, const OrientedRect& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const std::array<Point2, 4> axes{direction(a.pose.theta), direction(a.pose.theta + std::numbers::pi / 2),
                                   direction(b.pose.theta), direction(b.pose.theta + std::numbers::pi / 2)};
  // Touching edges have zero overlap area and count as separated.
  constexpr double eps = 1e-9;
  for (const Point2& axis : axes) {
    const auto [alo, ahi] = project(ca, axis);
    const auto [blo, bhi] = project(cb, axis);
    if (ahi <= blo + eps || bhi <= alo + eps) return false;
  }
  return true;
}

Homography::Homography(const std::array<double, 9>& m) : m_(m) {
  if (!std::all_of(m.begin(), m.end(), [](double v) { return std::isfinite(v); }))
    throw Error(Errc::DegenerateConfiguration, "homography has non-finite entries");
  if (std::abs(m[8]) < 1e-12)
    throw Error(Errc::DegenerateConfiguration, "homography cannot be normalized (m[8] == 0)");
  for (double& v : m_) v /= m[8];
  m_[8] = 1.0;
  if (std::abs(determinant()) <= 1e-9)
    throw Error(Errc::DegenerateConfiguration, "homography is not invertible");
}

Homography Homography::translation(double tx, double ty) {
  return Homography({1, 0, tx, 0, 1, ty, 0, 0, 1});
}

Homography Homography::scale(double sx, double sy) {
  return Homography({sx, 0, 0, 0, sy, 0, 0, 0, 1});
}

double Homography::determinant() const {
  const auto& a = m_;
  return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
         a[2] * (a[3] * a[7] - a[4] * a[6]);
}

Homography Homography::inverse() const {
  const auto& a = m_;
  const std::array<double, 9> adj{
      a[4] * a[8] - a[5] * a[7], a[2] * a[7] - a[1] * a[8], a[1] * a[5] - a[2] * a[4],
      a[5] * a[6] - a[3] * a[8], a[0] * a[8] - a[2] * a[6], a[2] * a[3] - a[0] * a[5],
      a[3] * a[7] - a[4] * a[6], a[1] * a[6] - a[0] * a[7], a[0] * a[4] - a[1] * a[3]};
  return Homography(adj);
}

Point2 Homography::apply(Point2 p) const {
  const auto& a = m_;
  const double w = a[6] * p.x + a[7] * p.y + a[8];
  if (std::abs(w) < 1e-12) throw Error(Errc::PointAtInfinity, "point maps to infinity");
  return {(a[0] * p.x + a[1] * p.y + a[2]) / w, (a[3] * p.x + a[4] * p.y + a[5]) / w};
}

Homography operator*(const Homography& a, const Homography& b) {
  std::array<double, 9> r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
      r[static_cast<std::size_t>(i * 3 + j)] = s;
    }
  return Homography(r);
}

double reprojection_rms(const Homography& h, std::span<const Correspondence> pairs) {
  if (pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : pairs) {
    const Point2 d = h.apply(c.src) - c.dst;
    sum += dot(d, d);
  }
  return std::sqrt(sum / static_cast<double>(pairs.size()));
}

namespace {

// Similarity transform taking the points to zero mean and unit RMS radius.
Eigen::Matrix3d normalizing_transform(std::span<const Point2> pts) {
  Point2 mean{};
  for (const auto& p : pts) mean = mean + p;
  mean = mean * (1.0 / static_cast<double>(pts.size()));
  double ms = 0.0;
  for (const auto& p : pts) {
    const Point2 d = p - mean;
    ms += dot(d, d);
  }
  const double rms = std::sqrt(ms / static_cast<double>(pts.size()));
  if (rms < 1e-12) throw Error(Errc::DegenerateConfiguration, "all points coincide");
  const double s = 1.0 / rms;
  Eigen::Matrix3d t;
  t << s, 0, -s * mean.x, 0, s, -s * mean.y, 0, 0, 1;
  return t;
}

Point2 transform(const Eigen::Matrix3d& t, Point2 p) {
  return {t(0, 0) * p.x + t(0, 2), t(1, 1) * p.y + t(1, 2)};
}

void check_configuration(std::span<const Point2> pts, const char* which) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (distance(pts[i], pts[j]) < 1e-9)
        throw Error(Errc::DegenerateConfiguration, std::string("duplicate ") + which + " points");

  auto collinear = [&](std::size_t i, std::size_t j, std::size_t k) {
    return std::abs(cross(pts[j] - pts[i], pts[k] - pts[i])) < 1e-9;
  };
  if (n == 4) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k)
          if (collinear(i, j, k))
            throw Error(Errc::DegenerateConfiguration,
                        std::string("three collinear ") + which + " points among four");
    return;
  }
  // With more than four pins, grids (which contain collinear triples) are
  // fine as long as the set is not a single line.
  for (std::size_t k = 2; k < n; ++k)
    for (std::size_t j = 1; j < k; ++j)
      if (!collinear(0, j, k)) return;
  throw Error(Errc::DegenerateConfiguration, std::string("all ") + which + " points are collinear");
}

}  // namespace

HomographyFit homography_from_correspondences(std::span<const Correspondence> pairs) {
  const std::size_t n = pairs.size();
  if (n < 4) throw Error(Errc::TooFewPoints, "homography needs at least 4 correspondences");

  std::vector<Point2> src(n), dst(n);
  for (std::size_t i = 0; i < n; ++i) {
    src[i] = pairs[i].src;
    dst[i] = pairs[i].dst;
    if (!finite(src[i]) || !finite(dst[i]))
      throw Error(Errc::DegenerateConfiguration, "non-finite correspondence");
  }

  const Eigen::Matrix3d ts = normalizing_transform(src);
  const Eigen::Matrix3d td = normalizing_transform(dst);
  for (std::size_t i = 0; i < n; ++i) {
    src[i] = transform(ts, src[i]);
    dst[i] = transform(td, dst[i]);
  }
  check_configuration(src, "source");
  check_configuration(dst, "destination");

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * n), 9);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = src[i].x, y = src[i].y, u = dst[i].x, v = dst[i].y;
    const auto r = static_cast<Eigen::Index>(2 * i);
    a.row(r) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(r + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // A second (near-)null direction means the fit is not unique.
  if (sv.size() >= 8 && sv(7) <= 1e-10 * sv(0))
    throw Error(Errc::DegenerateConfiguration, "correspondences do not determine a unique homography");

  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  const Eigen::Matrix3d full = td.inverse() * hn * ts;

  std::array<double, 9> m{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[static_cast<std::size_t>(i * 3 + j)] = full(i, j);

  HomographyFit fit{Homography(m), 0.0};
  fit.rms = reprojection_rms(fit.h, pairs);
  return fit;
}

void to_json(nlohmann::json& j, const Homography& h) { j = h.m(); }

void from_json(const nlohmann::json& j, Homography& h) {
  if (!j.is_array() || j.size() != 9)
    throw Error(Errc::MalformedInput, "homography must be an array of 9 numbers");
  h = Homography(j.get<std::array<double, 9>>());
}

void to_json(nlohmann::json& j, const Point2& p) { j = nlohmann::json::array({p.x, p.y}); }

void from_json(const nlohmann::json& j, Point2& p) {
  if (!j.is_array() || j.size() != 2)
    throw Error(Errc::MalformedInput, "point must be [x, y]");
  p = {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace sketchcue
