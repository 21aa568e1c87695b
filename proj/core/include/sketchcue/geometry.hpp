#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sketchcue/raster.hpp"

namespace sketchcue {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend Point2 operator*(Point2 p, double s) { return {s * p.x, s * p.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline Point2 direction(double theta) { return {std::cos(theta), std::sin(theta)}; }

inline bool finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// Wraps an angle into [-pi, pi).
double normalize_angle(double theta);

// Pose of a block on the desk. `theta` is the heading of the block's
// thickness axis (the direction it topples); the width axis is theta + pi/2.
struct Pose2 {
  Point2 center;
  double theta = 0.0;
};

struct OrientedRect {
  Pose2 pose;
  double width = 0.0;      // extent along the width axis
  double thickness = 0.0;  // extent along the heading

  std::array<Point2, 4> corners() const;
  bool contains(Point2 p) const;
};

// True iff the footprints overlap with positive area (separating axis test).
bool rects_intersect(const OrientedRect& a, const OrientedRect& b);

// Row-major 3x3 projective map normalized so that m[8] == 1.
class Homography {
 public:
  Homography() = default;  // identity
  explicit Homography(const std::array<double, 9>& m);

  static Homography identity() { return {}; }
  static Homography translation(double tx, double ty);
  static Homography scale(double sx, double sy);

  const std::array<double, 9>& m() const noexcept { return m_; }
  double operator()(int row, int col) const { return m_[static_cast<std::size_t>(row * 3 + col)]; }

  double determinant() const;
  Homography inverse() const;

  // Throws PointAtInfinity when the projective denominator vanishes.
  Point2 apply(Point2 p) const;

  // (a * b)(p) == a(b(p))
  friend Homography operator*(const Homography& a, const Homography& b);

 private:
  std::array<double, 9> m_{1, 0, 0, 0, 1, 0, 0, 0, 1};
};

inline Point2 apply_homography(const Homography& h, Point2 p) { return h.apply(p); }

struct Correspondence {
  Point2 src;
  Point2 dst;
};

struct HomographyFit {
  Homography h;
  double rms = 0.0;  // reprojection RMS over the input pairs, in dst units
};

// Normalized DLT fit. Throws TooFewPoints (< 4 pairs) or
// DegenerateConfiguration (duplicates, collinear sets, rank deficiency).
HomographyFit homography_from_correspondences(std::span<const Correspondence> pairs);

double reprojection_rms(const Homography& h, std::span<const Correspondence> pairs);

// Inverse-mapping nearest-neighbour warp; `h` maps source to destination
// pixels. Destination pixels with no source sample are T{}.
template <class T>
Image<T> warp_image(const Image<T>& src, const Homography& h, int out_w, int out_h);

void to_json(nlohmann::json& j, const Homography& h);
void from_json(const nlohmann::json& j, Homography& h);
void to_json(nlohmann::json& j, const Point2& p);
void from_json(const nlohmann::json& j, Point2& p);

}  // namespace sketchcue

#include "sketchcue/detail/warp_impl.hpp"
