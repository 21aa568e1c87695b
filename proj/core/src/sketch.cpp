#include "sketchcue/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <nlohmann/json.hpp>

#include "sketchcue/codec.hpp"

static_assert(sizeof(sketchcue::Rgb) == 3);

namespace sketchcue {

double Stroke::arc_length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) total += distance(points[i - 1], points[i]);
  return total;
}

Palette::Palette(std::vector<PaletteEntry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const PaletteEntry& a, const PaletteEntry& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].id == kBackgroundLabel)
      throw Error(Errc::MalformedInput, "palette id 255 is reserved for background");
    if (i > 0 && entries_[i].id == entries_[i - 1].id)
      throw Error(Errc::MalformedInput, "duplicate palette id " + std::to_string(entries_[i].id));
  }
}

Palette Palette::bento() {
  return Palette({
      {0, {40, 160, 40}, "broccoli"},
      {1, {250, 210, 0}, "fried egg"},
      {2, {250, 120, 0}, "crab stick"},
      {3, {250, 140, 190}, "sausage"},
      {4, {0, 0, 0}, std::nullopt},
  });
}

Palette Palette::domino() { return Palette({{0, {0, 0, 0}, std::nullopt}}); }

const PaletteEntry* Palette::find(std::uint8_t id) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                             [](const PaletteEntry& e, std::uint8_t v) { return e.id < v; });
  return it != entries_.end() && it->id == id ? &*it : nullptr;
}

void SketchDocument::validate() const {
  if (canvas_w <= 0 || canvas_h <= 0) throw Error(Errc::MalformedInput, "canvas dimensions must be positive");
  for (const auto& s : strokes) {
    if (s.points.size() < 2) throw Error(Errc::StrokeTooShort, "stroke has fewer than 2 points");
    if (!palette.find(s.color_id))
      throw Error(Errc::MalformedInput, "stroke color " + std::to_string(s.color_id) + " not in palette");
    for (const auto& p : s.points)
      if (!finite(p) || p.x < 0 || p.y < 0 || p.x > canvas_w || p.y > canvas_h)
        throw Error(Errc::MalformedInput, "stroke point outside the canvas");
  }
  if (raster && !raster->same_dims(canvas_w, canvas_h))
    throw Error(Errc::MalformedInput, "raster dimensions differ from the canvas");
  if (rgb && !rgb->same_dims(canvas_w, canvas_h))
    throw Error(Errc::MalformedInput, "rgb raster dimensions differ from the canvas");
}

Stroke resample_stroke(const Stroke& s, double interval_mm, double px_per_mm) {
  if (!(interval_mm > 0) || !(px_per_mm > 0))
    throw Error(Errc::MalformedInput, "resample interval and scale must be positive");
  if (s.points.size() < 2) throw Error(Errc::StrokeTooShort, "stroke has fewer than 2 points");

  const double interval = interval_mm * px_per_mm;
  std::vector<double> cum(s.points.size(), 0.0);
  for (std::size_t i = 1; i < s.points.size(); ++i)
    cum[i] = cum[i - 1] + distance(s.points[i - 1], s.points[i]);
  const double total = cum.back();
  const double eps = 1e-9 * std::max(1.0, total);
  if (total + eps < interval) throw Error(Errc::StrokeTooShort, "stroke is shorter than the resampling interval");

  const auto steps = static_cast<std::size_t>(std::floor(total / interval + 1e-9));
  Stroke out{{}, s.color_id, s.width};
  out.points.reserve(steps + 2);
  std::size_t seg = 1;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double target = std::min(static_cast<double>(k) * interval, total);
    while (seg + 1 < cum.size() && cum[seg] < target) ++seg;
    const double len = cum[seg] - cum[seg - 1];
    const double t = len > 0 ? std::clamp((target - cum[seg - 1]) / len, 0.0, 1.0) : 0.0;
    out.points.push_back(s.points[seg - 1] + t * (s.points[seg] - s.points[seg - 1]));
  }
  if (total - static_cast<double>(steps) * interval > eps)
    out.points.push_back(s.points.back());
  else
    out.points.back() = s.points.back();
  return out;
}

Stroke smooth_stroke(const Stroke& s, int window) {
  if (window < 1 || window % 2 == 0) throw Error(Errc::MalformedInput, "smoothing window must be a positive odd integer");
  const auto n = static_cast<std::ptrdiff_t>(s.points.size());
  const std::ptrdiff_t half = window / 2;
  Stroke out{{}, s.color_id, s.width};
  out.points.reserve(s.points.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t h = std::min({half, i, n - 1 - i});
    Point2 sum{};
    for (std::ptrdiff_t k = i - h; k <= i + h; ++k) sum = sum + s.points[static_cast<std::size_t>(k)];
    out.points.push_back(sum * (1.0 / static_cast<double>(2 * h + 1)));
  }
  return out;
}

Stroke prune_dense_vertices(const Stroke& s, double min_gap_mm, double px_per_mm) {
  if (!(min_gap_mm > 0) || !(px_per_mm > 0))
    throw Error(Errc::MalformedInput, "min_gap and scale must be positive");
  if (s.points.size() < 2) throw Error(Errc::ResultDegenerate, "stroke has fewer than 2 points");
  const double gap = min_gap_mm * px_per_mm;
  Stroke out{{s.points.front()}, s.color_id, s.width};
  for (std::size_t i = 1; i + 1 < s.points.size(); ++i)
    if (distance(s.points[i], out.points.back()) >= gap) out.points.push_back(s.points[i]);
  // The endpoint always survives; drop a kept vertex it coincides with.
  if (out.points.size() > 1 && distance(out.points.back(), s.points.back()) == 0.0) out.points.pop_back();
  if (distance(out.points.back(), s.points.back()) == 0.0)
    throw Error(Errc::ResultDegenerate, "fewer than 2 distinct vertices survive pruning");
  out.points.push_back(s.points.back());
  return out;
}

LabelImage quantize_canvas(const Image<Rgb>& rgb, const Palette& palette, double tolerance) {
  LabelImage out(rgb.width(), rgb.height(), kBackgroundLabel);
  const double tol2 = tolerance * tolerance;
  for (std::size_t i = 0; i < rgb.size(); ++i) {
    const Rgb c = rgb[i];
    double best = std::numeric_limits<double>::infinity();
    std::uint8_t label = kBackgroundLabel;
    for (const auto& e : palette.entries()) {  // ascending id: ties keep the lower id
      const double dr = c.r - e.rgb.r, dg = c.g - e.rgb.g, db = c.b - e.rgb.b;
      const double d2 = dr * dr + dg * dg + db * db;
      if (d2 < best) {
        best = d2;
        label = e.id;
      }
    }
    if (best <= tol2) out[i] = label;
  }
  return out;
}

namespace {

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  const double t = len2 > 0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  return distance(p, a + t * ab);
}

bool is_closed(const Stroke& s) {
  return s.points.size() >= 3 && distance(s.points.front(), s.points.back()) <= std::max(10.0, s.width);
}

// Even-odd fill sampled at pixel centers.
void fill_polygon(LabelImage& img, const std::vector<Point2>& poly, std::uint8_t label) {
  double ymin = poly[0].y, ymax = poly[0].y;
  for (const auto& p : poly) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const int y0 = std::max(0, static_cast<int>(std::floor(ymin)));
  const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(ymax)));
  std::vector<double> xs;
  for (int y = y0; y <= y1; ++y) {
    const double sy = y + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point2 a = poly[i], b = poly[(i + 1) % poly.size()];
      if ((a.y <= sy) != (b.y <= sy)) xs.push_back(a.x + (sy - a.y) / (b.y - a.y) * (b.x - a.x));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int xa = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
      const int xb = std::min(img.width() - 1, static_cast<int>(std::floor(xs[k + 1] - 0.5)));
      for (int x = xa; x <= xb; ++x) img.at(x, y) = label;
    }
  }
}

void draw_polyline(LabelImage& img, const Stroke& s) {
  const double r = s.width / 2;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const Point2 a = s.points[i];
    const Point2 b = i + 1 < s.points.size() ? s.points[i + 1] : a;
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - r)));
    const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + r)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - r)));
    const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + r)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (point_segment_distance({x + 0.5, y + 0.5}, a, b) <= r) img.at(x, y) = s.color_id;
  }
}

}  // namespace

LabelImage rasterize_strokes(const SketchDocument& doc) {
  LabelImage img(doc.canvas_w, doc.canvas_h, kBackgroundLabel);
  for (const auto& s : doc.strokes) {
    if (s.points.empty()) continue;
    if (is_closed(s)) fill_polygon(img, s.points, s.color_id);
    draw_polyline(img, s);
  }
  return img;
}

LabelImage document_labels(const SketchDocument& doc) {
  if (doc.raster) return *doc.raster;
  if (doc.rgb) return quantize_canvas(*doc.rgb, doc.palette);
  return rasterize_strokes(doc);
}

std::vector<ColorRegion> extract_color_regions(const LabelImage& labels, std::size_t min_area) {
  const auto comps = label_components(
      labels.width(), labels.height(), [&](std::size_t i) { return labels[i] != kBackgroundLabel; },
      [&](std::size_t a, std::size_t b) { return labels[a] == labels[b]; });

  std::vector<ColorRegion> regions(comps.areas.size());
  for (std::size_t i = 0; i < comps.labels.size(); ++i) {
    const auto l = comps.labels[i];
    if (l == 0 || comps.areas[static_cast<std::size_t>(l - 1)] < min_area) continue;
    auto& r = regions[static_cast<std::size_t>(l - 1)];
    r.color_id = labels[i];
    r.pixels.push_back({static_cast<int>(i % static_cast<std::size_t>(labels.width())),
                        static_cast<int>(i / static_cast<std::size_t>(labels.width()))});
  }
  std::erase_if(regions, [](const ColorRegion& r) { return r.pixels.empty(); });
  if (regions.empty()) throw Error(Errc::NoRegions, "no color region reaches the minimum area");

  for (auto& r : regions) r.area_px = r.pixels.size();
  std::stable_sort(regions.begin(), regions.end(), [](const ColorRegion& a, const ColorRegion& b) {
    return a.color_id != b.color_id ? a.color_id < b.color_id : a.area_px > b.area_px;
  });
  for (std::size_t i = 0; i < regions.size(); ++i) regions[i].component_id = static_cast<int>(i);
  return regions;
}

void to_json(nlohmann::json& j, const Palette& p) {
  j = nlohmann::json::array();
  for (const auto& e : p.entries()) {
    nlohmann::json entry{{"id", e.id}, {"rgb", {e.rgb.r, e.rgb.g, e.rgb.b}}};
    entry["ingredient"] = e.ingredient ? nlohmann::json(*e.ingredient) : nlohmann::json(nullptr);
    j.push_back(std::move(entry));
  }
}

void from_json(const nlohmann::json& j, Palette& p) {
  std::vector<PaletteEntry> entries;
  for (const auto& e : j) {
    const auto rgb = e.at("rgb").get<std::array<int, 3>>();
    for (int c : rgb)
      if (c < 0 || c > 255) throw Error(Errc::MalformedInput, "palette rgb out of range");
    PaletteEntry entry{e.at("id").get<std::uint8_t>(),
                       {static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]),
                        static_cast<std::uint8_t>(rgb[2])},
                       std::nullopt};
    if (e.contains("ingredient") && !e["ingredient"].is_null()) entry.ingredient = e["ingredient"].get<std::string>();
    entries.push_back(std::move(entry));
  }
  p = Palette(std::move(entries));
}

void to_json(nlohmann::json& j, const SketchDocument& doc) {
  j = nlohmann::json{{"canvas", {{"w", doc.canvas_w}, {"h", doc.canvas_h}}}, {"palette", doc.palette}};
  auto strokes = nlohmann::json::array();
  for (const auto& s : doc.strokes) {
    auto pts = nlohmann::json::array();
    for (const auto& p : s.points) pts.push_back({p.x, p.y});
    strokes.push_back({{"color", s.color_id}, {"width", s.width}, {"pts", std::move(pts)}});
  }
  j["strokes"] = std::move(strokes);
  if (doc.raster) j["raster"] = base64_encode(doc.raster->data());
  if (doc.rgb) {
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(doc.rgb->data().data());
    j["rgb"] = base64_encode(bytes, doc.rgb->size() * 3);
  }
}

void from_json(const nlohmann::json& j, SketchDocument& doc) {
  try {
    SketchDocument d;
    d.canvas_w = j.at("canvas").at("w").get<int>();
    d.canvas_h = j.at("canvas").at("h").get<int>();
    d.palette = j.contains("palette") ? j.at("palette").get<Palette>() : Palette::bento();
    if (j.contains("strokes")) {
      for (const auto& s : j.at("strokes")) {
        Stroke stroke;
        stroke.color_id = s.at("color").get<std::uint8_t>();
        stroke.width = s.value("width", 6.0);
        for (const auto& p : s.at("pts")) stroke.points.push_back(p.get<Point2>());
        d.strokes.push_back(std::move(stroke));
      }
    }
    if (j.contains("raster") && !j["raster"].is_null()) {
      auto bytes = base64_decode(j["raster"].get<std::string>());
      if (bytes.size() != static_cast<std::size_t>(d.canvas_w) * static_cast<std::size_t>(d.canvas_h))
        throw Error(Errc::MalformedInput, "raster size does not match the canvas");
      LabelImage raster(d.canvas_w, d.canvas_h);
      raster.data() = std::move(bytes);
      d.raster = std::move(raster);
    }
    if (j.contains("rgb") && !j["rgb"].is_null()) {
      const auto bytes = base64_decode(j["rgb"].get<std::string>());
      if (bytes.size() != 3 * static_cast<std::size_t>(d.canvas_w) * static_cast<std::size_t>(d.canvas_h))
        throw Error(Errc::MalformedInput, "rgb raster size does not match the canvas");
      Image<Rgb> rgb(d.canvas_w, d.canvas_h);
      for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = {bytes[3 * i], bytes[3 * i + 1], bytes[3 * i + 2]};
      d.rgb = std::move(rgb);
    }
    d.validate();
    doc = std::move(d);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedInput, std::string("sketch document: ") + e.what());
  }
}

}  // namespace sketchcue
