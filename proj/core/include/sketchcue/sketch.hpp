#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sketchcue/geometry.hpp"
#include "sketchcue/raster.hpp"

namespace sketchcue {

inline constexpr std::uint8_t kBackgroundLabel = 255;

// Per-pixel palette index; kBackgroundLabel where nothing was drawn.
using LabelImage = Image<std::uint8_t>;

struct Stroke {
  std::vector<Point2> points;
  std::uint8_t color_id = 0;
  double width = 6.0;  // pen width in canvas px, used when rasterizing

  double arc_length() const;
};

struct PaletteEntry {
  std::uint8_t id = 0;
  Rgb rgb;
  std::optional<std::string> ingredient;
};

class Palette {
 public:
  Palette() = default;
  explicit Palette(std::vector<PaletteEntry> entries);

  // green/broccoli, yellow/fried egg, orange/crab stick, pink/sausage, black.
  static Palette bento();
  // A single black ink.
  static Palette domino();

  const std::vector<PaletteEntry>& entries() const noexcept { return entries_; }
  const PaletteEntry* find(std::uint8_t id) const;

 private:
  std::vector<PaletteEntry> entries_;  // sorted by id
};

struct SketchDocument {
  int canvas_w = 0;
  int canvas_h = 0;
  Palette palette;
  std::vector<Stroke> strokes;
  std::optional<LabelImage> raster;
  std::optional<Image<Rgb>> rgb;  // unquantized canvas, if the client sent one

  void validate() const;
};

struct PixelCoord {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

struct ColorRegion {
  std::uint8_t color_id = 0;
  std::vector<PixelCoord> pixels;  // row-major order
  std::size_t area_px = 0;
  int component_id = 0;
};

inline constexpr std::size_t kMinRegionArea = 25;
inline constexpr double kQuantizeTolerance = 60.0;

// Uniform arc-length resampling; interval is in mm and converted with px_per_mm.
Stroke resample_stroke(const Stroke& s, double interval_mm, double px_per_mm);

// Centered moving average, window shrinking symmetrically near the ends.
Stroke smooth_stroke(const Stroke& s, int window);

// Greedy density pruning; endpoints are always kept.
Stroke prune_dense_vertices(const Stroke& s, double min_gap_mm, double px_per_mm);

LabelImage quantize_canvas(const Image<Rgb>& rgb, const Palette& palette,
                           double tolerance = kQuantizeTolerance);

// Paints strokes into a label raster: closed strokes (end near start) are
// filled, open strokes are drawn with their pen width.
LabelImage rasterize_strokes(const SketchDocument& doc);

// The label raster for a document: the explicit raster, else the quantized
// RGB canvas, else the rasterized strokes.
LabelImage document_labels(const SketchDocument& doc);

// Throws NoRegions when no component reaches min_area.
std::vector<ColorRegion> extract_color_regions(const LabelImage& labels,
                                               std::size_t min_area = kMinRegionArea);

void to_json(nlohmann::json& j, const SketchDocument& doc);
void from_json(const nlohmann::json& j, SketchDocument& doc);
void to_json(nlohmann::json& j, const Palette& p);
void from_json(const nlohmann::json& j, Palette& p);

}  // namespace sketchcue
