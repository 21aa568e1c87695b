#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sketchcue/errors.hpp"
#include "sketchcue/geometry.hpp"
#include "sketchcue/raster.hpp"
#include "sketchcue/sensing.hpp"
#include "sketchcue/sketch.hpp"

namespace sketchcue {

struct DominoParams {
  // Block dimensions in mm.
  double width = 23.0;
  double height = 46.0;
  double thickness = 8.0;
  double center_spacing = 28.0;
  double max_turn_deg = 25.0;
  // Feedback bands in mm.
  double correct_mm = 5.0;
  double yellow_mm = 10.0;
  double red_mm = 20.0;
  double min_contact_height_frac = 0.3;
  double min_width_overlap_frac = 0.5;
  // Stroke cleaning applied before planning.
  double resample_mm = 2.0;
  int smooth_window = 5;
  double prune_gap_mm = 1.0;

  void validate() const;  // throws InvalidConfig
  double footprint_mm2() const { return width * thickness; }
};

struct DominoPlan {
  std::vector<Pose2> targets;
  DominoParams params;

  OrientedRect footprint(std::size_t i) const {
    return {targets[i], params.width, params.thickness};
  }
};

struct Violation {
  enum class Kind { TooShort, Overlap, Spacing, Turn, Heading };
  Kind kind;
  std::size_t first = 0;
  std::size_t second = 0;
  double value = 0.0;
  double limit = 0.0;
};

std::string_view violation_name(Violation::Kind kind);

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

class InfeasibleStrokeError : public Error {
 public:
  InfeasibleStrokeError(ValidationReport report, const std::string& what)
      : Error(Errc::InfeasibleStroke, what), report_(std::move(report)) {}
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

// Resample, smooth and prune a canvas stroke, returning it in workspace mm.
Stroke clean_stroke(const Stroke& stroke_px, double px_per_mm, const DominoParams& params);

// Walks the polyline placing block centers exactly center_spacing apart
// (straight-line distance), each heading along the local tangent. Throws
// InfeasibleStrokeError when the result fails validation.
DominoPlan plan_dominoes(const Stroke& stroke_mm, const DominoParams& params);

ValidationReport validate_plan(const DominoPlan& plan);

struct ToppleLink {
  double gap = 0.0;        // face-to-face gap along block i's heading
  double lateral = 0.0;    // offset of block i+1 across block i's heading
  double contact_height = 0.0;
  double width_overlap = 0.0;
};

struct ToppleResult {
  std::vector<bool> fell;
  std::optional<std::size_t> first_break;
  std::vector<ToppleLink> links;  // links[i] describes block i -> i+1
};

// Height at which a block of `height` pivoting on its front edge strikes a
// face `gap` away; zero when it cannot reach.
double contact_height(double gap, double height);

ToppleResult topple_simulate(const DominoPlan& plan);

struct Match {
  std::size_t target = 0;
  std::size_t detection = 0;
  double distance = 0.0;
};

struct Assignment {
  std::vector<Match> pairs;  // sorted by target index
  std::vector<std::size_t> unmatched_targets;
  std::vector<std::size_t> unmatched_detections;
};

// Greedy globally-nearest matching, pairs farther than 2 * red_mm are never made.
Assignment match_detections(const DominoPlan& plan, const std::vector<DetectedBlock>& detections);

// Green up to correct_mm, ramping to yellow at yellow_mm and red at red_mm.
Rgb feedback_color(double distance_mm, const DominoParams& params);

void to_json(nlohmann::json& j, const DominoParams& p);
void from_json(const nlohmann::json& j, DominoParams& p);
void to_json(nlohmann::json& j, const DominoPlan& p);
void from_json(const nlohmann::json& j, DominoPlan& p);
void to_json(nlohmann::json& j, const ValidationReport& r);
void to_json(nlohmann::json& j, const Assignment& a);

}  // namespace sketchcue
