#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sketchcue/calibration.hpp"
#include "sketchcue/raster.hpp"
#include "sketchcue/sensing.hpp"
#include "sketchcue/sketch.hpp"

namespace sketchcue {

struct BentoParams {
  double box_w = 200.0;  // mm
  double box_h = 135.0;  // mm
  int canvas_w = 600;    // px
  int canvas_h = 405;    // px
  double px_per_mm = 3.0;
  double fill_threshold = 0.70;
  double spill_threshold = 0.20;
  // Position of the box's top-left corner in workspace mm.
  Point2 box_origin_mm{186.0, 93.0};
  std::map<std::uint8_t, std::string> ingredient_map{
      {0, "broccoli"}, {1, "fried egg"}, {2, "crab stick"}, {3, "sausage"}};

  void validate() const;  // throws InvalidConfig

  Point2 canvas_to_box(Point2 px) const { return px * (1.0 / px_per_mm); }
  Point2 box_to_canvas(Point2 mm) const { return mm * px_per_mm; }
  Point2 box_to_workspace(Point2 mm) const { return mm + box_origin_mm; }
  Point2 workspace_to_box(Point2 mm) const { return mm - box_origin_mm; }
};

struct BentoSubtask {
  std::uint8_t color_id = 0;
  std::string ingredient;
  Rgb display;
  Mask target;  // camera px
};

struct BentoPlan {
  std::vector<BentoSubtask> subtasks;  // execution order
  Mask box_mask;                        // camera px
  BentoParams params;
};

enum class SubtaskStatus { Pending, Active, Complete };

struct BentoState {
  std::size_t active_index = 0;
  std::vector<SubtaskStatus> status;
  std::vector<double> fill_ratio;
  double spill_ratio = 0.0;
  bool all_complete = false;
};

// Maps the sketch regions (canvas px) onto the box in camera px and orders
// one subtask per ingredient color by descending camera area, ties by id.
// Colors without an ingredient are ignored.
BentoPlan build_bento_plan(const std::vector<ColorRegion>& regions, const BentoParams& params,
                           const CalibrationProfile& profile, const Palette& palette);

double region_fill_ratio(const Mask& target, const OccupancyMask& occupancy);
double spill_ratio(const Mask& box_mask, const Mask& active_target, const OccupancyMask& occupancy);

BentoState initial_bento_state(const BentoPlan& plan);

// Camera-px area where misplaced ingredients count as spill for the active
// subtask: the box minus the active and all completed targets.
Mask spill_area(const BentoPlan& plan, const BentoState& state);

// Completes the active subtask when fill >= fill_threshold and
// spill < spill_threshold; completion is never undone.
BentoState step_bento_state(const BentoState& state, const BentoPlan& plan, const OccupancyMask& occupancy);

std::string_view status_name(SubtaskStatus s);

void to_json(nlohmann::json& j, const BentoParams& p);
void from_json(const nlohmann::json& j, BentoParams& p);
void to_json(nlohmann::json& j, const BentoPlan& p);
void from_json(const nlohmann::json& j, BentoPlan& p);
void to_json(nlohmann::json& j, const BentoState& s);

}  // namespace sketchcue
