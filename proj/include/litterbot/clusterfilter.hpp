#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "litterbot/geometry.hpp"

namespace litterbot {

struct RawDetection {
  double t = 0.0;  // capture time
  GroundPoint point;
  double confidence = 1.0;
};

/// Running average of the detections merged into one presumed trash item.
struct TrashHypothesis {
  GroundPoint point;
  int count = 1;  // number of detections averaged into `point`
};

struct FilterConfig {
  double cluster_radius = 0.5;  // half-width of the square match window, m
  int accept_threshold = 2;     // confirmed when count > accept_threshold

  void validate() const;
};

/// Index of the hypothesis `point` merges into, or nullopt if it starts a new one.
/// Among hypotheses whose window contains the point, the nearest wins; ties go
/// to the earliest.
std::optional<std::size_t> match_hypothesis(std::span<const TrashHypothesis> state, const GroundPoint& point,
                                            const FilterConfig& cfg);

/// Folds one detection into the hypothesis list. Returns the index of the
/// hypothesis that absorbed it (possibly newly appended).
std::size_t ingest(std::vector<TrashHypothesis>& state, const RawDetection& d, const FilterConfig& cfg);

bool is_confirmed(const TrashHypothesis& h, const FilterConfig& cfg);

/// Points of hypotheses seen more than accept_threshold times, in insertion order.
std::vector<GroundPoint> confirmed(std::span<const TrashHypothesis> state, const FilterConfig& cfg);

/// One `x y a confirmed` line per hypothesis.
void write_hypotheses(std::ostream& os, std::span<const TrashHypothesis> state, const FilterConfig& cfg);

}  // namespace litterbot
