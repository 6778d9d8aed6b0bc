#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "litterbot/geometry.hpp"
#include "litterbot/gridmap.hpp"

namespace litterbot {

struct PathPlan {
  std::vector<GroundPoint> waypoints;  // cell centers, start cell first
  std::vector<CellIndex> cells;
  double cost = 0.0;  // m
};

struct NavGoal {
  Pose2D pose;  // standoff position, facing the target
  GroundPoint target;
};

class StartOccupied : public std::runtime_error {
 public:
  StartOccupied() : std::runtime_error("path start cell is not free") {}
};

/// Single-step moves of the planner: 8-connected, diagonal moves only when
/// both adjacent orthogonal cells are Free. Calls f(neighbor, step_cost_in_cells).
template <typename F>
void for_each_neighbor(const OccupancyGrid& grid, CellIndex c, F&& f) {
  static constexpr int dx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  for (int k = 0; k < 8; ++k) {
    const CellIndex n{c.col + dx[k], c.row + dy[k]};
    if (!grid.is_free(n)) continue;
    if (k >= 4) {
      if (!grid.is_free({c.col + dx[k], c.row}) || !grid.is_free({c.col, c.row + dy[k]})) continue;
      f(n, std::numbers::sqrt2);
    } else {
      f(n, 1.0);
    }
  }
}

/// Minimum-cost path over Free cells with an octile heuristic. nullopt when the
/// goal is unreachable (including a goal cell that is not Free). Throws
/// StartOccupied if the start cell is not Free.
std::optional<PathPlan> astar(const OccupancyGrid& grid, const GroundPoint& start, const GroundPoint& goal);

/// Path cost in meters from `start` to every cell (infinity where unreachable).
std::vector<double> cost_field(const OccupancyGrid& grid, const GroundPoint& start);

/// Nearest Free cell center to `p` within `max_radius`, searching outward by ring.
std::optional<GroundPoint> nearest_free(const OccupancyGrid& grid, const GroundPoint& p, double max_radius);

/// True when no Occupied (or off-grid) cell lies strictly before the cell of `to`
/// on the straight segment from `from`.
bool line_of_sight(const OccupancyGrid& grid, const GroundPoint& from, const GroundPoint& to);

struct TourStop {
  GroundPoint point;
  std::size_t input_index = 0;
  bool reachable = true;
};

/// Greedy nearest-first visiting order by path cost. Unreachable points follow
/// the reachable ones, flagged, in input order.
std::vector<TourStop> order_waypoints(const GroundPoint& start, std::span<const GroundPoint> trash,
                                      const OccupancyGrid& grid);

/// Cheapest-to-reach Free cell within `standoff` of `trash` that can see the
/// trash cell. nullopt when no such cell is reachable.
std::optional<NavGoal> approach_goal(const GroundPoint& trash, const OccupancyGrid& grid, const Pose2D& robot,
                                     double standoff = 2.0);

void write_path(std::ostream& os, const PathPlan& plan);

}  // namespace litterbot
