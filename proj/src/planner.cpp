#include "litterbot/planner.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <queue>

#include <fmt/ostream.h>

namespace litterbot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t flat(const OccupancyGrid& g, CellIndex c) {
  return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(g.width()) + static_cast<std::size_t>(c.col);
}

CellIndex unflat(const OccupancyGrid& g, std::size_t i) {
  return {static_cast<int>(i % static_cast<std::size_t>(g.width())),
          static_cast<int>(i / static_cast<std::size_t>(g.width()))};
}

double octile(CellIndex a, CellIndex b) {
  const double dx = std::abs(a.col - b.col);
  const double dy = std::abs(a.row - b.row);
  return std::max(dx, dy) + (std::numbers::sqrt2 - 1.0) * std::min(dx, dy);
}

CellIndex require_free_start(const OccupancyGrid& grid, const GroundPoint& start) {
  auto c = grid.world_to_cell(start);
  if (!c || grid.at(*c) != Cell::Free) throw StartOccupied();
  return *c;
}

struct QueueEntry {
  double f;
  double h;
  std::size_t idx;
  bool operator>(const QueueEntry& o) const { return f != o.f ? f > o.f : h > o.h; }
};

}  // namespace

std::optional<PathPlan> astar(const OccupancyGrid& grid, const GroundPoint& start, const GroundPoint& goal) {
  const CellIndex s = require_free_start(grid, start);
  const auto goal_cell = grid.world_to_cell(goal);
  if (!goal_cell || grid.at(*goal_cell) != Cell::Free) return std::nullopt;
  const CellIndex g = *goal_cell;

  const std::size_t n = grid.cells().size();
  std::vector<double> cost(n, kInf);
  std::vector<std::size_t> parent(n, n);
  std::vector<bool> closed(n, false);
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;

  cost[flat(grid, s)] = 0.0;
  open.push({octile(s, g), octile(s, g), flat(grid, s)});
  const std::size_t goal_idx = flat(grid, g);

  while (!open.empty()) {
    const QueueEntry top = open.top();
    open.pop();
    if (closed[top.idx]) continue;
    closed[top.idx] = true;
    if (top.idx == goal_idx) break;

    const CellIndex c = unflat(grid, top.idx);
    for_each_neighbor(grid, c, [&](CellIndex nb, double step) {
      const std::size_t ni = flat(grid, nb);
      if (closed[ni]) return;
      const double candidate = cost[top.idx] + step;
      if (candidate < cost[ni]) {
        cost[ni] = candidate;
        parent[ni] = top.idx;
        const double h = octile(nb, g);
        open.push({candidate + h, h, ni});
      }
    });
  }

  if (!closed[goal_idx]) return std::nullopt;

  PathPlan plan;
  for (std::size_t i = goal_idx; i != n; i = parent[i]) plan.cells.push_back(unflat(grid, i));
  std::ranges::reverse(plan.cells);
  for (const CellIndex& c : plan.cells) plan.waypoints.push_back(grid.cell_center(c));
  plan.cost = cost[goal_idx] * grid.resolution();
  return plan;
}

std::vector<double> cost_field(const OccupancyGrid& grid, const GroundPoint& start) {
  const CellIndex s = require_free_start(grid, start);
  const std::size_t n = grid.cells().size();
  std::vector<double> cost(n, kInf);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  cost[flat(grid, s)] = 0.0;
  open.push({0.0, flat(grid, s)});
  while (!open.empty()) {
    auto [c, idx] = open.top();
    open.pop();
    if (c > cost[idx]) continue;
    for_each_neighbor(grid, unflat(grid, idx), [&](CellIndex nb, double step) {
      const std::size_t ni = flat(grid, nb);
      if (c + step < cost[ni]) {
        cost[ni] = c + step;
        open.push({cost[ni], ni});
      }
    });
  }
  for (double& c : cost) c *= grid.resolution();
  return cost;
}

std::optional<GroundPoint> nearest_free(const OccupancyGrid& grid, const GroundPoint& p, double max_radius) {
  const GroundPoint g = grid.world_to_grid(p);
  const CellIndex center{static_cast<int>(std::floor(g.x)), static_cast<int>(std::floor(g.y))};
  const int reach = static_cast<int>(std::ceil(max_radius / grid.resolution()));
  std::optional<GroundPoint> best;
  double best_d = kInf;
  for (int ring = 0; ring <= reach; ++ring) {
    for (int dy = -ring; dy <= ring; ++dy) {
      for (int dx = -ring; dx <= ring; ++dx) {
        if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
        const CellIndex c{center.col + dx, center.row + dy};
        if (!grid.is_free(c)) continue;
        const GroundPoint cc = grid.cell_center(c);
        const double d = distance(cc, p);
        if (d <= max_radius && d < best_d) {
          best = cc;
          best_d = d;
        }
      }
    }
    // A cell in ring k is at least (k - 1) cells away, so later rings cannot win.
    if (best && best_d <= (ring - 1 + 1e-9) * grid.resolution()) break;
  }
  return best;
}

bool line_of_sight(const OccupancyGrid& grid, const GroundPoint& from, const GroundPoint& to) {
  const std::vector<CellIndex> cells = trace_cells(grid.world_to_grid(from), grid.world_to_grid(to));
  for (std::size_t i = 0; i + 1 < cells.size(); ++i)
    if (!grid.contains(cells[i]) || grid.at(cells[i]) == Cell::Occupied) return false;
  return true;
}

std::vector<TourStop> order_waypoints(const GroundPoint& start, std::span<const GroundPoint> trash,
                                      const OccupancyGrid& grid) {
  std::vector<TourStop> tour;
  std::vector<bool> done(trash.size(), false);
  const bool start_ok = grid.world_to_cell(start) && grid.is_free(*grid.world_to_cell(start));

  GroundPoint current = start;
  while (start_ok) {
    std::optional<std::size_t> best;
    double best_cost = kInf;
    for (std::size_t i = 0; i < trash.size(); ++i) {
      if (done[i]) continue;
      if (auto plan = astar(grid, current, trash[i]); plan && plan->cost < best_cost) {
        best = i;
        best_cost = plan->cost;
      }
    }
    if (!best) break;
    done[*best] = true;
    tour.push_back({trash[*best], *best, true});
    current = trash[*best];
  }
  for (std::size_t i = 0; i < trash.size(); ++i)
    if (!done[i]) tour.push_back({trash[i], i, false});
  return tour;
}

std::optional<NavGoal> approach_goal(const GroundPoint& trash, const OccupancyGrid& grid, const Pose2D& robot,
                                     double standoff) {
  if (!(standoff > 0.0)) throw std::invalid_argument("standoff must be > 0");
  const std::vector<double> cost = cost_field(grid, robot.position());

  const GroundPoint tg = grid.world_to_grid(trash);
  const int reach = static_cast<int>(std::ceil(standoff / grid.resolution())) + 1;
  const int c0 = static_cast<int>(std::floor(tg.x));
  const int r0 = static_cast<int>(std::floor(tg.y));

  std::optional<CellIndex> best;
  double best_cost = kInf;
  for (int row = r0 - reach; row <= r0 + reach; ++row) {
    for (int col = c0 - reach; col <= c0 + reach; ++col) {
      const CellIndex c{col, row};
      if (!grid.is_free(c)) continue;
      const double cc = cost[flat(grid, c)];
      if (!(cc < best_cost)) continue;
      const GroundPoint center = grid.cell_center(c);
      if (distance(center, trash) > standoff) continue;
      if (!line_of_sight(grid, center, trash)) continue;
      best = c;
      best_cost = cc;
    }
  }
  if (!best) return std::nullopt;

  const GroundPoint p = grid.cell_center(*best);
  const GroundPoint d = trash - p;
  const double heading = d.norm() > 1e-9 ? std::atan2(d.y, d.x) : robot.theta();
  return NavGoal{Pose2D(p, heading), trash};
}

void write_path(std::ostream& os, const PathPlan& plan) {
  for (const auto& w : plan.waypoints) fmt::print(os, "{:.4f} {:.4f}\n", w.x, w.y);
}

}  // namespace litterbot
