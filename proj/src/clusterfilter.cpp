#include "litterbot/clusterfilter.hpp"

#include <ostream>
#include <stdexcept>

#include <fmt/ostream.h>

namespace litterbot {

void FilterConfig::validate() const {
  if (!(cluster_radius > 0.0)) throw std::invalid_argument("filter.cluster_radius must be > 0");
  if (accept_threshold < 1) throw std::invalid_argument("filter.accept_threshold must be >= 1");
}

std::optional<std::size_t> match_hypothesis(std::span<const TrashHypothesis> state, const GroundPoint& point,
                                            const FilterConfig& cfg) {
  std::optional<std::size_t> best;
  double best_dist = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const GroundPoint& p = state[i].point;
    const bool inside = p.x - cfg.cluster_radius <= point.x && point.x <= p.x + cfg.cluster_radius &&
                        p.y - cfg.cluster_radius <= point.y && point.y <= p.y + cfg.cluster_radius;
    if (!inside) continue;
    const double d = distance(p, point);
    if (!best || d < best_dist) {
      best = i;
      best_dist = d;
    }
  }
  return best;
}

std::size_t ingest(std::vector<TrashHypothesis>& state, const RawDetection& d, const FilterConfig& cfg) {
  if (auto idx = match_hypothesis(state, d.point, cfg)) {
    TrashHypothesis& h = state[*idx];
    const double a = h.count;
    h.point.x = (h.point.x * a + d.point.x) / (a + 1.0);
    h.point.y = (h.point.y * a + d.point.y) / (a + 1.0);
    ++h.count;
    return *idx;
  }
  state.push_back({d.point, 1});
  return state.size() - 1;
}

bool is_confirmed(const TrashHypothesis& h, const FilterConfig& cfg) { return h.count > cfg.accept_threshold; }

std::vector<GroundPoint> confirmed(std::span<const TrashHypothesis> state, const FilterConfig& cfg) {
  std::vector<GroundPoint> out;
  for (const auto& h : state)
    if (is_confirmed(h, cfg)) out.push_back(h.point);
  return out;
}

void write_hypotheses(std::ostream& os, std::span<const TrashHypothesis> state, const FilterConfig& cfg) {
  for (const auto& h : state)
    fmt::print(os, "{:.6f} {:.6f} {} {}\n", h.point.x, h.point.y, h.count, is_confirmed(h, cfg) ? 1 : 0);
}

}  // namespace litterbot
