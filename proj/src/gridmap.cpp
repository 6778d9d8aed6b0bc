#include "litterbot/gridmap.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include <fmt/format.h>

namespace litterbot {

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, const Pose2D& origin, Cell fill)
    : width_(width), height_(height), resolution_(resolution), origin_(origin) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("grid dimensions must be positive");
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw std::invalid_argument("grid resolution must be > 0");
  cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GroundPoint OccupancyGrid::world_to_grid(const GroundPoint& p) const {
  const GroundPoint local = to_local(origin_, p);
  return {local.x / resolution_, local.y / resolution_};
}

std::optional<CellIndex> OccupancyGrid::world_to_cell(const GroundPoint& p) const {
  const GroundPoint g = world_to_grid(p);
  const double col = std::floor(g.x);
  const double row = std::floor(g.y);
  if (!(col >= 0.0 && row >= 0.0 && col < width_ && row < height_)) return std::nullopt;
  return CellIndex{static_cast<int>(col), static_cast<int>(row)};
}

GroundPoint OccupancyGrid::cell_center(CellIndex c) const {
  return transform_point(origin_, {(c.col + 0.5) * resolution_, (c.row + 0.5) * resolution_});
}

std::size_t OccupancyGrid::count(Cell value) const { return static_cast<std::size_t>(std::ranges::count(cells_, value)); }

std::vector<CellIndex> trace_cells(const GroundPoint& a, const GroundPoint& b) {
  CellIndex cur{static_cast<int>(std::floor(a.x)), static_cast<int>(std::floor(a.y))};
  const CellIndex end{static_cast<int>(std::floor(b.x)), static_cast<int>(std::floor(b.y))};
  std::vector<CellIndex> out{cur};

  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  constexpr double inf = std::numeric_limits<double>::infinity();
  // Parametric distance (t in [0,1]) to the next vertical / horizontal cell boundary.
  double t_max_x = step_x > 0 ? (cur.col + 1 - a.x) / dx : (step_x < 0 ? (cur.col - a.x) / dx : inf);
  double t_max_y = step_y > 0 ? (cur.row + 1 - a.y) / dy : (step_y < 0 ? (cur.row - a.y) / dy : inf);
  const double t_delta_x = step_x != 0 ? 1.0 / std::abs(dx) : inf;
  const double t_delta_y = step_y != 0 ? 1.0 / std::abs(dy) : inf;

  const int max_steps = std::abs(end.col - cur.col) + std::abs(end.row - cur.row);
  for (int i = 0; i < max_steps && cur != end; ++i) {
    if (t_max_x < t_max_y) {
      cur.col += step_x;
      t_max_x += t_delta_x;
    } else if (t_max_y < t_max_x) {
      cur.row += step_y;
      t_max_y += t_delta_y;
    } else {
      cur.col += step_x;
      cur.row += step_y;
      t_max_x += t_delta_x;
      t_max_y += t_delta_y;
    }
    out.push_back(cur);
  }
  return out;
}

void integrate_scan(OccupancyGrid& grid, const Pose2D& sensor, std::span<const ScanRay> scan) {
  if (scan.empty()) return;
  if (!grid.world_to_cell(sensor.position())) throw std::invalid_argument("sensor pose outside grid");
  const GroundPoint start = grid.world_to_grid(sensor.position());

  for (const ScanRay& ray : scan) {
    const double heading = sensor.theta() + ray.bearing;
    const double range = std::min(ray.range, ray.max_range);
    const bool hit = ray.range < ray.max_range;
    const GroundPoint end_world = sensor.position() + GroundPoint{std::cos(heading), std::sin(heading)} * range;
    const std::vector<CellIndex> cells = trace_cells(start, grid.world_to_grid(end_world));

    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!grid.contains(cells[i])) continue;
      Cell& c = grid.at(cells[i]);
      if (hit && i + 1 == cells.size()) {
        c = Cell::Occupied;
      } else if (c != Cell::Occupied) {
        c = Cell::Free;
      }
    }
  }
}

void StructuringElement::validate() const {
  if (side < 1 || side % 2 == 0) throw std::invalid_argument("structuring element side must be odd and >= 1");
}

namespace {

// One separable pass of a square min/max filter. Window cells outside the grid
// are skipped.
template <bool Dilate>
Mask square_filter(const Mask& in, int width, int height, int side) {
  const int r = side / 2;
  Mask rows(in.size());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      std::uint8_t acc = Dilate ? 0 : 1;
      for (int k = std::max(0, x - r); k <= std::min(width - 1, x + r); ++k) {
        const std::uint8_t v = in[static_cast<std::size_t>(y) * width + k];
        acc = Dilate ? (acc | v) : (acc & v);
      }
      rows[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  Mask out(in.size());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      std::uint8_t acc = Dilate ? 0 : 1;
      for (int k = std::max(0, y - r); k <= std::min(height - 1, y + r); ++k) {
        const std::uint8_t v = rows[static_cast<std::size_t>(k) * width + x];
        acc = Dilate ? (acc | v) : (acc & v);
      }
      out[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  return out;
}

}  // namespace

Mask dilate(const Mask& in, int width, int height, int side) { return square_filter<true>(in, width, height, side); }
Mask erode(const Mask& in, int width, int height, int side) { return square_filter<false>(in, width, height, side); }

OccupancyGrid morph_close_open(const OccupancyGrid& grid, const StructuringElement& se) {
  se.validate();
  const int w = grid.width();
  const int h = grid.height();
  const auto cells = grid.cells();

  Mask occupied(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) occupied[i] = cells[i] != Cell::Free;

  Mask closed = erode(dilate(occupied, w, h, se.side), w, h, se.side);
  Mask opened = dilate(erode(closed, w, h, se.side), w, h, se.side);

  OccupancyGrid out = grid;
  auto out_cells = out.cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (opened[i]) {
      out_cells[i] = Cell::Occupied;
    } else {
      out_cells[i] = cells[i] == Cell::Unknown ? Cell::Unknown : Cell::Free;
    }
  }
  return out;
}

OccupancyGrid inflate(const OccupancyGrid& grid, double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("inflation radius must be >= 0");
  const double r_cells = radius / grid.resolution();
  const int reach = static_cast<int>(std::floor(r_cells + 1e-9));
  std::vector<CellIndex> offsets;
  for (int dy = -reach; dy <= reach; ++dy)
    for (int dx = -reach; dx <= reach; ++dx)
      if ((dx != 0 || dy != 0) && dx * dx + dy * dy <= r_cells * r_cells + 1e-9) offsets.push_back({dx, dy});

  OccupancyGrid out = grid;
  if (offsets.empty()) return out;
  for (int row = 0; row < grid.height(); ++row) {
    for (int col = 0; col < grid.width(); ++col) {
      if (grid.at({col, row}) != Cell::Occupied) continue;
      for (const CellIndex& o : offsets) {
        const CellIndex n{col + o.col, row + o.row};
        if (grid.contains(n) && out.at(n) == Cell::Free) out.at(n) = Cell::Occupied;
      }
    }
  }
  return out;
}

MapFormatError::MapFormatError(const std::string& what, std::size_t offset_)
    : std::runtime_error(fmt::format("map format error at byte {}: {}", offset_, what)), offset(offset_) {}

namespace {

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::uint8_t to_byte(Cell c) {
  switch (c) {
    case Cell::Occupied: return kOccupiedByte;
    case Cell::Free: return kFreeByte;
    case Cell::Unknown: return kUnknownByte;
  }
  return kUnknownByte;
}

template <typename T>
T parse_number(std::string_view token, std::size_t offset, const char* field) {
  T value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw MapFormatError(fmt::format("bad {} '{}'", field, token), offset);
  return value;
}

}  // namespace

std::string encode_map(const OccupancyGrid& grid) {
  std::string out = fmt::format("GRIDMAP v1 {} {} {} {} {} {}\n", grid.width(), grid.height(),
                                shortest(grid.resolution()), shortest(grid.origin().x()),
                                shortest(grid.origin().y()), shortest(grid.origin().theta()));
  out.reserve(out.size() + grid.cells().size());
  for (Cell c : grid.cells()) out.push_back(static_cast<char>(to_byte(c)));
  return out;
}

OccupancyGrid decode_map(std::string_view bytes) {
  const std::size_t newline = bytes.find('\n');
  if (newline == std::string_view::npos) throw MapFormatError("missing header line", bytes.size());
  const std::string_view header = bytes.substr(0, newline);

  std::vector<std::pair<std::string_view, std::size_t>> tokens;
  for (std::size_t pos = 0; pos <= header.size();) {
    std::size_t next = header.find(' ', pos);
    if (next == std::string_view::npos) next = header.size();
    tokens.emplace_back(header.substr(pos, next - pos), pos);
    pos = next + 1;
  }
  if (tokens.size() != 8) throw MapFormatError(fmt::format("expected 8 header fields, got {}", tokens.size()), 0);
  if (tokens[0].first != "GRIDMAP") throw MapFormatError("bad magic", 0);
  if (tokens[1].first != "v1") throw MapFormatError("unsupported version", tokens[1].second);

  const int w = parse_number<int>(tokens[2].first, tokens[2].second, "width");
  const int h = parse_number<int>(tokens[3].first, tokens[3].second, "height");
  const double res = parse_number<double>(tokens[4].first, tokens[4].second, "resolution");
  const double ox = parse_number<double>(tokens[5].first, tokens[5].second, "origin_x");
  const double oy = parse_number<double>(tokens[6].first, tokens[6].second, "origin_y");
  const double oth = parse_number<double>(tokens[7].first, tokens[7].second, "origin_theta");
  if (w <= 0 || h <= 0) throw MapFormatError("non-positive dimensions", tokens[2].second);
  if (!(res > 0.0) || !std::isfinite(res)) throw MapFormatError("non-positive resolution", tokens[4].second);
  if (!std::isfinite(ox) || !std::isfinite(oy) || !std::isfinite(oth))
    throw MapFormatError("non-finite origin", tokens[5].second);

  const std::size_t payload_start = newline + 1;
  const std::size_t expected = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const std::size_t actual = bytes.size() - payload_start;
  if (actual != expected)
    throw MapFormatError(fmt::format("payload has {} bytes, header declares {}", actual, expected),
                         payload_start + std::min(actual, expected));

  OccupancyGrid grid(w, h, res, Pose2D(ox, oy, oth));
  auto cells = grid.cells();
  for (std::size_t i = 0; i < expected; ++i) {
    switch (static_cast<std::uint8_t>(bytes[payload_start + i])) {
      case kOccupiedByte: cells[i] = Cell::Occupied; break;
      case kFreeByte: cells[i] = Cell::Free; break;
      case kUnknownByte: cells[i] = Cell::Unknown; break;
      default: throw MapFormatError("invalid cell byte", payload_start + i);
    }
  }
  return grid;
}

void save_map(const OccupancyGrid& grid, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw MapIoError(fmt::format("cannot open {} for writing", path.string()));
  const std::string data = encode_map(grid);
  os.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!os) throw MapIoError(fmt::format("write failed for {}", path.string()));
}

OccupancyGrid load_map(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MapIoError(fmt::format("cannot open {}", path.string()));
  std::string data((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_map(data);
}

}  // namespace litterbot
