#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "litterbot/geometry.hpp"

namespace litterbot {

enum class Cell : std::uint8_t { Free, Occupied, Unknown };

struct CellIndex {
  int col = 0;
  int row = 0;
  bool operator==(const CellIndex&) const = default;
  auto operator<=>(const CellIndex&) const = default;
};

class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double resolution, const Pose2D& origin = {}, Cell fill = Cell::Unknown);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const Pose2D& origin() const { return origin_; }

  bool contains(CellIndex c) const { return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_; }
  Cell at(CellIndex c) const { return cells_[index(c)]; }
  Cell& at(CellIndex c) { return cells_[index(c)]; }
  bool is_free(CellIndex c) const { return contains(c) && at(c) == Cell::Free; }

  /// Cell containing `p`; nullopt when `p` falls outside the grid.
  std::optional<CellIndex> world_to_cell(const GroundPoint& p) const;
  /// Continuous cell coordinates of `p` (cell (i,j) spans [i,i+1)x[j,j+1)).
  GroundPoint world_to_grid(const GroundPoint& p) const;
  GroundPoint cell_center(CellIndex c) const;

  std::span<const Cell> cells() const { return cells_; }
  std::span<Cell> cells() { return cells_; }
  std::size_t count(Cell value) const;

  bool operator==(const OccupancyGrid&) const = default;

 private:
  std::size_t index(CellIndex c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.col);
  }

  int width_ = 0;
  int height_ = 0;
  double resolution_ = 0.05;
  Pose2D origin_;
  std::vector<Cell> cells_;
};

/// Cells crossed by the segment a->b in traversal order, including both end
/// cells. Coordinates are in continuous cell units (see world_to_grid).
std::vector<CellIndex> trace_cells(const GroundPoint& a, const GroundPoint& b);

struct ScanRay {
  double bearing = 0.0;  // relative to robot heading
  double range = 0.0;
  double max_range = 0.0;
};

/// Ray-casts a range scan into the grid. Cells before the hit become Free, the
/// hit cell becomes Occupied; a ray at max_range writes no Occupied cell.
/// Occupied cells are never demoted.
void integrate_scan(OccupancyGrid& grid, const Pose2D& sensor, std::span<const ScanRay> scan);

struct StructuringElement {
  int side = 3;
  void validate() const;
};

/// Binary morphology on a width x height mask with a square element. Cells
/// beyond the border are ignored, so erosion does not eat in from the edge.
using Mask = std::vector<std::uint8_t>;
Mask dilate(const Mask& in, int width, int height, int side);
Mask erode(const Mask& in, int width, int height, int side);

/// Closing then opening of the occupied set. Unknown counts as occupied during
/// the transform; an Unknown cell comes back Occupied if it survives the
/// transform and stays Unknown otherwise.
OccupancyGrid morph_close_open(const OccupancyGrid& grid, const StructuringElement& se = {});

/// Marks Free cells within `radius` (cell-center distance) of an Occupied cell as Occupied.
OccupancyGrid inflate(const OccupancyGrid& grid, double radius);

class MapIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MapFormatError : public std::runtime_error {
 public:
  MapFormatError(const std::string& what, std::size_t offset);
  std::size_t offset;
};

inline constexpr std::uint8_t kOccupiedByte = 0;
inline constexpr std::uint8_t kFreeByte = 254;
inline constexpr std::uint8_t kUnknownByte = 205;

/// `GRIDMAP v1 <w> <h> <res> <ox> <oy> <otheta>\n` followed by w*h bytes, row 0 first.
std::string encode_map(const OccupancyGrid& grid);
OccupancyGrid decode_map(std::string_view bytes);

void save_map(const OccupancyGrid& grid, const std::filesystem::path& path);
OccupancyGrid load_map(const std::filesystem::path& path);

}  // namespace litterbot
