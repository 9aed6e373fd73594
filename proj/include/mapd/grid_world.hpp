#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mapd {

// Row-major cell index into a GridMap.
using Cell = int;
inline constexpr Cell kNoCell = -1;

struct Location {
  int row = 0;
  int col = 0;
  auto operator<=>(const Location&) const = default;
};

enum class CellKind : std::uint8_t { Free, Obstacle, Endpoint, Depot };

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Moves in tie-break order; index 0 is the wait action.
enum class Move : std::uint8_t { Wait, Up, Left, Right, Down };
inline constexpr int kMoveCount = 5;

class GridMap {
 public:
  GridMap(int height, int width, std::vector<CellKind> cells);

  int height() const { return height_; }
  int width() const { return width_; }
  int size() const { return height_ * width_; }
  int free_cell_count() const { return free_count_; }

  CellKind kind(Cell c) const { return cells_[c]; }
  bool passable(Cell c) const { return cells_[c] != CellKind::Obstacle; }
  bool is_endpoint(Cell c) const { return cells_[c] == CellKind::Endpoint; }
  bool is_depot(Cell c) const { return cells_[c] == CellKind::Depot; }
  bool in_bounds(Location loc) const {
    return loc.row >= 0 && loc.row < height_ && loc.col >= 0 && loc.col < width_;
  }

  Cell cell(Location loc) const { return loc.row * width_ + loc.col; }
  Location location(Cell c) const { return {c / width_, c % width_}; }

  // Endpoints and depots in row-major order.
  const std::vector<Cell>& endpoints() const { return endpoints_; }
  const std::vector<Cell>& depots() const { return depots_; }

  // Passable neighbor reached by `move`, or kNoCell. Wait returns `c`.
  Cell step(Cell c, Move move) const { return moves_[c][static_cast<int>(move)]; }
  bool adjacent_or_same(Cell a, Cell b) const;

  std::string to_text() const;

 private:
  int height_;
  int width_;
  int free_count_ = 0;
  std::vector<CellKind> cells_;
  std::vector<Cell> endpoints_;
  std::vector<Cell> depots_;
  std::vector<std::array<Cell, kMoveCount>> moves_;
};

// Character grid: `.` free, `@` obstacle, `e` endpoint, `r` depot. An optional
// leading `H W` line fixes the dimensions.
GridMap parse_map(std::string_view text);
GridMap load_map(const std::filesystem::path& path);

// Shortest travel time in timesteps; kUnreachable is absorbing under add_time.
inline constexpr int kUnreachable = std::numeric_limits<int>::max();

constexpr int add_time(int a, int b) {
  return (a == kUnreachable || b == kUnreachable) ? kUnreachable : a + b;
}

// One breadth-first sweep per source over the 4-connected unit-cost grid.
// Sources are every endpoint and depot plus any extra cells requested.
class DistanceTable {
 public:
  explicit DistanceTable(const GridMap& map, std::span<const Cell> extra_sources = {});

  bool is_source(Cell c) const { return c >= 0 && c < static_cast<int>(index_.size()) && index_[c] >= 0; }
  const std::vector<Cell>& sources() const { return sources_; }

  // Per-cell travel times from `source` (throws if `source` is not a source).
  std::span<const int> from(Cell source) const;

  // t(a, b); at least one of the two cells must be a source.
  int operator()(Cell a, Cell b) const;

 private:
  std::vector<int> index_;
  std::vector<Cell> sources_;
  std::vector<std::vector<int>> times_;
};

}  // namespace mapd
