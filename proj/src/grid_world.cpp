#include "mapd/grid_world.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <queue>
#include <sstream>

namespace mapd {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  // Trailing blank lines are tolerated.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

bool parse_dimensions(std::string_view line, int& h, int& w) {
  auto space = line.find(' ');
  if (space == std::string_view::npos) return false;
  auto a = line.substr(0, space);
  auto b = line.substr(space + 1);
  auto ra = std::from_chars(a.data(), a.data() + a.size(), h);
  auto rb = std::from_chars(b.data(), b.data() + b.size(), w);
  return ra.ec == std::errc() && ra.ptr == a.data() + a.size() && rb.ec == std::errc() &&
         rb.ptr == b.data() + b.size();
}

void bfs_fill(const GridMap& map, Cell source, std::vector<int>& dist) {
  dist.assign(map.size(), kUnreachable);
  std::vector<Cell> frontier{source};
  dist[source] = 0;
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    Cell c = frontier[head];
    for (int m = 1; m < kMoveCount; ++m) {
      Cell n = map.step(c, static_cast<Move>(m));
      if (n == kNoCell || dist[n] != kUnreachable) continue;
      dist[n] = dist[c] + 1;
      frontier.push_back(n);
    }
  }
}

}  // namespace

GridMap::GridMap(int height, int width, std::vector<CellKind> cells)
    : height_(height), width_(width), cells_(std::move(cells)) {
  if (height_ < 1 || width_ < 1) throw ParseError("map must have at least one row and column");
  if (static_cast<int>(cells_.size()) != height_ * width_)
    throw ParseError("cell count does not match map dimensions");

  moves_.resize(cells_.size());
  for (Cell c = 0; c < size(); ++c) {
    if (passable(c)) ++free_count_;
    if (cells_[c] == CellKind::Endpoint) endpoints_.push_back(c);
    if (cells_[c] == CellKind::Depot) depots_.push_back(c);

    Location loc = location(c);
    auto neighbor = [&](int dr, int dc) -> Cell {
      Location n{loc.row + dr, loc.col + dc};
      if (!in_bounds(n) || !passable(cell(n)) || !passable(c)) return kNoCell;
      return cell(n);
    };
    moves_[c] = {passable(c) ? c : kNoCell, neighbor(-1, 0), neighbor(0, -1), neighbor(0, 1),
                 neighbor(1, 0)};
  }

  if (endpoints_.empty()) throw ParseError("map has no endpoints");

  std::vector<int> reach;
  bfs_fill(*this, endpoints_.front(), reach);
  for (Cell c : endpoints_) {
    if (reach[c] == kUnreachable) {
      auto l = location(c);
      throw ParseError("endpoint (" + std::to_string(l.row) + "," + std::to_string(l.col) +
                       ") is disconnected");
    }
  }
  for (Cell c : depots_) {
    if (reach[c] == kUnreachable) {
      auto l = location(c);
      throw ParseError("depot (" + std::to_string(l.row) + "," + std::to_string(l.col) +
                       ") is disconnected");
    }
  }
  if (depots_.empty()) throw ParseError("map has no depots");
}

bool GridMap::adjacent_or_same(Cell a, Cell b) const {
  for (int m = 0; m < kMoveCount; ++m)
    if (moves_[a][m] == b) return true;
  return false;
}

std::string GridMap::to_text() const {
  std::string out = std::to_string(height_) + " " + std::to_string(width_) + "\n";
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      switch (cells_[r * width_ + c]) {
        case CellKind::Free: out += '.'; break;
        case CellKind::Obstacle: out += '@'; break;
        case CellKind::Endpoint: out += 'e'; break;
        case CellKind::Depot: out += 'r'; break;
      }
    }
    out += '\n';
  }
  return out;
}

GridMap parse_map(std::string_view text) {
  auto lines = split_lines(text);
  for (auto& line : lines)
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (lines.empty()) throw ParseError("empty map");

  int declared_h = -1;
  int declared_w = -1;
  if (parse_dimensions(lines.front(), declared_h, declared_w)) {
    lines.erase(lines.begin());
    if (lines.empty()) throw ParseError("empty map");
  }

  int height = static_cast<int>(lines.size());
  int width = static_cast<int>(lines.front().size());
  if (width == 0) throw ParseError("empty map row");
  if (declared_h >= 0 && (declared_h != height || declared_w != width))
    throw ParseError("map dimensions do not match the header line");

  std::vector<CellKind> cells;
  cells.reserve(static_cast<std::size_t>(height) * width);
  for (int r = 0; r < height; ++r) {
    if (static_cast<int>(lines[r].size()) != width)
      throw ParseError("ragged map: row " + std::to_string(r) + " has " +
                       std::to_string(lines[r].size()) + " cells, expected " +
                       std::to_string(width));
    for (char ch : lines[r]) {
      switch (ch) {
        case '.': cells.push_back(CellKind::Free); break;
        case '@': cells.push_back(CellKind::Obstacle); break;
        case 'e': cells.push_back(CellKind::Endpoint); break;
        case 'r': cells.push_back(CellKind::Depot); break;
        default:
          throw ParseError(std::string("unknown map character '") + ch + "' in row " +
                           std::to_string(r));
      }
    }
  }
  return GridMap(height, width, std::move(cells));
}

GridMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open map file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_map(buf.str());
}

DistanceTable::DistanceTable(const GridMap& map, std::span<const Cell> extra_sources)
    : index_(map.size(), -1) {
  auto add = [&](Cell c) {
    if (c < 0 || c >= map.size() || !map.passable(c))
      throw std::invalid_argument("distance source must be a free cell");
    if (index_[c] >= 0) return;
    index_[c] = static_cast<int>(sources_.size());
    sources_.push_back(c);
  };
  for (Cell c : map.endpoints()) add(c);
  for (Cell c : map.depots()) add(c);
  for (Cell c : extra_sources) add(c);

  times_.resize(sources_.size());
  for (std::size_t i = 0; i < sources_.size(); ++i) bfs_fill(map, sources_[i], times_[i]);
}

std::span<const int> DistanceTable::from(Cell source) const {
  if (!is_source(source)) throw std::out_of_range("cell is not a distance-table source");
  return times_[index_[source]];
}

int DistanceTable::operator()(Cell a, Cell b) const {
  if (is_source(a)) return times_[index_[a]][b];
  if (is_source(b)) return times_[index_[b]][a];
  throw std::out_of_range("neither cell is a distance-table source");
}

}  // namespace mapd
