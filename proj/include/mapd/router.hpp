#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mapd/grid_world.hpp"
#include "mapd/instance.hpp"

namespace mapd {

enum class ActionKind : std::uint8_t { Start, Pickup, Dropoff, Return };

struct Action {
  ActionKind kind = ActionKind::Start;
  int task = -1;  // -1 for Start and Return
  Cell cell = kNoCell;
  bool operator==(const Action&) const = default;
};

// Ordered route of one agent: Start at its current cell, pickups and dropoffs,
// then Return to its depot. A dropoff without a pickup is a task already on
// board (lifelong runs only).
struct ActionSequence {
  int agent = -1;
  std::vector<Action> actions;

  int size() const { return static_cast<int>(actions.size()); }
  bool operator==(const ActionSequence&) const = default;
};

ActionSequence idle_sequence(int agent, Cell at, Cell depot);

// Tasks on board when the sequence starts.
int initial_load(const ActionSequence& seq);

// Empty string when every ActionSequence invariant holds, otherwise the reason.
std::string check_sequence(const ActionSequence& seq, int capacity, Cell depot);

struct TimedPath {
  int agent = -1;
  int start_time = 0;
  std::vector<Cell> cells;       // one per timestep from start_time
  std::vector<int> event_times;  // one per action of the sequence it realizes

  int end_time() const { return start_time + static_cast<int>(cells.size()) - 1; }
  // Position at `t`; the agent rests on its last cell after end_time().
  Cell at(int t) const {
    if (t <= start_time) return cells.front();
    if (t >= end_time()) return cells.back();
    return cells[t - start_time];
  }
  bool operator==(const TimedPath&) const = default;
};

class ReservationConflict : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Time-expanded occupancy. Vertex reservations are stored densely from
// `origin_time` on; edge (swap) reservations are implied by consecutive vertex
// reservations of the same agent. The last cell of every reserved path is held
// by its agent from the path's end time forever (terminal reservation).
class ReservationTable {
 public:
  explicit ReservationTable(const GridMap& map, int origin_time = 0);

  int origin_time() const { return origin_; }
  std::uint64_t version() const { return version_; }

  // Agent holding `c` at `t` (vertex or terminal), or -1.
  int occupant(Cell c, int t) const;
  bool vertex_free(Cell c, int t, int agent) const {
    int o = occupant(c, t);
    return o < 0 || o == agent;
  }
  // Whether `agent` may traverse from -> to between t and t + 1 without a swap.
  bool edge_free(Cell from, Cell to, int t, int agent) const;
  bool edge_reserved(Cell from, Cell to, int t) const { return !edge_free(from, to, t, -1); }
  // Whether `agent` may stay on `c` from `t` forever.
  bool can_park(Cell c, int t, int agent) const;

  // True if `path` collides with any reservation of another agent.
  bool conflicts(const TimedPath& path) const;

  void reserve(const TimedPath& path);
  void unreserve(const TimedPath& path);

  // Logical equality, ignoring the version counter and allocated horizon.
  bool operator==(const ReservationTable& other) const;

 private:
  int raw(Cell c, int t) const {
    long idx = static_cast<long>(t - origin_) * cells_ + c;
    return (t < origin_ || idx >= static_cast<long>(vertex_.size())) ? 0 : vertex_[idx];
  }
  int horizon() const { return origin_ + static_cast<int>(vertex_.size() / cells_); }

  int cells_;
  int origin_;
  std::uint64_t version_ = 0;
  std::vector<int> vertex_;  // agent + 1, 0 when free
  std::vector<int> terminal_agent_;
  std::vector<int> terminal_from_;
};

inline constexpr int kHorizonFactor = 8;

// Segment-by-segment space-time A*. Owns its search buffers; one Router per
// concurrent solver run.
class Router {
 public:
  Router(const GridMap& map, const DistanceTable& dist, std::span<const Task> tasks);

  // Plans `seq` from (seq.actions[0].cell, start_time), avoiding every
  // reservation of agents other than seq.agent. nullopt when some segment has
  // no conflict-free path within the search horizon.
  std::optional<TimedPath> plan(const ActionSequence& seq, const ReservationTable& table,
                                int start_time);

  // Node expansions of the last plan() call.
  long last_expansions() const { return expansions_; }

  const GridMap& map() const { return map_; }
  const DistanceTable& dist() const { return dist_; }
  std::span<const Task> tasks() const { return tasks_; }

 private:
  bool segment(Cell from, int t0, Cell goal, int release, bool park, int agent,
               const ReservationTable& table, std::vector<Cell>& out, int& arrival);

  struct Node {
    Cell cell;
    int t;
    int parent;
  };

  const GridMap& map_;
  const DistanceTable& dist_;
  std::span<const Task> tasks_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> seen_;
  std::uint32_t stamp_ = 0;
  long expansions_ = 0;
};

// Sum over the dropoffs of `seq` of (a(g_i) - r_i - t(s_i, g_i)), with event
// times taken from `path`.
long route_delay(const ActionSequence& seq, const TimedPath& path, std::span<const Task> tasks,
                 const DistanceTable& dist);

enum class ConflictKind : std::uint8_t { Vertex, Edge };

struct Conflict {
  ConflictKind kind;
  int agent_a;
  int agent_b;
  Cell cell_a;  // vertex: shared cell; edge: agent_a's cell at t
  Cell cell_b;  // edge: agent_b's cell at t
  int t;
  bool operator==(const Conflict&) const = default;
};

// Every vertex and swap conflict among `paths`, including agents parked after
// their last timestep. Agents are absent before their start_time.
std::vector<Conflict> validate_paths(std::span<const TimedPath> paths);

}  // namespace mapd
