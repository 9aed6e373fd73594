#pragma once

// Test-side oracles and fixtures. Nothing here calls the library's distance
// table or insertion code, so the checks stay independent.

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "mapd/assigner.hpp"
#include "mapd/grid_world.hpp"
#include "mapd/instance.hpp"
#include "mapd/rng.hpp"
#include "mapd/router.hpp"

namespace testing {

using namespace mapd;

inline constexpr int kInf = std::numeric_limits<int>::max();

// Plain single-pair breadth-first search.
inline int bfs(const GridMap& map, Cell a, Cell b) {
  if (a == b) return 0;
  std::vector<int> seen(map.size(), -1);
  std::deque<Cell> q{a};
  seen[a] = 0;
  const int dr[4] = {-1, 0, 0, 1};
  const int dc[4] = {0, -1, 1, 0};
  while (!q.empty()) {
    Cell c = q.front();
    q.pop_front();
    Location l = map.location(c);
    for (int m = 0; m < 4; ++m) {
      Location n{l.row + dr[m], l.col + dc[m]};
      if (!map.in_bounds(n)) continue;
      Cell nc = map.cell(n);
      if (!map.passable(nc) || seen[nc] >= 0) continue;
      seen[nc] = seen[c] + 1;
      if (nc == b) return seen[nc];
      q.push_back(nc);
    }
  }
  return kInf;
}

inline std::string repeat_rows(const std::vector<std::string>& rows) {
  std::string out;
  for (const auto& r : rows) out += r + "\n";
  return out;
}

// Random map with obstacles, endpoints and depots; retried until it parses
// (i.e. endpoints and depots are connected).
inline GridMap random_map(Rng& rng, int h, int w, int obstacle_pct, int endpoints, int depots) {
  while (true) {
    std::vector<std::string> rows(h, std::string(w, '.'));
    for (auto& r : rows)
      for (char& ch : r)
        if (static_cast<int>(rng.below(100)) < obstacle_pct) ch = '@';
    auto place = [&](char kind, int count) {
      for (int i = 0; i < count; ++i) {
        for (int tries = 0; tries < 1000; ++tries) {
          int r = rng.index(h), c = rng.index(w);
          if (rows[r][c] == '.' || rows[r][c] == '@') {
            rows[r][c] = kind;
            break;
          }
        }
      }
    };
    place('e', endpoints);
    place('r', depots);
    try {
      return parse_map(repeat_rows(rows));
    } catch (const ParseError&) {
    }
  }
}

// Collision-ignoring route delay with BFS travel times.
inline long oracle_delay(const GridMap& map, const ActionSequence& seq, int start,
                         const std::vector<Task>& tasks) {
  long delay = 0;
  int t = start;
  for (std::size_t i = 1; i < seq.actions.size(); ++i) {
    const Action& a = seq.actions[i];
    int d = bfs(map, seq.actions[i - 1].cell, a.cell);
    if (d == kInf) return std::numeric_limits<long>::max();
    t += d;
    if (a.kind == ActionKind::Pickup) t = std::max(t, tasks[a.task].release);
    if (a.kind == ActionKind::Dropoff) {
      const Task& k = tasks[a.task];
      delay += t - k.release - bfs(map, k.origin, k.destination);
    }
  }
  return delay;
}

inline bool oracle_capacity_ok(const ActionSequence& seq, int capacity) {
  std::vector<int> picked;
  int load = 0;
  for (const Action& a : seq.actions)
    if (a.kind == ActionKind::Dropoff &&
        std::none_of(seq.actions.begin(), seq.actions.end(), [&](const Action& b) {
          return b.kind == ActionKind::Pickup && b.task == a.task;
        }))
      ++load;
  if (load > capacity) return false;
  for (const Action& a : seq.actions) {
    if (a.kind == ActionKind::Pickup && ++load > capacity) return false;
    if (a.kind == ActionKind::Dropoff) --load;
  }
  return true;
}

struct OracleInsertion {
  int pickup_index;
  int dropoff_index;
  long marginal;
};

// Enumerates every pickup/dropoff position pair that keeps Return last.
inline std::optional<OracleInsertion> oracle_best_insertion(const GridMap& map,
                                                            const ActionSequence& seq,
                                                            const Task& task, int capacity,
                                                            int start,
                                                            const std::vector<Task>& tasks) {
  const long base = oracle_delay(map, seq, start, tasks);
  const int n = seq.size();
  std::optional<OracleInsertion> best;
  for (int p = 1; p <= n - 1; ++p)
    for (int d = p + 1; d <= n; ++d) {
      ActionSequence cand = seq;
      cand.actions.insert(cand.actions.begin() + p, {ActionKind::Pickup, task.id, task.origin});
      cand.actions.insert(cand.actions.begin() + d,
                          {ActionKind::Dropoff, task.id, task.destination});
      if (!oracle_capacity_ok(cand, capacity)) continue;
      long delay = oracle_delay(map, cand, start, tasks);
      if (delay == std::numeric_limits<long>::max()) continue;
      if (!best || delay - base < best->marginal) best = OracleInsertion{p, d, delay - base};
    }
  return best;
}

// Checks moves, event cells, event order and releases of a planned path.
inline std::string path_problem(const GridMap& map, const ActionSequence& seq,
                                const TimedPath& path, const std::vector<Task>& tasks) {
  if (path.cells.empty()) return "empty path";
  if (path.cells.front() != seq.actions.front().cell) return "does not start at start cell";
  for (std::size_t i = 1; i < path.cells.size(); ++i)
    if (bfs(map, path.cells[i - 1], path.cells[i]) > 1) return "non-unit move";
  for (Cell c : path.cells)
    if (!map.passable(c)) return "obstacle cell";
  if (path.event_times.size() != seq.actions.size()) return "event count";
  for (std::size_t i = 0; i < seq.actions.size(); ++i) {
    int t = path.event_times[i];
    if (t < path.start_time || t > path.end_time()) return "event outside path";
    if (path.at(t) != seq.actions[i].cell) return "event at wrong cell";
    if (i > 0 && t < path.event_times[i - 1]) return "events out of order";
    if (seq.actions[i].kind == ActionKind::Pickup && t < tasks[seq.actions[i].task].release)
      return "pickup before release";
  }
  if (path.event_times.back() != path.end_time()) return "return is not the last timestep";
  return {};
}

// Earliest arrival at `goal` from (from, t0) in the time-expanded graph that
// avoids every reservation of agents other than `agent`.
inline int earliest_arrival(const GridMap& map, const ReservationTable& table, int agent,
                            Cell from, int t0, Cell goal, int horizon) {
  std::vector<Cell> layer{from};
  const int dr[5] = {0, -1, 0, 0, 1};
  const int dc[5] = {0, 0, -1, 1, 0};
  for (int t = t0; t <= t0 + horizon; ++t) {
    if (std::find(layer.begin(), layer.end(), goal) != layer.end()) return t;
    std::vector<char> next(map.size(), 0);
    for (Cell c : layer) {
      Location l = map.location(c);
      for (int m = 0; m < 5; ++m) {
        Location n{l.row + dr[m], l.col + dc[m]};
        if (!map.in_bounds(n)) continue;
        Cell nc = map.cell(n);
        if (!map.passable(nc)) continue;
        if (!table.vertex_free(nc, t + 1, agent)) continue;
        if (!table.edge_free(c, nc, t, agent)) continue;
        next[nc] = 1;
      }
    }
    layer.clear();
    for (Cell c = 0; c < map.size(); ++c)
      if (next[c]) layer.push_back(c);
    if (layer.empty()) return kInf;
  }
  return kInf;
}

inline ActionSequence make_seq(int agent, Cell depot, std::vector<Action> mid) {
  ActionSequence seq = idle_sequence(agent, depot, depot);
  seq.actions.insert(seq.actions.begin() + 1, mid.begin(), mid.end());
  return seq;
}

inline Action pick(const Task& t) { return {ActionKind::Pickup, t.id, t.origin}; }
inline Action drop(const Task& t) { return {ActionKind::Dropoff, t.id, t.destination}; }

// Random valid interleaving of `ids` under `capacity`.
inline std::vector<Action> random_interleaving(Rng& rng, const std::vector<int>& ids,
                                               const std::vector<Task>& tasks, int capacity) {
  std::vector<int> state(ids.size(), 0);
  std::vector<Action> out;
  int load = 0;
  while (out.size() < 2 * ids.size()) {
    std::vector<int> options;
    for (std::size_t i = 0; i < ids.size(); ++i)
      if ((state[i] == 0 && load < capacity) || state[i] == 1) options.push_back(static_cast<int>(i));
    int i = options[rng.index(options.size())];
    if (state[i] == 0) {
      out.push_back(pick(tasks[ids[i]]));
      ++load;
    } else {
      out.push_back(drop(tasks[ids[i]]));
      --load;
    }
    ++state[i];
  }
  return out;
}

}  // namespace testing
