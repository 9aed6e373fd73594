#include "mapd/router.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <unordered_map>

namespace mapd {

ActionSequence idle_sequence(int agent, Cell at, Cell depot) {
  return {agent, {{ActionKind::Start, -1, at}, {ActionKind::Return, -1, depot}}};
}

int initial_load(const ActionSequence& seq) {
  std::vector<int> picked;
  int load = 0;
  for (const Action& a : seq.actions) {
    if (a.kind == ActionKind::Pickup) picked.push_back(a.task);
    if (a.kind == ActionKind::Dropoff &&
        std::find(picked.begin(), picked.end(), a.task) == picked.end())
      ++load;
  }
  return load;
}

std::string check_sequence(const ActionSequence& seq, int capacity, Cell depot) {
  const auto& acts = seq.actions;
  if (acts.size() < 2) return "sequence needs start and return actions";
  if (acts.front().kind != ActionKind::Start) return "first action is not start";
  if (acts.back().kind != ActionKind::Return || acts.back().cell != depot)
    return "last action is not return-to-depot";
  std::map<int, int> state;  // task -> 1 picked, 2 dropped
  int load = initial_load(seq);
  if (load > capacity) return "initial load exceeds capacity";
  for (std::size_t i = 1; i + 1 < acts.size(); ++i) {
    const Action& a = acts[i];
    if (a.kind == ActionKind::Pickup) {
      if (state.count(a.task)) return "task " + std::to_string(a.task) + " picked twice";
      state[a.task] = 1;
      if (++load > capacity) return "capacity exceeded at action " + std::to_string(i);
    } else if (a.kind == ActionKind::Dropoff) {
      auto it = state.find(a.task);
      if (it != state.end() && it->second == 2)
        return "task " + std::to_string(a.task) + " dropped twice";
      state[a.task] = 2;
      if (--load < 0) return "negative load at action " + std::to_string(i);
    } else {
      return "start/return action inside the sequence";
    }
  }
  for (auto [task, s] : state)
    if (s != 2) return "task " + std::to_string(task) + " picked but never dropped";
  return {};
}

// ---------------------------------------------------------------------------

ReservationTable::ReservationTable(const GridMap& map, int origin_time)
    : cells_(map.size()),
      origin_(origin_time),
      terminal_agent_(map.size(), -1),
      terminal_from_(map.size(), 0) {}

int ReservationTable::occupant(Cell c, int t) const {
  int v = raw(c, t);
  if (v > 0) return v - 1;
  if (terminal_agent_[c] >= 0 && terminal_from_[c] <= t) return terminal_agent_[c];
  return -1;
}

bool ReservationTable::edge_free(Cell from, Cell to, int t, int agent) const {
  if (from == to) return true;
  int w = raw(to, t) - 1;
  if (w < 0 || w == agent) return true;
  return raw(from, t + 1) - 1 != w;
}

bool ReservationTable::can_park(Cell c, int t, int agent) const {
  if (terminal_agent_[c] >= 0 && terminal_agent_[c] != agent) return false;
  for (int u = std::max(t, origin_); u < horizon(); ++u) {
    int v = raw(c, u) - 1;
    if (v >= 0 && v != agent) return false;
  }
  return true;
}

bool ReservationTable::conflicts(const TimedPath& path) const {
  const int agent = path.agent;
  for (std::size_t i = 0; i < path.cells.size(); ++i) {
    int t = path.start_time + static_cast<int>(i);
    if (!vertex_free(path.cells[i], t, agent)) return true;
    if (i > 0 && !edge_free(path.cells[i - 1], path.cells[i], t - 1, agent)) return true;
  }
  return !can_park(path.cells.back(), path.end_time(), agent);
}

void ReservationTable::reserve(const TimedPath& path) {
  if (path.cells.empty()) throw std::invalid_argument("cannot reserve an empty path");
  if (path.start_time < origin_) throw std::invalid_argument("path starts before table origin");
  if (conflicts(path))
    throw ReservationConflict("path of agent " + std::to_string(path.agent) +
                              " conflicts with existing reservations");
  std::size_t need = static_cast<std::size_t>(path.end_time() - origin_ + 1) * cells_;
  if (vertex_.size() < need) vertex_.resize(need, 0);
  for (std::size_t i = 0; i < path.cells.size(); ++i) {
    int t = path.start_time + static_cast<int>(i);
    vertex_[static_cast<std::size_t>(t - origin_) * cells_ + path.cells[i]] = path.agent + 1;
  }
  terminal_agent_[path.cells.back()] = path.agent;
  terminal_from_[path.cells.back()] = path.end_time();
  ++version_;
}

void ReservationTable::unreserve(const TimedPath& path) {
  if (path.cells.empty() || terminal_agent_[path.cells.back()] != path.agent ||
      terminal_from_[path.cells.back()] != path.end_time())
    throw std::invalid_argument("path of agent " + std::to_string(path.agent) + " is not reserved");
  for (std::size_t i = 0; i < path.cells.size(); ++i) {
    int t = path.start_time + static_cast<int>(i);
    if (raw(path.cells[i], t) != path.agent + 1)
      throw std::invalid_argument("path of agent " + std::to_string(path.agent) +
                                  " is not reserved");
  }
  for (std::size_t i = 0; i < path.cells.size(); ++i) {
    int t = path.start_time + static_cast<int>(i);
    vertex_[static_cast<std::size_t>(t - origin_) * cells_ + path.cells[i]] = 0;
  }
  terminal_agent_[path.cells.back()] = -1;
  terminal_from_[path.cells.back()] = 0;
  ++version_;
}

bool ReservationTable::operator==(const ReservationTable& other) const {
  if (cells_ != other.cells_ || origin_ != other.origin_ ||
      terminal_agent_ != other.terminal_agent_ || terminal_from_ != other.terminal_from_)
    return false;
  std::size_t common = std::min(vertex_.size(), other.vertex_.size());
  if (!std::equal(vertex_.begin(), vertex_.begin() + common, other.vertex_.begin())) return false;
  auto zero = [](int v) { return v == 0; };
  return std::all_of(vertex_.begin() + common, vertex_.end(), zero) &&
         std::all_of(other.vertex_.begin() + common, other.vertex_.end(), zero);
}

// ---------------------------------------------------------------------------

Router::Router(const GridMap& map, const DistanceTable& dist, std::span<const Task> tasks)
    : map_(map), dist_(dist), tasks_(tasks) {}

namespace {

struct OpenEntry {
  int f;
  int g;
  Cell cell;
  int move;
  int node;
};

// Lower f, then higher g, then smaller (row, col), then move order.
struct WorseEntry {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    if (a.cell != b.cell) return a.cell > b.cell;
    return a.move > b.move;
  }
};

}  // namespace

bool Router::segment(Cell from, int t0, Cell goal, int release, bool park, int agent,
                     const ReservationTable& table, std::vector<Cell>& out, int& arrival) {
  const auto h_table = dist_.from(goal);
  if (h_table[from] == kUnreachable) return false;
  const int limit = std::max(t0, release) + map_.free_cell_count() * kHorizonFactor;
  const int ncells = map_.size();

  if (++stamp_ == 0) {
    std::fill(seen_.begin(), seen_.end(), 0);
    stamp_ = 1;
  }
  auto mark = [&](Cell c, int t) {
    std::size_t idx = static_cast<std::size_t>(t - t0) * ncells + c;
    if (idx >= seen_.size()) seen_.resize(std::max(idx + 1, seen_.size() * 2), 0);
    if (seen_[idx] == stamp_) return false;
    seen_[idx] = stamp_;
    return true;
  };
  auto heuristic = [&](Cell c, int t) { return std::max(h_table[c], release - t); };

  nodes_.clear();
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, WorseEntry> open;
  nodes_.push_back({from, t0, -1});
  mark(from, t0);
  open.push({heuristic(from, t0), 0, from, 0, 0});

  while (!open.empty()) {
    OpenEntry e = open.top();
    open.pop();
    ++expansions_;
    const Node cur = nodes_[e.node];
    if (cur.cell == goal && cur.t >= release && (!park || table.can_park(goal, cur.t, agent))) {
      std::size_t mark_size = out.size();
      for (int n = e.node; nodes_[n].parent >= 0; n = nodes_[n].parent) out.push_back(nodes_[n].cell);
      std::reverse(out.begin() + static_cast<long>(mark_size), out.end());
      arrival = cur.t;
      return true;
    }
    if (cur.t >= limit) continue;
    const int nt = cur.t + 1;
    for (int m = 0; m < kMoveCount; ++m) {
      Cell next = map_.step(cur.cell, static_cast<Move>(m));
      if (next == kNoCell || h_table[next] == kUnreachable) continue;
      if (!table.vertex_free(next, nt, agent)) continue;
      if (m != 0 && !table.edge_free(cur.cell, next, cur.t, agent)) continue;
      if (!mark(next, nt)) continue;
      int id = static_cast<int>(nodes_.size());
      nodes_.push_back({next, nt, e.node});
      int g = nt - t0;
      open.push({g + heuristic(next, nt), g, next, m, id});
    }
  }
  return false;
}

std::optional<TimedPath> Router::plan(const ActionSequence& seq, const ReservationTable& table,
                                      int start_time) {
  expansions_ = 0;
  if (seq.actions.size() < 2 || seq.actions.front().kind != ActionKind::Start)
    throw std::invalid_argument("action sequence must begin with a start action");
  TimedPath path;
  path.agent = seq.agent;
  path.start_time = start_time;
  path.cells.push_back(seq.actions.front().cell);
  path.event_times.reserve(seq.actions.size());
  path.event_times.push_back(start_time);

  int t = start_time;
  for (std::size_t i = 1; i < seq.actions.size(); ++i) {
    const Action& a = seq.actions[i];
    int release = a.kind == ActionKind::Pickup ? tasks_[a.task].release : 0;
    bool park = a.kind == ActionKind::Return;
    int arrival = 0;
    if (!segment(path.cells.back(), t, a.cell, release, park, seq.agent, table, path.cells,
                 arrival))
      return std::nullopt;
    t = arrival;
    path.event_times.push_back(t);
  }
  return path;
}

long route_delay(const ActionSequence& seq, const TimedPath& path, std::span<const Task> tasks,
                 const DistanceTable& dist) {
  long delay = 0;
  for (std::size_t i = 0; i < seq.actions.size(); ++i) {
    const Action& a = seq.actions[i];
    if (a.kind != ActionKind::Dropoff) continue;
    const Task& task = tasks[a.task];
    delay += path.event_times[i] - task.release - dist(task.origin, task.destination);
  }
  return delay;
}

// ---------------------------------------------------------------------------

std::vector<Conflict> validate_paths(std::span<const TimedPath> paths) {
  std::vector<Conflict> out;
  if (paths.empty()) return out;
  int first = paths.front().start_time;
  int last = paths.front().end_time();
  for (const auto& p : paths) {
    if (p.cells.empty()) continue;
    first = std::min(first, p.start_time);
    last = std::max(last, p.end_time());
  }

  std::unordered_map<Cell, std::vector<int>> at_t;
  for (int t = first; t <= last; ++t) {
    at_t.clear();
    for (std::size_t k = 0; k < paths.size(); ++k) {
      if (paths[k].cells.empty() || paths[k].start_time > t) continue;
      at_t[paths[k].at(t)].push_back(static_cast<int>(k));
    }
    std::vector<std::pair<Cell, std::vector<int>>> shared;
    for (auto& [cell, who] : at_t)
      if (who.size() > 1) shared.emplace_back(cell, who);
    std::sort(shared.begin(), shared.end());
    for (auto& [cell, who] : shared)
      for (std::size_t i = 0; i < who.size(); ++i)
        for (std::size_t j = i + 1; j < who.size(); ++j)
          out.push_back({ConflictKind::Vertex, paths[who[i]].agent, paths[who[j]].agent, cell,
                         cell, t});

    if (t == last) break;
    for (std::size_t k = 0; k < paths.size(); ++k) {
      const auto& pk = paths[k];
      if (pk.cells.empty() || pk.start_time > t) continue;
      Cell a = pk.at(t);
      Cell b = pk.at(t + 1);
      if (a == b) continue;
      auto it = at_t.find(b);
      if (it == at_t.end()) continue;
      for (int w : it->second) {
        if (w <= static_cast<int>(k)) continue;
        const auto& pw = paths[w];
        if (pw.at(t + 1) == a)
          out.push_back({ConflictKind::Edge, pk.agent, pw.agent, a, b, t});
      }
    }
  }
  return out;
}

}  // namespace mapd
