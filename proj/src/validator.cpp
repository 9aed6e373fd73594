#include "mapd/validator.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>

namespace mapd {

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::UnassignedTask: return "unassigned-task";
    case ViolationKind::DoubleAssigned: return "double-assigned";
    case ViolationKind::Capacity: return "capacity";
    case ViolationKind::VertexConflict: return "vertex-conflict";
    case ViolationKind::EdgeConflict: return "edge-conflict";
    case ViolationKind::PrematurePickup: return "premature-pickup";
    case ViolationKind::Order: return "order";
    case ViolationKind::Teleport: return "teleport";
    case ViolationKind::WrongCarrier: return "wrong-carrier";
  }
  return "?";
}

std::string to_string(const Violation& v) {
  std::string ids;
  for (std::size_t i = 0; i < v.ids.size(); ++i) {
    if (i) ids += ',';
    ids += std::to_string(v.ids[i]);
  }
  return to_string(v.kind) + " " + (ids.empty() ? "-" : ids) + " " + std::to_string(v.t);
}

std::vector<ServiceEvent> service_events(const AssignmentSet& set) {
  std::vector<ServiceEvent> out;
  for (const auto& a : set.agents) {
    const auto& acts = a.seq.actions;
    for (std::size_t i = 0; i < acts.size(); ++i)
      if (acts[i].kind == ActionKind::Pickup || acts[i].kind == ActionKind::Dropoff)
        out.push_back({acts[i].task, a.seq.agent, acts[i].kind, a.path.event_times[i]});
  }
  return out;
}

std::vector<ServiceEvent> service_events(std::span<const ServiceRecord> log) {
  std::vector<ServiceEvent> out;
  for (const auto& r : log) {
    if (r.pickup_t >= 0) out.push_back({r.task, r.agent, ActionKind::Pickup, r.pickup_t});
    if (r.delivery_t >= 0) out.push_back({r.task, r.agent, ActionKind::Dropoff, r.delivery_t});
  }
  return out;
}

namespace {

bool valid_cell(const GridMap& map, Cell c) { return c >= 0 && c < map.size() && map.passable(c); }

}  // namespace

std::vector<Violation> validate(const Instance& instance, const GridMap& map,
                                std::span<const TimedPath> paths,
                                std::span<const ServiceEvent> events) {
  std::vector<Violation> out;
  const int n_agents = static_cast<int>(instance.agents.size());

  std::vector<TimedPath> traj;
  for (const Agent& a : instance.agents) traj.push_back(TimedPath{a.id, 0, {a.depot}, {}});
  for (const TimedPath& p : paths)
    if (p.agent >= 0 && p.agent < n_agents && !p.cells.empty()) traj[p.agent] = p;

  for (const TimedPath& p : traj) {
    const Cell depot = instance.agents[p.agent].depot;
    if (p.start_time == 0 && p.cells.front() != depot)
      out.push_back({ViolationKind::Teleport, {p.agent}, 0});
    for (std::size_t i = 0; i < p.cells.size(); ++i) {
      const int t = p.start_time + static_cast<int>(i);
      if (!valid_cell(map, p.cells[i])) {
        out.push_back({ViolationKind::Teleport, {p.agent}, t});
      } else if (i > 0 && valid_cell(map, p.cells[i - 1]) &&
                 !map.adjacent_or_same(p.cells[i - 1], p.cells[i])) {
        out.push_back({ViolationKind::Teleport, {p.agent}, t});
      }
    }
  }

  for (const Conflict& c : validate_paths(traj)) {
    auto kind = c.kind == ConflictKind::Vertex ? ViolationKind::VertexConflict
                                               : ViolationKind::EdgeConflict;
    out.push_back({kind, {std::min(c.agent_a, c.agent_b), std::max(c.agent_a, c.agent_b)}, c.t});
  }

  std::vector<std::vector<ServiceEvent>> pickups(instance.tasks.size());
  std::vector<std::vector<ServiceEvent>> dropoffs(instance.tasks.size());
  std::vector<std::vector<ServiceEvent>> by_agent(n_agents);
  for (const ServiceEvent& e : events) {
    if (e.task < 0 || e.task >= static_cast<int>(instance.tasks.size())) continue;
    (e.kind == ActionKind::Pickup ? pickups : dropoffs)[e.task].push_back(e);
    if (e.agent >= 0 && e.agent < n_agents) by_agent[e.agent].push_back(e);
  }

  for (const Task& task : instance.tasks) {
    const auto& ps = pickups[task.id];
    const auto& ds = dropoffs[task.id];
    for (const auto* group : {&ps, &ds})
      for (const ServiceEvent& e : *group) {
        Cell want = e.kind == ActionKind::Pickup ? task.origin : task.destination;
        if (e.agent < 0 || e.agent >= n_agents || traj[e.agent].at(e.t) != want)
          out.push_back({ViolationKind::Teleport, {e.agent}, e.t});
      }
    if (ps.empty() || ds.empty()) {
      int t = !ps.empty() ? ps.front().t : (!ds.empty() ? ds.front().t : 0);
      out.push_back({ViolationKind::UnassignedTask, {task.id}, t});
    }
    if (ps.size() > 1 || ds.size() > 1) {
      int t = ps.size() > 1 ? ps[1].t : ds[1].t;
      out.push_back({ViolationKind::DoubleAssigned, {task.id}, t});
    }
    for (const ServiceEvent& p : ps)
      if (p.t < task.release) out.push_back({ViolationKind::PrematurePickup, {task.id, p.agent}, p.t});
    if (ps.size() == 1 && ds.size() == 1) {
      if (ps[0].agent != ds[0].agent)
        out.push_back({ViolationKind::WrongCarrier, {task.id, ps[0].agent, ds[0].agent}, ds[0].t});
      if (ds[0].t < ps[0].t) out.push_back({ViolationKind::Order, {task.id}, ds[0].t});
    }
  }

  for (auto& evs : by_agent) {
    std::stable_sort(evs.begin(), evs.end(), [](const ServiceEvent& a, const ServiceEvent& b) {
      if (a.t != b.t) return a.t < b.t;
      return a.kind == ActionKind::Dropoff && b.kind == ActionKind::Pickup;
    });
    int load = 0;
    for (const ServiceEvent& e : evs) {
      load += e.kind == ActionKind::Pickup ? 1 : -1;
      if (e.kind == ActionKind::Pickup && load > instance.capacity)
        out.push_back({ViolationKind::Capacity, {e.task, e.agent}, e.t});
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.ids < b.ids;
  });
  return out;
}

std::vector<Violation> validate(const Problem& problem, const AssignmentSet& set) {
  auto paths = set.paths();
  auto events = service_events(set);
  return validate(problem.instance, problem.map, paths, events);
}

Cost ttd(std::span<const ServiceRecord> log, const Instance& instance, const DistanceTable& dist) {
  Cost total = 0;
  for (const ServiceRecord& r : log) {
    if (r.delivery_t < 0) continue;
    const Task& t = instance.tasks[r.task];
    total += r.delivery_t - t.release - dist(t.origin, t.destination);
  }
  return total;
}

NormalizedMetrics normalized_metrics(Cost ttd, long makespan, long tasks, long agents,
                                     const Rational& frequency) {
  if (tasks <= 0) throw std::invalid_argument("normalized metrics need at least one task");
  return {Rational(ttd) * Rational(agents) / (Rational(tasks) * frequency),
          Rational(makespan) * Rational(agents) * frequency / Rational(tasks)};
}

namespace {

// Every action order of `tasks` with each pickup before its dropoff and at
// most `capacity` tasks on board.
std::vector<std::vector<Action>> interleavings(const std::vector<int>& tasks,
                                               std::span<const Task> all, int capacity) {
  std::vector<std::vector<Action>> out;
  std::vector<int> state(tasks.size(), 0);
  std::vector<Action> current;
  std::function<void(int)> rec = [&](int load) {
    if (current.size() == 2 * tasks.size()) {
      out.push_back(current);
      return;
    }
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const Task& t = all[tasks[i]];
      if (state[i] == 0 && load < capacity) {
        state[i] = 1;
        current.push_back({ActionKind::Pickup, t.id, t.origin});
        rec(load + 1);
        current.pop_back();
        state[i] = 0;
      } else if (state[i] == 1) {
        state[i] = 2;
        current.push_back({ActionKind::Dropoff, t.id, t.destination});
        rec(load - 1);
        current.pop_back();
        state[i] = 1;
      }
    }
  };
  rec(0);
  return out;
}

}  // namespace

OracleResult brute_force_oracle(const Problem& problem) {
  const auto tasks = problem.tasks();
  const int n_agents = problem.agent_count();
  const int n_tasks = static_cast<int>(tasks.size());
  if (n_agents > 2 || n_tasks > 3 || problem.capacity() > 2 || problem.map.height() > 8 ||
      problem.map.width() > 8)
    throw std::invalid_argument(
        "oracle instances are limited to 2 agents, 3 tasks, capacity 2 and an 8x8 grid");

  Router router(problem.map, problem.dist, tasks);
  OracleResult best;
  if (n_agents == 0) return best;

  long partitions = 1;
  for (int i = 0; i < n_tasks; ++i) partitions *= n_agents;

  for (long code = 0; code < partitions; ++code) {
    std::vector<std::vector<int>> owned(n_agents);
    long rest = code;
    for (int i = 0; i < n_tasks; ++i) {
      owned[rest % n_agents].push_back(i);
      rest /= n_agents;
    }
    std::vector<std::vector<std::vector<Action>>> options(n_agents);
    for (int k = 0; k < n_agents; ++k)
      options[k] = interleavings(owned[k], tasks, problem.capacity());

    std::vector<int> busy;
    for (int k = 0; k < n_agents; ++k)
      if (!owned[k].empty()) busy.push_back(k);

    std::vector<std::size_t> choice(n_agents, 0);
    while (true) {
      std::vector<ActionSequence> seqs;
      for (int k = 0; k < n_agents; ++k) {
        const Cell depot = problem.instance.agents[k].depot;
        ActionSequence seq = idle_sequence(k, depot, depot);
        const auto& mid = options[k][choice[k]];
        seq.actions.insert(seq.actions.begin() + 1, mid.begin(), mid.end());
        seqs.push_back(std::move(seq));
      }
      std::vector<int> order = busy;
      do {
        AssignmentSet set = make_idle_set(problem, 0);
        Cost total = 0;
        bool ok = true;
        for (int k : order) {
          set.table.unreserve(set.agents[k].path);
          auto path = router.plan(seqs[k], set.table, 0);
          if (!path) {
            ok = false;
            break;
          }
          set.table.reserve(*path);
          total += route_delay(seqs[k], *path, tasks, problem.dist);
          set.agents[k].path = std::move(*path);
        }
        if (ok && total < best.ttd) {
          best.ttd = total;
          best.sequences = seqs;
          best.priority = order;
        }
      } while (std::next_permutation(order.begin(), order.end()));

      int k = 0;
      for (; k < n_agents; ++k) {
        if (++choice[k] < options[k].size()) break;
        choice[k] = 0;
      }
      if (k == n_agents) break;
    }
  }
  return best;
}

}  // namespace mapd
