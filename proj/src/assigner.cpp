#include "mapd/assigner.hpp"

#include <algorithm>
#include <numeric>

namespace mapd {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Mca: return "mca";
    case Strategy::RmcaA: return "rmca-a";
    case Strategy::RmcaR: return "rmca-r";
  }
  return "?";
}

std::string to_string(const StrategySpec& s) {
  return to_string(s.selection) + (s.decoupled ? "-fp" : "");
}

std::optional<StrategySpec> parse_strategy(const std::string& name) {
  if (name == "mca") return StrategySpec{Strategy::Mca, false};
  if (name == "rmca-a") return StrategySpec{Strategy::RmcaA, false};
  if (name == "rmca-r") return StrategySpec{Strategy::RmcaR, false};
  if (name == "mca-fp") return StrategySpec{Strategy::Mca, true};
  if (name == "rmca-r-fp") return StrategySpec{Strategy::RmcaR, true};
  return std::nullopt;
}

Cost AssignmentSet::total_ttd() const {
  Cost sum = 0;
  for (const auto& a : agents) sum += a.ttd;
  return sum;
}

std::vector<TimedPath> AssignmentSet::paths() const {
  std::vector<TimedPath> out;
  out.reserve(agents.size());
  for (const auto& a : agents) out.push_back(a.path);
  return out;
}

AssignmentSet make_idle_set(const Problem& problem, int start_time) {
  AssignmentSet set{{}, ReservationTable(problem.map, start_time)};
  for (const Agent& agent : problem.instance.agents) {
    Assignment a;
    a.seq = idle_sequence(agent.id, agent.depot, agent.depot);
    a.path = TimedPath{agent.id, start_time, {agent.depot}, {start_time, start_time}};
    set.table.reserve(a.path);
    set.agents.push_back(std::move(a));
  }
  return set;
}

void commit(AssignmentSet& set, Assignment next) {
  Assignment& slot = set.agents[next.seq.agent];
  set.table.unreserve(slot.path);
  try {
    set.table.reserve(next.path);
  } catch (const ReservationConflict&) {
    set.table.reserve(slot.path);
    throw;
  }
  slot = std::move(next);
}

Cost estimate_delay(const ActionSequence& seq, int start_time, std::span<const Task> tasks,
                    const DistanceTable& dist) {
  Cost delay = 0;
  int t = start_time;
  Cell prev = seq.actions.front().cell;
  for (std::size_t i = 1; i < seq.actions.size(); ++i) {
    const Action& a = seq.actions[i];
    t = add_time(t, dist(prev, a.cell));
    if (t == kUnreachable) return kInfiniteCost;
    prev = a.cell;
    if (a.kind == ActionKind::Pickup) {
      t = std::max(t, tasks[a.task].release);
    } else if (a.kind == ActionKind::Dropoff) {
      const Task& task = tasks[a.task];
      delay += t - task.release - dist(task.origin, task.destination);
    }
  }
  return delay;
}

ActionSequence insert_task(const ActionSequence& seq, const Task& task, int pickup_index,
                           int dropoff_index) {
  ActionSequence out = seq;
  out.actions.insert(out.actions.begin() + pickup_index,
                     Action{ActionKind::Pickup, task.id, task.origin});
  out.actions.insert(out.actions.begin() + dropoff_index,
                     Action{ActionKind::Dropoff, task.id, task.destination});
  return out;
}

std::optional<Insertion> best_insertion(const ActionSequence& seq, const Task& task, int capacity,
                                        int start_time, std::span<const Task> tasks,
                                        const DistanceTable& dist) {
  const auto& acts = seq.actions;
  const int n = static_cast<int>(acts.size());
  const Cost base = estimate_delay(seq, start_time, tasks, dist);
  if (base == kInfiniteCost) return std::nullopt;
  const int direct = dist(task.origin, task.destination);

  // Prefix state through each original action: arrival time, load, delay.
  std::vector<int> time_at(n);
  std::vector<int> load_after(n);
  std::vector<Cost> delay_through(n);
  {
    int t = start_time;
    int load = initial_load(seq);
    Cost delay = 0;
    time_at[0] = t;
    load_after[0] = load;
    delay_through[0] = 0;
    for (int i = 1; i < n; ++i) {
      const Action& a = acts[i];
      t = add_time(t, dist(acts[i - 1].cell, a.cell));
      if (a.kind == ActionKind::Pickup) {
        t = std::max(t, tasks[a.task].release);
        ++load;
      } else if (a.kind == ActionKind::Dropoff) {
        const Task& d = tasks[a.task];
        delay += t - d.release - dist(d.origin, d.destination);
        --load;
      }
      time_at[i] = t;
      load_after[i] = load;
      delay_through[i] = delay;
    }
  }

  std::optional<Insertion> best;
  // Pickup goes before original action p (1 <= p <= n-1); the dropoff goes
  // before original action d (p <= d <= n-1), i.e. after the pickup.
  for (int p = 1; p < n; ++p) {
    if (load_after[p - 1] + 1 > capacity) continue;
    int t_pick = add_time(time_at[p - 1], dist(acts[p - 1].cell, task.origin));
    if (t_pick == kUnreachable) continue;
    t_pick = std::max(t_pick, task.release);

    // Walk forward with the task on board.
    int t = t_pick;
    Cell prev = task.origin;
    Cost delay = delay_through[p - 1];
    for (int d = p; d < n; ++d) {
      // Option: drop before original action d.
      int t_drop = add_time(t, dist(prev, task.destination));
      if (t_drop != kUnreachable) {
        Cost cand = delay + (t_drop - task.release - direct);
        int tt = t_drop;
        Cell pc = task.destination;
        bool ok = true;
        for (int j = d; j < n && ok; ++j) {
          const Action& a = acts[j];
          tt = add_time(tt, dist(pc, a.cell));
          if (tt == kUnreachable) {
            ok = false;
            break;
          }
          pc = a.cell;
          if (a.kind == ActionKind::Pickup) {
            tt = std::max(tt, tasks[a.task].release);
          } else if (a.kind == ActionKind::Dropoff) {
            const Task& o = tasks[a.task];
            cand += tt - o.release - dist(o.origin, o.destination);
          }
        }
        if (ok) {
          Cost marginal = cand - base;
          if (!best || marginal < best->est_marginal) best = Insertion{p, d + 1, marginal};
        }
      }
      // Otherwise carry the task past original action d.
      const Action& a = acts[d];
      if (a.kind == ActionKind::Return) break;
      if (a.kind == ActionKind::Pickup && load_after[d] + 1 > capacity) break;
      t = add_time(t, dist(prev, a.cell));
      if (t == kUnreachable) break;
      prev = a.cell;
      if (a.kind == ActionKind::Pickup) {
        t = std::max(t, tasks[a.task].release);
      } else if (a.kind == ActionKind::Dropoff) {
        const Task& o = tasks[a.task];
        delay += t - o.release - dist(o.origin, o.destination);
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

TaskHeap::TaskHeap(int task, std::vector<PotentialAssignment> entries)
    : task_(task), entries_(std::move(entries)), order_(entries_.size()) {
  std::iota(order_.begin(), order_.end(), 0);
  reorder();
}

void TaskHeap::reorder() {
  std::sort(order_.begin(), order_.end(), [&](int a, int b) {
    const auto& ea = entries_[a];
    const auto& eb = entries_[b];
    if (ea.real_marginal != eb.real_marginal) return ea.real_marginal < eb.real_marginal;
    return ea.agent < eb.agent;
  });
}

SelectionKey selection_key(Cost best, Cost second, Strategy strategy) {
  SelectionKey key;
  key.feasible = best != kInfiniteCost;
  if (!key.feasible) return key;
  switch (strategy) {
    case Strategy::Mca:
      key.minimize = true;
      key.num = best;
      break;
    case Strategy::RmcaA:
      if (second == kInfiniteCost) {
        key.unbounded = true;
      } else {
        key.num = second - best;
      }
      break;
    case Strategy::RmcaR:
      if (second == kInfiniteCost) {
        key.unbounded = true;
      } else if (best == 0) {
        key.num = second + 1;
        key.den = 1;
      } else {
        key.num = second;
        key.den = best;
      }
      break;
  }
  return key;
}

SelectionKey selection_key(const TaskHeap& heap, Strategy strategy) {
  Cost best = heap.size() > 0 ? heap.top(0).real_marginal : kInfiniteCost;
  Cost second = heap.size() > 1 ? heap.top(1).real_marginal : kInfiniteCost;
  return selection_key(best, second, strategy);
}

bool more_urgent(const SelectionKey& a, const SelectionKey& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (!a.feasible) return false;
  if (a.unbounded != b.unbounded) return a.unbounded;
  if (a.unbounded) return false;
  __int128 lhs = static_cast<__int128>(a.num) * b.den;
  __int128 rhs = static_cast<__int128>(b.num) * a.den;
  return a.minimize ? lhs < rhs : lhs > rhs;
}

// ---------------------------------------------------------------------------

Assigner::Assigner(const Problem& problem, Router& router, Strategy strategy)
    : problem_(problem), router_(router), strategy_(strategy) {}

void Assigner::replan(PotentialAssignment& entry, const AssignmentSet& set) {
  const Assignment& current = set.agents[entry.agent];
  ++stats_.plans;
  entry.path = router_.plan(entry.seq, set.table, current.path.start_time);
  entry.planned_version = set.table.version();
  if (entry.path) {
    Cost delay = route_delay(entry.seq, *entry.path, problem_.tasks(), problem_.dist);
    entry.real_marginal = std::max<Cost>(0, delay - current.ttd);
  } else {
    entry.real_marginal = kInfiniteCost;
  }
}

PotentialAssignment Assigner::make_potential(int task, const AssignmentSet& set, int agent) {
  const Assignment& current = set.agents[agent];
  PotentialAssignment pa;
  pa.task = task;
  pa.agent = agent;
  pa.planned_version = set.table.version();
  auto ins = best_insertion(current.seq, problem_.tasks()[task], problem_.capacity(),
                            current.path.start_time, problem_.tasks(), problem_.dist);
  if (!ins) return pa;
  pa.insertable = true;
  pa.est_marginal = ins->est_marginal;
  pa.seq = insert_task(current.seq, problem_.tasks()[task], ins->pickup_index, ins->dropoff_index);
  replan(pa, set);
  return pa;
}

int Assigner::update_heap_top(TaskHeap& heap, const AssignmentSet& set, int v) {
  int replans = 0;
  const int depth = std::min(v, heap.size());
  for (;;) {
    PotentialAssignment* stale = nullptr;
    for (int r = 0; r < depth; ++r) {
      const PotentialAssignment& e = heap.top(r);
      if (!e.insertable) continue;
      bool needs = e.path ? set.table.conflicts(*e.path)
                          : e.planned_version != set.table.version();
      if (needs) {
        stale = &heap.entry_for(e.agent);
        break;
      }
    }
    if (!stale) return replans;
    replan(*stale, set);
    ++replans;
    ++stats_.replans;
    heap.reorder();
  }
}

void Assigner::assign_all(AssignmentSet& set, std::span<const int> tasks) {
  if (tasks.empty()) return;
  const int agents = problem_.agent_count();
  if (agents == 0) throw SolverIncomplete(tasks.front());
  const int v = repair_depth(strategy_);

  std::vector<int> order(tasks.begin(), tasks.end());
  std::sort(order.begin(), order.end());
  std::vector<TaskHeap> heaps;
  heaps.reserve(order.size());
  for (int task : order) {
    std::vector<PotentialAssignment> entries;
    entries.reserve(agents);
    for (int k = 0; k < agents; ++k) entries.push_back(make_potential(task, set, k));
    heaps.emplace_back(task, std::move(entries));
  }

  while (!heaps.empty()) {
    std::size_t pick = 0;
    SelectionKey best_key = selection_key(heaps[0], strategy_);
    for (std::size_t i = 1; i < heaps.size(); ++i) {
      SelectionKey key = selection_key(heaps[i], strategy_);
      if (more_urgent(key, best_key)) {
        best_key = key;
        pick = i;
      }
    }
    TaskHeap& heap = heaps[pick];
    if (heap.top().real_marginal == kInfiniteCost) {
      // Entries computed under older reservations may have become feasible.
      for (int k = 0; k < agents; ++k) {
        auto& e = heap.entry_for(k);
        if (e.insertable && e.planned_version != set.table.version()) replan(e, set);
      }
      heap.reorder();
      if (heap.top().real_marginal == kInfiniteCost) throw SolverIncomplete(heap.task());
    }

    const PotentialAssignment& chosen = heap.top();
    const int k = chosen.agent;
    Assignment next{chosen.seq, *chosen.path, 0};
    next.ttd = route_delay(next.seq, next.path, problem_.tasks(), problem_.dist);
    commit(set, std::move(next));
    ++stats_.commits;
    heaps.erase(heaps.begin() + static_cast<long>(pick));

    for (TaskHeap& h : heaps) {
      h.entry_for(k) = make_potential(h.task(), set, k);
      h.reorder();
      update_heap_top(h, set, v);
    }
  }
}

// ---------------------------------------------------------------------------

std::vector<ActionSequence> assign_sequences(const Problem& problem, const AssignmentSet& set,
                                             std::span<const int> tasks, Strategy strategy) {
  const int agents = problem.agent_count();
  std::vector<ActionSequence> seqs;
  std::vector<int> starts;
  for (const auto& a : set.agents) {
    seqs.push_back(a.seq);
    starts.push_back(a.path.start_time);
  }
  if (tasks.empty()) return seqs;
  if (agents == 0) throw SolverIncomplete(tasks.front());

  struct Entry {
    std::optional<Insertion> ins;
    Cost cost() const { return ins ? ins->est_marginal : kInfiniteCost; }
  };
  auto evaluate = [&](int task, int k) {
    return Entry{best_insertion(seqs[k], problem.tasks()[task], problem.capacity(), starts[k],
                                problem.tasks(), problem.dist)};
  };
  auto top_two = [&](const std::vector<Entry>& row) {
    int best = -1;
    int second = -1;
    for (int k = 0; k < agents; ++k) {
      Cost c = row[k].cost();
      if (best < 0 || c < row[best].cost()) {
        second = best;
        best = k;
      } else if (second < 0 || c < row[second].cost()) {
        second = k;
      }
    }
    return std::pair{best, second};
  };

  std::vector<int> pending(tasks.begin(), tasks.end());
  std::sort(pending.begin(), pending.end());
  std::vector<std::vector<Entry>> rows;
  for (int task : pending) {
    std::vector<Entry> row;
    for (int k = 0; k < agents; ++k) row.push_back(evaluate(task, k));
    rows.push_back(std::move(row));
  }

  while (!pending.empty()) {
    std::size_t pick = 0;
    SelectionKey best_key;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      auto [b, s] = top_two(rows[i]);
      SelectionKey key = selection_key(rows[i][b].cost(),
                                       s >= 0 ? rows[i][s].cost() : kInfiniteCost, strategy);
      if (i == 0 || more_urgent(key, best_key)) {
        best_key = key;
        pick = i;
      }
    }
    int task = pending[pick];
    int k = top_two(rows[pick]).first;
    const auto& ins = rows[pick][k].ins;
    if (!ins) throw SolverIncomplete(task);
    seqs[k] = insert_task(seqs[k], problem.tasks()[task], ins->pickup_index, ins->dropoff_index);
    pending.erase(pending.begin() + static_cast<long>(pick));
    rows.erase(rows.begin() + static_cast<long>(pick));
    for (std::size_t i = 0; i < pending.size(); ++i) rows[i][k] = evaluate(pending[i], k);
  }
  return seqs;
}

void assign_decoupled(const Problem& problem, Router& router, AssignmentSet& set,
                      std::span<const int> tasks, Strategy strategy) {
  auto seqs = assign_sequences(problem, set, tasks, strategy);
  for (int k = 0; k < problem.agent_count(); ++k) {
    if (seqs[k] == set.agents[k].seq) continue;
    Assignment current = set.agents[k];
    set.table.unreserve(current.path);
    auto path = router.plan(seqs[k], set.table, current.path.start_time);
    if (!path) {
      set.table.reserve(current.path);
      int task = -1;
      for (const auto& a : seqs[k].actions)
        if (a.kind == ActionKind::Pickup) {
          task = a.task;
          break;
        }
      throw SolverIncomplete(task);
    }
    set.table.reserve(*path);
    Cost ttd = route_delay(seqs[k], *path, problem.tasks(), problem.dist);
    set.agents[k] = Assignment{std::move(seqs[k]), std::move(*path), ttd};
  }
}

Cost collision_ignoring_ttd(const Problem& problem, Strategy strategy) {
  AssignmentSet idle = make_idle_set(problem, 0);
  std::vector<int> all(problem.instance.tasks.size());
  std::iota(all.begin(), all.end(), 0);
  auto seqs = assign_sequences(problem, idle, all, strategy);
  Cost total = 0;
  for (const auto& s : seqs) total += estimate_delay(s, 0, problem.tasks(), problem.dist);
  return total;
}

std::vector<int> assigned_tasks(const AssignmentSet& set) {
  std::vector<int> out;
  for (const auto& a : set.agents)
    for (const auto& act : a.seq.actions)
      if (act.kind == ActionKind::Pickup) out.push_back(act.task);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace mapd
