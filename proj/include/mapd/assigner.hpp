#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mapd/grid_world.hpp"
#include "mapd/instance.hpp"
#include "mapd/router.hpp"

namespace mapd {

using Cost = long;
inline constexpr Cost kInfiniteCost = std::numeric_limits<Cost>::max();

enum class Strategy : std::uint8_t { Mca, RmcaA, RmcaR };

// Full solver selection as named on the command line: mca, rmca-a, rmca-r,
// mca-fp, rmca-r-fp (the -fp variants assign first, then route with fixed
// agent-id priorities).
struct StrategySpec {
  Strategy selection = Strategy::RmcaR;
  bool decoupled = false;
  bool operator==(const StrategySpec&) const = default;
};

std::string to_string(Strategy s);
std::string to_string(const StrategySpec& s);
std::optional<StrategySpec> parse_strategy(const std::string& name);

// Number of heap entries kept conflict-free: 1 for MCA, 2 for the regret variants.
inline int repair_depth(Strategy s) { return s == Strategy::Mca ? 1 : 2; }

class SolverIncomplete : public std::runtime_error {
 public:
  SolverIncomplete(int task, int clock = -1)
      : std::runtime_error("no conflict-free assignment for task " + std::to_string(task) +
                           (clock >= 0 ? " at timestep " + std::to_string(clock) : "")),
        task_(task),
        clock_(clock) {}
  int task() const { return task_; }
  int clock() const { return clock_; }

 private:
  int task_;
  int clock_;
};

// Shared read-only context of one solve.
struct Problem {
  const GridMap& map;
  const DistanceTable& dist;
  const Instance& instance;

  std::span<const Task> tasks() const { return instance.tasks; }
  int capacity() const { return instance.capacity; }
  int agent_count() const { return static_cast<int>(instance.agents.size()); }
};

struct Assignment {
  ActionSequence seq;
  TimedPath path;
  Cost ttd = 0;
};

// The committed assignment of every agent plus the reservations of their paths.
struct AssignmentSet {
  std::vector<Assignment> agents;
  ReservationTable table;

  Cost total_ttd() const;
  std::vector<TimedPath> paths() const;
};

// Every agent idle at its depot from `start_time`.
AssignmentSet make_idle_set(const Problem& problem, int start_time = 0);

// Replaces agent k's assignment and its reservations.
void commit(AssignmentSet& set, Assignment next);

// Collision-ignoring route delay: travel by shortest distances, waiting at
// pickups until release. kInfiniteCost if some leg is unreachable.
Cost estimate_delay(const ActionSequence& seq, int start_time, std::span<const Task> tasks,
                    const DistanceTable& dist);

struct Insertion {
  int pickup_index = 0;   // position of the pickup in the new sequence
  int dropoff_index = 0;  // position of the dropoff in the new sequence
  Cost est_marginal = 0;
  bool operator==(const Insertion&) const = default;
};

ActionSequence insert_task(const ActionSequence& seq, const Task& task, int pickup_index,
                           int dropoff_index);

// Cheapest capacity-feasible insertion by estimated delay; ties go to the
// smallest pickup index, then the smallest dropoff index.
std::optional<Insertion> best_insertion(const ActionSequence& seq, const Task& task, int capacity,
                                        int start_time, std::span<const Task> tasks,
                                        const DistanceTable& dist);

struct PotentialAssignment {
  int task = -1;
  int agent = -1;
  ActionSequence seq;
  std::optional<TimedPath> path;
  Cost est_marginal = kInfiniteCost;
  Cost real_marginal = kInfiniteCost;
  bool insertable = false;
  std::uint64_t planned_version = 0;
};

// Potential assignments of one task, exactly one per agent, ordered by
// (real_marginal, agent).
class TaskHeap {
 public:
  TaskHeap(int task, std::vector<PotentialAssignment> entries);

  int task() const { return task_; }
  int size() const { return static_cast<int>(entries_.size()); }
  const PotentialAssignment& top(int rank = 0) const { return entries_[order_[rank]]; }
  PotentialAssignment& entry_for(int agent) { return entries_[agent]; }
  const PotentialAssignment& entry_for(int agent) const { return entries_[agent]; }
  std::span<const PotentialAssignment> entries() const { return entries_; }

  // Restores the ordering after entries changed.
  void reorder();

 private:
  int task_;
  std::vector<PotentialAssignment> entries_;
  std::vector<int> order_;
};

// Urgency of a task under a strategy. MCA: smallest best marginal cost.
// RMCA(a): largest second - best. RMCA(r): largest second / best, with
// (second + 1) / 1 when best is 0. Tasks whose best cost is infinite rank last;
// an infinite second best (or a single agent) is an unbounded regret.
struct SelectionKey {
  bool feasible = false;
  bool unbounded = false;
  bool minimize = false;
  Cost num = 0;
  Cost den = 1;
};

SelectionKey selection_key(Cost best, Cost second, Strategy strategy);
SelectionKey selection_key(const TaskHeap& heap, Strategy strategy);

// Strictly more urgent; equal keys fall back to the caller's task-id order.
bool more_urgent(const SelectionKey& a, const SelectionKey& b);

struct AssignerStats {
  long plans = 0;
  long replans = 0;
  long commits = 0;
};

// Simultaneous task assignment and prioritized path planning.
class Assigner {
 public:
  Assigner(const Problem& problem, Router& router, Strategy strategy);

  Strategy strategy() const { return strategy_; }
  const AssignerStats& stats() const { return stats_; }

  PotentialAssignment make_potential(int task, const AssignmentSet& set, int agent);

  // Replans the top-v entries of `heap` until none of them conflicts with the
  // reservations in `set`. Returns the number of replans.
  int update_heap_top(TaskHeap& heap, const AssignmentSet& set, int v);

  // Assigns every task in `tasks` into `set`. Throws SolverIncomplete.
  void assign_all(AssignmentSet& set, std::span<const int> tasks);

 private:
  void replan(PotentialAssignment& entry, const AssignmentSet& set);

  const Problem& problem_;
  Router& router_;
  Strategy strategy_;
  AssignerStats stats_;
};

// Assignment by estimated marginal costs only (no routing). Returns the new
// sequence of every agent.
std::vector<ActionSequence> assign_sequences(const Problem& problem, const AssignmentSet& set,
                                             std::span<const int> tasks, Strategy strategy);

// Assign with estimated costs, then route agents one by one in id order.
void assign_decoupled(const Problem& problem, Router& router, AssignmentSet& set,
                      std::span<const int> tasks, Strategy strategy);

// TTD of RMCA(r) when collisions are ignored, from an idle start at time 0.
Cost collision_ignoring_ttd(const Problem& problem, Strategy strategy = Strategy::RmcaR);

// Tasks picked up within some agent's current sequence.
std::vector<int> assigned_tasks(const AssignmentSet& set);

}  // namespace mapd
