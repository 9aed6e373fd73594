#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mapd/assigner.hpp"
#include "mapd/lns.hpp"

namespace mapd {

// One row of the task service log; -1 marks an event that has not happened.
struct ServiceRecord {
  int task = -1;
  int release = 0;
  int assigned_t = -1;
  int pickup_t = -1;
  int delivery_t = -1;
  int agent = -1;
  bool operator==(const ServiceRecord&) const = default;
};

enum class TaskState : std::uint8_t { Unreleased, Released, Assigned, Onboard, Delivered };

struct RunParams {
  StrategySpec strategy;
  std::optional<DestroyStrategy> lns;  // no improvement phase when unset
  int group_size = 5;
  ImproveBudget budget;                // per timestep in lifelong runs
  std::uint64_t lns_seed = 0;
};

struct RunReport {
  Cost ttd = 0;
  std::optional<Cost> relative_ttd;      // one-shot runs only
  int makespan = 0;
  std::vector<double> step_seconds;      // wall clock per simulated timestep
  double mean_seconds_per_step = 0.0;
  std::vector<ServiceRecord> log;        // indexed by task id
  std::vector<TimedPath> trajectories;   // executed cells of each agent from t = 0
};

// Discrete-time lifelong execution of one instance.
class Simulator {
 public:
  Simulator(const Problem& problem, RunParams params);

  int clock() const { return clock_; }
  bool done() const { return delivered_ == static_cast<int>(problem_.tasks().size()); }
  TaskState state(int task) const { return states_[task]; }
  const AssignmentSet& assignments() const { return set_; }
  // TTD accumulated over the tasks delivered so far.
  Cost accumulated_ttd() const { return ttd_; }

  // Release, assign, improve, then execute one timestep. SolverIncomplete
  // carries the clock at which assignment failed.
  void step();

  RunReport report() const;

 private:
  void execute();

  const Problem& problem_;
  RunParams params_;
  Router router_;
  AssignmentSet set_;
  DestroyContext lns_ctx_;
  std::vector<int> release_order_;
  std::size_t next_release_ = 0;
  int clock_ = 0;
  int delivered_ = 0;
  Cost ttd_ = 0;
  std::vector<TaskState> states_;
  std::vector<ServiceRecord> log_;
  std::vector<TimedPath> trajectories_;
  std::vector<double> step_seconds_;
};

// Runs until every task is delivered. Throws std::runtime_error when the clock
// exceeds 100 * tasks * (largest endpoint/depot distance).
RunReport run_lifelong(const Problem& problem, const RunParams& params);

// All tasks known at time 0: assign once, optionally improve, and report the
// TTD relative to the collision-ignoring RMCA(r) baseline.
RunReport run_oneshot(const Problem& problem, const RunParams& params);

// Service log of a fully planned assignment set.
std::vector<ServiceRecord> service_log(const AssignmentSet& set, const Instance& instance,
                                       int assigned_t = 0);

}  // namespace mapd
