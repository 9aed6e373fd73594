#pragma once

#include <span>
#include <string>
#include <vector>

#include "mapd/assigner.hpp"
#include "mapd/lifelong.hpp"
#include "mapd/rational.hpp"

namespace mapd {

enum class ViolationKind : std::uint8_t {
  UnassignedTask,
  DoubleAssigned,
  Capacity,
  VertexConflict,
  EdgeConflict,
  PrematurePickup,
  Order,
  Teleport,
  WrongCarrier,
};

std::string to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::vector<int> ids;  // agents for conflicts and moves, otherwise task then agent
  int t = 0;
  bool operator==(const Violation&) const = default;
};

// `kind ids t` with ids comma-separated.
std::string to_string(const Violation& v);

struct ServiceEvent {
  int task = -1;
  int agent = -1;
  ActionKind kind = ActionKind::Pickup;  // Pickup or Dropoff
  int t = 0;
  bool operator==(const ServiceEvent&) const = default;
};

std::vector<ServiceEvent> service_events(const AssignmentSet& set);
std::vector<ServiceEvent> service_events(std::span<const ServiceRecord> log);

// Every broken constraint of an executed solution: each task picked and
// dropped exactly once by one agent, no pickup before release, capacity, unit
// moves on free cells from the depot, events at the task's cells, and no
// vertex or swap collisions. Agents without a path rest at their depot.
std::vector<Violation> validate(const Instance& instance, const GridMap& map,
                                std::span<const TimedPath> paths,
                                std::span<const ServiceEvent> events);
std::vector<Violation> validate(const Problem& problem, const AssignmentSet& set);

// Sum of (delivery - release - shortest origin-destination time) over the
// delivered tasks of the log.
Cost ttd(std::span<const ServiceRecord> log, const Instance& instance, const DistanceTable& dist);

struct NormalizedMetrics {
  Rational ttd;       // TTD * agents / (tasks * f)
  Rational makespan;  // makespan * agents * f / tasks
};

NormalizedMetrics normalized_metrics(Cost ttd, long makespan, long tasks, long agents,
                                     const Rational& frequency);

struct OracleResult {
  Cost ttd = kInfiniteCost;
  std::vector<ActionSequence> sequences;  // by agent
  std::vector<int> priority;              // planning order of the agents with tasks
};

// Minimum TTD over every task partition, per-agent action order and planning
// order, each routed from an idle start with the prioritized router. Throws
// std::invalid_argument beyond 2 agents, 3 tasks, capacity 2 or an 8x8 grid.
OracleResult brute_force_oracle(const Problem& problem);

}  // namespace mapd
