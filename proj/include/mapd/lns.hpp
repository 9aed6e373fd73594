#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mapd/assigner.hpp"
#include "mapd/rng.hpp"

namespace mapd {

enum class DestroyStrategy : std::uint8_t { Random, Worst, Multiple };

std::string to_string(DestroyStrategy s);                            // dr, dw, dm
std::optional<DestroyStrategy> parse_destroy(const std::string& name);

struct DestroyContext {
  DestroyStrategy strategy = DestroyStrategy::Random;
  int group_size = 1;
  std::set<int> tabu;
  Rng rng{0};
};

// Stops at whichever limit is reached first; with neither set, no rounds run.
struct ImproveBudget {
  std::optional<double> seconds;
  std::optional<long> iterations;
};

struct ImproveReport {
  long iterations = 0;
  long accepted = 0;
  long failed = 0;
  std::vector<Cost> incumbent_history;  // incumbent TTD after every round
};

using TaskFilter = std::function<bool(int task)>;

// Removes `tasks` from their routes and replans each affected agent once, in
// agent-id order. Returns false if some shortened route cannot be replanned.
bool remove_tasks(const Problem& problem, Router& router, AssignmentSet& set,
                  const std::vector<int>& tasks);

// Each destroy operator picks tasks among the assigned (not yet picked up)
// tasks accepted by `destroyable`, removes them from `set`, and returns them;
// nullopt when replanning the shortened routes fails.
std::optional<std::vector<int>> destroy_random(const Problem& problem, Router& router,
                                               AssignmentSet& set, DestroyContext& ctx,
                                               const TaskFilter& destroyable);
std::optional<std::vector<int>> destroy_worst(const Problem& problem, Router& router,
                                              AssignmentSet& set, DestroyContext& ctx,
                                              const TaskFilter& destroyable);
std::optional<std::vector<int>> destroy_multiple(const Problem& problem, Router& router,
                                                 AssignmentSet& set, DestroyContext& ctx,
                                                 const TaskFilter& destroyable);

// Destroy-and-repair loop; repairs with RMCA(r) and keeps a round whenever its
// total TTD is not worse than the incumbent's.
AssignmentSet improve(const Problem& problem, Router& router, AssignmentSet set,
                      DestroyContext& ctx, const ImproveBudget& budget,
                      const TaskFilter& destroyable, ImproveReport* report = nullptr);

}  // namespace mapd
