#include "mapd/lns.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace mapd {

std::string to_string(DestroyStrategy s) {
  switch (s) {
    case DestroyStrategy::Random: return "dr";
    case DestroyStrategy::Worst: return "dw";
    case DestroyStrategy::Multiple: return "dm";
  }
  return "?";
}

std::optional<DestroyStrategy> parse_destroy(const std::string& name) {
  if (name == "dr") return DestroyStrategy::Random;
  if (name == "dw") return DestroyStrategy::Worst;
  if (name == "dm") return DestroyStrategy::Multiple;
  return std::nullopt;
}

namespace {

std::vector<int> tasks_of(const Assignment& a, const TaskFilter& destroyable) {
  std::vector<int> out;
  for (const auto& act : a.seq.actions)
    if (act.kind == ActionKind::Pickup && destroyable(act.task)) out.push_back(act.task);
  std::sort(out.begin(), out.end());
  return out;
}

// Draws up to `count` distinct elements uniformly (partial Fisher-Yates).
std::vector<int> sample(std::vector<int> pool, int count, Rng& rng) {
  int n = std::min<int>(count, static_cast<int>(pool.size()));
  for (int i = 0; i < n; ++i) std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
  pool.resize(n);
  return pool;
}

// Drops stale tabu entries and clears the list once every candidate is tabu.
void refresh_tabu(DestroyContext& ctx, const std::vector<int>& candidates) {
  std::set<int> kept;
  for (int t : candidates)
    if (ctx.tabu.count(t)) kept.insert(t);
  ctx.tabu = std::move(kept);
  if (!candidates.empty() && ctx.tabu.size() == candidates.size()) ctx.tabu.clear();
}

// Agents by decreasing route TTD, ties to the smaller id.
std::vector<int> agents_by_ttd(const AssignmentSet& set) {
  std::vector<int> order(set.agents.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return set.agents[a].ttd > set.agents[b].ttd; });
  return order;
}

std::vector<int> non_tabu(const std::vector<int>& tasks, const std::set<int>& tabu) {
  std::vector<int> out;
  for (int t : tasks)
    if (!tabu.count(t)) out.push_back(t);
  return out;
}

std::optional<std::vector<int>> finish(const Problem& problem, Router& router, AssignmentSet& set,
                                       std::vector<int> removed) {
  std::sort(removed.begin(), removed.end());
  if (!remove_tasks(problem, router, set, removed)) return std::nullopt;
  return removed;
}

}  // namespace

bool remove_tasks(const Problem& problem, Router& router, AssignmentSet& set,
                  const std::vector<int>& tasks) {
  if (tasks.empty()) return true;
  for (auto& a : set.agents) {
    auto& acts = a.seq.actions;
    auto removed = std::remove_if(acts.begin(), acts.end(), [&](const Action& act) {
      return act.task >= 0 && act.kind == ActionKind::Pickup &&
             std::binary_search(tasks.begin(), tasks.end(), act.task);
    });
    if (removed == acts.end()) continue;
    acts.erase(removed, acts.end());
    acts.erase(std::remove_if(acts.begin(), acts.end(),
                              [&](const Action& act) {
                                return act.kind == ActionKind::Dropoff &&
                                       std::binary_search(tasks.begin(), tasks.end(), act.task);
                              }),
               acts.end());
    set.table.unreserve(a.path);
    auto path = router.plan(a.seq, set.table, a.path.start_time);
    if (!path) return false;
    set.table.reserve(*path);
    a.path = std::move(*path);
    a.ttd = route_delay(a.seq, a.path, problem.tasks(), problem.dist);
  }
  return true;
}

std::optional<std::vector<int>> destroy_random(const Problem& problem, Router& router,
                                               AssignmentSet& set, DestroyContext& ctx,
                                               const TaskFilter& destroyable) {
  std::vector<int> pool;
  for (const auto& a : set.agents)
    for (int t : tasks_of(a, destroyable)) pool.push_back(t);
  std::sort(pool.begin(), pool.end());
  return finish(problem, router, set, sample(std::move(pool), ctx.group_size, ctx.rng));
}

std::optional<std::vector<int>> destroy_worst(const Problem& problem, Router& router,
                                              AssignmentSet& set, DestroyContext& ctx,
                                              const TaskFilter& destroyable) {
  std::vector<int> candidates;
  for (const auto& a : set.agents)
    for (int t : tasks_of(a, destroyable)) candidates.push_back(t);
  std::sort(candidates.begin(), candidates.end());
  refresh_tabu(ctx, candidates);

  std::vector<int> removed;
  for (int k : agents_by_ttd(set)) {
    auto open = non_tabu(tasks_of(set.agents[k], destroyable), ctx.tabu);
    if (open.empty()) continue;
    removed = sample(std::move(open), ctx.group_size, ctx.rng);
    break;
  }
  ctx.tabu.insert(removed.begin(), removed.end());
  return finish(problem, router, set, std::move(removed));
}

std::optional<std::vector<int>> destroy_multiple(const Problem& problem, Router& router,
                                                 AssignmentSet& set, DestroyContext& ctx,
                                                 const TaskFilter& destroyable) {
  std::vector<int> candidates;
  for (const auto& a : set.agents)
    for (int t : tasks_of(a, destroyable)) candidates.push_back(t);
  std::sort(candidates.begin(), candidates.end());
  refresh_tabu(ctx, candidates);

  const int group = std::min<int>(ctx.group_size, static_cast<int>(set.agents.size()));
  std::vector<int> removed;
  int contributors = 0;
  for (int k : agents_by_ttd(set)) {
    if (contributors == group) break;
    auto open = non_tabu(tasks_of(set.agents[k], destroyable), ctx.tabu);
    if (open.empty()) continue;
    removed.push_back(open[ctx.rng.index(open.size())]);
    ++contributors;
  }
  ctx.tabu.insert(removed.begin(), removed.end());
  return finish(problem, router, set, std::move(removed));
}

AssignmentSet improve(const Problem& problem, Router& router, AssignmentSet set,
                      DestroyContext& ctx, const ImproveBudget& budget,
                      const TaskFilter& destroyable, ImproveReport* report) {
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  ImproveReport local;
  ImproveReport& rep = report ? *report : local;
  rep.incumbent_history.push_back(set.total_ttd());

  auto exhausted = [&] {
    if (!budget.seconds && !budget.iterations) return true;
    if (budget.iterations && rep.iterations >= *budget.iterations) return true;
    if (budget.seconds &&
        std::chrono::duration<double>(Clock::now() - started).count() >= *budget.seconds)
      return true;
    return false;
  };

  while (!exhausted()) {
    ++rep.iterations;
    AssignmentSet trial = set;
    std::optional<std::vector<int>> removed;
    switch (ctx.strategy) {
      case DestroyStrategy::Random:
        removed = destroy_random(problem, router, trial, ctx, destroyable);
        break;
      case DestroyStrategy::Worst:
        removed = destroy_worst(problem, router, trial, ctx, destroyable);
        break;
      case DestroyStrategy::Multiple:
        removed = destroy_multiple(problem, router, trial, ctx, destroyable);
        break;
    }
    bool repaired = removed.has_value();
    if (repaired) {
      try {
        Assigner(problem, router, Strategy::RmcaR).assign_all(trial, *removed);
      } catch (const SolverIncomplete&) {
        repaired = false;
      }
    }
    if (!repaired) {
      ++rep.failed;
    } else if (trial.total_ttd() <= set.total_ttd()) {
      set = std::move(trial);
      ++rep.accepted;
    }
    rep.incumbent_history.push_back(set.total_ttd());
  }
  return set;
}

}  // namespace mapd
