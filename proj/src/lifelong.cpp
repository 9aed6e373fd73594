#include "mapd/lifelong.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace mapd {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

long largest_distance(const DistanceTable& dist) {
  long best = 1;
  for (Cell s : dist.sources())
    for (int d : dist.from(s))
      if (d != kUnreachable) best = std::max<long>(best, d);
  return best;
}

int makespan_of(const std::vector<ServiceRecord>& log) {
  int m = 0;
  for (const auto& r : log) m = std::max(m, r.delivery_t);
  return m;
}

}  // namespace

Simulator::Simulator(const Problem& problem, RunParams params)
    : problem_(problem),
      params_(std::move(params)),
      router_(problem.map, problem.dist, problem.tasks()),
      set_(make_idle_set(problem, 0)),
      lns_ctx_{params_.lns.value_or(DestroyStrategy::Random), params_.group_size, {},
               Rng(params_.lns_seed)} {
  const auto tasks = problem_.tasks();
  release_order_.resize(tasks.size());
  std::iota(release_order_.begin(), release_order_.end(), 0);
  std::stable_sort(release_order_.begin(), release_order_.end(),
                   [&](int a, int b) { return tasks[a].release < tasks[b].release; });
  states_.assign(tasks.size(), TaskState::Unreleased);
  log_.resize(tasks.size());
  for (const Task& t : tasks) log_[t.id] = ServiceRecord{t.id, t.release};
  for (const Agent& a : problem_.instance.agents) trajectories_.push_back(TimedPath{a.id, 0, {}, {}});
}

void Simulator::step() {
  const auto started = Clock::now();
  const auto tasks = problem_.tasks();

  std::vector<int> released;
  while (next_release_ < release_order_.size() &&
         tasks[release_order_[next_release_]].release <= clock_) {
    int id = release_order_[next_release_++];
    states_[id] = TaskState::Released;
    released.push_back(id);
  }

  if (!released.empty()) {
    try {
      if (params_.strategy.decoupled)
        assign_decoupled(problem_, router_, set_, released, params_.strategy.selection);
      else
        Assigner(problem_, router_, params_.strategy.selection).assign_all(set_, released);
    } catch (const SolverIncomplete& e) {
      throw SolverIncomplete(e.task(), clock_);
    }
    for (int id : released) {
      states_[id] = TaskState::Assigned;
      log_[id].assigned_t = clock_;
    }
    if (params_.lns) {
      set_ = improve(problem_, router_, std::move(set_), lns_ctx_, params_.budget,
                     [this](int task) { return states_[task] == TaskState::Assigned; });
    }
    for (const auto& a : set_.agents)
      for (const auto& act : a.seq.actions)
        if (act.kind == ActionKind::Pickup) log_[act.task].agent = a.seq.agent;
  }

  execute();
  step_seconds_.push_back(seconds_since(started));
}

void Simulator::execute() {
  const int now = clock_;
  const auto tasks = problem_.tasks();
  ReservationTable next(problem_.map, now + 1);

  for (auto& a : set_.agents) {
    auto& acts = a.seq.actions;
    auto& path = a.path;
    const int k = a.seq.agent;
    if (path.start_time != now)
      throw std::logic_error("committed path of agent " + std::to_string(k) +
                             " does not start at the current timestep");
    trajectories_[k].cells.push_back(path.at(now));

    std::size_t i = 1;
    for (; i < acts.size() && path.event_times[i] == now; ++i) {
      const Action& act = acts[i];
      ServiceRecord& rec = log_[act.task < 0 ? 0 : act.task];
      if (act.kind == ActionKind::Pickup) {
        states_[act.task] = TaskState::Onboard;
        rec.pickup_t = now;
        rec.agent = k;
      } else if (act.kind == ActionKind::Dropoff) {
        const Task& task = tasks[act.task];
        states_[act.task] = TaskState::Delivered;
        rec.delivery_t = now;
        ttd_ += now - task.release - problem_.dist(task.origin, task.destination);
        ++delivered_;
      } else {
        break;
      }
    }
    acts.erase(acts.begin() + 1, acts.begin() + static_cast<long>(i));
    path.event_times.erase(path.event_times.begin() + 1,
                           path.event_times.begin() + static_cast<long>(i));

    if (path.cells.size() > 1) path.cells.erase(path.cells.begin());
    path.start_time = now + 1;
    acts.front().cell = path.cells.front();
    for (int& et : path.event_times) et = std::max(et, now + 1);
    a.ttd = route_delay(a.seq, path, tasks, problem_.dist);
    next.reserve(path);
  }
  set_.table = std::move(next);
  ++clock_;
}

RunReport Simulator::report() const {
  RunReport r;
  r.ttd = ttd_;
  r.makespan = makespan_of(log_);
  r.step_seconds = step_seconds_;
  if (!step_seconds_.empty())
    r.mean_seconds_per_step =
        std::accumulate(step_seconds_.begin(), step_seconds_.end(), 0.0) / step_seconds_.size();
  r.log = log_;
  r.trajectories = trajectories_;
  return r;
}

RunReport run_lifelong(const Problem& problem, const RunParams& params) {
  Simulator sim(problem, params);
  const long limit =
      100L * static_cast<long>(problem.tasks().size()) * largest_distance(problem.dist);
  while (!sim.done()) {
    if (sim.clock() > limit)
      throw std::runtime_error("simulation did not finish by timestep " + std::to_string(limit) +
                               " (" + std::to_string(sim.report().log.size()) + " tasks)");
    sim.step();
  }
  return sim.report();
}

std::vector<ServiceRecord> service_log(const AssignmentSet& set, const Instance& instance,
                                       int assigned_t) {
  std::vector<ServiceRecord> log(instance.tasks.size());
  for (const Task& t : instance.tasks) log[t.id] = ServiceRecord{t.id, t.release};
  for (const auto& a : set.agents) {
    const auto& acts = a.seq.actions;
    for (std::size_t i = 0; i < acts.size(); ++i) {
      if (acts[i].task < 0) continue;
      ServiceRecord& rec = log[acts[i].task];
      if (acts[i].kind == ActionKind::Pickup) {
        rec.assigned_t = assigned_t;
        rec.pickup_t = a.path.event_times[i];
        rec.agent = a.seq.agent;
      } else if (acts[i].kind == ActionKind::Dropoff) {
        rec.delivery_t = a.path.event_times[i];
      }
    }
  }
  return log;
}

RunReport run_oneshot(const Problem& problem, const RunParams& params) {
  Router router(problem.map, problem.dist, problem.tasks());
  AssignmentSet set = make_idle_set(problem, 0);
  std::vector<int> all(problem.tasks().size());
  std::iota(all.begin(), all.end(), 0);

  const auto started = Clock::now();
  if (params.strategy.decoupled)
    assign_decoupled(problem, router, set, all, params.strategy.selection);
  else
    Assigner(problem, router, params.strategy.selection).assign_all(set, all);
  if (params.lns) {
    DestroyContext ctx{*params.lns, params.group_size, {}, Rng(params.lns_seed)};
    set = improve(problem, router, std::move(set), ctx, params.budget, [](int) { return true; });
  }
  const double elapsed = seconds_since(started);

  RunReport r;
  r.ttd = set.total_ttd();
  r.relative_ttd = r.ttd - collision_ignoring_ttd(problem);
  r.log = service_log(set, problem.instance, 0);
  r.makespan = makespan_of(r.log);
  r.step_seconds = {elapsed};
  r.mean_seconds_per_step = elapsed;
  r.trajectories = set.paths();
  return r;
}

}  // namespace mapd
