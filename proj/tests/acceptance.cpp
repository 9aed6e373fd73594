// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mapd/cli.hpp"
#include "mapd/lifelong.hpp"
#include "mapd/lns.hpp"
#include "mapd/validator.hpp"

using namespace mapd;

namespace {

const std::string kMapPath = MAPD_DATA_DIR "/warehouse.map";

const GridMap& warehouse() {
  static GridMap m = load_map(kMapPath);
  return m;
}

const DistanceTable& warehouse_dist() {
  static DistanceTable d(warehouse());
  return d;
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Log-vs-accumulator mismatches seen in the validity and capacity runs.
int g_ttd_mismatches = 0;
int g_ttd_checked = 0;

void check_log_ttd(const RunReport& rep, const Instance& inst) {
  ++g_ttd_checked;
  if (ttd(rep.log, inst, warehouse_dist()) != rep.ttd) ++g_ttd_mismatches;
}

std::string mean(double sum, int n) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", n ? sum / n : 0.0);
  return buf;
}

const std::vector<std::string> kStrategies{"mca", "rmca-a", "rmca-r", "mca-fp", "rmca-r-fp"};

Outcome validity_suite() {
  const int agent_opts[] = {5, 10, 20};
  const int task_opts[] = {10, 50};
  const int cap_opts[] = {1, 3, 5};
  int runs = 0, incomplete = 0, violations = 0;
  for (int i = 0; i < 100; ++i) {
    Instance inst = generate_instance(
        warehouse(), {task_opts[(i / 3) % 2], agent_opts[i % 3], cap_opts[(i / 6) % 3],
                      std::nullopt, static_cast<std::uint64_t>(1000 + i)});
    Problem problem{warehouse(), warehouse_dist(), inst};
    for (const std::string& name : kStrategies)
      for (bool lns : {false, true}) {
        RunParams params;
        params.strategy = *parse_strategy(name);
        if (lns) {
          params.lns = static_cast<DestroyStrategy>(i % 3);
          params.group_size = 5;
          params.budget.iterations = 10;
          params.lns_seed = inst.seed;
        }
        ++runs;
        RunReport rep;
        try {
          rep = run_oneshot(problem, params);
        } catch (const SolverIncomplete&) {
          ++incomplete;
          continue;
        }
        auto events = service_events(rep.log);
        violations += static_cast<int>(validate(inst, warehouse(), rep.trajectories, events).size());
        check_log_ttd(rep, inst);
      }
  }
  return {violations == 0, std::to_string(runs) + " runs, " + std::to_string(violations) +
                               " violations, " + std::to_string(incomplete) + " incomplete"};
}

GridMap tiny_map(Rng& rng, int h, int w, int depots) {
  while (true) {
    std::vector<std::string> rows(h, std::string(w, '.'));
    for (auto& r : rows)
      for (char& ch : r)
        if (rng.below(100) < 15) ch = '@';
    auto place = [&](char kind, int count) {
      for (int i = 0; i < count; ++i)
        for (int tries = 0; tries < 1000; ++tries) {
          int r = rng.index(h), c = rng.index(w);
          if (rows[r][c] == '.' || rows[r][c] == '@') {
            rows[r][c] = kind;
            break;
          }
        }
    };
    place('e', 4);
    place('r', depots);
    std::string text;
    for (const auto& r : rows) text += r + "\n";
    try {
      GridMap m = parse_map(text);
      if (static_cast<int>(m.depots().size()) == depots && m.endpoints().size() >= 2) return m;
    } catch (const ParseError&) {
    }
  }
}

Outcome oracle_dominance() {
  Rng rng(31337);
  int instances = 0, dominated = 0, heuristic_runs = 0, attained = 0, polished = 0;
  while (instances < 50) {
    const int agents = 1 + rng.index(2);
    GridMap m = tiny_map(rng, 3 + rng.index(6), 3 + rng.index(6), agents);
    DistanceTable dist(m);
    Instance inst = generate_instance(
        m, {1 + rng.index(3), agents, 1 + rng.index(2), std::nullopt, rng.next()});
    Problem problem{m, dist, inst};
    OracleResult best = brute_force_oracle(problem);
    if (best.ttd == kInfiniteCost) continue;  // no prioritized solution exists at all
    ++instances;
    Router router(m, dist, problem.tasks());
    std::vector<int> ids(inst.tasks.size());
    std::iota(ids.begin(), ids.end(), 0);

    for (const std::string& name : kStrategies) {
      StrategySpec spec = *parse_strategy(name);
      AssignmentSet set = make_idle_set(problem);
      try {
        if (spec.decoupled)
          assign_decoupled(problem, router, set, ids, spec.selection);
        else
          Assigner(problem, router, spec.selection).assign_all(set, ids);
      } catch (const SolverIncomplete&) {
        continue;
      }
      ++heuristic_runs;
      dominated += set.total_ttd() >= best.ttd;
    }

    AssignmentSet set = make_idle_set(problem);
    try {
      Assigner(problem, router, Strategy::RmcaR).assign_all(set, ids);
    } catch (const SolverIncomplete&) {
      continue;
    }
    DestroyContext ctx{DestroyStrategy::Random, 1, {}, Rng(inst.seed)};
    AssignmentSet out =
        improve(problem, router, set, ctx, {std::nullopt, 500L}, [](int) { return true; });
    ++heuristic_runs;
    ++polished;
    dominated += out.total_ttd() >= best.ttd;
    attained += out.total_ttd() == best.ttd;
  }
  const bool pass = dominated == heuristic_runs && attained * 10 >= instances * 7;
  return {pass, std::to_string(dominated) + "/" + std::to_string(heuristic_runs) +
                    " heuristic runs >= oracle; rmca-r+DR(1,500) attains oracle on " +
                    std::to_string(attained) + "/" + std::to_string(instances) + " instances (" +
                    std::to_string(polished) + " solved)"};
}

Outcome lns_monotonicity() {
  int runs = 0, counterexamples = 0, invalid = 0;
  for (int i = 0; i < 200; ++i) {
    Instance inst = generate_instance(warehouse(), {10 + i % 31, 3 + i % 10, 1 + i % 5,
                                                    std::nullopt, static_cast<std::uint64_t>(5000 + i)});
    Problem problem{warehouse(), warehouse_dist(), inst};
    Router router(warehouse(), warehouse_dist(), problem.tasks());
    AssignmentSet set = make_idle_set(problem);
    std::vector<int> ids(inst.tasks.size());
    std::iota(ids.begin(), ids.end(), 0);
    try {
      Assigner(problem, router, static_cast<Strategy>(i % 3)).assign_all(set, ids);
    } catch (const SolverIncomplete&) {
      continue;
    }
    DestroyContext ctx{static_cast<DestroyStrategy>(i % 3), 1 + i % 6, {}, Rng(i)};
    ImproveReport rep;
    AssignmentSet out =
        improve(problem, router, set, ctx, {std::nullopt, 15L}, [](int) { return true; }, &rep);
    ++runs;
    const auto& h = rep.incumbent_history;
    bool ok = !h.empty() && h.front() == set.total_ttd() && h.back() == out.total_ttd() &&
              out.total_ttd() <= set.total_ttd();
    for (std::size_t k = 1; k < h.size(); ++k) ok = ok && h[k] <= h[k - 1];
    counterexamples += !ok;
    invalid += !validate(problem, out).empty();
  }
  return {runs == 200 && counterexamples == 0 && invalid == 0,
          std::to_string(runs) + " runs, " + std::to_string(counterexamples) +
              " counterexamples, " + std::to_string(invalid) + " invalid results"};
}

Outcome oneshot_trend() {
  struct Cell {
    int capacity, agents;
  };
  const Cell cells[] = {{1, 20}, {1, 50}, {5, 20}, {5, 50}};
  std::map<std::pair<int, int>, std::map<std::string, double>> means;
  std::ostringstream detail;
  bool decoupled_never_best = true;
  for (const Cell& c : cells) {
    std::map<std::string, double> sum;
    int common = 0;
    for (int seed = 0; seed < 25; ++seed) {
      Instance inst = generate_instance(warehouse(), {100, c.agents, c.capacity, std::nullopt,
                                                      static_cast<std::uint64_t>(seed)});
      Problem problem{warehouse(), warehouse_dist(), inst};
      std::map<std::string, Cost> ttds;
      for (const std::string& name : kStrategies) {
        RunParams params;
        params.strategy = *parse_strategy(name);
        try {
          ttds[name] = run_oneshot(problem, params).ttd;
        } catch (const SolverIncomplete&) {
        }
      }
      if (ttds.size() != kStrategies.size()) continue;  // compare over seeds every strategy solved
      ++common;
      for (const auto& [name, v] : ttds) sum[name] += static_cast<double>(v);
    }
    std::string best;
    for (const std::string& name : kStrategies) {
      means[{c.capacity, c.agents}][name] = common ? sum[name] / common : 0.0;
      if (best.empty() || sum[name] < sum[best]) best = name;
    }
    if (parse_strategy(best)->decoupled) decoupled_never_best = false;
    detail << " cap" << c.capacity << "/ag" << c.agents << "(" << common << " seeds):";
    for (const std::string& name : kStrategies) detail << " " << name << "=" << mean(sum[name], common);
  }
  const bool a = means[{1, 20}]["mca"] <= means[{1, 20}]["rmca-r"];
  const bool b = means[{5, 50}]["rmca-r"] < means[{5, 50}]["mca"];
  return {a && b && decoupled_never_best,
          std::string("(a) ") + (a ? "ok" : "violated") + " (b) " + (b ? "ok" : "violated") +
              " (c) " + (decoupled_never_best ? "ok" : "violated") + ";" + detail.str()};
}

Outcome capacity_trend() {
  double ttd_sum[2] = {0, 0}, span_sum[2] = {0, 0};
  int solved[2] = {0, 0};
  int violations = 0;
  const int caps[2] = {1, 3};
  for (int c = 0; c < 2; ++c)
    for (int seed = 0; seed < 25; ++seed) {
      Instance inst = generate_instance(warehouse(), {100, 20, caps[c], Rational(2),
                                                      static_cast<std::uint64_t>(seed)});
      Problem problem{warehouse(), warehouse_dist(), inst};
      RunParams params;
      params.lns = DestroyStrategy::Random;
      params.group_size = 5;
      params.budget.iterations = 50;
      params.lns_seed = inst.seed;
      RunReport rep;
      try {
        rep = run_lifelong(problem, params);
      } catch (const SolverIncomplete&) {
        continue;
      }
      ++solved[c];
      ttd_sum[c] += static_cast<double>(rep.ttd);
      span_sum[c] += rep.makespan;
      auto events = service_events(rep.log);
      violations += static_cast<int>(validate(inst, warehouse(), rep.trajectories, events).size());
      check_log_ttd(rep, inst);
    }
  const double t1 = ttd_sum[0] / std::max(1, solved[0]), t3 = ttd_sum[1] / std::max(1, solved[1]);
  const double m1 = span_sum[0] / std::max(1, solved[0]), m3 = span_sum[1] / std::max(1, solved[1]);
  const double ratio = t3 > 0 ? t1 / t3 : 0.0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "mean TTD cap1=%.1f cap3=%.1f ratio=%.2f; mean makespan cap1=%.1f cap3=%.1f; "
                "solved %d+%d/50; %d violations",
                t1, t3, ratio, m1, m3, solved[0], solved[1], violations);
  return {solved[0] == 25 && solved[1] == 25 && t3 < t1 && m3 < m1 && ratio >= 1.5 &&
              violations == 0,
          buf};
}

std::string strip_columns(const std::string& csv, const std::vector<std::string>& names) {
  std::istringstream in(csv);
  std::string line, out;
  std::vector<bool> drop;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    if (drop.empty())
      for (const auto& x : f)
        drop.push_back(std::find(names.begin(), names.end(), x) != names.end());
    for (std::size_t i = 0; i < f.size(); ++i)
      if (i >= drop.size() || !drop[i]) out += f[i] + ",";
    out += "\n";
  }
  return out;
}

Outcome determinism() {
  const std::vector<std::vector<std::string>> commands{
      {"--map", kMapPath, "--seed", "21", "solve", "--agents", "20", "--tasks", "60", "--capacity",
       "3", "--strategy", "rmca-r", "--lns", "dr", "--lns-iters", "30"},
      {"--map", kMapPath, "--seed", "21", "solve", "--agents", "10", "--tasks", "40", "--strategy",
       "rmca-r-fp", "--lns", "dm", "--lns-iters", "20"},
      {"--map", kMapPath, "--seed", "22", "lifelong", "--agents", "15", "--tasks", "50",
       "--capacity", "2", "--freq", "2", "--lns", "dw", "--lns-iters", "10"},
      {"--map", kMapPath, "--seed", "23", "bench", "--agents", "5,10", "--capacity", "1,3",
       "--tasks", "20", "--strategies", "mca,rmca-r,mca-fp", "--lns-set", "none,dr",
       "--lns-iters", "5", "--reps", "3"},
      {"--map", kMapPath, "--seed", "24", "--jobs", "2", "bench", "--mode", "lifelong", "--agents",
       "8", "--capacity", "2", "--tasks", "20", "--freq", "1,2", "--lns-set", "dr", "--lns-iters",
       "5", "--reps", "2"}};
  const std::vector<std::string> clock_columns{"mean_t_per_ts", "mean_runtime"};
  int identical = 0;
  for (const auto& cmd : commands) {
    std::ostringstream o1, e1, o2, e2;
    int c1 = run_cli(cmd, o1, e1), c2 = run_cli(cmd, o2, e2);
    if (c1 == 0 && c2 == 0 &&
        strip_columns(o1.str(), clock_columns) == strip_columns(o2.str(), clock_columns))
      ++identical;
  }
  return {identical == static_cast<int>(commands.size()),
          std::to_string(identical) + "/" + std::to_string(commands.size()) +
              " invocations byte-identical outside wall-clock columns"};
}

Outcome formulas() {
  Rng rng(777);
  int exact = 0;
  for (int i = 0; i < 10; ++i) {
    const std::int64_t t = rng.below(100000), span = rng.below(10000), n = 1 + rng.below(1000),
                       a = 1 + rng.below(200), fn = 1 + rng.below(12), fd = 1 + rng.below(12);
    auto got = normalized_metrics(t, span, n, a, Rational(fn, fd));
    // By hand: ttd * a / (n * f) = ttd * a * fd / (n * fn); makespan * a * fn / (n * fd).
    auto reduced = [](std::int64_t num, std::int64_t den) {
      std::int64_t g = std::gcd(num, den);
      return std::pair{num / g, den / g};
    };
    auto want_ttd = reduced(t * a * fd, n * fn);
    auto want_span = reduced(span * a * fn, n * fd);
    exact += got.ttd.num() == want_ttd.first && got.ttd.den() == want_ttd.second &&
             got.makespan.num() == want_span.first && got.makespan.den() == want_span.second;
  }
  const bool pass = exact == 10 && g_ttd_mismatches == 0 && g_ttd_checked > 0;
  return {pass, std::to_string(exact) + "/10 normalized tuples exact; log TTD matches the run "
                                        "accumulator on " +
                    std::to_string(g_ttd_checked - g_ttd_mismatches) + "/" +
                    std::to_string(g_ttd_checked) + " runs of criteria 1 and 5"};
}

int select(const std::vector<std::vector<Cost>>& table, Strategy s) {
  int chosen = -1;
  SelectionKey best;
  for (int i = 0; i < static_cast<int>(table.size()); ++i) {
    auto row = table[i];
    std::sort(row.begin(), row.end());
    SelectionKey key = selection_key(row[0], row.size() > 1 ? row[1] : kInfiniteCost, s);
    if (chosen < 0 || more_urgent(key, best)) {
      best = key;
      chosen = i;
    }
  }
  return chosen;
}

Outcome regret_selection() {
  const std::vector<std::vector<Cost>> divergence{{10, 30}, {2, 4}};
  const bool diverges = select(divergence, Strategy::Mca) == 1 &&
                        select(divergence, Strategy::RmcaA) == 0 &&
                        select(divergence, Strategy::RmcaR) == 0;
  Rng rng(4096);
  int invariant = 0;
  for (int i = 0; i < 100; ++i) {
    const int n = 2 + rng.index(8), m = 2 + rng.index(6);
    std::vector<std::vector<Cost>> table(n, std::vector<Cost>(m));
    for (auto& row : table)
      for (auto& c : row) c = 1 + static_cast<Cost>(rng.below(100));
    const Cost factor = 2 + static_cast<Cost>(rng.below(1000));
    auto scaled = table;
    for (auto& row : scaled)
      for (auto& c : row) c *= factor;
    bool same = true;
    for (Strategy s : {Strategy::Mca, Strategy::RmcaR}) {
      int a = select(table, s), b = select(scaled, s);
      same = same && a == b &&
             std::min_element(table[a].begin(), table[a].end()) - table[a].begin() ==
                 std::min_element(scaled[b].begin(), scaled[b].end()) - scaled[b].begin();
    }
    invariant += same;
  }
  return {diverges && invariant == 100,
          std::string("divergence case ") + (diverges ? "ok" : "wrong") + "; " +
              std::to_string(invariant) + "/100 tables invariant under scaling"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "validity suite", validity_suite},
      {2, "oracle dominance and quality", oracle_dominance},
      {3, "improvement monotonicity", lns_monotonicity},
      {4, "one-shot strategy trend", oneshot_trend},
      {5, "lifelong capacity trend", capacity_trend},
      {6, "determinism", determinism},
      {7, "formula checks", formulas},
      {8, "regret selection", regret_selection},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("%s [%d] %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
