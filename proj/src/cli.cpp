#include "mapd/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace mapd {

namespace {

std::string freq_text(const Frequency& f) { return f ? f->to_string() : "inf"; }

std::string lns_text(const std::optional<DestroyStrategy>& lns) {
  return lns ? to_string(*lns) : "none";
}

std::string budget_text(const RunSpec& s) {
  if (!s.lns) return "-";
  std::string out;
  if (s.budget.iterations) out += "iters:" + std::to_string(*s.budget.iterations);
  if (s.budget.seconds) {
    if (!out.empty()) out += ";";
    std::ostringstream secs;
    secs << *s.budget.seconds;
    out += "secs:" + secs.str();
  }
  return out.empty() ? "-" : out;
}

std::string decimal(double x, int digits = 6) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << x;
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

std::vector<int> split_ints(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Appends `--key value` for every `key = value` line of a config file whose
// key was not given on the command line.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end() || std::next(it) == args.end()) return args;
  const std::string text = read_file(*std::next(it));
  args.erase(it, it + 2);
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    const std::string flag = "--" + key;
    bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (!given) {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

struct Common {
  std::string map;
  std::string out;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct SolverFlags {
  std::string strategy = "rmca-r";
  std::string lns;
  int group_size = 5;
  double lns_budget = -1;
  long lns_iters = -1;
};

void add_solver_flags(CLI::App* sub, SolverFlags& f) {
  sub->add_option("--strategy", f.strategy, "mca, rmca-a, rmca-r, mca-fp or rmca-r-fp")
      ->check(CLI::IsMember({"mca", "rmca-a", "rmca-r", "mca-fp", "rmca-r-fp"}));
  sub->add_option("--lns", f.lns, "improvement destroy operator")
      ->check(CLI::IsMember({"dr", "dw", "dm", "none"}));
  sub->add_option("--group-size", f.group_size)->check(CLI::PositiveNumber);
  sub->add_option("--lns-budget", f.lns_budget, "improvement budget in seconds")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--lns-iters", f.lns_iters, "improvement budget in rounds")
      ->check(CLI::NonNegativeNumber);
}

void apply_solver_flags(const SolverFlags& f, RunSpec& spec, bool lifelong) {
  spec.strategy = *parse_strategy(f.strategy);
  std::string lns = f.lns.empty() ? (lifelong ? "dr" : "none") : f.lns;
  spec.lns = parse_destroy(lns);
  spec.group_size = f.group_size;
  spec.budget = {};
  if (f.lns_iters >= 0) spec.budget.iterations = f.lns_iters;
  if (f.lns_budget >= 0) spec.budget.seconds = f.lns_budget;
  if (!spec.budget.iterations && !spec.budget.seconds) spec.budget.seconds = lifelong ? 1.0 : 60.0;
}

struct GenFlags {
  int tasks = 0;
  int agents = 0;
  int capacity = 1;
  std::string freq;
};

void add_gen_flags(CLI::App* sub, GenFlags& g) {
  sub->add_option("--tasks", g.tasks)->check(CLI::NonNegativeNumber);
  sub->add_option("--agents", g.agents)->check(CLI::PositiveNumber);
  sub->add_option("--capacity", g.capacity)->check(CLI::PositiveNumber);
  sub->add_option("--freq", g.freq, "release frequency NUM/DEN tasks per timestep, or inf");
}

Frequency parse_freq(const std::string& text) {
  if (text.empty() || text == "inf") return std::nullopt;
  Rational f = parse_rational(text);
  if (f <= Rational(0)) throw CLI::ValidationError("--freq", "frequency must be positive");
  return f;
}

std::string report_paths(const RunRow& row, const GridMap& map) {
  return path_dump(row.report.trajectories, map);
}

int cmd_generate(const Common& c, const GenFlags& g, std::ostream& out) {
  GridMap map = load_map(c.map);
  Instance inst = generate_instance(map, {g.tasks, g.agents, g.capacity, parse_freq(g.freq), c.seed});
  write_output(c.out, write_instance(inst, map), out);
  return 0;
}

int cmd_solve(const Common& c, const GenFlags& g, const SolverFlags& sf,
              const std::string& instance_path, const std::string& log_path,
              const std::string& paths_path, RunMode mode, std::ostream& out) {
  GridMap map = load_map(c.map);
  DistanceTable dist(map);
  RunSpec spec;
  spec.mode = mode;
  apply_solver_flags(sf, spec, mode == RunMode::Lifelong);
  spec.frequency = parse_freq(g.freq);
  std::optional<Instance> inst;
  if (!instance_path.empty()) {
    inst = read_instance(read_file(instance_path), map);
    spec.agents = static_cast<int>(inst->agents.size());
    spec.tasks = static_cast<int>(inst->tasks.size());
    spec.capacity = inst->capacity;
    spec.seed = inst->seed;
  } else {
    if (g.agents <= 0) throw CLI::ValidationError("--agents", "required without --instance");
    spec.agents = g.agents;
    spec.tasks = g.tasks;
    spec.capacity = g.capacity;
    spec.seed = c.seed;
  }
  RunRow row = execute_run(map, dist, spec, inst ? &*inst : nullptr);
  write_output(c.out, run_csv_header() + "\n" + run_csv_row(row) + "\n", out);
  if (!log_path.empty()) write_output(log_path, service_log_csv(row.report.log), out);
  if (!paths_path.empty()) write_output(paths_path, report_paths(row, map), out);
  return row.solved && row.violations == 0 ? 0 : 1;
}

struct BenchFlags {
  std::string mode = "oneshot";
  std::string agents = "20";
  std::string capacities = "1";
  std::string tasks = "100";
  std::vector<std::string> freqs{"inf"};
  std::vector<std::string> strategies{"rmca-r"};
  std::vector<std::string> lns{"none"};
  int reps = 25;
  std::string runs_out;
  std::string plot_out;
};

std::string mean_text(const std::vector<long>& xs) {
  if (xs.empty()) return "NA";
  long sum = 0;
  for (long x : xs) sum += x;
  return Rational(sum, static_cast<std::int64_t>(xs.size())).to_decimal(3);
}

int cmd_bench(const Common& c, const BenchFlags& b, SolverFlags sf, std::ostream& out,
              std::ostream& err) {
  GridMap map = load_map(c.map);
  DistanceTable dist(map);
  const RunMode mode = b.mode == "lifelong" ? RunMode::Lifelong : RunMode::OneShot;

  std::vector<RunSpec> specs;
  for (const std::string& strategy : b.strategies)
    for (const std::string& lns : b.lns)
      for (int cap : split_ints(b.capacities))
        for (int agents : split_ints(b.agents))
          for (int tasks : split_ints(b.tasks))
            for (const std::string& freq : b.freqs)
              for (int rep = 0; rep < b.reps; ++rep) {
                RunSpec s;
                s.mode = mode;
                sf.strategy = strategy;
                sf.lns = lns;
                apply_solver_flags(sf, s, mode == RunMode::Lifelong);
                s.agents = agents;
                s.tasks = tasks;
                s.capacity = cap;
                s.frequency = parse_freq(freq);
                s.seed = c.seed + static_cast<std::uint64_t>(rep);
                specs.push_back(s);
              }

  std::vector<RunRow> rows(specs.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      try {
        rows[i] = execute_run(map, dist, specs[i]);
      } catch (const std::exception& e) {
        rows[i].spec = specs[i];
        rows[i].failure = e.what();
        std::lock_guard lock(err_mutex);
        err << "run " << i << ": " << e.what() << "\n";
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 1; j < std::max(1, c.jobs); ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::string runs = run_csv_header() + "\n";
  for (const RunRow& r : rows) runs += run_csv_row(r) + "\n";
  if (!b.runs_out.empty()) write_output(b.runs_out, runs, out);

  std::string agg =
      "strategy,lns,group,agents,tasks,capacity,freq,runs,solved,mean_ttd,mean_relative_ttd,"
      "mean_makespan,violations,mean_runtime\n";
  std::string plot = "x,series,facet,y\n";
  bool any_violation = false;
  for (std::size_t first = 0; first < rows.size(); first += b.reps) {
    std::vector<long> ttd, rel, mk;
    double runtime = 0;
    int violations = 0;
    for (std::size_t i = first; i < first + b.reps; ++i) {
      violations += rows[i].violations;
      if (!rows[i].solved) continue;
      ttd.push_back(rows[i].report.ttd);
      if (rows[i].report.relative_ttd) rel.push_back(*rows[i].report.relative_ttd);
      mk.push_back(rows[i].report.makespan);
      runtime += rows[i].report.mean_seconds_per_step;
    }
    any_violation |= violations > 0;
    const RunSpec& s = rows[first].spec;
    const std::string series = to_string(s.strategy) + (s.lns ? "+" + to_string(*s.lns) : "");
    agg += to_string(s.strategy) + "," + lns_text(s.lns) + "," + std::to_string(s.group_size) +
           "," + std::to_string(s.agents) + "," + std::to_string(s.tasks) + "," +
           std::to_string(s.capacity) + "," + freq_text(s.frequency) + "," +
           std::to_string(b.reps) + "," + std::to_string(ttd.size()) + "," + mean_text(ttd) + "," +
           mean_text(rel) + "," + mean_text(mk) + "," + std::to_string(violations) + "," +
           decimal(ttd.empty() ? 0.0 : runtime / ttd.size()) + "\n";
    plot += std::to_string(s.tasks) + "," + series + ",cap=" + std::to_string(s.capacity) +
            " agents=" + std::to_string(s.agents) + "," +
            (mode == RunMode::OneShot ? mean_text(rel) : mean_text(ttd)) + "\n";
  }
  write_output(c.out, agg, out);
  if (!b.plot_out.empty()) write_output(b.plot_out, plot, out);
  return any_violation ? 1 : 0;
}

int cmd_validate(const Common& c, const std::string& instance_path, const std::string& paths_path,
                 const std::string& log_path, std::ostream& out) {
  GridMap map = load_map(c.map);
  Instance inst = read_instance(read_file(instance_path), map);
  auto paths = parse_path_dump(read_file(paths_path), map);
  std::vector<ServiceEvent> events;
  if (!log_path.empty()) events = service_events(parse_service_log(read_file(log_path)));
  auto violations = validate(inst, map, paths, events);
  if (log_path.empty())
    std::erase_if(violations, [](const Violation& v) {
      return v.kind != ViolationKind::Teleport && v.kind != ViolationKind::VertexConflict &&
             v.kind != ViolationKind::EdgeConflict;
    });
  std::string text;
  for (const Violation& v : violations) text += to_string(v) + "\n";
  write_output(c.out, text, out);
  return violations.empty() ? 0 : 1;
}

}  // namespace

std::string run_csv_header() {
  return "seed,strategy,lns,group,agents,tasks,capacity,freq,ttd,relative_ttd,makespan,"
         "mean_t_per_ts,violations,status,budget";
}

std::string run_csv_row(const RunRow& row) {
  const RunSpec& s = row.spec;
  const RunReport& r = row.report;
  auto or_na = [&](const std::string& v) { return row.solved ? v : std::string("NA"); };
  return std::to_string(s.seed) + "," + to_string(s.strategy) + "," + lns_text(s.lns) + "," +
         std::to_string(s.group_size) + "," + std::to_string(s.agents) + "," +
         std::to_string(s.tasks) + "," + std::to_string(s.capacity) + "," +
         freq_text(s.frequency) + "," + or_na(std::to_string(r.ttd)) + "," +
         (row.solved && r.relative_ttd ? std::to_string(*r.relative_ttd) : "NA") + "," +
         or_na(std::to_string(r.makespan)) + "," + or_na(decimal(r.mean_seconds_per_step)) + "," +
         std::to_string(row.violations) + "," + (row.solved ? "ok" : "incomplete") + "," +
         budget_text(s);
}

std::string service_log_csv(const std::vector<ServiceRecord>& log) {
  std::string out = "task,release,assigned_t,pickup_t,delivery_t,agent\n";
  for (const auto& r : log)
    out += std::to_string(r.task) + "," + std::to_string(r.release) + "," +
           std::to_string(r.assigned_t) + "," + std::to_string(r.pickup_t) + "," +
           std::to_string(r.delivery_t) + "," + std::to_string(r.agent) + "\n";
  return out;
}

std::vector<ServiceRecord> parse_service_log(const std::string& text) {
  std::vector<ServiceRecord> out;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("task,", 0) == 0) continue;
    }
    auto f = split_csv_line(line);
    if (f.size() != 6) throw ParseError("malformed service log line: " + line);
    try {
      out.push_back({std::stoi(f[0]), std::stoi(f[1]), std::stoi(f[2]), std::stoi(f[3]),
                     std::stoi(f[4]), std::stoi(f[5])});
    } catch (const std::logic_error&) {
      throw ParseError("malformed service log line: " + line);
    }
  }
  return out;
}

std::string path_dump(const std::vector<TimedPath>& paths, const GridMap& map) {
  std::string out;
  for (const TimedPath& p : paths)
    for (std::size_t i = 0; i < p.cells.size(); ++i) {
      Location loc = map.location(p.cells[i]);
      out += std::to_string(p.agent) + " " + std::to_string(p.start_time + static_cast<int>(i)) +
             " " + std::to_string(loc.row) + " " + std::to_string(loc.col) + "\n";
    }
  return out;
}

std::vector<TimedPath> parse_path_dump(const std::string& text, const GridMap& map) {
  std::map<int, std::map<int, Cell>> cells;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    int agent, t, row, col;
    std::string extra;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!(ls >> agent >> t >> row >> col) || (ls >> extra) || agent < 0 || t < 0)
      throw ParseError("malformed path line: " + line);
    if (!map.in_bounds({row, col})) throw ParseError("path cell out of bounds: " + line);
    if (!cells[agent].emplace(t, map.cell({row, col})).second)
      throw ParseError("duplicate path entry: " + line);
  }
  std::vector<TimedPath> out;
  for (const auto& [agent, by_t] : cells) {
    TimedPath p{agent, by_t.begin()->first, {}, {}};
    int expect = p.start_time;
    for (const auto& [t, c] : by_t) {
      if (t != expect++)
        throw ParseError("path of agent " + std::to_string(agent) + " skips timestep " +
                         std::to_string(expect - 1));
      p.cells.push_back(c);
    }
    out.push_back(std::move(p));
  }
  return out;
}

RunRow execute_run(const GridMap& map, const DistanceTable& dist, const RunSpec& spec,
                   const Instance* instance) {
  RunRow row;
  row.spec = spec;
  Instance generated;
  if (!instance) {
    generated = generate_instance(
        map, {spec.tasks, spec.agents, spec.capacity, spec.frequency, spec.seed});
    instance = &generated;
  }
  Problem problem{map, dist, *instance};
  RunParams params{spec.strategy, spec.lns, spec.group_size, spec.budget, instance->seed};
  try {
    row.report = spec.mode == RunMode::Lifelong ? run_lifelong(problem, params)
                                                : run_oneshot(problem, params);
    row.solved = true;
  } catch (const SolverIncomplete& e) {
    row.failure = e.what();
    return row;
  }
  auto events = service_events(row.report.log);
  row.violations = static_cast<int>(
      validate(*instance, map, row.report.trajectories, events).size());
  return row;
}

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-agent pickup and delivery planner"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--map", common.map, "map file");
  app.add_option("--seed", common.seed, "random seed");
  app.add_option("--jobs", common.jobs, "concurrent runs for bench")->check(CLI::PositiveNumber);
  app.add_option("--out", common.out, "output file (default stdout)");
  app.add_option("--config", "key = value file mirroring the flags");

  GenFlags gen;
  SolverFlags solver;
  BenchFlags bench;
  std::string instance_path, log_path, paths_path;

  auto* generate = app.add_subcommand("generate", "generate a random instance");
  add_gen_flags(generate, gen);

  auto* solve = app.add_subcommand("solve", "one-shot solve, prints a run report row");
  auto* lifelong = app.add_subcommand("lifelong", "lifelong simulation, prints a run report row");
  for (auto* sub : {solve, lifelong}) {
    add_gen_flags(sub, gen);
    add_solver_flags(sub, solver);
    sub->add_option("--instance", instance_path, "instance file");
    sub->add_option("--log", log_path, "write the service log CSV here");
    sub->add_option("--paths", paths_path, "write the path dump here");
  }

  auto* bench_cmd = app.add_subcommand("bench", "run a parameter grid");
  add_solver_flags(bench_cmd, solver);
  bench_cmd->add_option("--mode", bench.mode)->check(CLI::IsMember({"oneshot", "lifelong"}));
  bench_cmd->add_option("--agents", bench.agents, "comma-separated agent counts");
  bench_cmd->add_option("--capacity", bench.capacities, "comma-separated capacities");
  bench_cmd->add_option("--tasks", bench.tasks, "comma-separated task counts");
  bench_cmd->add_option("--freq", bench.freqs)->delimiter(',');
  bench_cmd->add_option("--strategies", bench.strategies)
      ->delimiter(',')
      ->check(CLI::IsMember({"mca", "rmca-a", "rmca-r", "mca-fp", "rmca-r-fp"}));
  bench_cmd->add_option("--lns-set", bench.lns, "improvement configs: none, dr, dw, dm")
      ->delimiter(',')
      ->check(CLI::IsMember({"dr", "dw", "dm", "none"}));
  bench_cmd->add_option("--reps", bench.reps, "seeds per cell")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--runs", bench.runs_out, "per-run CSV");
  bench_cmd->add_option("--plot", bench.plot_out, "tidy plot-data CSV");

  auto* validate_cmd = app.add_subcommand("validate", "check a path dump against an instance");
  validate_cmd->add_option("--instance", instance_path)->required();
  validate_cmd->add_option("--paths", paths_path)->required();
  validate_cmd->add_option("--log", log_path, "service log CSV");

  for (auto* sub : {generate, solve, lifelong, bench_cmd, validate_cmd}) sub->fallthrough();

  try {
    std::vector<std::string> args = merge_config(raw_args);
    std::vector<const char*> argv{"mapd"};
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (common.map.empty()) throw CLI::RequiredError("--map");
    if (generate->parsed()) {
      if (app.count("--seed") == 0) throw CLI::RequiredError("--seed");
      return cmd_generate(common, gen, out);
    }
    if (solve->parsed())
      return cmd_solve(common, gen, solver, instance_path, log_path, paths_path, RunMode::OneShot,
                       out);
    if (lifelong->parsed())
      return cmd_solve(common, gen, solver, instance_path, log_path, paths_path,
                       RunMode::Lifelong, out);
    if (bench_cmd->parsed()) return cmd_bench(common, bench, solver, out, err);
    return cmd_validate(common, instance_path, paths_path, log_path, out);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << "run with --help for usage\n";
    return 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mapd
