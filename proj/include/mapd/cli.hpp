#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mapd/grid_world.hpp"
#include "mapd/instance.hpp"
#include "mapd/lifelong.hpp"
#include "mapd/validator.hpp"

namespace mapd {

enum class RunMode : std::uint8_t { OneShot, Lifelong };

// One experiment: a generated (or given) instance solved with one configuration.
struct RunSpec {
  RunMode mode = RunMode::OneShot;
  StrategySpec strategy;
  std::optional<DestroyStrategy> lns;
  int group_size = 5;
  ImproveBudget budget;
  int agents = 0;
  int tasks = 0;
  int capacity = 1;
  Frequency frequency;
  std::uint64_t seed = 0;
};

struct RunRow {
  RunSpec spec;
  bool solved = false;
  std::string failure;
  RunReport report;
  int violations = 0;
};

std::string run_csv_header();
// Columns after `violations` are `status` and `budget`; mean_t_per_ts is the
// only wall-clock column.
std::string run_csv_row(const RunRow& row);

std::string service_log_csv(const std::vector<ServiceRecord>& log);
std::vector<ServiceRecord> parse_service_log(const std::string& text);

// Path dump: one `agent t row col` line per agent per timestep.
std::string path_dump(const std::vector<TimedPath>& paths, const GridMap& map);
std::vector<TimedPath> parse_path_dump(const std::string& text, const GridMap& map);

// Solves `instance` (generated from `spec` when absent) and validates the result.
RunRow execute_run(const GridMap& map, const DistanceTable& dist, const RunSpec& spec,
                   const Instance* instance = nullptr);

// Entry point of the command-line tool; returns the process exit code
// (0 ok, 1 violations or solver failure, 2 usage error).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mapd
