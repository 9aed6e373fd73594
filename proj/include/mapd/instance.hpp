#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mapd/grid_world.hpp"
#include "mapd/rational.hpp"

namespace mapd {

struct Task {
  int id = 0;
  Cell origin = kNoCell;
  Cell destination = kNoCell;
  int release = 0;
  bool operator==(const Task&) const = default;
};

struct Agent {
  int id = 0;
  Cell depot = kNoCell;
  bool operator==(const Agent&) const = default;
};

// Tasks are stored by id (ids are dense), which for generated instances is
// also (release, id) order. Agents likewise.
struct Instance {
  std::vector<Task> tasks;
  std::vector<Agent> agents;
  int capacity = 1;
  std::uint64_t seed = 0;
  bool operator==(const Instance&) const = default;
};

// Task release frequency in tasks per timestep; nullopt is the one-shot
// setting where every task is released at time 0.
using Frequency = std::optional<Rational>;

struct GenerateOptions {
  int tasks = 0;
  int agents = 0;
  int capacity = 1;
  Frequency frequency;
  std::uint64_t seed = 0;
};

// Release timestep of the j-th generated task: floor(j / f).
int release_time(int index, const Frequency& frequency);

Instance generate_instance(const GridMap& map, const GenerateOptions& options);

// Throws ParseError on malformed input or values inconsistent with `map`.
std::string write_instance(const Instance& instance, const GridMap& map);
Instance read_instance(std::string_view text, const GridMap& map);

// Checks the invariants of a loaded or generated instance against `map`.
void check_instance(const Instance& instance, const GridMap& map);

}  // namespace mapd
