#include "mapd/instance.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "mapd/rng.hpp"

namespace mapd {

int release_time(int index, const Frequency& frequency) {
  if (!frequency) return 0;
  if (frequency->num() <= 0) throw std::invalid_argument("task frequency must be positive");
  // floor(j / (num/den)) = floor(j * den / num)
  return static_cast<int>(static_cast<std::int64_t>(index) * frequency->den() / frequency->num());
}

Instance generate_instance(const GridMap& map, const GenerateOptions& options) {
  if (options.tasks < 0 || options.agents < 0)
    throw std::invalid_argument("task and agent counts must be non-negative");
  if (options.capacity < 1) throw std::invalid_argument("capacity must be at least 1");
  if (options.agents > static_cast<int>(map.depots().size()))
    throw std::invalid_argument("more agents (" + std::to_string(options.agents) +
                                ") than depots (" + std::to_string(map.depots().size()) + ")");
  const auto& endpoints = map.endpoints();
  if (options.tasks > 0 && endpoints.size() < 2)
    throw std::invalid_argument("task generation needs at least two endpoints");

  Instance inst;
  inst.capacity = options.capacity;
  inst.seed = options.seed;
  Rng rng(options.seed);

  inst.tasks.reserve(options.tasks);
  for (int j = 0; j < options.tasks; ++j) {
    int origin = rng.index(endpoints.size());
    int destination = rng.index(endpoints.size() - 1);
    if (destination >= origin) ++destination;
    inst.tasks.push_back({j, endpoints[origin], endpoints[destination],
                          release_time(j, options.frequency)});
  }

  // Partial Fisher-Yates over the depots.
  std::vector<Cell> depots = map.depots();
  for (int k = 0; k < options.agents; ++k) {
    int pick = k + rng.index(depots.size() - k);
    std::swap(depots[k], depots[pick]);
    inst.agents.push_back({k, depots[k]});
  }
  return inst;
}

void check_instance(const Instance& inst, const GridMap& map) {
  if (inst.capacity < 1) throw ParseError("capacity must be at least 1");
  for (std::size_t i = 0; i < inst.tasks.size(); ++i) {
    const Task& t = inst.tasks[i];
    if (t.id != static_cast<int>(i)) throw ParseError("task ids must be dense and unique");
    if (t.release < 0) throw ParseError("task " + std::to_string(t.id) + " has negative release");
    for (Cell c : {t.origin, t.destination})
      if (c < 0 || c >= map.size() || !map.is_endpoint(c))
        throw ParseError("task " + std::to_string(t.id) + " references a non-endpoint cell");
    if (t.origin == t.destination)
      throw ParseError("task " + std::to_string(t.id) + " has identical origin and destination");
  }
  std::vector<Cell> depots;
  for (std::size_t k = 0; k < inst.agents.size(); ++k) {
    const Agent& a = inst.agents[k];
    if (a.id != static_cast<int>(k)) throw ParseError("agent ids must be dense and unique");
    if (a.depot < 0 || a.depot >= map.size() || !map.is_depot(a.depot))
      throw ParseError("agent " + std::to_string(a.id) + " is not on a depot cell");
    depots.push_back(a.depot);
  }
  std::sort(depots.begin(), depots.end());
  if (std::adjacent_find(depots.begin(), depots.end()) != depots.end())
    throw ParseError("agent depots must be pairwise distinct");
}

std::string write_instance(const Instance& inst, const GridMap& map) {
  std::vector<const Task*> order;
  for (const Task& t : inst.tasks) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(), [](const Task* a, const Task* b) {
    return std::pair(a->release, a->id) < std::pair(b->release, b->id);
  });

  std::ostringstream out;
  out << "tasks " << inst.tasks.size() << " agents " << inst.agents.size() << " capacity "
      << inst.capacity << " seed " << inst.seed << "\n";
  for (const Task* t : order) {
    Location s = map.location(t->origin);
    Location g = map.location(t->destination);
    out << "task " << t->id << ' ' << t->release << ' ' << s.row << ' ' << s.col << ' ' << g.row
        << ' ' << g.col << "\n";
  }
  for (const Agent& a : inst.agents) {
    Location d = map.location(a.depot);
    out << "agent " << a.id << ' ' << d.row << ' ' << d.col << "\n";
  }
  return out.str();
}

Instance read_instance(std::string_view text, const GridMap& map) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& why) -> ParseError {
    return ParseError("instance line " + std::to_string(line_no) + ": " + why);
  };
  auto to_cell = [&](int row, int col) {
    Location loc{row, col};
    if (!map.in_bounds(loc)) throw fail("location outside the map");
    return map.cell(loc);
  };

  Instance inst;
  std::size_t n_tasks = 0;
  std::size_t n_agents = 0;
  {
    ++line_no;
    if (!std::getline(in, line)) throw fail("missing header");
    std::istringstream h(line);
    std::string kt, ka, kc, ks, extra;
    if (!(h >> kt >> n_tasks >> ka >> n_agents >> kc >> inst.capacity >> ks >> inst.seed) ||
        kt != "tasks" || ka != "agents" || kc != "capacity" || ks != "seed" || (h >> extra))
      throw fail("malformed header");
  }

  std::vector<std::optional<Task>> tasks(n_tasks);
  std::vector<std::optional<Agent>> agents(n_agents);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind, extra;
    ls >> kind;
    if (kind == "task") {
      int id, release, sr, sc, gr, gc;
      if (!(ls >> id >> release >> sr >> sc >> gr >> gc) || (ls >> extra))
        throw fail("malformed task line");
      if (id < 0 || id >= static_cast<int>(n_tasks)) throw fail("task id out of range");
      if (tasks[id]) throw fail("duplicate task id " + std::to_string(id));
      Cell s = to_cell(sr, sc);
      Cell g = to_cell(gr, gc);
      if (!map.is_endpoint(s) || !map.is_endpoint(g)) throw fail("task location is not an endpoint");
      tasks[id] = Task{id, s, g, release};
    } else if (kind == "agent") {
      int id, dr, dc;
      if (!(ls >> id >> dr >> dc) || (ls >> extra)) throw fail("malformed agent line");
      if (id < 0 || id >= static_cast<int>(n_agents)) throw fail("agent id out of range");
      if (agents[id]) throw fail("duplicate agent id " + std::to_string(id));
      Cell d = to_cell(dr, dc);
      if (!map.is_depot(d)) throw fail("agent location is not a depot");
      agents[id] = Agent{id, d};
    } else {
      throw fail("unknown record '" + kind + "'");
    }
  }
  for (auto& t : tasks) {
    if (!t) throw ParseError("instance is missing task lines");
    inst.tasks.push_back(*t);
  }
  for (auto& a : agents) {
    if (!a) throw ParseError("instance is missing agent lines");
    inst.agents.push_back(*a);
  }
  check_instance(inst, map);
  return inst;
}

}  // namespace mapd
