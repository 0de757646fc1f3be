#include "lsr/task_sim.hpp"

#include "lsr/random.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lsr {

namespace {

constexpr int kStackBoxes = 4;
constexpr int kRopeBoxes = 2;
constexpr int kStackOneHot = kStackBoxes + 1;
constexpr int kRopeOneHot = kRopeBoxes + 1;
constexpr double kRopeSideOffset = 0.35;

bool is_stacking(TaskKind task) { return task != TaskKind::RopeBox; }

bool in_grid(Cell c) {
  return c.row >= 0 && c.row < kGridSize && c.col >= 0 && c.col < kGridSize;
}

int manhattan(Cell a, Cell b) { return std::abs(a.row - b.row) + std::abs(a.col - b.col); }

// Height of the stack in column `col` (stacking tasks).
int column_height(const TaskState& s, int col) {
  int h = 0;
  while (h < kGridSize && s.at({h, col}) != 0) ++h;
  return h;
}

std::array<Cell, kRopeBoxes> rope_box_cells(const TaskState& s) {
  std::array<Cell, kRopeBoxes> cells{};
  for (int r = 0; r < kGridSize; ++r)
    for (int c = 0; c < kGridSize; ++c)
      if (auto id = s.at({r, c}); id >= 1 && id <= kRopeBoxes) cells[id - 1] = {r, c};
  return cells;
}

// Pillars sit on the four interior grid corners; cell (r, c) has its centre
// at (r + 0.5, c + 0.5) in the same frame.
constexpr std::array<std::array<double, 2>, 4> kPillars{{{1, 1}, {1, 2}, {2, 1}, {2, 2}}};

int nearest_pillar(Cell a, Cell b) {
  const double mr = 0.5 * (a.row + b.row) + 0.5;
  const double mc = 0.5 * (a.col + b.col) + 0.5;
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int p = 0; p < static_cast<int>(kPillars.size()); ++p) {
    const double d = std::hypot(kPillars[p][0] - mr, kPillars[p][1] - mc);
    if (d < best_d - 1e-12) {
      best_d = d;
      best = p;
    }
  }
  return best;
}

void check_stacking(const TaskState& s, int max_boxes) {
  if (s.rope != 0) throw std::invalid_argument("stacking state carries a rope flag");
  std::array<int, kStackBoxes + 1> seen{};
  for (int r = 0; r < kGridSize; ++r) {
    for (int c = 0; c < kGridSize; ++c) {
      const int id = s.at({r, c});
      if (id == 0) continue;
      if (id > max_boxes) throw std::invalid_argument("unknown box id " + std::to_string(id));
      if (++seen[id] > 1) throw std::invalid_argument("box " + std::to_string(id) + " appears twice");
      if (r > 0 && s.at({r - 1, c}) == 0)
        throw std::invalid_argument("box " + std::to_string(id) + " floats above an empty cell");
    }
  }
}

void check_rope_box(const TaskState& s) {
  if (s.rope > 1) throw std::invalid_argument("rope flag must be 0 or 1");
  std::array<int, kRopeBoxes + 1> seen{};
  for (auto id : s.grid) {
    if (id > kRopeBoxes) throw std::invalid_argument("unknown box id " + std::to_string(id));
    if (id != 0 && ++seen[id] > 1) throw std::invalid_argument("box appears twice");
  }
  if (seen[1] != 1 || seen[2] != 1) throw std::invalid_argument("rope-box state needs both boxes");
  const auto cells = rope_box_cells(s);
  const int d = manhattan(cells[0], cells[1]);
  if (d > 2) throw std::invalid_argument("rope overstretched: boxes more than one move from adjacent");
}

std::vector<Transition> stacking_actions(const TaskState& s) {
  std::vector<Transition> out;
  std::array<int, kGridSize> height{};
  for (int c = 0; c < kGridSize; ++c) height[c] = column_height(s, c);
  for (int from = 0; from < kGridSize; ++from) {
    if (height[from] == 0) continue;
    const Cell pick{height[from] - 1, from};
    for (int to = 0; to < kGridSize; ++to) {
      if (to == from || height[to] == kGridSize) continue;
      const Cell release{height[to], to};
      TaskState next = s;
      next.at(release) = s.at(pick);
      next.at(pick) = 0;
      out.push_back({{ActionKind::PickPlace, pick, release}, next});
    }
  }
  return out;
}

std::vector<Transition> rope_box_actions(const TaskState& s) {
  std::vector<Transition> out;
  const auto cells = rope_box_cells(s);
  constexpr std::array<Cell, 4> kDirs{{{-1, 0}, {0, -1}, {0, 1}, {1, 0}}};
  for (int b = 0; b < kRopeBoxes; ++b) {
    const Cell pick = cells[b];
    const Cell other = cells[1 - b];
    for (auto d : kDirs) {
      const Cell release{pick.row + d.row, pick.col + d.col};
      if (!in_grid(release) || release == other) continue;
      if (manhattan(release, other) > 2) continue;
      TaskState next = s;
      next.at(release) = s.at(pick);
      next.at(pick) = 0;
      out.push_back({{ActionKind::BoxPush, pick, release}, next});
    }
  }
  TaskState flipped = s;
  flipped.rope = s.rope ^ 1U;
  out.push_back({{ActionKind::RopeMove, {0, 0}, {0, 0}}, flipped});
  std::sort(out.begin(), out.end(),
            [](const Transition& x, const Transition& y) { return x.action < y.action; });
  return out;
}

std::vector<TaskState> bfs_rope_box() {
  TaskState start;
  start.at({0, 0}) = 1;
  start.at({0, 1}) = 2;
  std::set<TaskState> seen{start};
  std::deque<TaskState> queue{start};
  while (!queue.empty()) {
    const TaskState s = queue.front();
    queue.pop_front();
    for (const auto& t : rope_box_actions(s))
      if (seen.insert(t.next).second) queue.push_back(t.next);
  }
  return {seen.begin(), seen.end()};
}

struct TransitionTable {
  std::vector<std::pair<int, Transition>> all;  // (source state index, transition)
};

const TransitionTable& transitions(TaskKind task) {
  auto build = [](TaskKind t) {
    TransitionTable table;
    const auto& states = enumerate_states(t);
    for (int i = 0; i < static_cast<int>(states.size()); ++i)
      for (auto& tr : valid_actions(t, states[i])) table.all.emplace_back(i, std::move(tr));
    return table;
  };
  static const TransitionTable ns = build(TaskKind::NormalStacking);
  static const TransitionTable rb = build(TaskKind::RopeBox);
  return is_stacking(task) ? ns : rb;
}

struct TemplateBank {
  Eigen::MatrixXd templates;  // D x n_states
};

const TemplateBank& template_bank(TaskKind task) {
  auto build = [](TaskKind t) {
    const auto& states = enumerate_states(t);
    TemplateBank bank;
    bank.templates.resize(observation_dim(t), static_cast<Eigen::Index>(states.size()));
    for (std::size_t i = 0; i < states.size(); ++i)
      bank.templates.col(static_cast<Eigen::Index>(i)) = state_template(t, states[i]);
    return bank;
  };
  static const TemplateBank ns = build(TaskKind::NormalStacking);
  static const TemplateBank hs = build(TaskKind::HardStacking);
  static const TemplateBank rb = build(TaskKind::RopeBox);
  switch (task) {
    case TaskKind::NormalStacking: return ns;
    case TaskKind::HardStacking: return hs;
    case TaskKind::RopeBox: return rb;
  }
  throw std::logic_error("unreachable");
}

}  // namespace

std::string_view task_code(TaskKind task) {
  switch (task) {
    case TaskKind::NormalStacking: return "ns";
    case TaskKind::HardStacking: return "hs";
    case TaskKind::RopeBox: return "rb";
  }
  return "?";
}

TaskKind parse_task(std::string_view code) {
  if (code == "ns") return TaskKind::NormalStacking;
  if (code == "hs") return TaskKind::HardStacking;
  if (code == "rb") return TaskKind::RopeBox;
  throw std::invalid_argument("unknown task '" + std::string(code) + "' (expected ns, hs or rb)");
}

std::string to_string(const TaskState& s) {
  std::string out;
  for (auto id : s.grid) out += static_cast<char>('0' + id);
  if (s.rope) out += "/r";
  return out;
}

std::string to_string(const Action& a) {
  std::ostringstream os;
  switch (a.kind) {
    case ActionKind::RopeMove: return "rope";
    case ActionKind::PickPlace: os << "pick"; break;
    case ActionKind::BoxPush: os << "push"; break;
  }
  os << "(" << a.pick.row << "," << a.pick.col << ")->(" << a.release.row << ","
     << a.release.col << ")";
  return os.str();
}

NoiseModel NoiseModel::defaults(TaskKind task) {
  switch (task) {
    case TaskKind::NormalStacking: return {0.17, 0.0, 0.0};
    case TaskKind::HardStacking: return {0.17, 1.0, 0.0};
    case TaskKind::RopeBox: return {0.17, 1.0, 0.17};
  }
  return {};
}

int observation_dim(TaskKind task) {
  switch (task) {
    case TaskKind::NormalStacking: return kCells * kStackOneHot + 2 * kStackBoxes;
    case TaskKind::HardStacking: return kCells * kStackOneHot + 2 * kStackBoxes + 2;
    case TaskKind::RopeBox: return kCells * kRopeOneHot + 2 * kRopeBoxes + 2 + 2 + 2;
  }
  return 0;
}

std::vector<TaskState> enumerate_stacking_states(int n_boxes) {
  if (n_boxes < 0 || n_boxes > kStackBoxes)
    throw std::invalid_argument("stacking supports 0..4 boxes");
  std::vector<TaskState> out;
  // Place boxes 1..n one after another into any cell; keep gravity-consistent grids.
  auto place = [&](auto&& self, int box, TaskState& s) -> void {
    if (box > n_boxes) {
      try {
        check_stacking(s, kStackBoxes);
        out.push_back(s);
      } catch (const std::invalid_argument&) {
      }
      return;
    }
    for (int cell = 0; cell < kCells; ++cell) {
      if (s.grid[cell] != 0) continue;
      s.grid[cell] = static_cast<std::uint8_t>(box);
      self(self, box + 1, s);
      s.grid[cell] = 0;
    }
  };
  TaskState s;
  place(place, 1, s);
  std::sort(out.begin(), out.end());
  return out;
}

const std::vector<TaskState>& enumerate_states(TaskKind task) {
  static const std::vector<TaskState> stacking = enumerate_stacking_states(kStackBoxes);
  static const std::vector<TaskState> rope = bfs_rope_box();
  return is_stacking(task) ? stacking : rope;
}

int state_index(TaskKind task, const TaskState& s) {
  const auto& states = enumerate_states(task);
  auto it = std::lower_bound(states.begin(), states.end(), s);
  if (it == states.end() || *it != s)
    throw std::invalid_argument("state " + to_string(s) + " is not reachable in task " +
                                std::string(task_code(task)));
  return static_cast<int>(it - states.begin());
}

void check_state(TaskKind task, const TaskState& s) {
  if (is_stacking(task))
    check_stacking(s, kStackBoxes);
  else
    check_rope_box(s);
}

bool is_valid_state(TaskKind task, const TaskState& s) {
  try {
    check_state(task, s);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

std::vector<Transition> valid_actions(TaskKind task, const TaskState& s) {
  check_state(task, s);
  return is_stacking(task) ? stacking_actions(s) : rope_box_actions(s);
}

bool is_valid_transition(TaskKind task, const TaskState& s1, const TaskState& s2) {
  if (!is_valid_state(task, s1) || !is_valid_state(task, s2)) return false;
  if (s1 == s2) return true;
  for (const auto& t : valid_actions(task, s1))
    if (t.next == s2) return true;
  return false;
}

const std::vector<Action>& unique_actions(TaskKind task) {
  auto build = [](TaskKind t) {
    std::set<Action> acts;
    for (const auto& [src, tr] : transitions(t).all) acts.insert(tr.action);
    return std::vector<Action>(acts.begin(), acts.end());
  };
  static const std::vector<Action> stacking = build(TaskKind::NormalStacking);
  static const std::vector<Action> rope = build(TaskKind::RopeBox);
  return is_stacking(task) ? stacking : rope;
}

int action_index(TaskKind task, const Action& a) {
  const auto& acts = unique_actions(task);
  auto it = std::lower_bound(acts.begin(), acts.end(), a);
  if (it == acts.end() || *it != a) return -1;
  return static_cast<int>(it - acts.begin());
}

Eigen::VectorXd state_template(TaskKind task, const TaskState& s) {
  check_state(task, s);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(observation_dim(task));
  if (is_stacking(task)) {
    const double sim = task == TaskKind::HardStacking ? kHardTextureSimilarity : 0.0;
    for (int cell = 0; cell < kCells; ++cell) {
      const int id = s.grid[cell];
      auto slot = x.segment(cell * kStackOneHot, kStackOneHot);
      if (id == 0) {
        slot[0] = 1.0;
        continue;
      }
      // Box textures blended towards their mean.
      slot.tail(kStackBoxes).setConstant(sim / kStackBoxes);
      slot[id] += 1.0 - sim;
      const int base = kCells * kStackOneHot + 2 * (id - 1);
      x[base] = (cell % kGridSize);
      x[base + 1] = (cell / kGridSize);
    }
    return x;
  }
  for (int cell = 0; cell < kCells; ++cell) x[cell * kRopeOneHot + s.grid[cell]] = 1.0;
  const auto cells = rope_box_cells(s);
  int base = kCells * kRopeOneHot;
  for (int b = 0; b < kRopeBoxes; ++b) {
    x[base + 2 * b] = cells[b].col;
    x[base + 2 * b + 1] = cells[b].row;
  }
  base += 2 * kRopeBoxes;
  x[base + s.rope] = 1.0;
  const auto& pillar = kPillars[nearest_pillar(cells[0], cells[1])];
  const double side = s.rope ? kRopeSideOffset : -kRopeSideOffset;
  x[base + 2] = pillar[1] + side;
  x[base + 3] = pillar[0] + side;
  // The last two entries are lighting channels, zero in the template.
  return x;
}

Observation render(TaskKind task, const TaskState& s, std::uint64_t seed,
                   const NoiseModel& noise) {
  Observation obs{state_template(task, s), s};
  Rng rng(seed);
  auto& x = obs.features;
  const int d = observation_dim(task);
  if (is_stacking(task)) {
    const int base = kCells * kStackOneHot;
    for (int i = 0; i < 2 * kStackBoxes; ++i)
      x[base + i] += uniform(rng, -1.0, 1.0) * noise.position_jitter;
    if (task == TaskKind::HardStacking)
      for (int i = d - 2; i < d; ++i) x[i] = uniform(rng, -1.0, 1.0) * noise.lighting_range;
    return obs;
  }
  const int base = kCells * kRopeOneHot;
  for (int i = 0; i < 2 * kRopeBoxes; ++i)
    x[base + i] += uniform(rng, -1.0, 1.0) * noise.position_jitter;
  for (int i = base + 2 * kRopeBoxes + 2; i < d - 2; ++i)
    x[i] += uniform(rng, -1.0, 1.0) * noise.rope_jitter;
  for (int i = d - 2; i < d; ++i) x[i] = uniform(rng, -1.0, 1.0) * noise.lighting_range;
  return obs;
}

Observation render(TaskKind task, const TaskState& s, std::uint64_t seed) {
  return render(task, s, seed, NoiseModel::defaults(task));
}

TaskState decode_state(TaskKind task, const Eigen::VectorXd& features) {
  const auto& bank = template_bank(task);
  if (features.size() != bank.templates.rows())
    throw std::invalid_argument("observation has dimension " + std::to_string(features.size()) +
                                ", task expects " + std::to_string(bank.templates.rows()));
  Eigen::Index best = 0;
  (bank.templates.colwise() - features).colwise().squaredNorm().minCoeff(&best);
  return enumerate_states(task)[static_cast<std::size_t>(best)];
}

std::vector<DatasetTuple> generate_dataset(TaskKind task, int n_pairs, double action_fraction,
                                           std::uint64_t seed) {
  if (n_pairs < 1) throw std::invalid_argument("n_pairs must be >= 1");
  if (!(action_fraction >= 0.0 && action_fraction <= 1.0))
    throw std::invalid_argument("action_fraction must lie in [0, 1]");
  const auto& states = enumerate_states(task);
  const auto& table = transitions(task);
  const int n_action = static_cast<int>(std::llround(n_pairs * action_fraction));

  Rng rng(derive_seed(seed, 1));
  std::uniform_int_distribution<std::size_t> pick_transition(0, table.all.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_state(0, states.size() - 1);

  std::vector<DatasetTuple> out;
  out.reserve(static_cast<std::size_t>(n_pairs));
  for (int i = 0; i < n_pairs; ++i) {
    const std::uint64_t s1 = rng();
    const std::uint64_t s2 = rng();
    if (i < n_action) {
      const auto& [src, tr] = table.all[pick_transition(rng)];
      out.push_back({render(task, states[src], s1), render(task, tr.next, s2), true, tr.action});
    } else {
      const TaskState& s = states[pick_state(rng)];
      out.push_back({render(task, s, s1), render(task, s, s2), false, std::nullopt});
    }
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

std::vector<Observation> render_holdout(TaskKind task, int n, std::uint64_t seed) {
  const auto& states = enumerate_states(task);
  Rng rng(derive_seed(seed, 2));
  std::uniform_int_distribution<std::size_t> pick_state(0, states.size() - 1);
  std::vector<Observation> out;
  out.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) {
    const auto& s = states[pick_state(rng)];
    out.push_back(render(task, s, rng()));
  }
  return out;
}

}  // namespace lsr
