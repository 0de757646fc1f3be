#pragma once

#include <Eigen/Core>

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lsr {

/// The three simulated manipulation tasks. HardStacking shares the
/// NormalStacking state space and differs only in how states are observed.
enum class TaskKind : std::uint8_t { NormalStacking, HardStacking, RopeBox };

std::string_view task_code(TaskKind task);  // "ns", "hs", "rb"
TaskKind parse_task(std::string_view code);

struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

inline constexpr int kGridSize = 3;
inline constexpr int kCells = kGridSize * kGridSize;

/// Ground-truth grid configuration.
///
/// `grid[row * 3 + col]` holds a box id (0 = empty). For stacking tasks row 0
/// is the ground and row 2 the top of a column. For the rope-box task the two
/// boxes carry ids 1 and 2 and `rope` records on which side of the nearest
/// pillar the rope is routed.
struct TaskState {
  std::array<std::uint8_t, kCells> grid{};
  std::uint8_t rope = 0;

  std::uint8_t at(Cell c) const { return grid[c.row * kGridSize + c.col]; }
  std::uint8_t& at(Cell c) { return grid[c.row * kGridSize + c.col]; }

  auto operator<=>(const TaskState&) const = default;
};

std::string to_string(const TaskState& s);

enum class ActionKind : std::uint8_t { PickPlace, BoxPush, RopeMove };

struct Action {
  ActionKind kind = ActionKind::PickPlace;
  Cell pick;
  Cell release;

  auto operator<=>(const Action&) const = default;
};

std::string to_string(const Action& a);

struct Transition {
  Action action;
  TaskState next;
};

/// Feature-vector stand-in for a rendered image.
struct Observation {
  Eigen::VectorXd features;
  std::optional<TaskState> provenance;
};

struct DatasetTuple {
  Observation obs1;
  Observation obs2;
  bool action = false;
  std::optional<Action> u;
};

/// Per-render noise. `defaults(task)` is the in-distribution model,
/// `none()` yields the exact templates.
struct NoiseModel {
  double position_jitter = 0.0;  // half-width of uniform noise on box (x, y)
  double lighting_range = 0.0;   // half-width of uniform lighting channels
  double rope_jitter = 0.0;      // half-width of uniform rope-shape noise

  static NoiseModel defaults(TaskKind task);
  static NoiseModel none() { return {}; }
};

/// Number of feature dimensions of an observation for `task`.
int observation_dim(TaskKind task);

/// Texture similarity used by HardStacking when blending box one-hots.
inline constexpr double kHardTextureSimilarity = 0.5;

/// Every reachable state in canonical (lexicographic) order. Cached; the
/// returned reference stays valid for the program lifetime.
const std::vector<TaskState>& enumerate_states(TaskKind task);

/// Stacking states with an arbitrary number of boxes (0..4), for tests.
std::vector<TaskState> enumerate_stacking_states(int n_boxes);

/// Index of `s` in `enumerate_states(task)`; throws if `s` is not reachable.
int state_index(TaskKind task, const TaskState& s);

/// Throws std::invalid_argument naming the violated rule.
void check_state(TaskKind task, const TaskState& s);
bool is_valid_state(TaskKind task, const TaskState& s);

/// All single actions applicable in `s` with their successor states.
std::vector<Transition> valid_actions(TaskKind task, const TaskState& s);

/// True iff `s1 == s2` or one action takes `s1` to `s2`.
bool is_valid_transition(TaskKind task, const TaskState& s1, const TaskState& s2);

/// Sorted union of the actions applicable anywhere in the task.
const std::vector<Action>& unique_actions(TaskKind task);
int action_index(TaskKind task, const Action& a);  // -1 when not in the set

Eigen::VectorXd state_template(TaskKind task, const TaskState& s);
Observation render(TaskKind task, const TaskState& s, std::uint64_t seed,
                   const NoiseModel& noise);
Observation render(TaskKind task, const TaskState& s, std::uint64_t seed);

/// Nearest noise-free template in L2.
TaskState decode_state(TaskKind task, const Eigen::VectorXd& features);

std::vector<DatasetTuple> generate_dataset(TaskKind task, int n_pairs,
                                           double action_fraction,
                                           std::uint64_t seed);

/// Independent renders of uniformly drawn states (holdout sets).
std::vector<Observation> render_holdout(TaskKind task, int n, std::uint64_t seed);

}  // namespace lsr
