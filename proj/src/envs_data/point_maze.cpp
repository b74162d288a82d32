#include "flowhiql/envs_data/point_maze.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "flowhiql/errors.hpp"

namespace flowhiql {

namespace {

constexpr double kAccel = 0.4;
constexpr double kDt = 0.25;
constexpr double kApproachGain = 2.0;
// Kept well under the velocity clip so visited velocities have no atom at +-1.
constexpr double kCruiseSpeed = 0.7;
constexpr double kTargetReached = 0.3;
constexpr std::array<Cell, 4> kMoves{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
constexpr std::array<int, 4> kFixedOrder{0, 1, 2, 3};

std::array<int, 4> shuffled_order(Random& rng) {
  std::array<int, 4> order = kFixedOrder;
  for (int i = 3; i > 0; --i) {
    std::swap(order[static_cast<std::size_t>(i)],
              order[rng.index(static_cast<std::size_t>(i) + 1)]);
  }
  return order;
}

Trajectory pack(const std::vector<double>& states, const std::vector<double>& actions) {
  Trajectory traj;
  const auto n = static_cast<Eigen::Index>(states.size() / 4);
  traj.states = Eigen::Map<const Matrix>(states.data(), n, 4);
  traj.actions = Eigen::Map<const Matrix>(actions.data(), n - 1, 2);
  return traj;
}

class MazeOracle final : public GoalPolicy {
 public:
  explicit MazeOracle(const PointMazeEnv& env) : env_(env) {}
  void reset(const Matrix&, const Matrix& goals) override { goals_ = goals; }
  Matrix act(const Matrix& states, std::size_t, Random&) override {
    Matrix a(states.rows(), 2);
    for (Eigen::Index i = 0; i < states.rows(); ++i) {
      const auto cmd = env_.steer(std::span<const double>(states.row(i).data(), 4),
                                  std::span<const double>(goals_.row(i).data(), 4), kFixedOrder);
      a(i, 0) = cmd[0];
      a(i, 1) = cmd[1];
    }
    return a;
  }

 private:
  const PointMazeEnv& env_;
  Matrix goals_;
};

}  // namespace

PointMazeEnv::PointMazeEnv(std::string name, std::vector<std::string> layout, Cell start,
                           std::size_t behavior_steps)
    : name_(std::move(name)),
      layout_(std::move(layout)),
      start_(start),
      behavior_steps_(behavior_steps) {
  if (layout_.empty() || layout_.front().empty()) throw ConfigError("empty maze layout");
  for (const auto& row : layout_) {
    if (row.size() != layout_.front().size()) throw ConfigError("ragged maze layout");
  }
  const int w = width();
  const int h = height();
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const bool border = r == 0 || c == 0 || r == h - 1 || c == w - 1;
      if (free({c, r})) {
        if (border) throw ConfigError("maze border must be walls");
        free_cells_.push_back({c, r});
      }
    }
  }
  if (!free(start_)) throw ConfigError("maze start is not a free cell");

  const std::size_t n = static_cast<std::size_t>(w * h);
  dist_.assign(n * n, -1);
  for (const Cell& target : free_cells_) {
    int* d = &dist_[cell_index(target) * n];
    std::deque<Cell> queue{target};
    d[cell_index(target)] = 0;
    while (!queue.empty()) {
      const Cell c = queue.front();
      queue.pop_front();
      for (const Cell& m : kMoves) {
        const Cell nb{c.col + m.col, c.row + m.row};
        if (free(nb) && d[cell_index(nb)] < 0) {
          d[cell_index(nb)] = d[cell_index(c)] + 1;
          queue.push_back(nb);
        }
      }
    }
  }
}

PointMazeEnv PointMazeEnv::simple() {
  return PointMazeEnv("point_maze",
                      {"#######",
                       "#.....#",
                       "#####.#",
                       "#.....#",
                       "#######"},
                      {1, 3});
}

bool PointMazeEnv::free(Cell c) const {
  if (c.row < 0 || c.col < 0 || c.row >= height() || c.col >= width()) return false;
  return layout_[static_cast<std::size_t>(c.row)][static_cast<std::size_t>(c.col)] != '#';
}

Cell PointMazeEnv::cell_at(double x, double y) const {
  return {static_cast<int>(std::floor(x + 0.5 * width())),
          static_cast<int>(std::floor(y + 0.5 * height()))};
}

std::array<double, 2> PointMazeEnv::center(Cell c) const {
  return {c.col - 0.5 * (width() - 1), c.row - 0.5 * (height() - 1)};
}

std::size_t PointMazeEnv::cell_index(Cell c) const {
  return static_cast<std::size_t>(c.row * width() + c.col);
}

int PointMazeEnv::distance(Cell from, Cell to) const {
  if (!free(from) || !free(to)) return -1;
  const std::size_t n = static_cast<std::size_t>(width() * height());
  return dist_[cell_index(to) * n + cell_index(from)];
}

double PointMazeEnv::state_norm_bound() const {
  const double hx = 0.5 * width() - 1.0;
  const double hy = 0.5 * height() - 1.0;
  return std::sqrt(hx * hx + hy * hy + 2.0);
}

std::vector<double> PointMazeEnv::transition(std::span<const double> state,
                                             std::span<const double> action) const {
  double vx = std::clamp(state[2] + kAccel * std::clamp(action[0], -1.0, 1.0), -1.0, 1.0);
  double vy = std::clamp(state[3] + kAccel * std::clamp(action[1], -1.0, 1.0), -1.0, 1.0);
  double x = state[0] + kDt * vx;
  if (!free(cell_at(x, state[1]))) {
    x = state[0];
    vx = 0.0;
  }
  double y = state[1] + kDt * vy;
  if (!free(cell_at(x, y))) {
    y = state[1];
    vy = 0.0;
  }
  return {x, y, vx, vy};
}

std::vector<double> PointMazeEnv::cell_state(Cell c) const {
  const auto p = center(c);
  return {p[0], p[1], 0.0, 0.0};
}

std::vector<double> PointMazeEnv::start_state() const { return cell_state(start_); }

std::vector<std::vector<double>> PointMazeEnv::eval_goals(std::size_t count) const {
  std::vector<Cell> targets;
  for (const Cell& c : free_cells_) {
    if (!(c == start_)) targets.push_back(c);
  }
  std::vector<std::vector<double>> goals;
  for (std::size_t j = 0; j < count; ++j) goals.push_back(cell_state(targets[j % targets.size()]));
  return goals;
}

std::array<double, 2> PointMazeEnv::steer(std::span<const double> state,
                                          std::span<const double> goal,
                                          const std::array<int, 4>& order) const {
  const Cell here = cell_at(state[0], state[1]);
  const Cell target = cell_at(goal[0], goal[1]);
  std::array<double, 2> waypoint{goal[0], goal[1]};
  const int d = distance(here, target);
  if (d > 0) {
    for (int k : order) {
      const Cell m = kMoves[static_cast<std::size_t>(k)];
      const Cell nb{here.col + m.col, here.row + m.row};
      if (distance(nb, target) == d - 1) {
        waypoint = center(nb);
        break;
      }
    }
  }
  const double dx = waypoint[0] - state[0];
  const double dy = waypoint[1] - state[1];
  const double len = std::hypot(dx, dy);
  double vx = 0.0;
  double vy = 0.0;
  if (len > 1e-9) {
    const double speed = std::min(kCruiseSpeed, kApproachGain * len);
    vx = speed * dx / len;
    vy = speed * dy / len;
  }
  return {std::clamp((vx - state[2]) / kAccel, -1.0, 1.0),
          std::clamp((vy - state[3]) / kAccel, -1.0, 1.0)};
}

std::vector<double> PointMazeEnv::drive(std::vector<double> state, std::span<const double> goal,
                                        double stop_radius, std::size_t budget, Random& rng,
                                        std::vector<double>& states,
                                        std::vector<double>& actions) const {
  const auto order = shuffled_order(rng);
  for (std::size_t t = 0; t < budget; ++t) {
    if (std::hypot(state[0] - goal[0], state[1] - goal[1]) <= stop_radius) break;
    const auto cmd = steer(state, goal, order);
    const double a0 = truncated_normal(rng, cmd[0], kBehaviorNoise, -1.0, 1.0);
    const double a1 = truncated_normal(rng, cmd[1], kBehaviorNoise, -1.0, 1.0);
    actions.push_back(a0);
    actions.push_back(a1);
    const double a[2] = {a0, a1};
    state = transition(state, a);
    states.insert(states.end(), state.begin(), state.end());
  }
  return state;
}

// Wanders between random free cells for a fixed number of steps.
Trajectory PointMazeEnv::behavior_trajectory(Random& rng) const {
  Cell cell = free_cells_[rng.index(free_cells_.size())];
  std::vector<double> s = cell_state(cell);
  s[0] += rng.uniform(-0.25, 0.25);
  s[1] += rng.uniform(-0.25, 0.25);
  std::vector<double> states(s);
  std::vector<double> actions;
  std::size_t taken = 0;
  while (taken < behavior_steps_) {
    Cell next = cell;
    while (next == cell) next = free_cells_[rng.index(free_cells_.size())];
    cell = next;
    s = drive(s, cell_state(cell), kTargetReached, behavior_steps_ - taken, rng, states, actions);
    taken = actions.size() / 2;
  }
  return pack(states, actions);
}

std::unique_ptr<GoalPolicy> PointMazeEnv::oracle_policy() const {
  return std::make_unique<MazeOracle>(*this);
}

TwoCorridorMaze::TwoCorridorMaze()
    : PointMazeEnv("two_corridor",
                   {"###############",
                    "#####.......###",
                    "#.....#####...#",
                    "#####.......###",
                    "###############"},
                   {1, 2}) {}

std::vector<std::vector<double>> TwoCorridorMaze::eval_goals(std::size_t count) const {
  return std::vector<std::vector<double>>(count, cell_state(goal_cell()));
}

Trajectory TwoCorridorMaze::behavior_trajectory(Random& rng) const {
  std::vector<double> s = start_state();
  s[0] += rng.uniform(-0.25, 0.25);
  s[1] += rng.uniform(-0.25, 0.25);
  std::vector<double> states(s);
  std::vector<double> actions;
  const auto goal = cell_state(goal_cell());
  s = drive(s, goal, 0.2, 150, rng, states, actions);
  // Settle on the goal so episodes end close to rest.
  drive(s, goal, 0.0, 10, rng, states, actions);
  if (actions.empty()) throw Error("two-corridor behavior produced an empty trajectory");
  return pack(states, actions);
}

int TwoCorridorMaze::corridor_of(const Matrix& states) const {
  bool upper = false;
  bool lower = false;
  for (Eigen::Index t = 0; t < states.rows(); ++t) {
    const int row = cell_at(states(t, 0), states(t, 1)).row;
    upper = upper || row == upper_row();
    lower = lower || row == lower_row();
  }
  if (upper == lower) return 0;
  return upper ? 1 : -1;
}

}  // namespace flowhiql
