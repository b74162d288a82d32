#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "flowhiql/tensor_nn/tape.hpp"

namespace flowhiql {

enum class GoalMode : std::uint8_t { kGeometric, kUniform, kFinal };

/// Where each batch row came from, for audits.
struct BatchIndex {
  std::size_t trajectory = 0;
  std::size_t t = 0;
  std::size_t goal = 0;     // goal index on the same trajectory
  std::size_t subgoal = 0;  // min(t + k, T); t + 1 for value batches
  GoalMode mode = GoalMode::kGeometric;
};

/// (s_t, s_{t+1}, g, r, terminal) rows.
struct ValueBatch {
  Matrix s;
  Matrix s_next;
  Matrix g;
  std::vector<double> reward;
  std::vector<std::uint8_t> terminal;
  std::vector<BatchIndex> index;
};

/// (s_t, s_{t+k}, g) rows.
struct HighBatch {
  Matrix s;
  Matrix s_k;
  Matrix g;
  std::vector<BatchIndex> index;
};

/// (s_t, a_t, s_{t+1}, s_{t+k}) rows.
struct LowBatch {
  Matrix s;
  Matrix a;
  Matrix s_next;
  Matrix s_k;
  std::vector<BatchIndex> index;
};

}  // namespace flowhiql
