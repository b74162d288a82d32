#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flowhiql/envs_data/goal_env.hpp"

namespace flowhiql {

/// Offline trajectories plus the provenance needed to regenerate them.
struct OfflineDataset {
  std::string env;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::uint64_t seed = 0;
  double fraction = 1.0;
  std::vector<Trajectory> trajectories;

  std::size_t transition_count() const;
};

/// n_traj behavior trajectories; trajectory i draws from Random(seed, i + 1).
OfflineDataset generate_dataset(const GoalEnv& env, std::size_t n_traj, std::uint64_t seed);

/// Keeps the first ceil(fraction * N) trajectories of an order shuffled with
/// the dataset seed, so smaller fractions are prefixes of larger ones.
OfflineDataset apply_fraction(const OfflineDataset& full, double fraction);
/// Trajectory indices in the shuffled order used by apply_fraction.
std::vector<std::size_t> fraction_order(std::size_t n_traj, std::uint64_t seed);

/// Binary layout, all little-endian:
///   8 bytes  magic "NFHQDATA"
///   u32      format version (1)
///   u32      descriptor length L, then L bytes of env descriptor
///   u32      state_dim, u32 action_dim
///   u64      seed, f64 fraction, u64 trajectory count
///   per trajectory: u64 T, (T+1)*state_dim f64 states, T*action_dim f64 actions
std::string encode_dataset(const OfflineDataset& ds);
OfflineDataset decode_dataset(const std::string& bytes, const std::string& origin = "<memory>");
void save_dataset(const std::filesystem::path& path, const OfflineDataset& ds);
OfflineDataset load_dataset(const std::filesystem::path& path);

/// Throws ConfigError unless the dataset's dimensions match `env`.
void check_dataset_env(const OfflineDataset& ds, const GoalEnv& env);

/// Largest |s_{t+1} - P(s_t, a_t)|_inf over the dataset.
double replay_error(const OfflineDataset& ds, const GoalEnv& env);

}  // namespace flowhiql
