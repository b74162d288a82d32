#include "flowhiql/envs_data/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "flowhiql/errors.hpp"

namespace flowhiql {

static_assert(std::endian::native == std::endian::little, "dataset IO assumes little-endian");

namespace {

constexpr char kMagic[8] = {'N', 'F', 'H', 'Q', 'D', 'A', 'T', 'A'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

void put_doubles(std::string& out, const Matrix& m) {
  out.append(reinterpret_cast<const char*>(m.data()),
             static_cast<std::size_t>(m.size()) * sizeof(double));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& origin) : bytes_(bytes), origin_(origin) {}

  template <typename T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }

  const char* take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw IoError(origin_, "truncated dataset");
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  void read_doubles(Matrix& m) {
    const std::size_t n = static_cast<std::size_t>(m.size());
    if (n > (bytes_.size() - pos_) / sizeof(double)) throw IoError(origin_, "truncated dataset");
    std::memcpy(m.data(), take(n * sizeof(double)), n * sizeof(double));
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  const std::string& origin_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t OfflineDataset::transition_count() const {
  std::size_t n = 0;
  for (const auto& t : trajectories) n += t.transitions();
  return n;
}

OfflineDataset generate_dataset(const GoalEnv& env, std::size_t n_traj, std::uint64_t seed) {
  if (n_traj == 0) throw ArgumentError("n_traj must be at least 1");
  OfflineDataset ds;
  ds.env = env.descriptor();
  ds.state_dim = env.state_dim();
  ds.action_dim = env.action_dim();
  ds.seed = seed;
  ds.trajectories.reserve(n_traj);
  for (std::size_t i = 0; i < n_traj; ++i) {
    Random rng(seed, i + 1);
    ds.trajectories.push_back(env.behavior_trajectory(rng));
  }
  return ds;
}

std::vector<std::size_t> fraction_order(std::size_t n_traj, std::uint64_t seed) {
  std::vector<std::size_t> order(n_traj);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Random rng(seed, 0);
  for (std::size_t i = n_traj; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  return order;
}

OfflineDataset apply_fraction(const OfflineDataset& full, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ArgumentError("fraction must lie in (0, 1]");
  if (full.fraction != 1.0) throw ArgumentError("fraction applies only to a full dataset");
  OfflineDataset out = full;
  out.fraction = fraction;
  if (fraction == 1.0) return out;
  const std::size_t n = full.trajectories.size();
  const auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  const auto order = fraction_order(n, full.seed);
  out.trajectories.clear();
  for (std::size_t i = 0; i < keep; ++i) out.trajectories.push_back(full.trajectories[order[i]]);
  return out;
}

std::string encode_dataset(const OfflineDataset& ds) {
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.env.size()));
  out += ds.env;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.state_dim));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.action_dim));
  put<std::uint64_t>(out, ds.seed);
  put<double>(out, ds.fraction);
  put<std::uint64_t>(out, ds.trajectories.size());
  for (const auto& t : ds.trajectories) {
    if (static_cast<std::size_t>(t.states.cols()) != ds.state_dim ||
        static_cast<std::size_t>(t.actions.cols()) != ds.action_dim ||
        t.states.rows() != t.actions.rows() + 1) {
      throw ConfigError("trajectory shape does not match dataset header");
    }
    put<std::uint64_t>(out, t.transitions());
    put_doubles(out, t.states);
    put_doubles(out, t.actions);
  }
  return out;
}

OfflineDataset decode_dataset(const std::string& bytes, const std::string& origin) {
  Reader in(bytes, origin);
  if (std::memcmp(in.take(sizeof(kMagic)), kMagic, sizeof(kMagic)) != 0) {
    throw IoError(origin, "not a dataset file");
  }
  if (in.get<std::uint32_t>() != kVersion) throw IoError(origin, "unsupported dataset version");
  OfflineDataset ds;
  const auto len = in.get<std::uint32_t>();
  ds.env.assign(in.take(len), len);
  ds.state_dim = in.get<std::uint32_t>();
  ds.action_dim = in.get<std::uint32_t>();
  ds.seed = in.get<std::uint64_t>();
  ds.fraction = in.get<double>();
  const auto count = in.get<std::uint64_t>();
  if (ds.state_dim == 0 || ds.action_dim == 0) throw IoError(origin, "zero dimension in header");
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto steps = in.get<std::uint64_t>();
    if (steps > bytes.size()) throw IoError(origin, "truncated dataset");
    Trajectory t;
    t.states.resize(static_cast<Eigen::Index>(steps + 1), static_cast<Eigen::Index>(ds.state_dim));
    t.actions.resize(static_cast<Eigen::Index>(steps), static_cast<Eigen::Index>(ds.action_dim));
    in.read_doubles(t.states);
    in.read_doubles(t.actions);
    ds.trajectories.push_back(std::move(t));
  }
  if (!in.done()) throw IoError(origin, "trailing bytes after dataset");
  return ds;
}

void save_dataset(const std::filesystem::path& path, const OfflineDataset& ds) {
  const std::string bytes = encode_dataset(ds);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path.string(), "write failed");
}

OfflineDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_dataset(buf.str(), path.string());
}

void check_dataset_env(const OfflineDataset& ds, const GoalEnv& env) {
  if (ds.state_dim != env.state_dim() || ds.action_dim != env.action_dim()) {
    throw ConfigError("dataset dimensions (" + std::to_string(ds.state_dim) + ", " +
                      std::to_string(ds.action_dim) + ") do not match environment '" +
                      env.descriptor() + "'");
  }
  if (ds.trajectories.empty()) throw ConfigError("dataset has no trajectories");
}

double replay_error(const OfflineDataset& ds, const GoalEnv& env) {
  double worst = 0.0;
  for (const auto& traj : ds.trajectories) {
    for (Eigen::Index t = 0; t < traj.actions.rows(); ++t) {
      const auto s = traj.states.row(t);
      const auto a = traj.actions.row(t);
      const auto next = env.transition(std::span<const double>(s.data(), s.size()),
                                       std::span<const double>(a.data(), a.size()));
      for (Eigen::Index j = 0; j < traj.states.cols(); ++j) {
        worst = std::max(worst, std::abs(next[static_cast<std::size_t>(j)] - traj.states(t + 1, j)));
      }
    }
  }
  return worst;
}

}  // namespace flowhiql
