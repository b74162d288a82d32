#include "flowhiql/tensor_nn/param_store.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "flowhiql/errors.hpp"

namespace flowhiql {

std::size_t ParamStore::add_segment(std::string name, std::vector<std::size_t> shape) {
  if (name.empty() || name.find_first_of(" \t\r\n") != std::string::npos) {
    throw ConfigError("invalid segment name '" + name + "'");
  }
  if (find(name)) throw ConfigError("duplicate segment name '" + name + "'");
  if (shape.empty()) throw ConfigError("segment '" + name + "' has empty shape");
  const std::size_t count =
      std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  Segment seg{std::move(name), std::move(shape), values_.size(), count};
  values_.resize(values_.size() + count, 0.0);
  segments_.push_back(std::move(seg));
  return segments_.size() - 1;
}

std::optional<std::size_t> ParamStore::find(std::string_view name) const {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t ParamStore::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw ConfigError("no segment named '" + std::string(name) + "'");
}

std::span<double> ParamStore::values(std::size_t index) {
  const Segment& s = segments_.at(index);
  return std::span<double>(values_).subspan(s.offset, s.size);
}

std::span<const double> ParamStore::values(std::size_t index) const {
  const Segment& s = segments_.at(index);
  return std::span<const double>(values_).subspan(s.offset, s.size);
}

const Segment& ParamStore::segment_at(std::size_t flat_index) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), flat_index,
                             [](std::size_t i, const Segment& s) { return i < s.offset; });
  if (it == segments_.begin() || flat_index >= values_.size()) {
    throw ConfigError("flat index out of range");
  }
  return *std::prev(it);
}

bool ParamStore::same_layout(const ParamStore& other) const {
  if (segments_.size() != other.segments_.size()) return false;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i].name != other.segments_[i].name ||
        segments_[i].shape != other.segments_[i].shape) {
      return false;
    }
  }
  return true;
}

}  // namespace flowhiql
