#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace flowhiql {

struct Segment {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// Flat parameter vector partitioned into named, shaped segments.
///
/// Every trainable weight in the system lives in a ParamStore. Networks keep
/// segment indices, not pointers, so a store can be copied (e.g. to make a
/// target network) and the copy evaluated with the same network object.
class ParamStore {
 public:
  /// Appends a zero-filled segment and returns its index. Names must be unique
  /// and free of whitespace (they appear verbatim in checkpoint headers).
  std::size_t add_segment(std::string name, std::vector<std::size_t> shape);

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;

  const Segment& segment(std::size_t index) const { return segments_.at(index); }
  std::span<const Segment> segments() const { return segments_; }
  std::size_t segment_count() const { return segments_.size(); }

  std::span<double> values(std::size_t index);
  std::span<const double> values(std::size_t index) const;

  std::span<double> flat() { return values_; }
  std::span<const double> flat() const { return values_; }
  std::size_t size() const { return values_.size(); }

  /// Segment owning flat coordinate `i`.
  const Segment& segment_at(std::size_t flat_index) const;

  std::uint64_t version() const { return version_; }
  void bump_version() { ++version_; }
  void set_version(std::uint64_t v) { version_ = v; }

  bool same_layout(const ParamStore& other) const;

 private:
  std::vector<Segment> segments_;
  std::vector<double> values_;
  std::uint64_t version_ = 0;
};

}  // namespace flowhiql
