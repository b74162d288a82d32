#pragma once

#include <filesystem>
#include <string>

#include "flowhiql/tensor_nn/param_store.hpp"

namespace flowhiql {

// Checkpoint layout (all text lines end in '\n'):
//
//   FLOWHIQL-CHECKPOINT 1
//   version <update counter>
//   segments <count>
//   <name> <rank> <dim_0> ... <dim_{rank-1}>      (one line per segment, in order)
//   crc32 <8 lowercase hex digits of the payload CRC-32>
//   end
//   <payload>
//
// The payload is every segment's values in segment order, each value an
// IEEE-754 binary64 in little-endian byte order, with nothing after it. The
// file size must equal header size + 8 * total value count, and the
// payload must match its CRC-32.

std::string encode_checkpoint(const ParamStore& params);
ParamStore decode_checkpoint(const std::string& bytes, const std::string& origin = "<memory>");

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params);
ParamStore load_checkpoint(const std::filesystem::path& path);

/// Copies values from `source` into `target`; layouts must match exactly.
void assign_values(ParamStore& target, const ParamStore& source);

}  // namespace flowhiql
