#include "flowhiql/tensor_nn/checkpoint.hpp"

#include <bit>
#include <boost/crc.hpp>
#include <cstdio>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "flowhiql/errors.hpp"

namespace flowhiql {

namespace {

constexpr const char* kMagic = "FLOWHIQL-CHECKPOINT";

void put_f64_le(std::string& out, double x) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

double get_f64_le(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return std::bit_cast<double>(bits);
}

bool next_line(const std::string& bytes, std::size_t& pos, std::string& line) {
  const std::size_t end = bytes.find('\n', pos);
  if (end == std::string::npos) return false;
  line = bytes.substr(pos, end - pos);
  pos = end + 1;
  return true;
}

std::string payload_crc(const char* data, std::size_t size) {
  boost::crc_32_type crc;
  crc.process_bytes(data, size);
  char hex[9];
  std::snprintf(hex, sizeof hex, "%08x", static_cast<unsigned>(crc.checksum()));
  return hex;
}

}  // namespace

std::string encode_checkpoint(const ParamStore& params) {
  std::ostringstream header;
  header << kMagic << " 1\n";
  header << "version " << params.version() << "\n";
  header << "segments " << params.segment_count() << "\n";
  for (const Segment& s : params.segments()) {
    header << s.name << ' ' << s.shape.size();
    for (std::size_t d : s.shape) header << ' ' << d;
    header << '\n';
  }
  std::string payload;
  payload.reserve(8 * params.size());
  for (double x : params.flat()) put_f64_le(payload, x);
  header << "crc32 " << payload_crc(payload.data(), payload.size()) << "\n";
  header << "end\n";
  return header.str() + payload;
}

ParamStore decode_checkpoint(const std::string& bytes, const std::string& origin) {
  std::size_t pos = 0;
  std::string line;
  auto fail = [&](const std::string& what) -> ParamStore { throw IoError(origin, what); };
  if (!next_line(bytes, pos, line) || line != std::string(kMagic) + " 1") {
    return fail("not a checkpoint (bad magic)");
  }
  std::uint64_t version = 0;
  std::size_t count = 0;
  {
    if (!next_line(bytes, pos, line)) return fail("truncated header");
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key >> version) || key != "version") return fail("malformed version line");
  }
  {
    if (!next_line(bytes, pos, line)) return fail("truncated header");
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key >> count) || key != "segments") return fail("malformed segments line");
  }
  ParamStore params;
  for (std::size_t i = 0; i < count; ++i) {
    if (!next_line(bytes, pos, line)) return fail("truncated segment table");
    std::istringstream ls(line);
    std::string name;
    std::size_t rank = 0;
    if (!(ls >> name >> rank) || rank == 0 || rank > 8) return fail("malformed segment line");
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) {
      if (!(ls >> d)) return fail("malformed segment shape");
    }
    std::string extra;
    if (ls >> extra) return fail("trailing tokens in segment line");
    try {
      params.add_segment(name, shape);
    } catch (const ConfigError& e) {
      return fail(e.what());
    }
  }
  std::string crc_line;
  if (!next_line(bytes, pos, crc_line) || crc_line.rfind("crc32 ", 0) != 0) {
    return fail("missing crc32 line");
  }
  if (!next_line(bytes, pos, line) || line != "end") return fail("missing header terminator");
  const std::size_t payload = bytes.size() - pos;
  if (payload != 8 * params.size()) {
    return fail("payload holds " + std::to_string(payload) + " bytes, expected " +
                std::to_string(8 * params.size()));
  }
  if (crc_line.substr(6) != payload_crc(bytes.data() + pos, payload)) {
    return fail("payload checksum mismatch");
  }
  auto flat = params.flat();
  for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = get_f64_le(bytes.data() + pos + 8 * i);
  params.set_version(version);
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params) {
  const std::string bytes = encode_checkpoint(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path.string(), "write failed");
}

ParamStore load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str(), path.string());
}

void assign_values(ParamStore& target, const ParamStore& source) {
  if (!target.same_layout(source)) throw ConfigError("assign_values: layout mismatch");
  auto t = target.flat();
  auto s = source.flat();
  std::copy(s.begin(), s.end(), t.begin());
}

}  // namespace flowhiql
