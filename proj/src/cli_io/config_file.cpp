#include "flowhiql/cli_io/config_file.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "flowhiql/errors.hpp"
#include "flowhiql/format.hpp"

namespace flowhiql {

namespace {

struct Field {
  const char* section;
  const char* key;
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, const std::string&)> set;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("malformed number '" + raw + "'");
  }
  return v;
}

std::vector<std::size_t> parse_sizes(const std::string& raw) {
  std::vector<std::size_t> out;
  std::stringstream in(raw);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_number<std::size_t>(item));
  if (out.empty()) throw ConfigError("empty size list");
  return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

#define FIELD_STR(sec, name) \
  Field{sec, #name, [](const TrainConfig& c) { return c.name; }, \
        [](TrainConfig& c, const std::string& v) { c.name = trim(v); }}
#define FIELD_NUM(sec, name, T) \
  Field{sec, #name, [](const TrainConfig& c) { return std::to_string(c.name); }, \
        [](TrainConfig& c, const std::string& v) { c.name = parse_number<T>(v); }}
#define FIELD_REAL(sec, name) \
  Field{sec, #name, [](const TrainConfig& c) { return fmt(c.name); }, \
        [](TrainConfig& c, const std::string& v) { c.name = parse_number<double>(v); }}
#define FIELD_SIZES(sec, name) \
  Field{sec, #name, [](const TrainConfig& c) { return join_sizes(c.name); }, \
        [](TrainConfig& c, const std::string& v) { c.name = parse_sizes(v); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      FIELD_STR("run", env),
      FIELD_STR("run", family),
      FIELD_NUM("run", seed, std::uint64_t),
      FIELD_NUM("run", steps, std::size_t),
      FIELD_NUM("run", eval_interval, std::size_t),
      FIELD_NUM("run", checkpoint_interval, std::size_t),
      FIELD_REAL("run", dataset_fraction),
      FIELD_NUM("hiql", k, std::size_t),
      FIELD_REAL("hiql", beta),
      FIELD_REAL("hiql", w_max),
      FIELD_REAL("hiql", tau),
      FIELD_REAL("hiql", gamma),
      FIELD_REAL("hiql", polyak),
      FIELD_NUM("hiql", batch_size, std::size_t),
      FIELD_REAL("hiql", grad_clip),
      FIELD_REAL("optim", lr_value),
      FIELD_REAL("optim", lr_high),
      FIELD_REAL("optim", lr_low),
      FIELD_REAL("relabel", p_geometric),
      FIELD_REAL("relabel", p_uniform),
      FIELD_REAL("relabel", p_final),
      FIELD_SIZES("network", value_hidden),
      FIELD_SIZES("network", policy_hidden),
      FIELD_NUM("network", flow_layers, std::size_t),
      FIELD_REAL("network", scale_clamp),
      FIELD_REAL("network", translate_clamp),
      FIELD_REAL("network", log_std_clamp),
      FIELD_NUM("eval", eval_goals, std::size_t),
      FIELD_NUM("eval", eval_episodes, std::size_t),
      FIELD_REAL("eval", eval_high_noise),
      FIELD_REAL("eval", eval_low_noise),
  };
  return table;
}

}  // namespace

TrainConfig parse_config(const std::string& text, const std::string& origin) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  TrainConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError(origin + ": key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      const Field* field = nullptr;
      for (const auto& f : fields()) {
        if (section == f.section && key == f.key) field = &f;
      }
      if (!field) throw ConfigError(origin + ": unknown key [" + section + "] " + key);
      try {
        field->set(config, value.data());
      } catch (const ConfigError& e) {
        throw ConfigError(origin + ": [" + section + "] " + key + ": " + e.what());
      }
    }
  }
  try {
    config.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return config;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open config");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string write_config(const TrainConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += std::string(f.key) + " = " + f.get(config) + "\n";
  }
  return out;
}

void save_config(const std::filesystem::path& path, const TrainConfig& config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << write_config(config);
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace flowhiql
