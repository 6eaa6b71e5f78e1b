#ifndef NCASP_TOOLS_RUN_CONFIG_HPP
#define NCASP_TOOLS_RUN_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>

#include <json.hpp>

#include "ncasp/errors.hpp"

namespace ncasp::tools {

/// Flat key-value run configuration: a JSON object file merged with
/// command-line overrides. Unknown keys are rejected against the schema the
/// command declares; relative paths resolve against the config file.
class RunConfig {
 public:
  void declare(const std::string& key, const std::string& default_value) {
    schema_.insert(key);
    values_.emplace(key, default_value);
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path + ": " + std::string(e.what()));
    }
    if (!j.is_object()) throw IoError(path + ": config must be a JSON object");
    base_dir_ = std::filesystem::path(path).parent_path();
    for (const auto& [key, value] : j.items()) {
      set(key, value.is_string() ? value.get<std::string>() : value.dump());
    }
  }

  void set(const std::string& key, const std::string& value) {
    if (schema_.find(key) == schema_.end()) {
      throw IoError("unknown config key '" + key + "'");
    }
    values_[key] = value;
  }

  const std::string& str(const std::string& key) const { return values_.at(key); }
  double real(const std::string& key) const { return std::stod(values_.at(key)); }
  long integer(const std::string& key) const { return std::stol(values_.at(key)); }
  std::uint64_t seed(const std::string& key) const { return std::stoull(values_.at(key)); }

  /// Paths from the config resolve relative to the config file's directory.
  std::string path(const std::string& key) const {
    const std::string& value = values_.at(key);
    if (value.empty()) return value;
    std::filesystem::path p(value);
    if (p.is_absolute() || base_dir_.empty()) return value;
    return (base_dir_ / p).string();
  }

  nlohmann::ordered_json resolved() const {
    nlohmann::ordered_json out;
    for (const auto& [k, v] : values_) out[k] = v;
    return out;
  }

  /// FNV-1a 64 over the canonical "key=value\n" listing.
  std::string content_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const std::string& s) {
      for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
      }
    };
    for (const auto& [k, v] : values_) {
      mix(k);
      mix("=");
      mix(v);
      mix("\n");
    }
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

 private:
  std::set<std::string> schema_;
  std::map<std::string, std::string> values_;
  std::filesystem::path base_dir_;
};

}  // namespace ncasp::tools

#endif  // NCASP_TOOLS_RUN_CONFIG_HPP
