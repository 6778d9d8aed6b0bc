#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "litterbot/mission.hpp"

namespace litterbot {

/// Invalid scenario configuration. `key` is the dotted field path when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message);
  const std::string& key() const { return key_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string key_;
  std::string detail_;
};

/// Sets one `section.key` to `value`. Unknown keys and malformed values throw ConfigError.
void set_config_value(MissionConfig& cfg, std::string_view key, std::string_view value);

/// Applies `section.key = value` lines (# starts a comment) on top of `base`.
MissionConfig parse_config(std::string_view text, MissionConfig base = {});
MissionConfig load_config(const std::filesystem::path& path);

/// Every accepted key, sorted.
std::vector<std::string> config_keys();

}  // namespace litterbot
