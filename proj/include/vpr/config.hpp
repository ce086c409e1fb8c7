#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "vpr/error.hpp"

namespace vpr {

/// Tool settings. Precedence: command-line flags > config file > defaults.
struct Config {
  std::optional<std::filesystem::path> rules_path;  // built-in rules when unset
  std::optional<std::filesystem::path> asset_dir;
  std::optional<std::int64_t> coalesce_gap_ms;  // overrides the rules file
  std::optional<std::size_t> min_support;
  std::size_t max_len = 5;
  std::string format = "p1";
  std::string palette = "default";
  bool section_colors = true;
  bool embed_assets = true;
  double threshold_sec = 30.0;
  std::int64_t idle_threshold_ms = 120'000;
};

inline constexpr const char* kConfigFileName = "vpr.config.json";

/// Unknown keys and mistyped values are rejected with InvalidConfig.
inline Config config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  Config c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "rules_path") c.rules_path = value.get<std::string>();
      else if (key == "asset_dir") c.asset_dir = value.get<std::string>();
      else if (key == "coalesce_gap_ms") c.coalesce_gap_ms = value.get<std::int64_t>();
      else if (key == "min_support") c.min_support = value.get<std::size_t>();
      else if (key == "max_len") c.max_len = value.get<std::size_t>();
      else if (key == "format") c.format = value.get<std::string>();
      else if (key == "palette") c.palette = value.get<std::string>();
      else if (key == "section_colors") c.section_colors = value.get<bool>();
      else if (key == "embed_assets") c.embed_assets = value.get<bool>();
      else if (key == "threshold_sec") c.threshold_sec = value.get<double>();
      else if (key == "idle_threshold_ms") c.idle_threshold_ms = value.get<std::int64_t>();
      else throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "'");
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::InvalidConfig, "wrong type for '" + key + "'");
    }
  }
  return c;
}

inline Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::InvalidConfig, path.string() + " is not valid JSON");
  return config_from_json(j);
}

}  // namespace vpr
