#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hanjakit/backends.hpp"

namespace hanjakit {

struct BackendConfig {
  BackendDescriptor descriptor;
  // Reference backends.
  std::filesystem::path punct_rules;  // empty: built-in rules
  std::filesystem::path gazetteer;    // empty: no entities
  std::size_t fragment_chars = 4;
  std::chrono::milliseconds fragment_delay{0};
  // Remote backends.
  RemoteOptions remote;
};

// Platform configuration. Loaded from one JSON file; relative paths resolve
// against the file's directory; HANJAKIT_* environment variables override.
struct Config {
  std::string bind_address = "127.0.0.1";
  int port = 8080;
  std::size_t input_limit = 20000;  // characters, all task endpoints
  std::size_t worker_threads = 64;
  std::filesystem::path database = "hanjakit.db";
  std::filesystem::path registry;  // empty: built-in registry
  std::filesystem::path readings;
  std::filesystem::path cedict;
  std::string link_template = "https://hanja.dict.naver.com/#/search?query={q}";
  std::chrono::seconds session_lifetime = std::chrono::hours(24 * 30);
  std::size_t window_size = WindowPlan::kDefaultWindow;
  std::size_t window_stride = WindowPlan::kDefaultStride;
  std::size_t translate_chunk_chars = kDefaultChunkUnits;
  std::string default_backend = "reference";
  std::vector<BackendConfig> backends;

  // Throws Error(kInvalidConfig).
  static Config load(const std::filesystem::path& path);
  static Config parse(std::string_view json_text,
                      const std::filesystem::path& base_dir);

  using EnvLookup = std::function<std::optional<std::string>(const char*)>;
  // HANJAKIT_BIND, _PORT, _INPUT_LIMIT, _DATABASE, _REGISTRY, _READINGS,
  // _CEDICT, _LINK_TEMPLATE, _SESSION_DAYS, _DEFAULT_BACKEND.
  void apply_env(const EnvLookup& lookup);
  void apply_env();  // process environment
};

}  // namespace hanjakit
