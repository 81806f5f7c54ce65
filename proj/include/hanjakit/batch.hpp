#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hanjakit/persistence.hpp"
#include "hanjakit/pipeline.hpp"

namespace hanjakit {

struct BatchManifest {
  std::vector<std::filesystem::path> inputs;  // files or directories
  std::vector<Task> tasks;                    // run in this order
  RenderMode mode = RenderMode::kComprehensive;
  std::vector<Language> targets = {Language::kKorean};
  std::filesystem::path output_dir;
  std::optional<std::string> backend;
  std::size_t jobs = 0;  // 0: hardware concurrency

  // Throws Error(kInvalidConfig) for an empty task list or an output
  // directory that cannot be created.
  void validate() const;
};

struct FileOutcome {
  std::filesystem::path input;
  std::optional<std::filesystem::path> output;
  std::optional<std::string> error;
};

struct BatchSummary {
  std::vector<FileOutcome> files;  // in input order
  std::size_t succeeded = 0;
  std::size_t failed = 0;

  nlohmann::json to_json() const;
};

// Directories expand to their regular files, sorted by name.
std::vector<std::filesystem::path> expand_inputs(
    const std::vector<std::filesystem::path>& inputs);

// One output document for one input text.
nlohmann::json process_document(const Services& services,
                                const std::string& source_name,
                                std::string_view text,
                                const BatchManifest& manifest);

// Writes `<output_dir>/<file name>.json` per input and `summary.json`.
// Per-file failures are recorded, never thrown.
BatchSummary run_batch(const Services& services, const BatchManifest& manifest);

}  // namespace hanjakit
