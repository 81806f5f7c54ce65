#pragma once

#include <memory>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hanjakit/backends.hpp"
#include "hanjakit/config.hpp"
#include "hanjakit/entities.hpp"
#include "hanjakit/glossary.hpp"
#include "hanjakit/punctuation.hpp"
#include "hanjakit/translation.hpp"

namespace hanjakit {

// Immutable state shared by the gateway and the batch runner.
struct Services {
  Config config;
  std::shared_ptr<const PunctLabelRegistry> registry;
  std::shared_ptr<const Glossary> glossary;
  BackendSet backends;
  WindowPlan window;

  // Loads every table the config names and builds the backends.
  // Throws Error(kInvalidConfig).
  static std::shared_ptr<const Services> load(const Config& config);

  // Throws kEmptyText or kInputTooLarge.
  void check_input(std::string_view text) const;
};

struct PunctuateResult {
  std::string text;  // raw text the labels align to
  PunctLabelSeq labels;
  RenderMode mode = RenderMode::kComprehensive;
  std::string rendered;
  std::vector<std::size_t> offsets;
  bool stripped = false;  // input carried punctuation that was removed
};

struct NerResult {
  std::string text;
  TagSeq tags;
  std::vector<EntitySpan> spans;
  bool stripped = false;
};

// Punctuated input is reduced to raw text first.
PunctuateResult punctuate(const Services& services, std::string_view text,
                          RenderMode mode,
                          std::optional<std::string_view> backend = {});
NerResult recognize_entities(const Services& services, std::string_view text,
                             std::optional<std::string_view> backend = {});

// Chunks `text` for translation. Sentence boundaries come from punctuation
// already in the text, or from the backend's punctuation labels when the
// text is raw and longer than one chunk.
TranslationJob make_translation_job(const Services& services,
                                    std::string_view text, Language target,
                                    std::optional<std::string_view> backend = {});

// Runs a whole job, forwarding deltas; returns the assembled translation.
std::string translate(const Services& services, TranslationJob& job,
                      const DeltaSink& sink,
                      std::optional<std::string_view> backend = {},
                      std::stop_token stop = {});

nlohmann::json to_json(const PunctuateResult& r);
nlohmann::json to_json(const NerResult& r);
nlohmann::json to_json(const EntitySpan& s);
nlohmann::json to_json(const GlossaryEntry& e);
nlohmann::json to_json(const StreamDelta& d);
// Accepts {"start", "end", "type"}; type is a full name or tag suffix.
EntitySpan span_from_json(const nlohmann::json& j);

}  // namespace hanjakit
