#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hanjakit/punctuation.hpp"

namespace hanjakit {

enum class Language { kHanja, kKorean, kEnglish };

std::string_view to_string(Language lang);
// Accepts "Hanja", "Korean", "English" (case-insensitive). Throws
// kUnsupportedDirection for anything else.
Language parse_language(std::string_view name);

// Three newline-separated lines: instruction, source line, open target slot.
// Throws kUnsupportedDirection or kEmptyText.
std::string build_prompt(Language source, Language target,
                         std::string_view text);

inline constexpr std::size_t kDefaultChunkUnits = 384;

// Splits `text` into consecutive windows of at most `max_units` characters.
// `break_after[i]` marks character i as a preferred window end.
std::vector<std::string> chunk(std::string_view text, std::size_t max_units,
                               const std::vector<bool>& break_after = {});

// Same, preferring breaks right after sentence-final labels.
std::vector<std::string> chunk(std::string_view text, std::size_t max_units,
                               const PunctLabelRegistry& registry,
                               std::span<const std::string> labels);

// Preferred breaks for already-punctuated text: after 。？！ glyphs.
std::vector<bool> sentence_breaks(std::string_view punctuated);

struct StreamDelta {
  std::string text;
  bool done = false;

  friend bool operator==(const StreamDelta&, const StreamDelta&) = default;
};

// Incremental form of assemble_stream.
class StreamAssembler {
 public:
  void push(const StreamDelta& delta);  // throws kDeltaAfterDone
  bool done() const { return done_; }
  const std::string& text() const { return text_; }
  std::string finish() const;  // throws kStreamTruncated

 private:
  std::string text_;
  bool done_ = false;
};

std::string assemble_stream(std::span<const StreamDelta> deltas);

// Per-chunk translations joined for a multi-chunk job.
std::string join_translations(std::span<const std::string> parts);

enum class JobState { kPending, kStreaming, kDone, kFailed };
std::string_view to_string(JobState s);

class TranslationJob {
 public:
  TranslationJob(std::string source_text, Language target,
                 std::vector<std::string> chunks);

  // Chunks `text` and checks the direction. Throws kEmptyText,
  // kUnsupportedDirection.
  static TranslationJob create(std::string text, Language target,
                               std::size_t max_units = kDefaultChunkUnits,
                               const std::vector<bool>& break_after = {});

  const std::string& source_text() const { return source_text_; }
  Language target() const { return target_; }
  const std::vector<std::string>& chunks() const { return chunks_; }
  std::string prompt(std::size_t chunk_index) const;

  JobState state() const { return state_; }
  // Forward-only transitions; throw kInvalidState otherwise.
  void start();
  void complete();
  void fail(std::string reason);
  const std::string& failure() const { return failure_; }

 private:
  std::string source_text_;
  Language target_;
  std::vector<std::string> chunks_;
  JobState state_ = JobState::kPending;
  std::string failure_;
};

}  // namespace hanjakit
