#include "hanjakit/translation.hpp"

#include <algorithm>
#include <cctype>

#include "hanjakit/error.hpp"
#include "hanjakit/text.hpp"

namespace hanjakit {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

void check_direction(Language source, Language target) {
  if (source != Language::kHanja ||
      (target != Language::kKorean && target != Language::kEnglish)) {
    throw Error(Errc::kUnsupportedDirection,
                "unsupported direction " + std::string(to_string(source)) +
                    " -> " + std::string(to_string(target)));
  }
}

std::vector<std::string> chunk_graphemes(const std::vector<std::string>& chars,
                                         std::size_t max_units,
                                         const std::vector<bool>& break_after) {
  if (max_units == 0) {
    throw Error(Errc::kInvalidConfig, "chunk size must be positive");
  }
  if (!break_after.empty() && break_after.size() != chars.size()) {
    throw Error(Errc::kLengthMismatch,
                "boundary sequence length differs from character count");
  }
  std::vector<std::string> windows;
  std::size_t pos = 0;
  const std::size_t n = chars.size();
  while (pos < n) {
    std::size_t end = std::min(n, pos + max_units);
    if (end < n && !break_after.empty()) {
      // Latest preferred break inside the window.
      for (std::size_t cut = end; cut > pos; --cut) {
        if (break_after[cut - 1]) {
          end = cut;
          break;
        }
      }
    }
    std::string window;
    for (std::size_t i = pos; i < end; ++i) window += chars[i];
    windows.push_back(std::move(window));
    pos = end;
  }
  return windows;
}

}  // namespace

std::string_view to_string(Language lang) {
  switch (lang) {
    case Language::kHanja: return "Hanja";
    case Language::kKorean: return "Korean";
    case Language::kEnglish: return "English";
  }
  return "Hanja";
}

Language parse_language(std::string_view name) {
  for (auto l : {Language::kHanja, Language::kKorean, Language::kEnglish}) {
    if (iequals(name, to_string(l))) return l;
  }
  throw Error(Errc::kUnsupportedDirection,
              "unknown language '" + std::string(name) + "'");
}

std::string build_prompt(Language source, Language target,
                         std::string_view text) {
  check_direction(source, target);
  if (text.empty()) throw Error(Errc::kEmptyText, "nothing to translate");
  const auto src = to_string(source);
  const auto tgt = to_string(target);
  std::string prompt;
  prompt.reserve(text.size() + 64);
  prompt.append("Translate the following text from ")
      .append(src)
      .append(" into ")
      .append(tgt)
      .append(".\n")
      .append(src)
      .append(": ")
      .append(text)
      .append("\n")
      .append(tgt)
      .append(":");
  return prompt;
}

std::vector<std::string> chunk(std::string_view text, std::size_t max_units,
                               const std::vector<bool>& break_after) {
  return chunk_graphemes(split_graphemes(text), max_units, break_after);
}

std::vector<std::string> chunk(std::string_view text, std::size_t max_units,
                               const PunctLabelRegistry& registry,
                               std::span<const std::string> labels) {
  std::vector<bool> breaks;
  breaks.reserve(labels.size());
  for (const auto& id : labels) breaks.push_back(registry.at(id).ends_sentence());
  return chunk(text, max_units, breaks);
}

std::vector<bool> sentence_breaks(std::string_view punctuated) {
  std::vector<bool> out;
  for (const auto& g : split_graphemes(punctuated)) {
    out.push_back(g == "。" || g == "？" || g == "！");
  }
  return out;
}

void StreamAssembler::push(const StreamDelta& delta) {
  if (done_) {
    throw Error(Errc::kDeltaAfterDone, "delta received after stream end");
  }
  text_ += delta.text;
  done_ = delta.done;
}

std::string StreamAssembler::finish() const {
  if (!done_) {
    throw Error(Errc::kStreamTruncated, "stream ended without a done delta");
  }
  return text_;
}

std::string assemble_stream(std::span<const StreamDelta> deltas) {
  StreamAssembler assembler;
  for (const auto& d : deltas) assembler.push(d);
  return assembler.finish();
}

std::string join_translations(std::span<const std::string> parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += '\n';
    out += parts[i];
  }
  return out;
}

std::string_view to_string(JobState s) {
  switch (s) {
    case JobState::kPending: return "pending";
    case JobState::kStreaming: return "streaming";
    case JobState::kDone: return "done";
    case JobState::kFailed: return "failed";
  }
  return "pending";
}

TranslationJob::TranslationJob(std::string source_text, Language target,
                               std::vector<std::string> chunks)
    : source_text_(std::move(source_text)),
      target_(target),
      chunks_(std::move(chunks)) {
  check_direction(Language::kHanja, target_);
}

TranslationJob TranslationJob::create(std::string text, Language target,
                                      std::size_t max_units,
                                      const std::vector<bool>& break_after) {
  check_direction(Language::kHanja, target);
  if (text.empty()) throw Error(Errc::kEmptyText, "nothing to translate");
  auto windows = chunk(text, max_units, break_after);
  return TranslationJob(std::move(text), target, std::move(windows));
}

std::string TranslationJob::prompt(std::size_t chunk_index) const {
  return build_prompt(Language::kHanja, target_, chunks_.at(chunk_index));
}

void TranslationJob::start() {
  if (state_ != JobState::kPending) {
    throw Error(Errc::kInvalidState, "job already started");
  }
  state_ = JobState::kStreaming;
}

void TranslationJob::complete() {
  if (state_ != JobState::kStreaming) {
    throw Error(Errc::kInvalidState, "job is not streaming");
  }
  state_ = JobState::kDone;
}

void TranslationJob::fail(std::string reason) {
  if (state_ == JobState::kDone || state_ == JobState::kFailed) {
    throw Error(Errc::kInvalidState, "job already finished");
  }
  state_ = JobState::kFailed;
  failure_ = std::move(reason);
}

}  // namespace hanjakit
