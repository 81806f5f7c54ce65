#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <set>
#include <span>
#include <stop_token>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hanjakit/entities.hpp"
#include "hanjakit/error.hpp"
#include "hanjakit/glossary.hpp"
#include "hanjakit/punctuation.hpp"
#include "hanjakit/text.hpp"
#include "hanjakit/translation.hpp"

namespace hanjakit {

enum class Capability { kPunctuate, kNer, kTranslate };
std::string_view to_string(Capability c);
Capability parse_capability(std::string_view name);  // throws kInvalidConfig

struct BackendDescriptor {
  enum class Kind { kReference, kRemote };

  std::string name;
  Kind kind = Kind::kReference;
  std::set<Capability> capabilities;
  std::optional<std::string> endpoint;  // remote only

  bool supports(Capability c) const { return capabilities.contains(c); }
  // Throws kInvalidConfig when a remote backend lacks an endpoint or the
  // capability set is empty.
  void validate() const;
};

// Overlapping windows for bounded-context labelers.
class WindowPlan {
 public:
  static constexpr std::size_t kDefaultWindow = 384;
  static constexpr std::size_t kDefaultStride = 256;

  WindowPlan() : WindowPlan(kDefaultWindow, kDefaultStride) {}
  // Throws kInvalidWindowPlan unless 0 < stride <= window_size.
  WindowPlan(std::size_t window_size, std::size_t stride);

  std::size_t window_size() const { return window_size_; }
  std::size_t stride() const { return stride_; }

  struct Window {
    std::size_t start;
    std::size_t end;
  };
  // Windows covering [0, length); the last one may be shorter.
  std::vector<Window> windows(std::size_t length) const;

 private:
  std::size_t window_size_;
  std::size_t stride_;
};

// Runs `labeler` over each window of `text` and keeps, per character, the
// prediction from the window whose center is nearest; ties go to the earlier
// window. `labeler(window_text)` must return one T per window character.
template <typename T, typename Labeler>
std::vector<T> run_windowed(std::string_view text, const WindowPlan& plan,
                            Labeler&& labeler) {
  const auto chars = split_graphemes(text);
  const auto n = chars.size();
  std::vector<T> out(n);
  if (n == 0) return out;
  // Doubled distances keep the half-character centers integral.
  std::vector<std::size_t> best(n, static_cast<std::size_t>(-1));
  for (const auto& w : plan.windows(n)) {
    std::string window_text;
    for (auto i = w.start; i < w.end; ++i) window_text += chars[i];
    std::vector<T> predicted = labeler(std::string_view(window_text));
    if (predicted.size() != w.end - w.start) {
      throw Error(Errc::kInvalidBackendResponse,
                  "labeler returned " + std::to_string(predicted.size()) +
                      " predictions for a window of " +
                      std::to_string(w.end - w.start));
    }
    const auto center2 = w.start + w.end - 1;
    for (auto i = w.start; i < w.end; ++i) {
      const auto pos2 = 2 * i;
      const auto dist = pos2 > center2 ? pos2 - center2 : center2 - pos2;
      if (dist < best[i]) {
        best[i] = dist;
        out[i] = std::move(predicted[i - w.start]);
      }
    }
  }
  return out;
}

struct TranslationRequest {
  std::string text;    // one chunk of source text
  Language target = Language::kKorean;
  std::string prompt;  // build_prompt(Hanja, target, text)
};

using DeltaSink = std::function<void(const StreamDelta&)>;

// Model backend contract. Implementations are shareable and safe to call
// concurrently. The per-window calls see at most one window of text.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual const BackendDescriptor& descriptor() const = 0;
  virtual PunctLabelSeq label_window(std::string_view text) const = 0;
  virtual TagSeq tag_window(std::string_view text) const = 0;
  // Emits deltas for one request, the last with done=true. Throws
  // kCancelled once `stop` is requested.
  virtual void translate(const TranslationRequest& request,
                         const DeltaSink& sink, std::stop_token stop) const = 0;
};

// Validates the input, runs the backend over `plan`'s windows.
// Throws kEmptyText, kBackendUnavailable, kInvalidBackendResponse.
PunctLabelSeq label_punctuation(const Backend& backend, std::string_view text,
                                const WindowPlan& plan = {});
TagSeq tag_entities(const Backend& backend, std::string_view text,
                    const WindowPlan& plan = {});

// Streams a whole job: per-chunk streams are validated and joined by "\n"
// deltas; exactly one final done delta is emitted. Drives the job state.
void translate_stream(const Backend& backend, TranslationJob& job,
                      const DeltaSink& sink, std::stop_token stop = {});

// Rule tables for the deterministic reference backend.
struct ReferenceRules {
  std::unordered_map<std::string, std::string> punct_after;  // char -> label
  std::unordered_map<std::string, EntityType> gazetteer;     // surface -> type
  std::size_t fragment_chars = 4;  // characters per streamed delta
  std::chrono::milliseconds fragment_delay{0};

  // Built-in defaults: 曰 ColonOpenQuote, 也/矣 Period, 者 Comma.
  static std::unordered_map<std::string, std::string> default_punct_rules();
  // `char<TAB>label_id` lines; labels are checked against `registry`.
  static std::unordered_map<std::string, std::string> load_punct_rules(
      std::istream& in, const PunctLabelRegistry& registry);
  // `surface<TAB>TYPE` lines, TYPE a tag suffix or full type name.
  static std::unordered_map<std::string, EntityType> load_gazetteer(
      std::istream& in);
};

class ReferenceBackend final : public Backend {
 public:
  ReferenceBackend(BackendDescriptor descriptor,
                   std::shared_ptr<const PunctLabelRegistry> registry,
                   std::shared_ptr<const Glossary> glossary,
                   ReferenceRules rules);

  const BackendDescriptor& descriptor() const override { return descriptor_; }
  PunctLabelSeq label_window(std::string_view text) const override;
  // Longest match first, left to right, no overlaps.
  TagSeq tag_window(std::string_view text) const override;
  // Reading (Korean) or first gloss (English) per character, space-joined;
  // "…" when the glossary has nothing.
  void translate(const TranslationRequest& request, const DeltaSink& sink,
                 std::stop_token stop) const override;

  std::string translate_text(std::string_view text, Language target) const;

 private:
  BackendDescriptor descriptor_;
  std::shared_ptr<const PunctLabelRegistry> registry_;
  std::shared_ptr<const Glossary> glossary_;
  ReferenceRules rules_;
  std::size_t longest_entry_ = 0;
};

struct RemoteOptions {
  std::size_t max_in_flight = 32;
  std::chrono::seconds connect_timeout{5};
  std::chrono::seconds read_timeout{60};
};

// Client for a remote inference server speaking the versioned JSON protocol:
//   POST <endpoint>/label      {v:1, task:"punct"|"ner", text} -> {v:1, labels}
//   POST <endpoint>/translate  {v:1, prompt} -> NDJSON {delta, done}
class RemoteBackend final : public Backend {
 public:
  RemoteBackend(BackendDescriptor descriptor,
                std::shared_ptr<const PunctLabelRegistry> registry,
                RemoteOptions options = {});
  ~RemoteBackend() override;

  const BackendDescriptor& descriptor() const override { return descriptor_; }
  PunctLabelSeq label_window(std::string_view text) const override;
  TagSeq tag_window(std::string_view text) const override;
  void translate(const TranslationRequest& request, const DeltaSink& sink,
                 std::stop_token stop) const override;

 private:
  std::vector<std::string> request_labels(std::string_view task,
                                          std::string_view text) const;

  BackendDescriptor descriptor_;
  std::shared_ptr<const PunctLabelRegistry> registry_;
  RemoteOptions options_;
  std::string scheme_host_port_;
  std::string base_path_;
  mutable std::counting_semaphore<1024> in_flight_;
};

// Named backends with a configured default.
class BackendSet {
 public:
  void add(std::shared_ptr<const Backend> backend);
  void set_default(std::string name);
  const std::string& default_name() const { return default_; }

  // Empty or missing name selects the default. Throws kUnknownBackend.
  const Backend& get(std::optional<std::string_view> name = {}) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, std::shared_ptr<const Backend>, std::less<>> backends_;
  std::string default_;
};

}  // namespace hanjakit
