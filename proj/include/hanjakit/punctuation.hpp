#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hanjakit {

enum class SimpleProjection { kNone, kComma, kPeriod, kQuestion };

enum class RenderMode { kComprehensive, kSimple, kSimpleWithSpace };

std::string_view to_string(SimpleProjection p);
std::string_view to_string(RenderMode m);
// Accepts "Comprehensive", "Simple", "SimpleWithSpace" (case-insensitive).
// Throws Error(kInvalidConfig) otherwise.
RenderMode parse_render_mode(std::string_view name);

// Glyph emitted for a projection in the Simple modes; empty for kNone.
std::string_view projection_glyph(SimpleProjection p);

struct PunctLabel {
  std::string id;
  std::string glyphs;  // empty only for the None label
  SimpleProjection simple_projection = SimpleProjection::kNone;

  bool is_none() const { return glyphs.empty(); }
  // Sentence-final labels (projection Period or Question).
  bool ends_sentence() const {
    return simple_projection == SimpleProjection::kPeriod ||
           simple_projection == SimpleProjection::kQuestion;
  }
};

// One label id per character of the raw text.
using PunctLabelSeq = std::vector<std::string>;

inline constexpr std::string_view kNoneLabel = "None";

// The fixed punctuation alphabet: fullwidth CJK marks, corner brackets,
// and fullwidth parentheses.
bool is_punctuation_glyph(std::string_view grapheme);

// Immutable label registry. Always holds exactly kLabelCount labels besides
// None, each with a distinct glyph sequence.
class PunctLabelRegistry {
 public:
  static constexpr std::size_t kLabelCount = 23;

  // Registry format: `id<TAB>glyphs<TAB>simple_projection` per line, `#`
  // comments, blank lines ignored. A missing None row is implied.
  // Throws Error(kInvalidRegistry) with the offending line number.
  static PunctLabelRegistry parse(std::istream& in);
  static PunctLabelRegistry parse(std::string_view text);
  static PunctLabelRegistry load(const std::filesystem::path& path);
  // The built-in registry, identical to data/punct_labels.tsv.
  static const PunctLabelRegistry& builtin();
  static std::string_view builtin_text();

  const PunctLabel& at(std::string_view id) const;  // throws kUnknownLabel
  const PunctLabel* find(std::string_view id) const;
  const PunctLabel* find_by_glyphs(std::string_view glyphs) const;
  const PunctLabel& none() const { return labels_.front(); }

  // None first, then file order.
  const std::vector<PunctLabel>& labels() const { return labels_; }

 private:
  std::vector<PunctLabel> labels_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, std::size_t> by_glyphs_;
};

// Inserts each label's glyphs (or projection) after its carrier character.
// Throws kLengthMismatch or kUnknownLabel.
std::string apply_labels(const PunctLabelRegistry& registry,
                         std::string_view text,
                         std::span<const std::string> labels, RenderMode mode);

struct StrippedText {
  std::string text;
  PunctLabelSeq labels;

  friend bool operator==(const StrippedText&, const StrippedText&) = default;
};

// Inverse of apply_labels in Comprehensive mode.
// Throws kLeadingPunctuation or kUnrecognizedGlyphRun.
StrippedText strip_punctuation(const PunctLabelRegistry& registry,
                               std::string_view punctuated);

// Rendered character index of each raw character.
std::vector<std::size_t> align_offsets(const PunctLabelRegistry& registry,
                                       std::string_view text,
                                       std::span<const std::string> labels,
                                       RenderMode mode);

bool contains_punctuation(std::string_view text);

// Drops every punctuation-alphabet glyph; used when strict stripping fails.
std::string remove_punctuation_glyphs(std::string_view text);

}  // namespace hanjakit
