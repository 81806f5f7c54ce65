#include "hanjakit/punctuation.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "hanjakit/error.hpp"
#include "hanjakit/text.hpp"

namespace hanjakit {

namespace detail {
extern const std::string_view kBuiltinRegistryText;
}

namespace {

constexpr std::array<std::string_view, 16> kAlphabet = {
    "，", "、", "。", "？", "！", "：", "；", "「",
    "」", "『", "』", "（", "）", "《", "》", "…",
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

SimpleProjection parse_projection(std::string_view s, std::size_t line_no) {
  if (s == "None") return SimpleProjection::kNone;
  if (s == "Comma") return SimpleProjection::kComma;
  if (s == "Period") return SimpleProjection::kPeriod;
  if (s == "Question") return SimpleProjection::kQuestion;
  throw Error(Errc::kInvalidRegistry, "line " + std::to_string(line_no) +
                                          ": unknown simple projection '" +
                                          std::string(s) + "'");
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

void check_length(std::size_t chars, std::size_t labels) {
  if (chars != labels) {
    throw Error(Errc::kLengthMismatch,
                "label sequence has " + std::to_string(labels) +
                    " entries for " + std::to_string(chars) + " characters");
  }
}

// Glyphs inserted after a character under the given mode.
std::string_view inserted_glyphs(const PunctLabel& label, RenderMode mode) {
  if (mode == RenderMode::kComprehensive) return label.glyphs;
  return projection_glyph(label.simple_projection);
}

}  // namespace

std::string_view to_string(SimpleProjection p) {
  switch (p) {
    case SimpleProjection::kNone: return "None";
    case SimpleProjection::kComma: return "Comma";
    case SimpleProjection::kPeriod: return "Period";
    case SimpleProjection::kQuestion: return "Question";
  }
  return "None";
}

std::string_view to_string(RenderMode m) {
  switch (m) {
    case RenderMode::kComprehensive: return "Comprehensive";
    case RenderMode::kSimple: return "Simple";
    case RenderMode::kSimpleWithSpace: return "SimpleWithSpace";
  }
  return "Comprehensive";
}

RenderMode parse_render_mode(std::string_view name) {
  for (auto m : {RenderMode::kComprehensive, RenderMode::kSimple,
                 RenderMode::kSimpleWithSpace}) {
    if (iequals(name, to_string(m))) return m;
  }
  throw Error(Errc::kInvalidConfig,
              "unknown render mode '" + std::string(name) + "'");
}

std::string_view projection_glyph(SimpleProjection p) {
  switch (p) {
    case SimpleProjection::kNone: return "";
    case SimpleProjection::kComma: return "，";
    case SimpleProjection::kPeriod: return "。";
    case SimpleProjection::kQuestion: return "？";
  }
  return "";
}

bool is_punctuation_glyph(std::string_view grapheme) {
  return std::find(kAlphabet.begin(), kAlphabet.end(), grapheme) !=
         kAlphabet.end();
}

PunctLabelRegistry PunctLabelRegistry::parse(std::istream& in) {
  PunctLabelRegistry reg;
  reg.labels_.push_back({std::string(kNoneLabel), "", SimpleProjection::kNone});
  reg.by_id_.emplace(kNoneLabel, 0);

  std::string line;
  std::size_t line_no = 0;
  bool none_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.empty() || line[0] == '#') continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (!is_valid_utf8(line)) {
      throw Error(Errc::kInvalidRegistry, where + "invalid UTF-8");
    }
    const auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw Error(Errc::kInvalidRegistry,
                  where + "expected id<TAB>glyphs<TAB>simple_projection");
    }
    const std::string id(fields[0]);
    const std::string glyphs(fields[1]);
    const auto projection = parse_projection(fields[2], line_no);
    if (id.empty()) throw Error(Errc::kInvalidRegistry, where + "empty id");

    if (id == kNoneLabel) {
      if (none_seen || !glyphs.empty() ||
          projection != SimpleProjection::kNone) {
        throw Error(Errc::kInvalidRegistry,
                    where + "None must appear once with empty glyphs");
      }
      none_seen = true;
      continue;
    }
    if (glyphs.empty()) {
      throw Error(Errc::kInvalidRegistry,
                  where + "label '" + id + "' has no glyphs");
    }
    for (const auto& g : split_graphemes(glyphs)) {
      if (!is_punctuation_glyph(g)) {
        throw Error(Errc::kInvalidRegistry, where + "glyph '" + g +
                                                "' is outside the "
                                                "punctuation alphabet");
      }
    }
    if (reg.by_id_.contains(id)) {
      throw Error(Errc::kInvalidRegistry, where + "duplicate id '" + id + "'");
    }
    if (reg.by_glyphs_.contains(glyphs)) {
      throw Error(Errc::kInvalidRegistry,
                  where + "label '" + id + "' repeats the glyphs of '" +
                      reg.labels_[reg.by_glyphs_.at(glyphs)].id + "'");
    }
    reg.by_id_.emplace(id, reg.labels_.size());
    reg.by_glyphs_.emplace(glyphs, reg.labels_.size());
    reg.labels_.push_back({id, glyphs, projection});
  }
  if (reg.labels_.size() - 1 != kLabelCount) {
    throw Error(Errc::kInvalidRegistry,
                "expected " + std::to_string(kLabelCount) +
                    " labels besides None, found " +
                    std::to_string(reg.labels_.size() - 1));
  }
  return reg;
}

PunctLabelRegistry PunctLabelRegistry::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse(in);
}

PunctLabelRegistry PunctLabelRegistry::load(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::kInvalidConfig,
                "cannot open label registry " + path.string());
  }
  return parse(in);
}

const PunctLabelRegistry& PunctLabelRegistry::builtin() {
  static const PunctLabelRegistry reg = parse(detail::kBuiltinRegistryText);
  return reg;
}

std::string_view PunctLabelRegistry::builtin_text() {
  return detail::kBuiltinRegistryText;
}

const PunctLabel* PunctLabelRegistry::find(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &labels_[it->second];
}

const PunctLabel& PunctLabelRegistry::at(std::string_view id) const {
  if (const auto* label = find(id)) return *label;
  throw Error(Errc::kUnknownLabel, "unknown label '" + std::string(id) + "'");
}

const PunctLabel* PunctLabelRegistry::find_by_glyphs(
    std::string_view glyphs) const {
  if (glyphs.empty()) return &none();
  const auto it = by_glyphs_.find(std::string(glyphs));
  return it == by_glyphs_.end() ? nullptr : &labels_[it->second];
}

std::string apply_labels(const PunctLabelRegistry& registry,
                         std::string_view text,
                         std::span<const std::string> labels,
                         RenderMode mode) {
  const auto chars = split_graphemes(text);
  check_length(chars.size(), labels.size());

  std::string out;
  out.reserve(text.size() * 2);
  for (std::size_t i = 0; i < chars.size(); ++i) {
    const auto& label = registry.at(labels[i]);
    out += chars[i];
    const auto glyphs = inserted_glyphs(label, mode);
    out += glyphs;
    if (mode == RenderMode::kSimpleWithSpace && !glyphs.empty() &&
        i + 1 < chars.size()) {
      out += ' ';
    }
  }
  return out;
}

StrippedText strip_punctuation(const PunctLabelRegistry& registry,
                               std::string_view punctuated) {
  StrippedText result;
  std::string run;
  auto flush = [&] {
    if (result.labels.empty()) return;
    const auto* label = registry.find_by_glyphs(run);
    if (label == nullptr) {
      throw Error(Errc::kUnrecognizedGlyphRun,
                  "punctuation run '" + run + "' matches no label");
    }
    result.labels.back() = label->id;
    run.clear();
  };

  for (const auto& g : split_graphemes(punctuated)) {
    if (is_punctuation_glyph(g)) {
      if (result.labels.empty()) {
        throw Error(Errc::kLeadingPunctuation,
                    "text begins with punctuation '" + g + "'");
      }
      run += g;
      continue;
    }
    flush();
    result.text += g;
    result.labels.emplace_back(kNoneLabel);
  }
  flush();
  return result;
}

std::vector<std::size_t> align_offsets(const PunctLabelRegistry& registry,
                                       std::string_view text,
                                       std::span<const std::string> labels,
                                       RenderMode mode) {
  const auto chars = split_graphemes(text);
  check_length(chars.size(), labels.size());

  std::vector<std::size_t> offsets;
  offsets.reserve(chars.size());
  std::size_t pos = 0;
  for (std::size_t i = 0; i < chars.size(); ++i) {
    offsets.push_back(pos);
    const auto glyphs = inserted_glyphs(registry.at(labels[i]), mode);
    pos += 1 + char_count(glyphs);
    if (mode == RenderMode::kSimpleWithSpace && !glyphs.empty()) ++pos;
  }
  return offsets;
}

bool contains_punctuation(std::string_view text) {
  const auto chars = split_graphemes(text);
  return std::any_of(chars.begin(), chars.end(),
                     [](const std::string& g) { return is_punctuation_glyph(g); });
}

std::string remove_punctuation_glyphs(std::string_view text) {
  std::string out;
  for (const auto& g : split_graphemes(text)) {
    if (!is_punctuation_glyph(g)) out += g;
  }
  return out;
}

}  // namespace hanjakit
