#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hanjakit {

struct CedictEntry {
  std::string traditional;
  std::string simplified;
  std::string pinyin;
  std::vector<std::string> definitions;

  friend bool operator==(const CedictEntry&, const CedictEntry&) = default;
};

struct CedictParseResult {
  std::vector<CedictEntry> entries;
  std::size_t skipped = 0;  // malformed lines; comments and blanks excluded
};

// Parses `TRAD SIMP [pinyin] /def1/def2/` lines. Never throws on content.
CedictParseResult parse_cedict(std::istream& in);
CedictParseResult parse_cedict(std::string_view text);
// Parses one line; nullopt if malformed.
std::optional<CedictEntry> parse_cedict_line(std::string_view line);

// Character-level definitions keyed on the traditional form, plus a
// separate word index that the glossary itself does not consult.
class CedictIndex {
 public:
  CedictIndex() = default;
  explicit CedictIndex(const std::vector<CedictEntry>& entries);

  // Definitions of all single-character entries for `ch`, in file order.
  const std::vector<std::string>* definitions(std::string_view ch) const;
  std::vector<const CedictEntry*> lookup_word(std::string_view word) const;
  std::size_t char_count() const { return chars_.size(); }

 private:
  std::unordered_map<std::string, std::vector<std::string>> chars_;
  std::unordered_map<std::string, std::vector<CedictEntry>> words_;
};

struct ReadingLoadResult {
  std::unordered_map<std::string, std::string> table;
  std::vector<std::size_t> malformed_lines;  // 1-based
};

// `char<TAB>reading` lines; later duplicates overwrite earlier ones.
ReadingLoadResult load_readings(std::istream& in);
ReadingLoadResult load_readings(std::string_view text);

class ReadingTable {
 public:
  ReadingTable() = default;
  explicit ReadingTable(std::unordered_map<std::string, std::string> table)
      : table_(std::move(table)) {}

  const std::string* find(std::string_view ch) const;
  std::size_t size() const { return table_.size(); }

 private:
  std::unordered_map<std::string, std::string> table_;
};

// URL template containing a `{q}` placeholder. Throws kInvalidConfig when
// the placeholder is missing.
class LinkTemplate {
 public:
  static constexpr std::string_view kDefault =
      "https://hanja.dict.naver.com/#/search?query={q}";

  explicit LinkTemplate(std::string pattern = std::string(kDefault));

  // Throws kNotSingleCharacter unless `ch` is exactly one character.
  std::string external_link(std::string_view ch) const;
  const std::string& pattern() const { return pattern_; }

 private:
  std::string pattern_;
};

struct GlossaryEntry {
  std::string character;
  std::optional<std::string> reading;
  std::vector<std::string> definitions;
  std::string link;

  friend bool operator==(const GlossaryEntry&, const GlossaryEntry&) = default;
};

std::vector<GlossaryEntry> annotate(std::string_view text,
                                    const ReadingTable& readings,
                                    const CedictIndex& cedict,
                                    const LinkTemplate& links);

// Readings, CEDICT index, and link template bundled for the services.
struct Glossary {
  ReadingTable readings;
  CedictIndex cedict;
  LinkTemplate links;

  static Glossary load(const std::filesystem::path& readings_path,
                       const std::filesystem::path& cedict_path,
                       std::string link_template);

  std::vector<GlossaryEntry> annotate(std::string_view text) const {
    return hanjakit::annotate(text, readings, cedict, links);
  }
};

}  // namespace hanjakit
