#include "hanjakit/glossary.hpp"

#include <fstream>
#include <sstream>

#include "hanjakit/error.hpp"
#include "hanjakit/text.hpp"

namespace hanjakit {

namespace {

constexpr std::string_view kPlaceholder = "{q}";

void strip_line_end(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

// Variant-selector sequences fall back to their base character.
template <typename Lookup>
auto lookup_char(std::string_view ch, Lookup&& lookup) {
  auto found = lookup(ch);
  if (!found) {
    const auto base = first_code_point(ch);
    if (base.size() != ch.size()) found = lookup(base);
  }
  return found;
}

std::ifstream open_or_throw(const std::filesystem::path& path,
                            std::string_view what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::kInvalidConfig,
                "cannot open " + std::string(what) + " " + path.string());
  }
  return in;
}

}  // namespace

std::optional<CedictEntry> parse_cedict_line(std::string_view line) {
  if (!is_valid_utf8(line)) return std::nullopt;
  CedictEntry e;
  const auto sp1 = line.find(' ');
  if (sp1 == std::string_view::npos || sp1 == 0) return std::nullopt;
  const auto sp2 = line.find(' ', sp1 + 1);
  if (sp2 == std::string_view::npos || sp2 == sp1 + 1) return std::nullopt;
  e.traditional = line.substr(0, sp1);
  e.simplified = line.substr(sp1 + 1, sp2 - sp1 - 1);

  auto rest = line.substr(sp2 + 1);
  if (rest.empty() || rest.front() != '[') return std::nullopt;
  const auto close = rest.find(']');
  if (close == std::string_view::npos) return std::nullopt;
  e.pinyin = rest.substr(1, close - 1);
  rest = rest.substr(close + 1);
  while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
  while (!rest.empty() && rest.back() == ' ') rest.remove_suffix(1);
  if (rest.size() < 2 || rest.front() != '/' || rest.back() != '/') {
    return std::nullopt;
  }
  rest = rest.substr(1, rest.size() - 2);
  std::size_t start = 0;
  while (start <= rest.size()) {
    auto slash = rest.find('/', start);
    if (slash == std::string_view::npos) slash = rest.size();
    const auto def = rest.substr(start, slash - start);
    if (!def.empty()) e.definitions.emplace_back(def);
    start = slash + 1;
  }
  if (e.definitions.empty()) return std::nullopt;
  return e;
}

CedictParseResult parse_cedict(std::istream& in) {
  CedictParseResult result;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    strip_line_end(line);
    if (first && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    first = false;
    if (line.empty() || line[0] == '#') continue;
    if (auto e = parse_cedict_line(line)) {
      result.entries.push_back(std::move(*e));
    } else {
      ++result.skipped;
    }
  }
  return result;
}

CedictParseResult parse_cedict(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_cedict(in);
}

CedictIndex::CedictIndex(const std::vector<CedictEntry>& entries) {
  for (const auto& e : entries) {
    words_[e.traditional].push_back(e);
    if (hanjakit::char_count(e.traditional) == 1) {
      auto& defs = chars_[e.traditional];
      defs.insert(defs.end(), e.definitions.begin(), e.definitions.end());
    }
  }
}

const std::vector<std::string>* CedictIndex::definitions(
    std::string_view ch) const {
  const auto it = chars_.find(std::string(ch));
  return it == chars_.end() ? nullptr : &it->second;
}

std::vector<const CedictEntry*> CedictIndex::lookup_word(
    std::string_view word) const {
  std::vector<const CedictEntry*> out;
  if (const auto it = words_.find(std::string(word)); it != words_.end()) {
    for (const auto& e : it->second) out.push_back(&e);
  }
  return out;
}

ReadingLoadResult load_readings(std::istream& in) {
  ReadingLoadResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_line_end(line);
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    bool ok = tab != std::string::npos && is_valid_utf8(line);
    if (ok) {
      const auto key = line.substr(0, tab);
      const auto value = line.substr(tab + 1);
      ok = !value.empty() && value.find('\t') == std::string::npos &&
           char_count(key) == 1;
      if (ok) result.table[key] = value;
    }
    if (!ok) result.malformed_lines.push_back(line_no);
  }
  return result;
}

ReadingLoadResult load_readings(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_readings(in);
}

const std::string* ReadingTable::find(std::string_view ch) const {
  const auto it = table_.find(std::string(ch));
  return it == table_.end() ? nullptr : &it->second;
}

LinkTemplate::LinkTemplate(std::string pattern) : pattern_(std::move(pattern)) {
  if (pattern_.find(kPlaceholder) == std::string::npos) {
    throw Error(Errc::kInvalidConfig,
                "link template '" + pattern_ + "' lacks a {q} placeholder");
  }
}

std::string LinkTemplate::external_link(std::string_view ch) const {
  if (ch.empty() || char_count(ch) != 1) {
    throw Error(Errc::kNotSingleCharacter,
                "'" + std::string(ch) + "' is not a single character");
  }
  const auto encoded = percent_encode(ch);
  std::string url;
  std::size_t start = 0;
  for (auto pos = pattern_.find(kPlaceholder); pos != std::string::npos;
       pos = pattern_.find(kPlaceholder, start)) {
    url.append(pattern_, start, pos - start);
    url += encoded;
    start = pos + kPlaceholder.size();
  }
  url.append(pattern_, start);
  return url;
}

std::vector<GlossaryEntry> annotate(std::string_view text,
                                    const ReadingTable& readings,
                                    const CedictIndex& cedict,
                                    const LinkTemplate& links) {
  std::vector<GlossaryEntry> out;
  for (auto& ch : split_graphemes(text)) {
    GlossaryEntry entry;
    if (const auto* r = lookup_char(
            ch, [&](std::string_view c) { return readings.find(c); })) {
      entry.reading = *r;
    }
    if (const auto* d = lookup_char(
            ch, [&](std::string_view c) { return cedict.definitions(c); })) {
      entry.definitions = *d;
    }
    entry.link = links.external_link(ch);
    entry.character = std::move(ch);
    out.push_back(std::move(entry));
  }
  return out;
}

Glossary Glossary::load(const std::filesystem::path& readings_path,
                        const std::filesystem::path& cedict_path,
                        std::string link_template) {
  auto readings_in = open_or_throw(readings_path, "readings table");
  auto cedict_in = open_or_throw(cedict_path, "CC-CEDICT file");
  return Glossary{ReadingTable(load_readings(readings_in).table),
                  CedictIndex(parse_cedict(cedict_in).entries),
                  LinkTemplate(std::move(link_template))};
}

}  // namespace hanjakit
