#include "hanjakit/text.hpp"

#include <unicode/brkiter.h>
#include <unicode/utext.h>

#include <algorithm>
#include <memory>

#include "hanjakit/error.hpp"

namespace hanjakit {

namespace {

// BreakIterator construction loads rule data; keep one per thread.
icu::BreakIterator& grapheme_iterator() {
  thread_local std::unique_ptr<icu::BreakIterator> it = [] {
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::BreakIterator> bi(
        icu::BreakIterator::createCharacterInstance(icu::Locale::getRoot(),
                                                    status));
    if (U_FAILURE(status) || !bi) {
      throw std::runtime_error("ICU grapheme iterator unavailable");
    }
    return bi;
  }();
  return *it;
}

}  // namespace

bool is_valid_utf8(std::string_view s) noexcept {
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong forms, surrogates, out of range.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += len;
  }
  return true;
}

std::vector<std::string> split_graphemes(std::string_view utf8) {
  std::vector<std::string> out;
  if (utf8.empty()) return out;
  if (!is_valid_utf8(utf8)) {
    throw Error(Errc::kInvalidUtf8, "input is not valid UTF-8");
  }
  UErrorCode status = U_ZERO_ERROR;
  UText* ut = utext_openUTF8(nullptr, utf8.data(),
                             static_cast<int64_t>(utf8.size()), &status);
  if (U_FAILURE(status)) {
    utext_close(ut);
    throw Error(Errc::kInvalidUtf8, "cannot open UTF-8 text");
  }
  auto& bi = grapheme_iterator();
  bi.setText(ut, status);
  if (U_FAILURE(status)) {
    utext_close(ut);
    throw Error(Errc::kInvalidUtf8, "cannot segment text");
  }
  int32_t start = bi.first();
  for (int32_t end = bi.next(); end != icu::BreakIterator::DONE;
       start = end, end = bi.next()) {
    out.emplace_back(utf8.substr(static_cast<std::size_t>(start),
                                 static_cast<std::size_t>(end - start)));
  }
  // Detach the iterator from the UText before it is closed.
  icu::UnicodeString empty;
  bi.setText(empty);
  utext_close(ut);
  return out;
}

std::size_t char_count(std::string_view utf8) {
  return split_graphemes(utf8).size();
}

std::string first_code_point(std::string_view utf8) {
  if (utf8.empty()) return {};
  const auto c = static_cast<unsigned char>(utf8[0]);
  std::size_t len = 1;
  if ((c & 0xE0) == 0xC0) len = 2;
  else if ((c & 0xF0) == 0xE0) len = 3;
  else if ((c & 0xF8) == 0xF0) len = 4;
  return std::string(utf8.substr(0, std::min(len, utf8.size())));
}

std::string percent_encode(std::string_view bytes) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(bytes.size() * 3);
  for (const char ch : bytes) {
    const auto c = static_cast<unsigned char>(ch);
    const bool unreserved = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                            (c >= '0' && c <= '9') || c == '-' || c == '_' ||
                            c == '.' || c == '~';
    if (unreserved) {
      out.push_back(ch);
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0x0F]);
    }
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace hanjakit
