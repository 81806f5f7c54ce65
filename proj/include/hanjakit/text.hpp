#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace hanjakit {

// Splits UTF-8 text into extended grapheme clusters. Every index or length
// the library exposes as a "character" counts these units.
// Throws Error(kInvalidUtf8) on malformed input.
std::vector<std::string> split_graphemes(std::string_view utf8);

std::size_t char_count(std::string_view utf8);

bool is_valid_utf8(std::string_view bytes) noexcept;

// First Unicode scalar of a non-empty UTF-8 string, encoded back to UTF-8.
std::string first_code_point(std::string_view utf8);

// RFC 3986 percent-encoding; unreserved characters pass through.
std::string percent_encode(std::string_view bytes);

std::string trim(std::string_view s);

}  // namespace hanjakit
