#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace charonette {

// Character span over a sentence: 0-based, start-inclusive, end-exclusive,
// counted in Unicode scalar values (not bytes).
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool empty() const { return end <= start; }
  bool overlaps(const Span& other) const { return start < other.end && other.start < end; }
  bool within(std::size_t length) const { return start < end && end <= length; }

  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

// Throws Error(parse_error) on invalid UTF-8.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);

// Number of scalar values in a UTF-8 string.
std::size_t utf8_length(std::string_view text);

// Substring by scalar-value offsets; clamps to the string length.
std::string utf8_substr(std::string_view text, Span span);

// Lowercase for ASCII and the Latin-1/Latin Extended-A letters used by the
// corpora we ingest (Portuguese, Spanish, English).
std::string to_lower(std::string_view text);
char32_t to_lower(char32_t c);

bool is_space(char32_t c);
bool is_punct(char32_t c);

struct Token {
  std::string text;
  Span span;
};

// Splits on whitespace and punctuation; punctuation is dropped.
std::vector<Token> tokenize(std::string_view text);

// Whitespace split, keeping punctuation attached.
std::vector<std::string> split_words(std::string_view text);

std::string trim(std::string_view text);

}  // namespace charonette
