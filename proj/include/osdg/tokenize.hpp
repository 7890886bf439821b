#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace osdg {

struct Token {
  std::string text;   // lowercase
  std::size_t begin;  // byte offsets into the source text
  std::size_t end;

  friend bool operator==(const Token&, const Token&) = default;
};

// Maximal runs of Unicode letters/digits, lowercased. Invalid UTF-8 bytes act
// as separators.
std::vector<Token> tokenize(std::string_view text);
std::vector<std::string> tokenize_words(std::string_view text);

// Decodes the code point starting at `pos`, advancing it. Returns U+FFFD for
// malformed sequences (consuming one byte).
char32_t decode_utf8(std::string_view text, std::size_t& pos);
void append_utf8(std::string& out, char32_t cp);

bool is_word_char(char32_t cp);
bool is_upper(char32_t cp);
char32_t to_lower(char32_t cp);
char32_t to_upper(char32_t cp);

std::string to_lower_utf8(std::string_view text);

}  // namespace osdg
