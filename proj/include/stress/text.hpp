#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stress {

// Bad input data or arguments. The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed line in a line-oriented input file.
class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Non-finite values during training or inference. The CLI maps this to exit code 2.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Language { ru, uk, be };

Language parse_language(std::string_view tag);
std::string_view language_tag(Language lang);

inline constexpr char32_t kCombiningAcute = U'́';

// Throws InputError on invalid UTF-8.
std::u32string utf8_to_u32(std::string_view s);
std::string u32_to_utf8(std::u32string_view s);
void append_utf8(std::string& out, char32_t c);

char32_t to_lower(char32_t c);
char32_t to_upper(char32_t c);
std::u32string to_lower(std::u32string_view s);

// Basic Cyrillic block letters (U+0400..U+04FF, excluding signs and combining marks).
bool is_cyrillic_letter(char32_t c);

}  // namespace stress
