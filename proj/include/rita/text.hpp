#pragma once

// Unicode helpers shared by the corpus, extraction and evaluation code.
// All offsets in the toolkit count code points, not bytes.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace rita::text {

/// Decodes UTF-8. Throws rita::ParseError (line 0) on invalid sequences.
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view cps);

/// Number of code points in a UTF-8 string.
std::size_t length(std::string_view utf8);

/// Code-point slice [start, end) of a UTF-8 string.
std::string slice(std::string_view utf8, std::size_t start, std::size_t end);

bool is_space(char32_t c);
bool is_alnum(char32_t c);

/// Simple (one-to-one) case folding for Latin, Greek, Cyrillic and
/// full-width Latin letters.
char32_t casefold(char32_t c);

/// Casefolds, collapses whitespace runs to one space, trims the ends.
std::string normalize_surface(std::string_view s);
std::u32string normalize_surface(std::u32string_view s);

/// True at text edges and wherever alphanumeric-ness changes between
/// neighbouring code points.
bool is_token_boundary(std::u32string_view text, std::size_t pos);

/// Walks `text` from a start position yielding the normalized character
/// stream (casefolded, whitespace runs collapsed to one space) together with
/// the original position after each emitted character.
class NormalizedCursor {
 public:
  NormalizedCursor(std::u32string_view text, std::size_t pos)
      : text_(text), pos_(pos) {}

  bool done() const { return pos_ >= text_.size(); }
  std::size_t position() const { return pos_; }
  char32_t next();

 private:
  std::u32string_view text_;
  std::size_t pos_;
};

/// If the normalized `needle` occurs in `text` starting exactly at `start`
/// with both ends on token boundaries, returns the end offset.
std::optional<std::size_t> match_at(std::u32string_view text, std::size_t start,
                                    std::u32string_view needle);

}  // namespace rita::text
