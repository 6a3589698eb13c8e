#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace srpg::text {

enum class TokenKind { Word, Number, Fraction, Operator, Comparator, Punct, Symbol, Newline };

// A lexical token over a UTF-8 source. Offsets are byte offsets into the
// source; `text` views the source and is only valid while it lives.
struct Token {
  TokenKind kind;
  std::size_t begin;
  std::size_t end;
  std::string_view text;
  bool glued;  // no whitespace between the previous token and this one
};

std::vector<Token> tokenize(std::string_view source);

// Sentence index of every token. Boundaries are '.', '?', '!' (except after
// abbreviations such as "No." or "Mr.") and newlines.
std::vector<int> sentence_ids(const std::vector<Token>& tokens);

// Maps between byte offsets and Unicode scalar offsets of one string.
class OffsetIndex {
 public:
  explicit OffsetIndex(std::string_view utf8);

  std::size_t to_scalar(std::size_t byte_offset) const;
  std::size_t to_byte(std::size_t scalar_offset) const;
  std::size_t scalar_length() const { return byte_of_scalar_.size() - 1; }

 private:
  std::vector<std::size_t> byte_of_scalar_;  // size = scalars + 1
};

std::size_t scalar_length(std::string_view utf8);

std::string ascii_lower(std::string_view s);
std::string collapse_whitespace(std::string_view s);

bool is_ascii_alpha(char c);
bool is_ascii_digit(char c);
bool is_ascii_alnum(char c);
bool is_word_byte(char c);  // ASCII letter/digit or any non-ASCII byte

// "Alice", "Jing'an": leading uppercase letter followed by letters with at
// least one lowercase letter.
bool is_capitalized_word(std::string_view word);
// Math point/segment names: 1-4 uppercase ASCII letters ("C", "AB", "ABCD").
bool is_identifier(std::string_view word);
// Lowercase ASCII letters only.
bool is_lower_word(std::string_view word);

// Splits `source` into sentences (byte ranges), using the same boundary rule
// as sentence_ids(). Whitespace between sentences is excluded.
struct ByteRange {
  std::size_t begin;
  std::size_t end;
};
std::vector<ByteRange> split_sentences(std::string_view source);

}  // namespace srpg::text
