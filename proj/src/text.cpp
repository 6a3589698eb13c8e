#include "srpg/text.hpp"

#include <array>
#include <cctype>

namespace srpg::text {
namespace {

constexpr std::array<std::string_view, 10> kAbbreviations = {
    "No", "Mr", "Mrs", "Ms", "Dr", "Prof", "St", "Rd", "Ave", "Apt"};

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
}

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0) return 2;
  if ((lead & 0xF0) == 0xE0) return 3;
  if ((lead & 0xF8) == 0xF0) return 4;
  return 1;  // stray continuation byte, consumed on its own
}

// Multi-byte operators and comparators we recognise.
struct MultiByteSymbol {
  std::string_view bytes;
  TokenKind kind;
};
constexpr std::array<MultiByteSymbol, 5> kMultiByte = {{
    {"\xC3\x97", TokenKind::Operator},      // ×
    {"\xC3\xB7", TokenKind::Operator},      // ÷
    {"\xE2\x88\x92", TokenKind::Operator},  // −
    {"\xE2\x89\xA4", TokenKind::Comparator},  // ≤
    {"\xE2\x89\xA5", TokenKind::Comparator},  // ≥
}};

bool is_abbreviation(std::string_view word) {
  for (auto a : kAbbreviations) {
    if (a == word) return true;
  }
  return false;
}

}  // namespace

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ascii_alnum(char c) { return is_ascii_alpha(c) || is_ascii_digit(c); }
bool is_word_byte(char c) {
  return is_ascii_alnum(c) || static_cast<unsigned char>(c) >= 0x80;
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  bool space_before = true;
  auto push = [&](TokenKind kind, std::size_t b, std::size_t e) {
    out.push_back(Token{kind, b, e, s.substr(b, e - b), !space_before && !out.empty()});
    space_before = false;
  };

  while (i < s.size()) {
    const char c = s[i];
    const auto uc = static_cast<unsigned char>(c);
    if (c == '\n') {
      push(TokenKind::Newline, i, i + 1);
      space_before = true;
      ++i;
      continue;
    }
    if (is_space(c)) {
      space_before = true;
      ++i;
      continue;
    }
    if (uc >= 0x80) {
      bool matched = false;
      for (const auto& m : kMultiByte) {
        if (s.substr(i, m.bytes.size()) == m.bytes) {
          push(m.kind, i, i + m.bytes.size());
          i += m.bytes.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    if (is_ascii_digit(c)) {
      std::size_t j = i;
      while (j < s.size() && is_ascii_digit(s[j])) ++j;
      if (j + 1 < s.size() && s[j] == '.' && is_ascii_digit(s[j + 1])) {
        ++j;
        while (j < s.size() && is_ascii_digit(s[j])) ++j;
        push(TokenKind::Number, i, j);
      } else if (j + 1 < s.size() && s[j] == '/' && is_ascii_digit(s[j + 1])) {
        std::size_t k = j + 1;
        while (k < s.size() && is_ascii_digit(s[k])) ++k;
        push(TokenKind::Fraction, i, k);
        j = k;
      } else {
        push(TokenKind::Number, i, j);
      }
      i = j;
      continue;
    }
    if (is_ascii_alpha(c) || uc >= 0x80) {
      std::size_t j = i;
      while (j < s.size()) {
        if (is_ascii_alpha(s[j])) {
          ++j;
        } else if (static_cast<unsigned char>(s[j]) >= 0x80) {
          bool is_symbol = false;
          for (const auto& m : kMultiByte) {
            if (s.substr(j, m.bytes.size()) == m.bytes) is_symbol = true;
          }
          if (is_symbol) break;
          j += utf8_length(static_cast<unsigned char>(s[j]));
        } else if (is_ascii_digit(s[j]) && j > i && is_ascii_alpha(s[i])) {
          // Alphanumeric identifiers such as "S20230001".
          if (std::isupper(static_cast<unsigned char>(s[i])) == 0) break;
          ++j;
        } else if (s[j] == '\'' && j + 1 < s.size() && is_ascii_alpha(s[j + 1])) {
          j += 2;
        } else {
          break;
        }
      }
      if (j > s.size()) j = s.size();
      push(TokenKind::Word, i, j);
      i = j;
      continue;
    }
    switch (c) {
      case '+':
      case '-':
      case '*':
      case '/':
      case '(':
      case ')':
        push(TokenKind::Operator, i, i + 1);
        ++i;
        continue;
      case '=':
        push(TokenKind::Comparator, i, i + 1);
        ++i;
        continue;
      case '<':
      case '>':
        if (i + 1 < s.size() && s[i + 1] == '=') {
          push(TokenKind::Comparator, i, i + 2);
          i += 2;
        } else {
          push(TokenKind::Comparator, i, i + 1);
          ++i;
        }
        continue;
      case ',':
      case '.':
      case '?':
      case '!':
      case ':':
      case ';':
      case '"':
      case '\'':
      case '[':
      case ']':
      case '{':
      case '}':
        push(TokenKind::Punct, i, i + 1);
        ++i;
        continue;
      default:
        push(TokenKind::Symbol, i, i + 1);
        ++i;
        continue;
    }
  }
  return out;
}

std::vector<int> sentence_ids(const std::vector<Token>& tokens) {
  std::vector<int> ids(tokens.size(), 0);
  int current = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    ids[i] = current;
    const auto& t = tokens[i];
    bool boundary = false;
    if (t.kind == TokenKind::Newline) {
      boundary = true;
    } else if (t.kind == TokenKind::Punct && (t.text == "?" || t.text == "!")) {
      boundary = true;
    } else if (t.kind == TokenKind::Punct && t.text == ".") {
      const bool after_abbrev = i > 0 && t.glued && tokens[i - 1].kind == TokenKind::Word &&
                                is_abbreviation(tokens[i - 1].text);
      boundary = !after_abbrev;
    }
    if (boundary) ++current;
  }
  return ids;
}

std::vector<ByteRange> split_sentences(std::string_view source) {
  const auto tokens = tokenize(source);
  const auto ids = sentence_ids(tokens);
  std::vector<ByteRange> out;
  int open_id = -1;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].kind == TokenKind::Newline) continue;
    if (ids[i] != open_id) {
      out.push_back({tokens[i].begin, tokens[i].end});
      open_id = ids[i];
    } else {
      out.back().end = tokens[i].end;
    }
  }
  return out;
}

OffsetIndex::OffsetIndex(std::string_view utf8) {
  byte_of_scalar_.reserve(utf8.size() + 1);
  std::size_t i = 0;
  while (i < utf8.size()) {
    byte_of_scalar_.push_back(i);
    i += utf8_length(static_cast<unsigned char>(utf8[i]));
  }
  byte_of_scalar_.push_back(utf8.size());
}

std::size_t OffsetIndex::to_scalar(std::size_t byte_offset) const {
  // First scalar whose byte offset is >= byte_offset.
  std::size_t lo = 0;
  std::size_t hi = byte_of_scalar_.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (byte_of_scalar_[mid] < byte_offset) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo;
}

std::size_t OffsetIndex::to_byte(std::size_t scalar_offset) const {
  if (scalar_offset >= byte_of_scalar_.size()) return byte_of_scalar_.back();
  return byte_of_scalar_[scalar_offset];
}

std::size_t scalar_length(std::string_view utf8) {
  std::size_t n = 0;
  for (char c : utf8) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      pending = !out.empty();
    } else {
      if (pending) out.push_back(' ');
      pending = false;
      out.push_back(c);
    }
  }
  return out;
}

bool is_capitalized_word(std::string_view w) {
  if (w.empty() || !(w[0] >= 'A' && w[0] <= 'Z')) return false;
  bool has_lower = false;
  for (std::size_t i = 1; i < w.size(); ++i) {
    const char c = w[i];
    if (c >= 'a' && c <= 'z') {
      has_lower = true;
    } else if (!(c >= 'A' && c <= 'Z') && c != '\'' &&
               static_cast<unsigned char>(c) < 0x80) {
      return false;
    }
  }
  return has_lower;
}

bool is_identifier(std::string_view w) {
  if (w.empty() || w.size() > 4) return false;
  for (char c : w) {
    if (!(c >= 'A' && c <= 'Z')) return false;
  }
  return true;
}

bool is_lower_word(std::string_view w) {
  if (w.empty()) return false;
  for (char c : w) {
    if (!(c >= 'a' && c <= 'z')) return false;
  }
  return true;
}

}  // namespace srpg::text
