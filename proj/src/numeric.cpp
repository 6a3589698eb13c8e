#include "srpg/numeric.hpp"

#include <cctype>
#include <numeric>
#include <stdexcept>

namespace srpg {
namespace {

std::int64_t checked(__int128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("rational overflow");
  return static_cast<std::int64_t>(v);
}

}  // namespace

Rational Rational::reduce(__int128 num, __int128 den) {
  if (den == 0) throw std::domain_error("division by zero");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  __int128 a = num < 0 ? -num : num;
  __int128 b = den;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  Rational r;
  r.num_ = checked(num);
  r.den_ = checked(den);
  return r;
}

namespace {

class ExprParser {
 public:
  ExprParser(std::string_view src, const std::map<std::string, Rational, std::less<>>& vars)
      : src_(src), vars_(vars) {}

  Rational parse() {
    Rational v = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character");
    return v;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument(what + " at position " + std::to_string(pos_) + " in '" +
                                std::string(src_) + "'");
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  Rational expr() {
    Rational v = term();
    for (;;) {
      if (eat('+')) {
        v = v + term();
      } else if (eat('-')) {
        v = v - term();
      } else {
        return v;
      }
    }
  }
  Rational term() {
    Rational v = unary();
    for (;;) {
      if (eat('*')) {
        v = v * unary();
      } else if (eat('/')) {
        v = v / unary();
      } else {
        return v;
      }
    }
  }
  Rational unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return primary();
  }
  Rational primary() {
    skip_ws();
    if (eat('(')) {
      Rational v = expr();
      if (!eat(')')) fail("expected ')'");
      return v;
    }
    if (pos_ >= src_.size()) fail("unexpected end");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
        ++pos_;
      }
      auto r = Rational::parse(src_.substr(start, pos_ - start));
      if (!r) fail("bad number");
      return *r;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
      }
      const auto name = src_.substr(start, pos_ - start);
      auto it = vars_.find(name);
      if (it == vars_.end()) fail("unknown name '" + std::string(name) + "'");
      return it->second;
    }
    fail("unexpected character");
  }

  std::string_view src_;
  const std::map<std::string, Rational, std::less<>>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

std::optional<std::string> normalize_decimal(std::string_view t) {
  bool negative = false;
  if (!t.empty() && (t[0] == '+' || t[0] == '-')) {
    negative = t[0] == '-';
    t.remove_prefix(1);
  }
  if (t.empty()) return std::nullopt;
  const auto dot = t.find('.');
  std::string_view int_part = t.substr(0, dot);
  std::string_view frac_part = dot == std::string_view::npos ? std::string_view{} : t.substr(dot + 1);
  if (int_part.empty() && frac_part.empty()) return std::nullopt;
  if (dot != std::string_view::npos && frac_part.empty()) return std::nullopt;
  for (char c : int_part) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
  }
  for (char c : frac_part) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
  }
  while (!int_part.empty() && int_part.front() == '0') int_part.remove_prefix(1);
  while (!frac_part.empty() && frac_part.back() == '0') frac_part.remove_suffix(1);
  std::string out = int_part.empty() ? "0" : std::string(int_part);
  if (!frac_part.empty()) {
    out += '.';
    out += frac_part;
  }
  if (negative && out != "0") out.insert(out.begin(), '-');
  return out;
}

int compare_decimal(std::string_view a, std::string_view b) {
  const bool na = !a.empty() && a[0] == '-';
  const bool nb = !b.empty() && b[0] == '-';
  if (na != nb) return na ? -1 : 1;
  if (na) {
    a.remove_prefix(1);
    b.remove_prefix(1);
  }
  auto split = [](std::string_view s) {
    const auto dot = s.find('.');
    return std::pair{s.substr(0, dot),
                     dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1)};
  };
  auto [ia, fa] = split(a);
  auto [ib, fb] = split(b);
  int cmp = 0;
  if (ia.size() != ib.size()) {
    cmp = ia.size() < ib.size() ? -1 : 1;
  } else if (ia != ib) {
    cmp = ia < ib ? -1 : 1;
  } else {
    const std::size_t n = std::max(fa.size(), fb.size());
    for (std::size_t i = 0; i < n && cmp == 0; ++i) {
      const char ca = i < fa.size() ? fa[i] : '0';
      const char cb = i < fb.size() ? fb[i] : '0';
      if (ca != cb) cmp = ca < cb ? -1 : 1;
    }
  }
  return na ? -cmp : cmp;
}

Rational::Rational(std::int64_t num, std::int64_t den) {
  *this = reduce(num, den);
}

std::optional<Rational> Rational::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    auto a = parse(text.substr(0, slash));
    auto b = parse(text.substr(slash + 1));
    if (!a || !b || b->num_ == 0) return std::nullopt;
    return *a / *b;
  }
  auto norm = normalize_decimal(text);
  if (!norm) return std::nullopt;
  std::string_view s = *norm;
  bool negative = false;
  if (s[0] == '-') {
    negative = true;
    s.remove_prefix(1);
  }
  __int128 num = 0;
  __int128 den = 1;
  bool after_dot = false;
  for (char c : s) {
    if (c == '.') {
      after_dot = true;
      continue;
    }
    num = num * 10 + (c - '0');
    if (after_dot) den *= 10;
    if (num > INT64_MAX || den > INT64_MAX) return std::nullopt;
  }
  return reduce(negative ? -num : num, den);
}

std::optional<std::string> Rational::to_decimal() const {
  std::int64_t d = den_;
  int twos = 0;
  int fives = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++twos;
  }
  while (d % 5 == 0) {
    d /= 5;
    ++fives;
  }
  if (d != 1) return std::nullopt;
  const int digits = std::max(twos, fives);
  __int128 scaled = num_;
  __int128 scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  scaled = scaled * (scale / den_);
  const bool negative = scaled < 0;
  if (negative) scaled = -scaled;
  std::string body;
  if (scaled == 0) body = "0";
  while (scaled > 0) {
    body.insert(body.begin(), static_cast<char>('0' + static_cast<int>(scaled % 10)));
    scaled /= 10;
  }
  if (digits > 0) {
    while (body.size() <= static_cast<std::size_t>(digits)) body.insert(body.begin(), '0');
    body.insert(body.end() - digits, '.');
  }
  if (negative) body.insert(body.begin(), '-');
  return normalize_decimal(body);
}

Rational operator+(const Rational& a, const Rational& b) {
  return Rational::reduce(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
              static_cast<__int128>(a.den_) * b.den_);
}
Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
Rational operator*(const Rational& a, const Rational& b) {
  return Rational::reduce(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
}
Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) throw std::domain_error("division by zero");
  return Rational::reduce(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
}
Rational Rational::operator-() const {
  Rational r;
  r.num_ = checked(-static_cast<__int128>(num_));
  r.den_ = den_;
  return r;
}
bool operator<(const Rational& a, const Rational& b) {
  return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
}

Rational evaluate_expression(std::string_view expr,
                             const std::map<std::string, Rational, std::less<>>& vars) {
  return ExprParser(expr, vars).parse();
}

}  // namespace srpg
