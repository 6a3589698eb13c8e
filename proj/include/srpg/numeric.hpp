#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace srpg {

// Canonical decimal text: optional '-', no leading zeros, no trailing
// fractional zeros, no trailing '.', "-0" collapses to "0". Accepts
// "[+-]?digits[.digits]" and "[+-]?.digits". Returns nullopt otherwise.
std::optional<std::string> normalize_decimal(std::string_view text);

// Numeric three-way comparison of two canonical decimals (-1, 0, 1).
int compare_decimal(std::string_view a, std::string_view b);

// Exact rational arithmetic over int64 with overflow detection. Used for
// template parameters, answers and fraction normalization.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t value) : num_(value), den_(1) {}  // NOLINT: literals convert implicitly
  Rational(std::int64_t num, std::int64_t den);

  // Accepts a decimal ("12.5") or a fraction ("1/4").
  static std::optional<Rational> parse(std::string_view text);

  std::int64_t numerator() const { return num_; }
  std::int64_t denominator() const { return den_; }

  // Exact decimal rendering when the denominator has only factors 2 and 5.
  std::optional<std::string> to_decimal() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational operator-() const;
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator<(const Rational& a, const Rational& b);

 private:
  static Rational reduce(__int128 num, __int128 den);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

// Evaluates an arithmetic expression over + - * / and parentheses, decimal
// literals and named variables. Throws std::invalid_argument on syntax
// errors or unknown names, std::domain_error on division by zero and
// std::overflow_error when int64 range is exceeded.
Rational evaluate_expression(std::string_view expr,
                             const std::map<std::string, Rational, std::less<>>& vars);

}  // namespace srpg
