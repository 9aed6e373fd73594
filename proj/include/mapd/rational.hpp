#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mapd {

// Exact non-negative-denominator fraction, always kept in lowest terms.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) {
    if (den_ == 0) throw std::invalid_argument("zero denominator");
    normalize();
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("division by zero");
    return Rational(a.num_ * b.den_, a.den_ * b.num_);
  }
  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num_) * b.den_ <=> static_cast<__int128>(b.num_) * a.den_;
  }

  // Half-up rounded decimal with `digits` fractional digits.
  std::string to_decimal(int digits = 6) const;
  std::string to_string() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

 private:
  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

// Parses "N", "N/D" or a plain decimal such as "0.2".
Rational parse_rational(const std::string& text);

}  // namespace mapd
