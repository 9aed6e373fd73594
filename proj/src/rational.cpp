#include "mapd/rational.hpp"

#include <charconv>

namespace mapd {

namespace {

std::int64_t parse_int(std::string_view s, const std::string& whole) {
  std::int64_t v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw std::invalid_argument("malformed rational '" + whole + "'");
  return v;
}

}  // namespace

std::string Rational::to_decimal(int digits) const {
  bool negative = num_ < 0;
  __int128 n = negative ? -static_cast<__int128>(num_) : num_;
  __int128 scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  __int128 scaled = (n * scale * 2 + den_) / (2 * static_cast<__int128>(den_));
  auto whole = static_cast<std::int64_t>(scaled / scale);
  auto frac = static_cast<std::int64_t>(scaled % scale);
  std::string out = (negative && scaled != 0 ? "-" : "") + std::to_string(whole);
  if (digits > 0) {
    std::string f = std::to_string(frac);
    out += "." + std::string(digits - f.size(), '0') + f;
  }
  return out;
}

Rational parse_rational(const std::string& text) {
  std::string_view s = text;
  if (auto slash = s.find('/'); slash != std::string_view::npos)
    return Rational(parse_int(s.substr(0, slash), text), parse_int(s.substr(slash + 1), text));
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    auto frac = s.substr(dot + 1);
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    std::int64_t whole = dot == 0 ? 0 : parse_int(s.substr(0, dot), text);
    std::int64_t f = frac.empty() ? 0 : parse_int(frac, text);
    return Rational(whole * den + (whole < 0 ? -f : f), den);
  }
  return Rational(parse_int(s, text));
}

}  // namespace mapd
