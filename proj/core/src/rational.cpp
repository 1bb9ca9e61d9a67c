#include "guslite/rational.hpp"

#include <cctype>
#include <cstdlib>

namespace guslite {

namespace {

std::int64_t parse_int(const std::string& s) {
  if (s.empty()) throw input_error("empty number");
  std::size_t pos = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw input_error("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw input_error("not a number: '" + s + "'");
  return v;
}

}  // namespace

Rat parse_rat(const std::string& text) {
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    std::int64_t n = parse_int(text.substr(0, slash));
    std::int64_t d = parse_int(text.substr(slash + 1));
    if (d == 0) throw input_error("zero denominator in '" + text + "'");
    return Rat(n, d);
  }
  auto dot = text.find('.');
  if (dot != std::string::npos) {
    std::string whole = text.substr(0, dot);
    std::string frac = text.substr(dot + 1);
    if (frac.empty()) return Rat(parse_int(whole));
    if (frac.size() > 18) throw input_error("too many decimals in '" + text + "'");
    for (char c : frac)
      if (!std::isdigit(static_cast<unsigned char>(c)))
        throw input_error("not a number: '" + text + "'");
    bool neg = !whole.empty() && whole[0] == '-';
    std::int64_t w = whole.empty() || whole == "-" ? 0 : parse_int(whole);
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    std::int64_t f = parse_int(frac);
    Rat r = Rat(w < 0 ? -w : w) + Rat(f, scale);
    return (neg || w < 0) ? -r : r;
  }
  return Rat(parse_int(text));
}

}  // namespace guslite
