#pragma once

#include <string>

namespace sdakd {

// Exact rational channel fraction C in (0, 1].
// Kept as a reduced integer ratio so width scaling is bit-reproducible.
struct Fraction {
  long long num = 1;
  long long den = 1;

  Fraction() = default;
  Fraction(long long n, long long d);

  // Accepts "1", "1/2", "3/4" or a decimal equal to a small rational ("0.25").
  static Fraction parse(const std::string& text);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  // Scaled layer width: max(1, round(C*w)), round half up, integer arithmetic.
  int scale_width(int width) const;

  std::string str() const;

  bool operator==(const Fraction&) const = default;
};

}  // namespace sdakd
