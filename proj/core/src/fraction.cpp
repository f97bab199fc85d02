#include "sdakd/fraction.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sdakd {

Fraction::Fraction(long long n, long long d) : num(n), den(d) {
  if (den <= 0 || num <= 0 || num > den) {
    throw std::invalid_argument("channel fraction must satisfy 0 < num/den <= 1, got " +
                                std::to_string(n) + "/" + std::to_string(d));
  }
  const long long g = std::gcd(num, den);
  num /= g;
  den /= g;
}

Fraction Fraction::parse(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      const long long n = std::stoll(text.substr(0, slash));
      const long long d = std::stoll(text.substr(slash + 1));
      return Fraction(n, d);
    }
    if (text.find('.') == std::string::npos) {
      return Fraction(std::stoll(text), 1);
    }
    const double x = std::stod(text);
    for (long long d = 1; d <= 4096; ++d) {
      const long long n = std::llround(x * static_cast<double>(d));
      if (n >= 1 && std::abs(static_cast<double>(n) / static_cast<double>(d) - x) < 1e-12) {
        return Fraction(n, d);
      }
    }
  } catch (const std::invalid_argument&) {
  } catch (const std::out_of_range&) {
  }
  throw std::invalid_argument("cannot parse channel fraction '" + text + "'");
}

int Fraction::scale_width(int width) const {
  if (width < 1) throw std::invalid_argument("layer width must be >= 1");
  // round half up: floor((2*num*w + den) / (2*den))
  const long long scaled = (2 * num * static_cast<long long>(width) + den) / (2 * den);
  return static_cast<int>(scaled < 1 ? 1 : scaled);
}

std::string Fraction::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

}  // namespace sdakd
