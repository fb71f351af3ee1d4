// Log-domain arithmetic helpers. Exponential-scale quantities (e^{nR},
// M^L, tail probabilities) are carried as logs and combined here instead
// of being exponentiated directly.

#ifndef SPARC_LOG_MATH_HPP
#define SPARC_LOG_MATH_HPP

#include <cmath>
#include <limits>

namespace sparc {

// log(e^a + e^b), safe when either argument is -inf.
inline double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

// log(e^a - e^b), requires a >= b.
inline double log_sub_exp(double a, double b) {
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(-std::exp(b - a));
}

// log(1 - e^{-a}) for a > 0. Switches between log1p and expm1 at ln 2 to
// keep full precision on both ends.
inline double log1m_exp(double a) {
  constexpr double kLn2 = 0.6931471805599453;
  return a > kLn2 ? std::log1p(-std::exp(-a)) : std::log(-std::expm1(-a));
}

}  // namespace sparc

#endif  // SPARC_LOG_MATH_HPP
