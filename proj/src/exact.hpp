#pragma once

#include "qkr/weights.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <vector>

namespace qkr::detail {

using boost::multiprecision::cpp_rational;

// Gauss-Jordan over exact rationals; false when the matrix is singular.
inline bool solve_exact(std::vector<std::vector<cpp_rational>> a, std::vector<cpp_rational> b,
                        std::vector<cpp_rational>& x) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && a[piv][c] == 0) ++piv;
    if (piv == n) return false;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0) continue;
      const cpp_rational f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

inline Rational to_rational(const cpp_rational& q) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  return Rational(static_cast<i64>(numerator(q)), static_cast<i64>(denominator(q)));
}

}  // namespace qkr::detail
