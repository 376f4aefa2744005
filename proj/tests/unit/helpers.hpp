#pragma once

#include <random>

#include "qbaxter/tensor_core.hpp"

namespace qbt {

using qbaxter::cplx;
using qbaxter::ComplexMatrix;

inline ComplexMatrix random_matrix(std::mt19937_64& rng, long rows, long cols) {
  std::normal_distribution<double> g;
  ComplexMatrix m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = {g(rng), g(rng)};
  return m;
}

inline cplx random_complex(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = lo + (hi - lo) * u(rng);
  return std::polar(r, 2.0 * 3.141592653589793 * u(rng));
}

// Near-zero relative comparison for scalars.
inline double rel(cplx a, cplx b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace qbt
