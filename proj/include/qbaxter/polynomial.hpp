#pragma once

#include <vector>

#include "qbaxter/tensor_core.hpp"

namespace qbaxter {

// Coefficients in ascending powers.
using Poly = std::vector<cplx>;

cplx poly_eval(const Poly& p, cplx x);
Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_add(const Poly& a, const Poly& b);
Poly poly_scale(const Poly& a, cplx s);

// Least-squares fit of given degree. The abscissae are rescaled by `scale`
// internally, which keeps the Vandermonde system well conditioned when the
// nodes lie on a circle of that radius.
Poly poly_fit(const std::vector<cplx>& x, const std::vector<cplx>& y, int degree,
              double scale = 1.0);

// Roots via the companion matrix, polished by a few Newton steps.
std::vector<cplx> poly_roots(const Poly& p);

// Points r * exp(2 pi i (k + phase) / n), k = 0..n-1.
std::vector<cplx> circle_nodes(int n, double radius, double phase = 0.0);

}  // namespace qbaxter
