#include "qbaxter/polynomial.hpp"

#include <cmath>
#include <numbers>

namespace qbaxter {

cplx poly_eval(const Poly& p, cplx x) {
  cplx acc = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly out(a.size() + b.size() - 1, cplx(0));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Poly poly_add(const Poly& a, const Poly& b) {
  Poly out(std::max(a.size(), b.size()), cplx(0));
  for (size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

Poly poly_scale(const Poly& a, cplx s) {
  Poly out = a;
  for (auto& c : out) c *= s;
  return out;
}

Poly poly_fit(const std::vector<cplx>& x, const std::vector<cplx>& y, int degree,
              double scale) {
  if (x.size() != y.size()) throw DimensionError("poly_fit: node/value count mismatch");
  if (degree < 0 || static_cast<int>(x.size()) < degree + 1)
    throw DimensionError("poly_fit: not enough nodes for the requested degree");
  const long n = static_cast<long>(x.size());
  ComplexMatrix v(n, degree + 1);
  ComplexVector rhs(n);
  for (long i = 0; i < n; ++i) {
    cplx u = x[i] / scale, pw = 1.0;
    for (int k = 0; k <= degree; ++k) {
      v(i, k) = pw;
      pw *= u;
    }
    rhs(i) = y[i];
  }
  ComplexVector c = v.colPivHouseholderQr().solve(rhs);
  Poly out(degree + 1);
  double s = 1.0;
  for (int k = 0; k <= degree; ++k) {
    out[k] = c(k) / s;
    s *= scale;
  }
  return out;
}

std::vector<cplx> poly_roots(const Poly& p) {
  int deg = static_cast<int>(p.size()) - 1;
  while (deg > 0 && p[deg] == cplx(0)) --deg;
  if (deg <= 0) return {};
  ComplexMatrix comp = ComplexMatrix::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -p[i] / p[deg];
  Eigen::ComplexEigenSolver<ComplexMatrix> es(comp, false);
  std::vector<cplx> roots(deg);
  Poly dp(deg);
  for (int k = 1; k <= deg; ++k) dp[k - 1] = p[k] * static_cast<double>(k);
  for (int i = 0; i < deg; ++i) {
    cplx r = es.eigenvalues()(i);
    for (int it = 0; it < 3; ++it) {
      const cplx d = poly_eval(dp, r);
      if (d == cplx(0)) break;
      const cplx step = poly_eval(p, r) / d;
      if (!std::isfinite(std::abs(step)) || std::abs(step) > 1e-3 * std::max(1.0, std::abs(r)))
        break;
      r -= step;
    }
    roots[i] = r;
  }
  return roots;
}

std::vector<cplx> circle_nodes(int n, double radius, double phase) {
  std::vector<cplx> out(n);
  for (int k = 0; k < n; ++k)
    out[k] = std::polar(radius, 2.0 * std::numbers::pi * (k + phase) / n);
  return out;
}

}  // namespace qbaxter
