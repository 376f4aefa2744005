#include "qbaxter/qoscillator.hpp"

#include <cmath>
#include <limits>

namespace qbaxter {

namespace {

constexpr double kMaxLog = 700.0;

// Multiplies a (log-modulus, phase) accumulator by a complex factor.
void accumulate(double& log_mag, cplx& phase, cplx factor) {
  if (phase == cplx(0)) return;
  const double m = std::abs(factor);
  if (m == 0.0) {
    log_mag = -std::numeric_limits<double>::infinity();
    phase = 0.0;
    return;
  }
  log_mag += std::log(m);
  phase *= factor / m;
}

FockOperator diagonal_operator(const LogDiagonal& d) {
  FockOperator op;
  const int J = static_cast<int>(d.size());
  op.matrix = ComplexMatrix::Zero(J, J);
  std::vector<double> scale(J);
  for (int j = 0; j < J; ++j) {
    op.matrix(j, j) = d.phase[j];
    scale[j] = std::isfinite(d.log_mag[j]) ? d.log_mag[j] : 0.0;
  }
  op.band = 0;
  op.log_scale = scale;
  return op;
}

}  // namespace

cplx qpow(cplx q, long n) {
  if (n < 0) return 1.0 / qpow(q, -n);
  cplx result = 1.0, base = q;
  while (n > 0) {
    if (n & 1) result *= base;
    base *= base;
    n >>= 1;
  }
  return result;
}

ComplexMatrix FockOperator::materialize() const {
  if (!log_scale) return matrix;
  ComplexMatrix out = matrix;
  for (int i = 0; i < dim(); ++i) {
    const double s = (*log_scale)[i];
    if (s > kMaxLog && matrix.row(i).norm() > 0)
      throw OverflowError("Fock operator row " + std::to_string(i) +
                          " exceeds double range (log-modulus " + std::to_string(s) + ")");
    out.row(i) *= std::exp(s);
  }
  return out;
}

FockOperator osc_a(int J) {
  FockOperator op;
  op.matrix = ComplexMatrix::Zero(J, J);
  for (int j = 0; j + 1 < J; ++j) op.matrix(j, j + 1) = 1.0;
  op.band = 1;
  return op;
}

FockOperator osc_adag(int J, cplx q) {
  FockOperator op;
  op.matrix = ComplexMatrix::Zero(J, J);
  for (int j = 0; j + 1 < J; ++j) op.matrix(j + 1, j) = 1.0 - qpow(q, 2 * (j + 1));
  op.band = 1;
  return op;
}

FockOperator osc_fD(const std::function<cplx(int)>& f, int J) {
  FockOperator op;
  op.matrix = ComplexMatrix::Zero(J, J);
  for (int j = 0; j < J; ++j) op.matrix(j, j) = f(j);
  op.band = 0;
  return op;
}

cplx pochhammer(cplx x, long j, cplx q) {
  cplx out = 1.0;
  if (j >= 0) {
    for (long i = 0; i < j; ++i) out *= 1.0 - qpow(q, 2 * i) * x;
    return out;
  }
  for (long i = 1; i <= -j; ++i) {
    const cplx t = qpow(q, -2 * i) * x;
    const cplx f = 1.0 - t;
    if (std::abs(f) <= 1e-14 * std::max(1.0, std::abs(t)))
      throw DomainError("pochhammer: pole in the negative branch");
    out /= f;
  }
  return out;
}

cplx pochhammer_inf(cplx x, cplx q) {
  if (!(std::abs(q) < 1.0)) throw DomainError("pochhammer_inf needs |q| < 1");
  const cplx q2 = q * q;
  cplx out = 1.0, t = x;
  for (int i = 0; i < 100000; ++i) {
    if (std::abs(t) < 1e-18) return out;
    out *= 1.0 - t;
    t *= q2;
  }
  throw ConvergenceError("pochhammer_inf did not converge");
}

Phi21Result phi21_detail(cplx a, cplx b, cplx c, cplx x, cplx q, double tol) {
  if (!(std::abs(q) < 1.0)) throw DomainError("phi21 needs |q| < 1");
  if (!(std::abs(x) < 1.0)) throw DomainError("phi21 needs |x| < 1");
  const cplx q2 = q * q;
  cplx term = 1.0, sum = 1.0, q2j = 1.0;
  Phi21Result res;
  for (int j = 0; j < 1000000; ++j) {
    const cplx den = (1.0 - q2j * q2) * (1.0 - q2j * c);
    if (std::abs(1.0 - q2j * c) <= 1e-14 * std::max(1.0, std::abs(q2j * c)))
      throw DomainError("phi21: c lies on a forbidden point q^{-2k}");
    const cplx ratio = (1.0 - q2j * a) * (1.0 - q2j * b) / den * x;
    term *= ratio;
    sum += term;
    q2j *= q2;
    const double rho = std::abs(ratio);
    const double t = std::abs(term);
    if (t == 0.0) {
      res = {sum, j + 2, 0.0};
      return res;
    }
    if (rho < 1.0) {
      const double tail = t * rho / (1.0 - rho);
      if (t < tol * std::abs(sum) && tail < tol * std::abs(sum)) {
        res = {sum, j + 2, tail};
        return res;
      }
    }
  }
  throw ConvergenceError("phi21 did not converge");
}

cplx phi21(cplx a, cplx b, cplx c, cplx x, cplx q, double tol) {
  return phi21_detail(a, b, c, x, q, tol).value;
}

cplx LogDiagonal::value(size_t j) const {
  if (phase[j] == cplx(0)) return 0.0;
  if (log_mag[j] > kMaxLog) throw OverflowError("diagonal entry exceeds double range");
  return phase[j] * std::exp(log_mag[j]);
}

LogDiagonal kW_diagonal(cplx z, cplx r, cplx xi, cplx q, int n) {
  LogDiagonal d;
  d.log_mag.reserve(n);
  d.phase.reserve(n);
  double lm = 0.0;
  cplx ph = 1.0;
  const double lq = std::log(std::abs(q)), lr = std::log(std::abs(r));
  const cplx uq = q / std::abs(q), ur = r / std::abs(r);
  const cplx z2 = z * z;
  cplx q2i = 1.0;
  for (int j = 0; j < n; ++j) {
    if (j > 0) {
      // q r^{-1} (z^2 - q^{-2j} xi) = q^{1-2j} r^{-1} (q^{2j} z^2 - xi)
      q2i *= q * q;
      if (ph != cplx(0)) {
        lm += (1 - 2 * j) * lq - lr;
        ph *= std::pow(uq, 1 - 2 * j) / ur;
      }
      accumulate(lm, ph, q2i * z2 - xi);
    }
    d.log_mag.push_back(lm);
    d.phase.push_back(ph);
  }
  return d;
}

LogDiagonal ktW_diagonal(cplx z, cplx r, cplx xitilde, cplx q, int n) {
  LogDiagonal d;
  d.log_mag.reserve(n);
  d.phase.reserve(n);
  double lm = 0.0;
  cplx ph = 1.0;
  const double lq = std::log(std::abs(q)), lr = std::log(std::abs(r));
  const cplx uq = q / std::abs(q), ur = r / std::abs(r);
  const cplx w = q * q * xitilde * z * z;
  cplx q2i = 1.0;
  for (int j = 0; j < n; ++j) {
    // denominator factor (1 - q^{2j} q^2 xitilde z^2)
    const cplx den = 1.0 - q2i * w;
    if (std::abs(den) <= 1e-13)
      throw DomainError("ktW: z lies on a pole z^2 = q^{-2k} / xitilde");
    if (j > 0) {
      if (ph != cplx(0)) {
        lm += (2 * j - 1) * lq + lr;
        ph *= std::pow(uq, 2 * j - 1) * ur;
      }
      accumulate(lm, ph, -xitilde);
    }
    accumulate(lm, ph, 1.0 / den);
    q2i *= q * q;
    d.log_mag.push_back(lm);
    d.phase.push_back(ph);
  }
  return d;
}

FockOperator kW_matrix(cplx z, cplx r, cplx xi, cplx q, int J) {
  return diagonal_operator(kW_diagonal(z, r, xi, q, J));
}

FockOperator ktW_matrix(cplx z, cplx r, cplx xitilde, cplx q, int J) {
  return diagonal_operator(ktW_diagonal(z, r, xitilde, q, J));
}

FockOperator rho_plus(const std::string& gen, cplx z, cplx r, cplx q, int J) {
  const cplx qq = q - 1.0 / q;
  if (gen == "e0") {
    FockOperator op = osc_adag(J, q);
    op.matrix *= z / (q * qq);
    return op;
  }
  if (gen == "e1") {
    FockOperator op = osc_a(J);
    op.matrix *= q * z / qq;
    return op;
  }
  if (gen == "k0") return osc_fD([&](int j) { return r * qpow(q, 2 * j); }, J);
  if (gen == "k1") return osc_fD([&](int j) { return qpow(q, -2 * j) / r; }, J);
  throw DomainError("rho_plus: unknown generator '" + gen + "'");
}

FockOperator rho_minus(const std::string& gen, cplx z, cplx r, cplx q, int J) {
  const cplx qq = q - 1.0 / q;
  if (gen == "f0") {
    FockOperator op = osc_a(J);
    op.matrix *= q / (z * qq);
    return op;
  }
  if (gen == "f1") {
    FockOperator op = osc_adag(J, q);
    op.matrix *= 1.0 / (q * z * qq);
    return op;
  }
  if (gen == "k0") return osc_fD([&](int j) { return qpow(q, 2 * j) / r; }, J);
  if (gen == "k1") return osc_fD([&](int j) { return r * qpow(q, -2 * j); }, J);
  throw DomainError("rho_minus: unknown generator '" + gen + "'");
}

}  // namespace qbaxter
