#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qbaxter/tensor_core.hpp"

namespace qbaxter {

class DomainError : public Error {
public:
  using Error::Error;
};

class OverflowError : public Error {
public:
  using Error::Error;
};

class ConvergenceError : public Error {
public:
  using Error::Error;
};

// Integer power by repeated squaring.
cplx qpow(cplx q, long n);

// Operator on span{w^0, ..., w^{J-1}}. When log_scale is present, row i of the
// operator is exp(log_scale[i]) * matrix.row(i).
struct FockOperator {
  ComplexMatrix matrix;
  std::optional<int> band;
  std::optional<std::vector<double>> log_scale;

  int dim() const { return static_cast<int>(matrix.rows()); }
  ComplexMatrix materialize() const;
};

FockOperator osc_a(int J);
FockOperator osc_adag(int J, cplx q);
FockOperator osc_fD(const std::function<cplx(int)>& f, int J);

// (x)_j with the q^2-deformed convention, j of either sign.
cplx pochhammer(cplx x, long j, cplx q);
cplx pochhammer_inf(cplx x, cplx q);

struct Phi21Result {
  cplx value;
  int terms = 0;
  double tail_bound = 0.0;
};

Phi21Result phi21_detail(cplx a, cplx b, cplx c, cplx x, cplx q, double tol = 1e-15);
cplx phi21(cplx a, cplx b, cplx c, cplx x, cplx q, double tol = 1e-15);

// Diagonal entries stored as log-modulus plus unit phase. A vanishing entry
// has log_mag = -inf and phase 0.
struct LogDiagonal {
  std::vector<double> log_mag;
  std::vector<cplx> phase;

  size_t size() const { return log_mag.size(); }
  cplx value(size_t j) const;
};

LogDiagonal kW_diagonal(cplx z, cplx r, cplx xi, cplx q, int n);
LogDiagonal ktW_diagonal(cplx z, cplx r, cplx xitilde, cplx q, int n);

FockOperator kW_matrix(cplx z, cplx r, cplx xi, cplx q, int J);
FockOperator ktW_matrix(cplx z, cplx r, cplx xitilde, cplx q, int J);

FockOperator rho_plus(const std::string& gen, cplx z, cplx r, cplx q, int J);
FockOperator rho_minus(const std::string& gen, cplx z, cplx r, cplx q, int J);

}  // namespace qbaxter
