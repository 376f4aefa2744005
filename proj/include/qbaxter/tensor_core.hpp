#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qbaxter {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

// Local dimensions of the tensor factors, leftmost factor slowest-varying.
struct SpaceShape {
  std::vector<int> dims;

  SpaceShape() = default;
  SpaceShape(std::initializer_list<int> d) : dims(d) {}
  explicit SpaceShape(std::vector<int> d) : dims(std::move(d)) {}

  int size() const { return static_cast<int>(dims.size()); }
  long total() const;
  long stride(int site) const;
  SpaceShape without(int site) const;
};

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix kron_all(const std::vector<ComplexMatrix>& factors);

// X_{mn}: x acts on dims[m] (first factor of x) and dims[n] (second factor).
ComplexMatrix embed(const ComplexMatrix& x, int m, int n, const SpaceShape& shape);
// X_m: single-factor operator placed at site m.
ComplexMatrix embed1(const ComplexMatrix& x, int m, const SpaceShape& shape);

ComplexMatrix partial_trace(const ComplexMatrix& x, int site, const SpaceShape& shape);
ComplexMatrix partial_transpose(const ComplexMatrix& x, int site, const SpaceShape& shape);

ComplexMatrix swap_p(int dim_a, int dim_b);

// ||a-b||_F / max(1, ||a||_F, ||b||_F)
double rel_err(const ComplexMatrix& a, const ComplexMatrix& b);

bool all_finite(const ComplexMatrix& x);

}  // namespace qbaxter
