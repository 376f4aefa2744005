#include "qbaxter/tensor_core.hpp"

#include <algorithm>

namespace qbaxter {

long SpaceShape::total() const {
  long n = 1;
  for (int d : dims) n *= d;
  return n;
}

long SpaceShape::stride(int site) const {
  long s = 1;
  for (int k = size() - 1; k > site; --k) s *= dims[k];
  return s;
}

SpaceShape SpaceShape::without(int site) const {
  std::vector<int> d = dims;
  d.erase(d.begin() + site);
  return SpaceShape(d);
}

namespace {

void check_site(const SpaceShape& shape, int site) {
  if (site < 0 || site >= shape.size())
    throw DimensionError("site index " + std::to_string(site) + " out of range");
}

void check_square(const ComplexMatrix& x, const SpaceShape& shape) {
  if (x.rows() != shape.total() || x.cols() != shape.total())
    throw DimensionError("matrix does not match space shape");
}

}  // namespace

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexMatrix kron_all(const std::vector<ComplexMatrix>& factors) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

ComplexMatrix embed(const ComplexMatrix& x, int m, int n, const SpaceShape& shape) {
  check_site(shape, m);
  check_site(shape, n);
  if (m == n) throw DimensionError("embed needs two distinct sites");
  const long dm = shape.dims[m], dn = shape.dims[n];
  if (x.rows() != dm * dn || x.cols() != dm * dn)
    throw DimensionError("embedded operator does not match the factor dimensions");

  const long total = shape.total();
  const long sm = shape.stride(m), sn = shape.stride(n);
  ComplexMatrix out = ComplexMatrix::Zero(total, total);
  for (long col = 0; col < total; ++col) {
    const long im = (col / sm) % dm;
    const long in = (col / sn) % dn;
    const long base = col - im * sm - in * sn;
    const long xc = im * dn + in;
    for (long om = 0; om < dm; ++om)
      for (long on = 0; on < dn; ++on) {
        const cplx v = x(om * dn + on, xc);
        if (v != cplx(0)) out(base + om * sm + on * sn, col) = v;
      }
  }
  return out;
}

ComplexMatrix embed1(const ComplexMatrix& x, int m, const SpaceShape& shape) {
  check_site(shape, m);
  const long dm = shape.dims[m];
  if (x.rows() != dm || x.cols() != dm)
    throw DimensionError("embedded operator does not match the factor dimension");
  const long total = shape.total();
  const long sm = shape.stride(m);
  ComplexMatrix out = ComplexMatrix::Zero(total, total);
  for (long col = 0; col < total; ++col) {
    const long im = (col / sm) % dm;
    const long base = col - im * sm;
    for (long om = 0; om < dm; ++om) {
      const cplx v = x(om, im);
      if (v != cplx(0)) out(base + om * sm, col) = v;
    }
  }
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& x, int site, const SpaceShape& shape) {
  check_site(shape, site);
  check_square(x, shape);
  const long d = shape.dims[site];
  const long s = shape.stride(site);
  const long rest = shape.total() / d;
  ComplexMatrix out = ComplexMatrix::Zero(rest, rest);
  // reduced index r = hi * s + lo, full index = hi * d * s + k * s + lo
  auto full = [&](long r, long k) { return (r / s) * d * s + k * s + (r % s); };
  for (long i = 0; i < rest; ++i)
    for (long j = 0; j < rest; ++j) {
      cplx acc = 0;
      for (long k = 0; k < d; ++k) acc += x(full(i, k), full(j, k));
      out(i, j) = acc;
    }
  return out;
}

ComplexMatrix partial_transpose(const ComplexMatrix& x, int site, const SpaceShape& shape) {
  check_site(shape, site);
  check_square(x, shape);
  const long d = shape.dims[site];
  const long s = shape.stride(site);
  const long total = shape.total();
  ComplexMatrix out(total, total);
  for (long i = 0; i < total; ++i) {
    const long ki = (i / s) % d;
    for (long j = 0; j < total; ++j) {
      const long kj = (j / s) % d;
      out(i - ki * s + kj * s, j - kj * s + ki * s) = x(i, j);
    }
  }
  return out;
}

ComplexMatrix swap_p(int dim_a, int dim_b) {
  const long n = static_cast<long>(dim_a) * dim_b;
  ComplexMatrix p = ComplexMatrix::Zero(n, n);
  for (long i = 0; i < dim_a; ++i)
    for (long j = 0; j < dim_b; ++j) p(j * dim_a + i, i * dim_b + j) = 1.0;
  return p;
}

double rel_err(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("rel_err on matrices of different size");
  const double scale = std::max({1.0, a.norm(), b.norm()});
  return (a - b).norm() / scale;
}

bool all_finite(const ComplexMatrix& x) {
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (!std::isfinite(x(i, j).real()) || !std::isfinite(x(i, j).imag())) return false;
  return true;
}

}  // namespace qbaxter
