#include "qbaxter/lattice_ops.hpp"

#include <cmath>

namespace qbaxter {

ComplexMatrix r_matrix(cplx z, cplx q) {
  const cplx a = 1.0 - q * q * z * z;
  const cplx b = q * (1.0 - z * z);
  const cplx c = (1.0 - q * q) * z;
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(0, 0) = a;
  m(1, 1) = b;
  m(1, 2) = c;
  m(2, 1) = c;
  m(2, 2) = b;
  m(3, 3) = a;
  return m;
}

ComplexMatrix r_tilde(cplx z, cplx q) {
  const SpaceShape vv{2, 2};
  ComplexMatrix rt1 = partial_transpose(r_matrix(z, q), 0, vv);
  return partial_transpose(rt1.inverse(), 0, vv);
}

ComplexMatrix block2(const ComplexMatrix& b00, const ComplexMatrix& b01,
                     const ComplexMatrix& b10, const ComplexMatrix& b11) {
  const Eigen::Index J = b00.rows();
  ComplexMatrix out(2 * J, 2 * J);
  const ComplexMatrix* blocks[2][2] = {{&b00, &b01}, {&b10, &b11}};
  for (int al = 0; al < 2; ++al)
    for (int be = 0; be < 2; ++be) {
      const ComplexMatrix& b = *blocks[al][be];
      for (Eigen::Index j = 0; j < J; ++j)
        for (Eigen::Index k = 0; k < J; ++k) out(2 * j + al, 2 * k + be) = b(j, k);
    }
  return out;
}

ComplexMatrix block_of(const ComplexMatrix& x, int alpha, int beta) {
  const Eigen::Index J = x.rows() / 2;
  ComplexMatrix b(J, J);
  for (Eigen::Index j = 0; j < J; ++j)
    for (Eigen::Index k = 0; k < J; ++k) b(j, k) = x(2 * j + alpha, 2 * k + beta);
  return b;
}

namespace {

ComplexMatrix fD(int J, const std::function<cplx(int)>& f) { return osc_fD(f, J).matrix; }

}  // namespace

ComplexMatrix l_matrix(cplx z, cplx r, cplx q, int J) {
  const ComplexMatrix a = osc_a(J).matrix, ad = osc_adag(J, q).matrix;
  const ComplexMatrix id = ComplexMatrix::Identity(J, J);
  const ComplexMatrix zero = ComplexMatrix::Zero(J, J);
  const ComplexMatrix left =
      block2(id, -z / q * ad, -q * z * a,
             fD(J, [&](int j) { return 1.0 - qpow(q, 2 * (j + 1)) * z * z; }));
  const ComplexMatrix right = block2(fD(J, [&](int j) { return qpow(q, j) * r; }), zero, zero,
                                     fD(J, [&](int j) { return qpow(q, -j); }));
  return left * right;
}

ComplexMatrix l_inverse(cplx z, cplx r, cplx q, int J) {
  if (std::abs(1.0 - z * z) < 1e-14) throw DomainError("L(z) is singular at z^2 = 1");
  const ComplexMatrix a = osc_a(J).matrix, ad = osc_adag(J, q).matrix;
  const ComplexMatrix id = ComplexMatrix::Identity(J, J);
  const ComplexMatrix zero = ComplexMatrix::Zero(J, J);
  const ComplexMatrix left = block2(fD(J, [&](int j) { return qpow(q, -j) / r; }), zero, zero,
                                    fD(J, [&](int j) { return qpow(q, j); }));
  const ComplexMatrix right =
      block2(fD(J, [&](int j) { return 1.0 - qpow(q, 2 * j) * z * z; }), z / q * ad, q * z * a, id);
  return (left * right) / (1.0 - z * z);
}

ComplexMatrix l_t2(cplx z, cplx r, cplx q, int J) {
  const ComplexMatrix a = osc_a(J).matrix, ad = osc_adag(J, q).matrix;
  const ComplexMatrix id = ComplexMatrix::Identity(J, J);
  const ComplexMatrix zero = ComplexMatrix::Zero(J, J);
  const ComplexMatrix left = block2(fD(J, [&](int j) { return qpow(q, j) * r; }), zero, zero,
                                    fD(J, [&](int j) { return qpow(q, -j); }));
  const ComplexMatrix right =
      block2(id, -q * q * z * a, -z * ad,
             fD(J, [&](int j) { return 1.0 - qpow(q, 2 * (j + 1)) * z * z; }));
  return left * right;
}

ComplexMatrix l_t2_inverse(cplx z, cplx r, cplx q, int J) {
  if (std::abs(1.0 - q * q * z * z) < 1e-14)
    throw DomainError("L(z)^{t2} is singular at q^2 z^2 = 1");
  const ComplexMatrix a = osc_a(J).matrix, ad = osc_adag(J, q).matrix;
  const ComplexMatrix id = ComplexMatrix::Identity(J, J);
  const ComplexMatrix zero = ComplexMatrix::Zero(J, J);
  const ComplexMatrix left =
      block2(fD(J, [&](int j) { return 1.0 - qpow(q, 2 * (j + 2)) * z * z; }), q * q * z * a,
             z * ad, id);
  const ComplexMatrix right = block2(fD(J, [&](int j) { return qpow(q, -j) / r; }), zero, zero,
                                     fD(J, [&](int j) { return qpow(q, j); }));
  return (left * right) / (1.0 - q * q * z * z);
}

ComplexMatrix l_tilde(cplx z, cplx r, cplx q, int J) {
  return partial_transpose(l_t2_inverse(z, r, q, J), 1, SpaceShape{J, 2});
}

ComplexMatrix l_tilde_pipeline(cplx z, cplx r, cplx q, int J) {
  const SpaceShape wv{J, 2};
  const ComplexMatrix lt2 = partial_transpose(l_matrix(z, r, q, J), 1, wv);
  Eigen::PartialPivLU<ComplexMatrix> lu(lt2);
  if (lu.rcond() < 1e-300) throw DomainError("partial transpose of L is singular");
  return partial_transpose(lu.inverse(), 1, wv);
}

ComplexMatrix kV(cplx z, cplx xi) {
  ComplexMatrix k = ComplexMatrix::Zero(2, 2);
  k(0, 0) = xi * z * z - 1.0;
  k(1, 1) = xi - z * z;
  return k;
}

ComplexMatrix ktV(cplx z, cplx xitilde, cplx q) {
  ComplexMatrix k = ComplexMatrix::Zero(2, 2);
  k(0, 0) = q * q * xitilde * z * z - 1.0;
  k(1, 1) = xitilde - q * q * z * z;
  return k;
}

ComplexMatrix kW_dense(cplx z, cplx r, cplx xi, cplx q, int J) {
  return kW_matrix(z, r, xi, q, J).materialize();
}

ComplexMatrix ktW_dense(cplx z, cplx r, cplx xitilde, cplx q, int J) {
  return ktW_matrix(z, r, xitilde, q, J).materialize();
}

ComplexMatrix iota(cplx r, cplx q, int J) {
  ComplexMatrix m = ComplexMatrix::Zero(2 * J, J);
  for (int j = 0; j < J; ++j) {
    if (j + 1 < J) m(2 * (j + 1), j) = qpow(q, -j - 1) - qpow(q, j + 1);
    m(2 * j + 1, j) = qpow(q, j + 1) * r;
  }
  return m;
}

ComplexMatrix tau(cplx r, cplx q, int J) {
  ComplexMatrix m = ComplexMatrix::Zero(J, 2 * J);
  for (int j = 0; j < J; ++j) {
    m(j, 2 * j) = qpow(q, j);
    if (j + 1 < J) m(j + 1, 2 * j + 1) = (qpow(q, j + 1) - qpow(q, -j - 1)) / r;
  }
  return m;
}

ComplexMatrix tau_section(cplx q, int J) {
  ComplexMatrix m = ComplexMatrix::Zero(2 * J, J);
  for (int j = 0; j < J; ++j) m(2 * j, j) = qpow(q, -j);
  return m;
}

ComplexMatrix iota_retraction(cplx r, cplx q, int J) {
  // Column-by-column solve of  X∘tau_section = 0  and  X∘iota = Id.
  // Both maps are banded, so each column follows from already solved ones.
  const ComplexMatrix io = iota(r, q, J), ts = tau_section(q, J);
  ComplexMatrix x = ComplexMatrix::Zero(J, 2 * J);
  for (int j = 0; j < J; ++j) {
    const cplx pivot = ts(2 * j, j);
    if (std::abs(pivot) == 0.0 || !std::isfinite(std::abs(pivot)))
      throw DomainError("iota_retraction: degenerate tau_section column");
    x.col(2 * j).setZero();  // X(w^j ⊗ v^0) * pivot = 0
  }
  for (int j = J - 1; j >= 0; --j) {
    const cplx pivot = io(2 * j + 1, j);
    if (std::abs(pivot) < 1e-300 || !std::isfinite(std::abs(pivot)))
      throw DomainError("iota_retraction: ill-conditioned pivot at Fock index " + std::to_string(j));
    ComplexVector rhs = ComplexVector::Zero(J);
    rhs(j) = 1.0;
    if (2 * j + 2 < 2 * J) rhs -= io(2 * j + 2, j) * x.col(2 * j + 2);
    x.col(2 * j + 1) = rhs / pivot;
    if (!all_finite(x.col(2 * j + 1)))
      throw DomainError("iota_retraction: solve produced non-finite entries");
  }
  return x;
}

}  // namespace qbaxter
