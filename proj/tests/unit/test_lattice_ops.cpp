#include <doctest.h>

#include "helpers.hpp"
#include "qbaxter/lattice_ops.hpp"

using namespace qbaxter;
using qbt::rel;

namespace {

const cplx kQ{0.58, 0.17};
const int kJ = 14;

// Rows and columns of W⊗V with Fock index below `keep`.
ComplexMatrix interior(const ComplexMatrix& m, int keep) {
  const int n = 2 * keep;
  return m.topLeftCorner(std::min<long>(n, m.rows()), std::min<long>(n, m.cols()));
}

ComplexMatrix diag_fock(int J, const std::function<cplx(int)>& f) {
  ComplexMatrix m = ComplexMatrix::Zero(J, J);
  for (int j = 0; j < J; ++j) m(j, j) = f(j);
  return m;
}

}  // namespace

TEST_CASE("R-matrix special values and crossing unitarity") {
  const ComplexMatrix R0 = r_matrix(0.0, kQ);
  ComplexMatrix d = ComplexMatrix::Zero(4, 4);
  d.diagonal() << 1.0, kQ, kQ, 1.0;
  CHECK(rel_err(R0, d) == 0.0);
  CHECK(rel_err(r_matrix(1.0, kQ), (1.0 - kQ * kQ) * swap_p(2, 2)) < 1e-15);

  for (cplx z : {cplx(0.4, 0.3), cplx(-1.3, 0.2), cplx(0.1, -0.8)}) {
    const cplx q2 = kQ * kQ, z2 = z * z;
    const ComplexMatrix lhs = r_tilde(z, kQ).inverse();
    const ComplexMatrix rhs =
        (1.0 - z2) * (1.0 - q2 * q2 * z2) / ((1.0 - q2 * z2) * (1.0 - q2 * q2 * q2 * z2)) *
        r_matrix(q2 * z, kQ);
    CHECK(rel_err(lhs, rhs) < 1e-13);
    // r_tilde against its definition through partial transposes
    const ComplexMatrix Rt1 = partial_transpose(r_matrix(z, kQ), 0, {2, 2});
    CHECK(rel_err(r_tilde(z, kQ), partial_transpose(Rt1.inverse(), 0, {2, 2})) < 1e-13);
  }
}

TEST_CASE("block2 and block_of round trip") {
  std::mt19937_64 rng(8);
  std::vector<ComplexMatrix> b;
  for (int k = 0; k < 4; ++k) b.push_back(qbt::random_matrix(rng, 5, 5));
  const ComplexMatrix m = block2(b[0], b[1], b[2], b[3]);
  CHECK(rel_err(block_of(m, 0, 0), b[0]) == 0.0);
  CHECK(rel_err(block_of(m, 0, 1), b[1]) == 0.0);
  CHECK(rel_err(block_of(m, 1, 0), b[2]) == 0.0);
  CHECK(rel_err(block_of(m, 1, 1), b[3]) == 0.0);
  // block (alpha, beta) sends w^j ⊗ v^beta to the v^alpha component
  CHECK(m(2 * 3 + 0, 2 * 1 + 1) == b[1](3, 1));
}

TEST_CASE("L-operator") {
  const cplx r{1.2, -0.4};
  const ComplexMatrix L0 = l_matrix(0.0, r, kQ, kJ);
  const ComplexMatrix expect0 = block2(diag_fock(kJ, [&](int j) { return qpow(kQ, j) * r; }),
                                       ComplexMatrix::Zero(kJ, kJ), ComplexMatrix::Zero(kJ, kJ),
                                       diag_fock(kJ, [&](int j) { return qpow(kQ, -j); }));
  CHECK(rel_err(L0, expect0) < 1e-15);

  for (cplx z : {cplx(0.45, 0.25), cplx(-0.9, 0.6)}) {
    // r enters as a right factor diag(r, 1) on the V leg of the first block column
    ComplexMatrix rW = diag_fock(kJ, [&](int) { return r; });
    ComplexMatrix split = block2(rW, ComplexMatrix::Zero(kJ, kJ), ComplexMatrix::Zero(kJ, kJ),
                                 ComplexMatrix::Identity(kJ, kJ));
    CHECK(rel_err(l_matrix(z, r, kQ, kJ), l_matrix(z, 1.0, kQ, kJ) * split) < 1e-14);

    const int keep = kJ - 2;
    const ComplexMatrix I = ComplexMatrix::Identity(2 * kJ, 2 * kJ);
    CHECK(rel_err(interior(l_matrix(z, r, kQ, kJ) * l_inverse(z, r, kQ, kJ), keep), interior(I, keep)) <
          1e-13);
    CHECK(rel_err(l_t2(z, r, kQ, kJ), partial_transpose(l_matrix(z, r, kQ, kJ), 1, {kJ, 2})) < 1e-14);
    CHECK(rel_err(interior(l_t2(z, r, kQ, kJ) * l_t2_inverse(z, r, kQ, kJ), keep), interior(I, keep)) <
          1e-11);

    // crossing unitarity of the tilded operator
    const cplx q2 = kQ * kQ;
    const ComplexMatrix prod =
        l_tilde(z, r, kQ, kJ) * ((1.0 - q2 * z * z) / (1.0 - q2 * q2 * z * z) * l_matrix(q2 * z, r, kQ, kJ));
    CHECK(rel_err(interior(prod, keep - 2), interior(I, keep - 2)) < 1e-12);
    CHECK(rel_err(interior(l_tilde(z, r, kQ, kJ), keep - 2),
                  interior(l_tilde_pipeline(z, r, kQ, kJ), keep - 2)) < 1e-12);
  }

  const ComplexMatrix Lt0 = l_tilde(0.0, r, kQ, kJ);
  const ComplexMatrix expect_t0 = block2(diag_fock(kJ, [&](int j) { return qpow(kQ, -j) / r; }),
                                         ComplexMatrix::Zero(kJ, kJ), ComplexMatrix::Zero(kJ, kJ),
                                         diag_fock(kJ, [&](int j) { return qpow(kQ, j); }));
  CHECK(rel_err(Lt0, expect_t0) < 1e-14);
  CHECK_THROWS_AS(l_inverse(1.0, r, kQ, kJ), DomainError);
}

TEST_CASE("finite K-matrices") {
  const cplx xi{0.07, -0.03}, xt{0.11, 0.05};
  CHECK(rel_err(kV(1.0, xi), (xi - 1.0) * ComplexMatrix::Identity(2, 2)) == 0.0);
  const cplx z{0.6, 0.55};
  const ComplexMatrix K = kV(z, xi), Kt = ktV(z, xt, kQ);
  CHECK(rel(K(0, 0), xi * z * z - 1.0) < 1e-15);
  CHECK(rel(K(1, 1), xi - z * z) < 1e-15);
  CHECK(K(0, 1) == cplx(0.0));
  CHECK(rel(Kt(0, 0), kQ * kQ * xt * z * z - 1.0) < 1e-15);
  CHECK(rel(Kt(1, 1), xt - kQ * kQ * z * z) < 1e-15);

  // K~^V from K^V: f^V(z) K^V(qz)^{-1} at xi -> 1/xitilde equals xitilde * K~^V(z)
  const cplx fV = (kQ * kQ * xt * z * z - 1.0) * (kQ * kQ * z * z - xt);
  const ComplexMatrix from_k = fV * kV(kQ * z, 1.0 / xt).inverse();
  CHECK(rel_err(from_k, xt * Kt) < 1e-14);
}

TEST_CASE("dense K^W and K~^W") {
  const cplx xi{0.07, -0.03}, xt{0.11, 0.05}, r{0.9, 0.2}, z{0.5, 0.4};
  const int J = 8;
  const ComplexMatrix KW = kW_dense(z, r, xi, kQ, J);
  REQUIRE(KW.rows() == J);
  CHECK(rel_err(KW, kW_matrix(z, r, xi, kQ, J).materialize()) == 0.0);
  CHECK(KW.isDiagonal(0.0));
  const ComplexMatrix KtW = ktW_dense(z, r, xt, kQ, J);
  REQUIRE(KtW.rows() == J);
  CHECK(rel_err(KtW, ktW_matrix(z, r, xt, kQ, J).materialize()) == 0.0);
}

TEST_CASE("fusion intertwiners and splitting maps") {
  const cplx r{1.1, 0.3};
  const int J = kJ;
  const ComplexMatrix io = iota(r, kQ, J), ta = tau(r, kQ, J);
  REQUIRE(io.rows() == 2 * J);
  REQUIRE(io.cols() == J);
  // iota(w^0) = (q^{-1} - q) w^1 ⊗ v^0 + q r w^0 ⊗ v^1
  CHECK(rel(io(2 * 1 + 0, 0), 1.0 / kQ - kQ) < 1e-15);
  CHECK(rel(io(2 * 0 + 1, 0), kQ * r) < 1e-15);
  CHECK(io.col(0).norm() == doctest::Approx(std::hypot(std::abs(1.0 / kQ - kQ), std::abs(kQ * r))));
  CHECK(ta(0, 0) == cplx(1.0));
  for (int j = 0; j + 1 < J; ++j) {
    CHECK(rel(ta(j, 2 * j), qpow(kQ, j)) < 1e-15);
    CHECK(rel(ta(j + 1, 2 * j + 1), (qpow(kQ, j + 1) - qpow(kQ, -j - 1)) / r) < 1e-14);
  }

  const int keep = J - 1;
  const ComplexMatrix ti = ta * io;
  CHECK(ti.topLeftCorner(keep, keep).norm() < 1e-13);

  const ComplexMatrix ts = tau_section(kQ, J), ir = iota_retraction(r, kQ, J);
  const ComplexMatrix IW = ComplexMatrix::Identity(J, J);
  CHECK(rel_err((ta * ts).topLeftCorner(keep, keep), IW.topLeftCorner(keep, keep)) < 1e-14);
  CHECK(rel_err((ir * io).topLeftCorner(keep, keep), IW.topLeftCorner(keep, keep)) < 1e-12);
  CHECK((ir * ts).topLeftCorner(keep, keep).norm() < 1e-12);
  const ComplexMatrix split = io * ir + ts * ta;
  CHECK(rel_err(interior(split, J - 2), interior(ComplexMatrix::Identity(2 * J, 2 * J), J - 2)) < 1e-12);
}
