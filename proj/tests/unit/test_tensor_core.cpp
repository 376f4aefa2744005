#include <doctest.h>

#include "helpers.hpp"
#include "qbaxter/lattice_ops.hpp"
#include "qbaxter/tensor_core.hpp"

using namespace qbaxter;
using qbt::random_matrix;

namespace {

// Brute-force multi-index oracle: digits of a flat index in a mixed radix.
std::vector<int> digits(long idx, const std::vector<int>& dims) {
  std::vector<int> d(dims.size());
  for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
    d[k] = static_cast<int>(idx % dims[k]);
    idx /= dims[k];
  }
  return d;
}

long flat(const std::vector<int>& d, const std::vector<int>& dims) {
  long idx = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) idx = idx * dims[k] + d[k];
  return idx;
}

ComplexMatrix embed_oracle(const ComplexMatrix& x, int m, int n, const std::vector<int>& dims) {
  long total = 1;
  for (int d : dims) total *= d;
  ComplexMatrix out = ComplexMatrix::Zero(total, total);
  for (long i = 0; i < total; ++i)
    for (long j = 0; j < total; ++j) {
      auto di = digits(i, dims), dj = digits(j, dims);
      bool rest_equal = true;
      for (std::size_t k = 0; k < dims.size(); ++k)
        if (int(k) != m && int(k) != n && di[k] != dj[k]) rest_equal = false;
      if (!rest_equal) continue;
      out(i, j) = x(di[m] * dims[n] + di[n], dj[m] * dims[n] + dj[n]);
    }
  return out;
}

}  // namespace

TEST_CASE("kron: identities, diagonal products, index formula") {
  CHECK(rel_err(kron(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2)),
                ComplexMatrix::Identity(4, 4)) == 0.0);

  const cplx z2{0.3, -1.2};
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = z2;
  ComplexMatrix expect = ComplexMatrix::Zero(4, 4);
  expect.diagonal() << 1.0, z2, z2, z2 * z2;
  CHECK(rel_err(kron(d, d), expect) == 0.0);

  std::mt19937_64 rng(1);
  const ComplexMatrix A = random_matrix(rng, 2, 3), B = random_matrix(rng, 3, 2);
  const ComplexMatrix K = kron(A, B);
  REQUIRE(K.rows() == 6);
  REQUIRE(K.cols() == 6);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 2; ++l) CHECK(K(i * 3 + k, j * 2 + l) == A(i, j) * B(k, l));
}

TEST_CASE("embed: identity, swap action, R21 convention") {
  CHECK(rel_err(embed(ComplexMatrix::Identity(4, 4), 0, 1, {2, 2, 2}), ComplexMatrix::Identity(8, 8)) ==
        0.0);

  const ComplexMatrix P = swap_p(2, 2);
  const ComplexMatrix P01 = embed(P, 0, 1, {2, 2});
  // v^0 ⊗ v^1 is index 1, v^1 ⊗ v^0 is index 2
  CHECK(P01(2, 1) == cplx(1.0));
  CHECK(P01.col(1).norm() == doctest::Approx(1.0));

  const cplx q{0.55, 0.12}, z{0.7, 0.4};
  const ComplexMatrix R = r_matrix(z, q);
  CHECK(rel_err(embed(R, 1, 0, {2, 2}), P * R * P) < 1e-15);
}

TEST_CASE("embed agrees with brute-force index contraction") {
  std::mt19937_64 rng(7);
  const std::vector<int> dims = {2, 3, 2};
  const SpaceShape shape{2, 3, 2};
  const std::vector<std::pair<int, int>> pairs = {{0, 1}, {1, 0}, {0, 2}, {2, 0}, {1, 2}, {2, 1}};
  for (auto [m, n] : pairs) {
    const ComplexMatrix x = random_matrix(rng, dims[m] * dims[n], dims[m] * dims[n]);
    CHECK(rel_err(embed(x, m, n, shape), embed_oracle(x, m, n, dims)) == 0.0);
  }
  // composition of two embeddings matches the oracle product
  const ComplexMatrix x = random_matrix(rng, 6, 6), y = random_matrix(rng, 4, 4);
  CHECK(rel_err(embed(x, 0, 1, shape) * embed(y, 2, 0, shape),
                embed_oracle(x, 0, 1, dims) * embed_oracle(y, 2, 0, dims)) < 1e-14);
}

TEST_CASE("embed rejects bad sites and dimensions") {
  CHECK_THROWS_AS(embed(ComplexMatrix::Identity(4, 4), 0, 0, {2, 2}), DimensionError);
  CHECK_THROWS_AS(embed(ComplexMatrix::Identity(4, 4), 0, 3, {2, 2}), DimensionError);
  CHECK_THROWS_AS(embed(ComplexMatrix::Identity(6, 6), 0, 1, {2, 2}), DimensionError);
  CHECK_THROWS_AS(embed1(ComplexMatrix::Identity(3, 3), 0, {2, 2}), DimensionError);
}

TEST_CASE("partial_trace") {
  std::mt19937_64 rng(3);
  CHECK(rel_err(partial_trace(ComplexMatrix::Identity(6, 6), 0, {3, 2}),
                3.0 * ComplexMatrix::Identity(2, 2)) == 0.0);
  CHECK(rel_err(partial_trace(ComplexMatrix::Identity(6, 6), 1, {3, 2}),
                2.0 * ComplexMatrix::Identity(3, 3)) == 0.0);

  const ComplexMatrix A = random_matrix(rng, 3, 3), B = random_matrix(rng, 2, 2);
  CHECK(rel_err(partial_trace(kron(A, B), 0, {3, 2}), A.trace() * B) < 1e-14);
  CHECK(rel_err(partial_trace(kron(A, B), 1, {3, 2}), B.trace() * A) < 1e-14);

  // tracing two factors one after the other against direct summation
  const std::vector<int> dims = {2, 3, 2};
  const ComplexMatrix X = random_matrix(rng, 12, 12);
  const ComplexMatrix step = partial_trace(partial_trace(X, 2, {2, 3, 2}), 0, {2, 3});
  ComplexMatrix direct = ComplexMatrix::Zero(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) direct(i, j) += X(flat({a, i, b}, dims), flat({a, j, b}, dims));
  CHECK(rel_err(step, direct) < 1e-14);

  // partial trace of an embedding over an untouched factor
  const ComplexMatrix x = random_matrix(rng, 4, 4);
  CHECK(rel_err(partial_trace(embed(x, 0, 2, {2, 3, 2}), 1, {2, 3, 2}), 3.0 * x) < 1e-14);

  CHECK_THROWS_AS(partial_trace(X, 5, {2, 3, 2}), DimensionError);
}

TEST_CASE("partial_transpose") {
  std::mt19937_64 rng(5);
  const ComplexMatrix A = random_matrix(rng, 3, 3), B = random_matrix(rng, 2, 2);
  const SpaceShape sh{3, 2};
  CHECK(rel_err(partial_transpose(kron(A, B), 1, sh), kron(A, B.transpose())) == 0.0);
  CHECK(rel_err(partial_transpose(kron(A, B), 0, sh), kron(A.transpose(), B)) == 0.0);

  const ComplexMatrix X = random_matrix(rng, 6, 6);
  CHECK(rel_err(partial_transpose(partial_transpose(X, 0, sh), 0, sh), X) == 0.0);

  // order reversal for operators supported on the transposed factor
  const ComplexMatrix a = embed1(random_matrix(rng, 2, 2), 1, sh);
  const ComplexMatrix b = embed1(random_matrix(rng, 2, 2), 1, sh);
  CHECK(rel_err(partial_transpose(a * b, 1, sh),
                partial_transpose(b, 1, sh) * partial_transpose(a, 1, sh)) < 1e-14);
}

TEST_CASE("swap_p") {
  const ComplexMatrix P = swap_p(2, 2);
  Eigen::VectorXcd v01 = Eigen::VectorXcd::Zero(4);
  v01(1) = 1.0;
  Eigen::VectorXcd v10 = Eigen::VectorXcd::Zero(4);
  v10(2) = 1.0;
  CHECK((P * v01 - v10).norm() == 0.0);
  CHECK(rel_err(P * P, ComplexMatrix::Identity(4, 4)) == 0.0);

  std::mt19937_64 rng(9);
  const ComplexMatrix A = random_matrix(rng, 3, 3), B = random_matrix(rng, 2, 2);
  CHECK(rel_err(swap_p(3, 2) * kron(A, B) * swap_p(2, 3), kron(B, A)) < 1e-15);
}

TEST_CASE("rel_err") {
  std::mt19937_64 rng(11);
  const ComplexMatrix A = random_matrix(rng, 4, 4) * 10.0, E = random_matrix(rng, 4, 4);
  CHECK(rel_err(A, A) == 0.0);
  CHECK(rel_err(ComplexMatrix::Zero(3, 3), ComplexMatrix::Zero(3, 3)) == 0.0);
  const double eps = 1e-7;
  const double expect = eps * E.norm() / std::max(A.norm(), (A + eps * E).norm());
  CHECK(rel_err(A, A + eps * E) == doctest::Approx(expect).epsilon(1e-9));
  // scale invariance once the norms exceed 1
  CHECK(rel_err(1e3 * A, 1e3 * (A + eps * E)) == doctest::Approx(rel_err(A, A + eps * E)).epsilon(1e-9));
  CHECK_THROWS_AS(rel_err(A, ComplexMatrix::Zero(3, 3)), DimensionError);
}

TEST_CASE("all_finite") {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  CHECK(all_finite(m));
  m(0, 1) = cplx(std::numeric_limits<double>::infinity(), 0.0);
  CHECK_FALSE(all_finite(m));
}
