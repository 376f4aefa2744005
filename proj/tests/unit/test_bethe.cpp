#include <doctest.h>

#include "helpers.hpp"
#include "qbaxter/bethe.hpp"

using namespace qbaxter;
using qbt::rel;

namespace {

ChainParams generic(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_generic_params(n, rng);
}

double max_abs(const std::vector<cplx>& v) {
  double m = 0;
  for (cplx c : v) m = std::max(m, std::abs(c));
  return m;
}

int binom(int n, int k) {
  int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("psi is an involution with fixed points +-1/q") {
  const cplx q{0.6, 0.2}, Y{0.3, -1.1};
  CHECK(rel(psi(psi(Y, q), q), Y) < 1e-15);
  CHECK(rel(psi(1.0 / q, q), 1.0 / q) < 1e-15);
  CHECK(rel(psi(-1.0 / q, q), -1.0 / q) < 1e-15);
}

TEST_CASE("joint spectrum: one record per eigenvector, sectors of size C(N,M)") {
  for (int n : {1, 2, 3}) {
    const ChainParams p = generic(n, 200 + n);
    const auto recs = joint_spectrum(p);
    REQUIRE(static_cast<int>(recs.size()) == (1 << n));
    std::vector<int> count(n + 1, 0);
    for (const auto& r : recs) {
      ++count[r.sector];
      CHECK(r.tv_residual < 1e-8);
      CHECK(r.q_residual < 1e-8);
      CHECK(r.fit_error < 1e-8);
      CHECK(r.nodes.size() == r.tv_samples.size());
      CHECK(static_cast<int>(r.q_poly.size()) <= 2 * n + 1);
      CHECK_FALSE(r.closed);
    }
    for (int m = 0; m <= n; ++m) CHECK(count[m] == binom(n, m));
  }
}

TEST_CASE("Q-eigenvalue factorization and Bethe equations") {
  for (int n : {2, 3}) {
    const ChainParams p = generic(n, 300 + n);
    const auto recs = joint_spectrum(p);
    for (const auto& r : recs) {
      const BetheRootSet b = factorize_q_eigenvalue(r, p);
      INFO("N=" << n << " M=" << r.sector);
      CHECK(b.m_roots == r.sector);
      CHECK(b.pairing_error < 1e-6);
      CHECK(b.product_error < 1e-8);
      CHECK(b.reconstruction_error < 1e-8);
      for (int i = 0; i < b.m_roots; ++i) {
        CHECK(rel(b.partners[i], psi(b.y_squared[i], p.q)) < 1e-6);
        CHECK(std::abs(b.y_squared[i]) <= std::abs(b.partners[i]) * (1.0 + 1e-9));
      }
      // the factorized form reproduces the sampled eigenvalue
      for (std::size_t s = 0; s < r.nodes.size(); ++s) {
        const cplx Z = r.nodes[s] * r.nodes[s];
        CHECK(std::abs(q_eigenvalue_from_roots(Z, b, p) - r.q_samples[s]) <
              1e-8 * std::max(1.0, std::abs(r.q_samples[s])));
      }
      const auto rep = bethe_residual(b, p);
      CHECK(max_abs(rep.product_form) < 1e-6);
      CHECK(max_abs(rep.tq_form) < 1e-6);
      CHECK(rep.forms_mismatch < 1e-10);

      // algebraic Bethe ansatz oracle
      const auto y = b.roots();
      CHECK(max_abs(aba_bethe_residual(y, p)) < 1e-6);
      for (int s = 0; s < 3; ++s) {
        const cplx lam = r.tv_samples[s];
        CHECK(std::abs(aba_eigenvalue(r.nodes[s], y, p) - lam) < 1e-6 * std::max(1.0, std::abs(lam)));
      }
      if (b.m_roots <= 2) {
        const cplx z{0.61, 0.44};
        const ComplexVector v = aba_state(y, p);
        REQUIRE(v.norm() > 0);
        const double res = (transfer_V(z, p) * v - aba_eigenvalue(z, y, p) * v).norm() / v.norm();
        CHECK(res < 1e-5);
      }
    }
  }
}

TEST_CASE("ABA coefficients: closed forms of phi match their definitions") {
  const ChainParams p = generic(2, 401);
  for (cplx z : {cplx(0.5, 0.3), cplx(-0.8, 0.45)})
    for (cplx y : {cplx(0.7, -0.2), cplx(1.2, 0.6)}) {
      const AbaCoefficients c = aba_coefficients(z, y, p);
      const auto [pp, pm] = aba_phi_explicit(z, y, p);
      CHECK(rel(c.phi_plus, pp) < 1e-10);
      CHECK(rel(c.phi_minus, pm) < 1e-10);
    }
}

TEST_CASE("Bethe Jacobian matches finite differences") {
  const ChainParams p = generic(3, 402);
  const std::vector<cplx> Y = {{0.4, 0.3}, {-0.7, 0.5}};
  const ComplexMatrix Jac = bethe_jacobian(Y, p);
  const ComplexVector f0 = bethe_raw_residuals(Y, p);
  const double h = 1e-7;
  for (int k = 0; k < 2; ++k) {
    auto Yh = Y;
    Yh[k] += h;
    const ComplexVector fd = (bethe_raw_residuals(Yh, p) - f0) / h;
    CHECK((fd - Jac.col(k)).norm() < 1e-5 * std::max(1.0, Jac.col(k).norm()));
  }
}

TEST_CASE("Newton refinement recovers perturbed roots") {
  const ChainParams p = generic(3, 403);
  const auto recs = joint_spectrum(p);
  for (const auto& r : recs) {
    if (r.sector == 0) continue;
    const BetheRootSet b = factorize_q_eigenvalue(r, p);
    BetheRootSet pert = b;
    for (auto& Y : pert.y_squared) Y *= 1.0 + 1e-4;
    const NewtonResult nr = refine_bethe_newton(pert, p);
    CHECK(nr.converged);
    CHECK(nr.iterations <= 10);
    for (int i = 0; i < b.m_roots; ++i) CHECK(rel(nr.roots.y_squared[i], b.y_squared[i]) < 1e-8);
  }
}

TEST_CASE("closed chain spectrum and Bethe equations") {
  for (int n : {1, 2, 3}) {
    const ChainParams p = generic(n, 500 + n);
    const auto recs = closed_joint_spectrum(p);
    REQUIRE(static_cast<int>(recs.size()) == (1 << n));
    for (const auto& r : recs) {
      CHECK(r.closed);
      const BetheRootSet b = factorize_closed_q_eigenvalue(r, p);
      CHECK(b.m_roots == r.sector);
      CHECK(b.reconstruction_error < 1e-8);
      CHECK(max_abs(closed_bethe_residual(b, p)) < 1e-6);
      for (std::size_t s = 0; s < r.nodes.size(); ++s)
        CHECK(std::abs(closed_q_eigenvalue_from_roots(r.nodes[s], b, p) - r.q_samples[s]) <
              1e-8 * std::max(1.0, std::abs(r.q_samples[s])));
    }
  }
}
