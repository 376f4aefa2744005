#include "qbaxter/chain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>

namespace qbaxter {

int bit_of(int index, int site, int n_sites) { return (index >> (n_sites - 1 - site)) & 1; }

int spin_count(int index) { return std::popcount(static_cast<unsigned>(index)); }

std::vector<SpinSector> spin_sectors(int n_sites) {
  std::vector<SpinSector> out(n_sites + 1);
  for (int m = 0; m <= n_sites; ++m) out[m].m_down = m;
  for (int i = 0; i < (1 << n_sites); ++i) out[spin_count(i)].basis.push_back(i);
  return out;
}

ComplexMatrix total_spin(int n_sites) {
  const int d = 1 << n_sites;
  ComplexMatrix s = ComplexMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) s(i, i) = n_sites - 2 * spin_count(i);
  return s;
}

ComplexMatrix diag_power(cplx u, int n_sites) {
  const int d = 1 << n_sites;
  ComplexMatrix s = ComplexMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) s(i, i) = qpow(u, n_sites - spin_count(i));
  return s;
}

bool in_exclusion_set(cplx z, const ChainParams& p) {
  const double delta = p.exclusion_radius;
  auto near = [&](cplx pt) { return std::abs(z - pt) < delta || std::abs(z + pt) < delta; };
  const cplx sxi = std::sqrt(p.xi);
  for (int i = 0; i < p.n_sites; ++i)
    if (near(qpow(p.q, i) * sxi)) return true;
  const cplx sxt = 1.0 / std::sqrt(p.xitilde);
  for (int k = 1; k <= p.cutoff; ++k) {
    const cplx pt = qpow(p.q, -k) * sxt;
    if (std::abs(pt) > std::abs(z) + delta + 1.0) break;
    if (near(pt)) return true;
  }
  return false;
}

ComplexMatrix monodromy_V_on(cplx z, const ChainParams& p, const SpaceShape& shape, int aux,
                             const std::vector<int>& sites) {
  const long d = shape.total();
  ComplexMatrix left = ComplexMatrix::Identity(d, d), right = ComplexMatrix::Identity(d, d);
  for (size_t n = 0; n < sites.size(); ++n) {
    left = left * embed(r_matrix(p.t[n] * z, p.q), aux, sites[n], shape);
    right = embed(r_matrix(z / p.t[n], p.q), aux, sites[n], shape) * right;
  }
  return left * embed1(kV(z, p.xi), aux, shape) * right;
}

ComplexMatrix monodromy_W_on(cplx z, cplx r, const ChainParams& p, int J, const SpaceShape& shape,
                             int aux, const std::vector<int>& sites) {
  const long d = shape.total();
  ComplexMatrix left = ComplexMatrix::Identity(d, d), right = ComplexMatrix::Identity(d, d);
  for (size_t n = 0; n < sites.size(); ++n) {
    left = left * embed(l_matrix(p.t[n] * z, r, p.q, J), aux, sites[n], shape);
    right = embed(l_matrix(z / p.t[n], r, p.q, J), aux, sites[n], shape) * right;
  }
  return left * embed1(kW_dense(z, r, p.xi, p.q, J), aux, shape) * right;
}

namespace {

SpaceShape chain_shape(int aux_dim, int n_sites) {
  std::vector<int> dims{aux_dim};
  for (int n = 0; n < n_sites; ++n) dims.push_back(2);
  return SpaceShape(dims);
}

std::vector<int> chain_sites(int n_sites, int offset) {
  std::vector<int> s(n_sites);
  for (int n = 0; n < n_sites; ++n) s[n] = n + offset;
  return s;
}

// Operator L_{a,site}(x, r) restricted to the charge-c sector of W ⊗ V^{⊗N};
// rows and columns are labelled by the spin configuration gamma, the Fock
// index being c - s(gamma).
ComplexMatrix sector_l(long c, int site, cplx x, cplx r, cplx q, int n_sites) {
  const int d = 1 << n_sites;
  const int mask = 1 << (n_sites - 1 - site);
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (int g = 0; g < d; ++g) {
    const long j = c - spin_count(g);
    if (j < 0) continue;
    const cplx qj = qpow(q, j);
    if ((g & mask) == 0) {
      out(g, g) = qj * r;
      if (j >= 1) out(g | mask, g) = -q * x * qj * r;
    } else {
      const cplx e = 1.0 - qpow(q, 2 * (j + 1)) * x * x;
      out(g, g) = e / qj;
      out(g & ~mask, g) = -x / (q * qj) * (1.0 - qpow(q, 2 * (j + 1)));
    }
  }
  return out;
}

class TailTracker {
public:
  TailTracker(double rho_bound, double target, int c_min)
      : rho_bound_(rho_bound), target_(target), c_min_(c_min) {}

  bool update(long c, double term, double scale) {
    bool ok = false;
    if (c >= c_min_ && prev_ >= 0.0) {
      double rho_emp = prev_ > 0.0 ? term / prev_ : (term == 0.0 ? 0.0 : 2.0);
      const double rho = std::max(rho_emp, rho_bound_);
      if (rho < 1.0) {
        bound_ = term * rho / (1.0 - rho);
        ok = bound_ <= target_ * std::max(1.0, scale);
      }
    }
    prev_ = term;
    passes_ = ok ? passes_ + 1 : 0;
    return passes_ >= 2;
  }

  double bound() const { return bound_; }

private:
  double rho_bound_, target_;
  int c_min_;
  double prev_ = -1.0;
  double bound_ = 0.0;
  int passes_ = 0;
};

double max_abs_same_spin(const ComplexMatrix& m) {
  double best = 0.0;
  for (Eigen::Index b = 0; b < m.rows(); ++b)
    for (Eigen::Index a = 0; a < m.cols(); ++a)
      if (spin_count(static_cast<int>(a)) == spin_count(static_cast<int>(b)))
        best = std::max(best, std::abs(m(b, a)));
  return best;
}

void ensure_finite(const ComplexMatrix& m, long c) {
  if (!all_finite(m))
    throw OverflowError("sector product left double range at charge " + std::to_string(c) +
                        "; lower the cutoff or move |q| away from 0");
}

}  // namespace

ComplexMatrix monodromy_V(cplx z, const ChainParams& p) {
  return monodromy_V_on(z, p, chain_shape(2, p.n_sites), 0, chain_sites(p.n_sites, 1));
}

ComplexMatrix monodromy_W(cplx z, cplx r, const ChainParams& p, int J) {
  return monodromy_W_on(z, r, p, J, chain_shape(J, p.n_sites), 0, chain_sites(p.n_sites, 1));
}

ComplexMatrix transfer_V(cplx z, const ChainParams& p) {
  const SpaceShape shape = chain_shape(2, p.n_sites);
  return partial_trace(embed1(ktV(z, p.xitilde, p.q), 0, shape) * monodromy_V(z, p), 0, shape);
}

TraceResult transfer_W_detail(cplx z, cplx r, const ChainParams& p, std::optional<int> cutoff,
                              bool fixed_terms) {
  p.validate();
  p.require_convergence_region();
  const int N = p.n_sites;
  const int d = 1 << N;
  const int J = cutoff.value_or(p.cutoff);
  const LogDiagonal kw = kW_diagonal(z, r, p.xi, p.q, J);
  const LogDiagonal kt = ktW_diagonal(z, r, p.xitilde, p.q, J);

  TraceResult res;
  res.value = ComplexMatrix::Zero(d, d);
  TailTracker tail(p.tail_ratio(), p.series_tol / 10.0, N + 2);
  ComplexMatrix contrib(d, d), weighted(d, d);
  for (long c = 0; c < J; ++c) {
    ComplexMatrix am = ComplexMatrix::Identity(d, d), ap = ComplexMatrix::Identity(d, d);
    for (int n = 0; n < N; ++n) {
      am = am * sector_l(c, n, p.t[n] * z, r, p.q, N);
      ap = sector_l(c, n, z / p.t[n], r, p.q, N) * ap;
    }
    // Pair Kt_{c - s(beta)} with K_{c - s(gamma)} before exponentiating.
    for (int b = 0; b < d; ++b) {
      const long jb = c - spin_count(b);
      for (int g = 0; g < d; ++g) {
        const long jg = c - spin_count(g);
        if (jb < 0 || jg < 0 || jg >= J || kt.phase[jb] == cplx(0) || kw.phase[jg] == cplx(0)) {
          weighted(b, g) = 0.0;
          continue;
        }
        const double lm = kt.log_mag[jb] + kw.log_mag[jg];
        weighted(b, g) = am(b, g) * (kt.phase[jb] * kw.phase[jg] * std::exp(lm));
      }
    }
    contrib.noalias() = weighted * ap;
    ensure_finite(contrib, c);
    for (int b = 0; b < d; ++b)
      for (int a = 0; a < d; ++a)
        if (spin_count(a) == spin_count(b)) res.value(b, a) += contrib(b, a);
    const bool done = tail.update(c, max_abs_same_spin(contrib), res.value.cwiseAbs().maxCoeff());
    if (fixed_terms ? c + 1 == J : done) {
      res.j_eff = static_cast<int>(c + 1);
      res.tail_bound = tail.bound();
      return res;
    }
  }
  throw ConvergenceError("tail certificate failed within Fock cutoff J = " + std::to_string(J) +
                         " (tail ratio " + std::to_string(p.tail_ratio()) + ")");
}

ComplexMatrix transfer_W(cplx z, const ChainParams& p) {
  return transfer_W_detail(z, 1.0, p).value;
}

ComplexMatrix q_operator(cplx z, const ChainParams& p) {
  return diag_power(z * z, p.n_sites) * transfer_W(z, p);
}

cplx p_plus(cplx z, const ChainParams& p) {
  const cplx z2 = z * z, q2 = p.q * p.q;
  cplx v = (1.0 - z2 * z2) * (p.xitilde - q2 * z2) * (p.xi - q2 * z2);
  for (cplx t : p.t) v *= (1.0 - t * t * z2) * (1.0 - z2 / (t * t));
  return v;
}

cplx p_minus(cplx z, const ChainParams& p) {
  const cplx z2 = z * z, q2 = p.q * p.q;
  cplx v = qpow(p.q, 2 * p.n_sites) * (1.0 - q2 * q2 * z2 * z2) * (1.0 - p.xitilde * z2) *
           (1.0 - p.xi * z2);
  for (cplx t : p.t) v *= (1.0 - q2 * t * t * z2) * (1.0 - q2 * z2 / (t * t));
  return v;
}

RecursionResult tW_diagonal_recursion(const std::vector<int>& alpha, const ChainParams& p) {
  if (static_cast<int>(alpha.size()) != p.n_sites)
    throw DimensionError("recursion: alpha length differs from n_sites");
  RecursionResult res;
  const cplx q2 = p.q * p.q;
  std::function<Poly(size_t, cplx)> rec = [&](size_t k, cplx xt) -> Poly {
    const int remaining = static_cast<int>(alpha.size() - k);
    if (std::abs(p.xi * xt) >= std::pow(std::abs(p.q), 2 * remaining))
      res.left_convergence_region = true;
    if (k == alpha.size()) {
      const cplx den = 1.0 - p.xi * xt;
      if (std::abs(den) < 1e-14) throw DomainError("recursion base case hits 1 - xi*xitilde = 0");
      return Poly{1.0 / den};
    }
    const cplx u = p.t[k];
    if (alpha[k] == 0) return rec(k + 1, q2 * xt);
    const Poly a = poly_mul(poly_mul(Poly{1.0, -q2 / xt}, Poly{1.0, -xt}), rec(k + 1, xt / q2));
    const cplx coef = q2 * (xt * u - 1.0 / u) * (u / xt - 1.0 / u);
    const Poly b = poly_mul(Poly{0.0, -coef}, rec(k + 1, xt));
    return poly_add(a, b);
  };
  res.poly = rec(0, p.xitilde);
  return res;
}

ComplexMatrix closed_monodromy_V(cplx z, const ChainParams& p) {
  const SpaceShape shape = chain_shape(2, p.n_sites);
  const long d = shape.total();
  ComplexMatrix m = ComplexMatrix::Identity(d, d);
  for (int n = 0; n < p.n_sites; ++n)
    m = embed(r_matrix(z / p.t[n], p.q), 0, n + 1, shape) * m;
  return m;
}

ComplexMatrix closed_transfer_V(cplx z, const ChainParams& p) {
  const SpaceShape shape = chain_shape(2, p.n_sites);
  ComplexMatrix tw = ComplexMatrix::Identity(2, 2);
  tw(1, 1) = p.zeta;
  return partial_trace(embed1(tw, 0, shape) * closed_monodromy_V(z, p), 0, shape);
}

TraceResult closed_transfer_W_detail(cplx z, const ChainParams& p, std::optional<int> cutoff,
                                     bool fixed_terms) {
  p.validate();
  p.require_closed_twist();
  const int N = p.n_sites;
  const int d = 1 << N;
  const int J = cutoff.value_or(p.cutoff);
  TraceResult res;
  res.value = ComplexMatrix::Zero(d, d);
  const double rho = std::abs(p.zeta) * std::pow(std::abs(p.q), -N);
  TailTracker tail(rho, p.series_tol / 10.0, N + 2);
  for (long c = 0; c < J; ++c) {
    ComplexMatrix m = ComplexMatrix::Identity(d, d);
    for (int n = 0; n < N; ++n) m = sector_l(c, n, z / p.t[n], 1.0, p.q, N) * m;
    ComplexMatrix contrib = ComplexMatrix::Zero(d, d);
    for (int b = 0; b < d; ++b) {
      const long jb = c - spin_count(b);
      if (jb < 0) continue;
      const cplx w = qpow(p.zeta, jb);
      for (int a = 0; a < d; ++a)
        if (spin_count(a) == spin_count(b)) contrib(b, a) = w * m(b, a);
    }
    ensure_finite(contrib, c);
    res.value += contrib;
    const bool done = tail.update(c, contrib.cwiseAbs().maxCoeff(), res.value.cwiseAbs().maxCoeff());
    if (fixed_terms ? c + 1 == J : done) {
      res.j_eff = static_cast<int>(c + 1);
      res.tail_bound = tail.bound();
      return res;
    }
  }
  throw ConvergenceError("closed-chain tail certificate failed within Fock cutoff J = " +
                         std::to_string(J));
}

ComplexMatrix closed_transfer_W(cplx z, const ChainParams& p) {
  return closed_transfer_W_detail(z, p).value;
}

ComplexMatrix closed_q(cplx z, const ChainParams& p) {
  return diag_power(z, p.n_sites) * closed_transfer_W(z, p);
}

cplx closed_p_plus(cplx z, const ChainParams& p) {
  cplx v = p.zeta;
  for (cplx t : p.t) v *= 1.0 - z * z / (t * t);
  return v;
}

cplx closed_p_minus(cplx z, const ChainParams& p) {
  cplx v = qpow(p.q, p.n_sites);
  for (cplx t : p.t) v *= 1.0 - p.q * p.q * z * z / (t * t);
  return v;
}

}  // namespace qbaxter
