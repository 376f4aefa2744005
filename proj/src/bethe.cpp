#include "qbaxter/bethe.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <tuple>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace qbaxter {

namespace {

cplx fa(cplx z, cplx q) { return 1.0 - q * q * z * z; }
cplx fb(cplx z, cplx q) { return q * (1.0 - z * z); }
cplx fc(cplx z, cplx q) { return z * (1.0 - q * q); }

struct NodePlan {
  std::vector<cplx> fit, held;  // spectral points z
  double scale = 1.0;           // radius of the polynomial variable
};

// Open chain: nodes on |Z| = 1/|q|, the circle separating each root from its psi partner.
NodePlan open_nodes(const ChainParams& p) {
  const int n = 2 * p.n_sites + 4;
  const double R = 1.0 / std::abs(p.q);
  for (int k = 0; k < 64; ++k) {
    const double phase = 0.07 + 0.011 * k;
    NodePlan plan;
    plan.scale = R;
    bool ok = true;
    for (cplx Z : circle_nodes(n, R, phase)) {
      plan.fit.push_back(std::sqrt(Z));
      ok = ok && !in_exclusion_set(plan.fit.back(), p);
    }
    for (cplx Z : circle_nodes(3, 0.8 * R, phase + 0.41)) {
      plan.held.push_back(std::sqrt(Z));
      ok = ok && !in_exclusion_set(plan.held.back(), p);
    }
    if (ok) return plan;
  }
  throw DomainError("no exclusion-clear node set for the spectrum fit");
}

NodePlan closed_nodes(const ChainParams& p) {
  NodePlan plan;
  plan.fit = circle_nodes(2 * p.n_sites + 4, 1.0, 0.07);
  plan.held = circle_nodes(3, 0.8, 0.48);
  return plan;
}

ComplexMatrix restrict(const ComplexMatrix& m, const std::vector<int>& basis) {
  const int k = static_cast<int>(basis.size());
  ComplexMatrix out(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) out(i, j) = m(basis[i], basis[j]);
  return out;
}

double min_gap(const ComplexVector& ev) {
  double g = INFINITY;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    for (Eigen::Index j = i + 1; j < ev.size(); ++j) g = std::min(g, std::abs(ev(i) - ev(j)));
  return g;
}

std::vector<SpectrumRecord> spectrum_impl(const ChainParams& p, const SpectrumOptions& opt,
                                          bool closed) {
  p.validate();
  const int N = p.n_sites;
  const std::function<ComplexMatrix(cplx)> tv = [&](cplx z) {
    return closed ? closed_transfer_V(z, p) : transfer_V(z, p);
  };
  const std::function<ComplexMatrix(cplx)> qop = [&](cplx z) {
    return closed ? closed_q(z, p) : q_operator(z, p);
  };
  const NodePlan plan = closed ? closed_nodes(p) : open_nodes(p);
  std::vector<ComplexMatrix> t_fit, q_fit, q_held;
  for (cplx z : plan.fit) {
    t_fit.push_back(tv(z));
    q_fit.push_back(qop(z));
  }
  for (cplx z : plan.held) q_held.push_back(qop(z));

  std::mt19937_64 rng(opt.seed ^ 0x5be7ULL);
  const ComplexMatrix probe = tv(opt.z_probe);
  std::vector<SpectrumRecord> out;
  for (const SpinSector& sec : spin_sectors(N)) {
    const int k = static_cast<int>(sec.basis.size());
    ComplexMatrix h = restrict(probe, sec.basis);
    const double hs = std::max(1.0, h.norm());
    Eigen::ComplexEigenSolver<ComplexMatrix> es(h);
    int attempt = 0;
    while (k > 1 && min_gap(es.eigenvalues()) < 1e3 * opt.tol * hs) {
      if (++attempt > 3)
        throw DegeneracyError("unresolved degeneracy in sector M=" + std::to_string(sec.m_down));
      // Break the tie with the Q-operator at another point.
      const cplx z2 = random_annulus(rng, 0.6, 1.1);
      if (!closed && in_exclusion_set(z2, p)) continue;
      const ComplexMatrix qs = restrict(qop(z2), sec.basis);
      const cplx mu = random_annulus(rng, 0.2, 0.5) * hs / std::max(1e-300, qs.norm());
      h = restrict(probe, sec.basis) + mu * qs;
      es.compute(h);
    }
    for (int e = 0; e < k; ++e) {
      ComplexVector small = es.eigenvectors().col(e);
      small.normalize();
      SpectrumRecord rec;
      rec.sector = sec.m_down;
      rec.closed = closed;
      rec.eigenvector = ComplexVector::Zero(1 << N);
      for (int i = 0; i < k; ++i) rec.eigenvector(sec.basis[i]) = small(i);
      const ComplexVector& v = rec.eigenvector;
      double qscale = 0.0;
      for (size_t n = 0; n < plan.fit.size(); ++n) {
        const ComplexVector tv_v = t_fit[n] * v, q_v = q_fit[n] * v;
        const cplx lt = v.dot(tv_v), lq = v.dot(q_v);
        rec.nodes.push_back(plan.fit[n]);
        rec.tv_samples.push_back(lt);
        rec.q_samples.push_back(lq);
        rec.tv_residual =
            std::max(rec.tv_residual, (tv_v - lt * v).norm() / std::max(1.0, t_fit[n].norm()));
        rec.q_residual =
            std::max(rec.q_residual, (q_v - lq * v).norm() / std::max(1.0, q_fit[n].norm()));
        qscale = std::max(qscale, std::abs(lq));
      }
      std::vector<cplx> x;
      for (cplx z : plan.fit) x.push_back(closed ? z : z * z);
      rec.q_poly = poly_fit(x, rec.q_samples, 2 * N, plan.scale);
      for (size_t h2 = 0; h2 < plan.held.size(); ++h2) {
        const cplx z = plan.held[h2];
        const cplx lq = v.dot(q_held[h2] * v);
        rec.held_nodes.push_back(z);
        rec.held_q.push_back(lq);
        rec.fit_error = std::max(rec.fit_error, std::abs(poly_eval(rec.q_poly, closed ? z : z * z) - lq) /
                                                    std::max(1e-300, qscale));
      }
      rec.q_const = rec.q_poly[N + rec.sector];
      out.push_back(std::move(rec));
    }
  }
  return out;
}

double poly_scale_norm(const Poly& c, double R) {
  double s = 0.0;
  for (size_t k = 0; k < c.size(); ++k) s = std::max(s, std::abs(c[k]) * std::pow(R, double(k)));
  return s;
}

// Perfect matching of the roots into psi-orbits minimizing the worst distance.
double best_matching(const std::vector<cplx>& roots, cplx q, std::vector<int>& mate) {
  const int n = static_cast<int>(roots.size());
  auto dist = [&](int a, int b) {
    const cplx pa = psi(roots[a], q);
    return std::abs(roots[b] - pa) / std::abs(pa);
  };
  double best = INFINITY;
  std::vector<int> cur(n, -1);
  std::function<void(double)> go = [&](double worst) {
    if (worst >= best) return;
    int a = 0;
    while (a < n && cur[a] >= 0) ++a;
    if (a == n) {
      best = worst;
      mate = cur;
      return;
    }
    for (int b = a + 1; b < n; ++b) {
      if (cur[b] >= 0) continue;
      cur[a] = b;
      cur[b] = a;
      go(std::max(worst, dist(a, b)));
      cur[a] = cur[b] = -1;
    }
  };
  go(0.0);
  return best;
}

double greedy_matching(const std::vector<cplx>& roots, cplx q, std::vector<int>& mate) {
  const int n = static_cast<int>(roots.size());
  mate.assign(n, -1);
  double worst = 0.0;
  for (int a = 0; a < n; ++a) {
    if (mate[a] >= 0) continue;
    const cplx pa = psi(roots[a], q);
    int pick = -1;
    double d = INFINITY;
    for (int b = a + 1; b < n; ++b) {
      if (mate[b] >= 0) continue;
      const double e = std::abs(roots[b] - pa) / std::abs(pa);
      if (e < d) {
        d = e;
        pick = b;
      }
    }
    if (pick < 0) return INFINITY;
    mate[a] = pick;
    mate[pick] = a;
    worst = std::max(worst, d);
  }
  return worst;
}

// A factor of a Bethe-equation side together with its partial derivatives.
struct Factor {
  cplx v;
  std::vector<std::pair<int, cplx>> d;
};

cplx product_grad(const std::vector<Factor>& fs, int nvars, std::vector<cplx>* grad) {
  const size_t n = fs.size();
  std::vector<cplx> pre(n + 1, 1.0), suf(n + 1, 1.0);
  for (size_t k = 0; k < n; ++k) pre[k + 1] = pre[k] * fs[k].v;
  for (size_t k = n; k-- > 0;) suf[k] = suf[k + 1] * fs[k].v;
  if (grad) {
    grad->assign(nvars, 0.0);
    for (size_t k = 0; k < n; ++k)
      for (const auto& [var, dv] : fs[k].d) (*grad)[var] += dv * pre[k] * suf[k + 1];
  }
  return pre[n];
}

void side_factors(const std::vector<cplx>& Y, int i, const ChainParams& p, std::vector<Factor>& lhs,
                  std::vector<Factor>& rhs) {
  const cplx q = p.q, q2 = q * q, xi = p.xi, xt = p.xitilde, yi = Y[i];
  const int N = p.n_sites, M = static_cast<int>(Y.size());
  lhs = {{1.0 - xt * yi, {{i, -xt}}}, {1.0 - xi * yi, {{i, -xi}}}};
  rhs = {{qpow(q, 2 * (N - M)), {}}, {xt - q2 * yi, {{i, -q2}}}, {xi - q2 * yi, {{i, -q2}}}};
  for (cplx t : p.t) {
    const cplx t2 = t * t;
    lhs.push_back({1.0 - q2 * yi * t2, {{i, -q2 * t2}}});
    lhs.push_back({1.0 - q2 * yi / t2, {{i, -q2 / t2}}});
    rhs.push_back({1.0 - yi * t2, {{i, -t2}}});
    rhs.push_back({1.0 - yi / t2, {{i, -1.0 / t2}}});
  }
  for (int j = 0; j < M; ++j) {
    if (j == i) continue;
    const cplx yj = Y[j];
    lhs.push_back({1.0 - yi / (q2 * yj), {{i, -1.0 / (q2 * yj)}, {j, yi / (q2 * yj * yj)}}});
    lhs.push_back({1.0 - yi * yj, {{i, -yj}, {j, -yi}}});
    rhs.push_back({1.0 - q2 * yi / yj, {{i, -q2 / yj}, {j, q2 * yi / (yj * yj)}}});
    rhs.push_back({1.0 / q2 - q2 * yi * yj, {{i, -q2 * yj}, {j, -q2 * yi}}});
  }
}

double normalized(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

double max_normalized_residual(const std::vector<cplx>& Y, const ChainParams& p) {
  double r = 0.0;
  for (int i = 0; i < static_cast<int>(Y.size()); ++i) {
    const auto [l, rr] = bethe_sides(Y, i, p);
    r = std::max(r, normalized(l, rr));
  }
  return r;
}

}  // namespace

std::vector<SpectrumRecord> joint_spectrum(const ChainParams& p, const SpectrumOptions& opt) {
  p.require_convergence_region();
  return spectrum_impl(p, opt, false);
}

std::vector<SpectrumRecord> closed_joint_spectrum(const ChainParams& p, const SpectrumOptions& opt) {
  p.require_closed_twist();
  return spectrum_impl(p, opt, true);
}

std::vector<cplx> BetheRootSet::roots() const {
  std::vector<cplx> y;
  for (cplx Y : y_squared) y.push_back(std::sqrt(Y));
  return y;
}

cplx psi(cplx Y, cplx q) { return 1.0 / (q * q * Y); }

cplx q_eigenvalue_from_roots(cplx Z, const BetheRootSet& r, const ChainParams& p) {
  cplx v = r.f * qpow(Z, p.n_sites - r.m_roots);
  for (cplx Y : r.y_squared) v *= (Z - Y) * (Z - psi(Y, p.q));
  return v;
}

cplx closed_q_eigenvalue_from_roots(cplx z, const BetheRootSet& r, const ChainParams& p) {
  cplx v = r.f * qpow(z, p.n_sites - r.m_roots);
  for (cplx Y : r.y_squared) v *= (z * z - Y);
  return v;
}

BetheRootSet factorize_q_eigenvalue(const SpectrumRecord& rec, const ChainParams& p,
                                    double pairing_tol) {
  if (rec.closed) throw DomainError("open factorization applied to a closed-chain record");
  const int N = p.n_sites, M = rec.sector;
  const double R = 1.0 / std::abs(p.q);
  const Poly& c = rec.q_poly;
  BetheRootSet out;
  out.m_roots = M;
  out.f = c[N + M];
  const double s = poly_scale_norm(c, R);
  for (int k = 0; k <= 2 * N; ++k)
    if (k < N - M || k > N + M)
      out.deflation_error = std::max(out.deflation_error, std::abs(c[k]) * std::pow(R, k) / s);
  if (M > 0) {
    const Poly core(c.begin() + (N - M), c.begin() + (N + M) + 1);
    const std::vector<cplx> roots = poly_roots(core);
    std::vector<int> mate;
    double err = greedy_matching(roots, p.q, mate);
    if (!(err < pairing_tol)) err = best_matching(roots, p.q, mate);
    out.pairing_error = err;
    if (!(err < pairing_tol))
      throw PairingError("psi-pairing of Q-eigenvalue roots failed (worst distance " +
                         std::to_string(err) + ")");
    cplx prod = 1.0;
    for (cplx Y : roots) prod *= Y;
    out.product_error = std::abs(prod * qpow(p.q, 2 * M) - 1.0);
    const cplx fixed = 1.0 / p.q;
    for (int a = 0; a < 2 * M; ++a) {
      const int b = mate[a];
      if (b < a) continue;
      const bool keep_a = std::abs(roots[a]) <= std::abs(roots[b]);
      out.y_squared.push_back(keep_a ? roots[a] : roots[b]);
      out.partners.push_back(keep_a ? roots[b] : roots[a]);
      const cplx y = out.y_squared.back();
      if (std::min(std::abs(y - fixed), std::abs(y + fixed)) < 1e-4 * std::abs(fixed))
        out.degenerate = true;
    }
  }
  double qs = 0.0;
  for (cplx v : rec.q_samples) qs = std::max(qs, std::abs(v));
  for (size_t n = 0; n < rec.nodes.size(); ++n) {
    const cplx Z = rec.nodes[n] * rec.nodes[n];
    out.reconstruction_error = std::max(
        out.reconstruction_error, std::abs(q_eigenvalue_from_roots(Z, out, p) - rec.q_samples[n]) / qs);
  }
  for (size_t n = 0; n < rec.held_nodes.size(); ++n) {
    const cplx Z = rec.held_nodes[n] * rec.held_nodes[n];
    out.reconstruction_error = std::max(
        out.reconstruction_error, std::abs(q_eigenvalue_from_roots(Z, out, p) - rec.held_q[n]) / qs);
  }
  out.residuals = bethe_residual(out, p).product_form;
  return out;
}

BetheRootSet factorize_closed_q_eigenvalue(const SpectrumRecord& rec, const ChainParams& p) {
  if (!rec.closed) throw DomainError("closed factorization applied to an open-chain record");
  const int N = p.n_sites, M = rec.sector;
  const Poly& c = rec.q_poly;
  BetheRootSet out;
  out.m_roots = M;
  out.f = c[N + M];
  const double s = poly_scale_norm(c, 1.0);
  Poly core;
  for (int k = 0; k <= 2 * N; ++k) {
    const int off = k - (N - M);
    if (off >= 0 && off <= 2 * M && off % 2 == 0)
      core.push_back(c[k]);
    else
      out.deflation_error = std::max(out.deflation_error, std::abs(c[k]) / s);
  }
  if (M > 0) out.y_squared = poly_roots(core);
  double qs = 0.0;
  for (cplx v : rec.q_samples) qs = std::max(qs, std::abs(v));
  for (size_t n = 0; n < rec.nodes.size(); ++n)
    out.reconstruction_error =
        std::max(out.reconstruction_error,
                 std::abs(closed_q_eigenvalue_from_roots(rec.nodes[n], out, p) - rec.q_samples[n]) / qs);
  for (size_t n = 0; n < rec.held_nodes.size(); ++n)
    out.reconstruction_error =
        std::max(out.reconstruction_error,
                 std::abs(closed_q_eigenvalue_from_roots(rec.held_nodes[n], out, p) - rec.held_q[n]) / qs);
  out.residuals = closed_bethe_residual(out, p);
  return out;
}

std::pair<cplx, cplx> bethe_sides(const std::vector<cplx>& Y, int i, const ChainParams& p) {
  std::vector<Factor> lhs, rhs;
  side_factors(Y, i, p, lhs, rhs);
  return {product_grad(lhs, 0, nullptr), product_grad(rhs, 0, nullptr)};
}

BetheResidualReport bethe_residual(const BetheRootSet& roots, const ChainParams& p) {
  BetheResidualReport rep;
  const cplx q = p.q;
  const int N = p.n_sites, M = roots.m_roots;
  for (int i = 0; i < M; ++i) {
    const cplx Y = roots.y_squared[i];
    if (Y == cplx(0)) throw DomainError("zero Bethe root");
    const auto [l, r] = bethe_sides(roots.y_squared, i, p);
    rep.product_form.push_back((l - r) / std::max(std::abs(l), std::abs(r)));
    const cplx y = std::sqrt(Y);
    const cplx a = p_plus(y, p) * q_eigenvalue_from_roots(q * q * Y, roots, p);
    const cplx b = p_minus(y, p) * q_eigenvalue_from_roots(Y / (q * q), roots, p);
    const double ab = std::max(std::abs(a), std::abs(b));
    if (ab == 0.0) throw DomainError("Bethe root at a zero of p_+ and p_-");
    rep.tq_form.push_back((a + b) / ab);
    const cplx pref = -(1.0 - q * q) / (q * q) * roots.f * qpow(Y, N - M) * (1.0 - Y * Y) *
                      (1.0 - q * q * q * q * Y * Y);
    const double scale = std::max(ab, std::abs(pref) * std::max(std::abs(l), std::abs(r)));
    rep.forms_mismatch = std::max(rep.forms_mismatch, std::abs((a + b) - pref * (l - r)) / scale);
  }
  return rep;
}

std::vector<cplx> closed_bethe_residual(const BetheRootSet& roots, const ChainParams& p) {
  const cplx q = p.q, q2 = q * q;
  std::vector<cplx> out;
  for (int i = 0; i < roots.m_roots; ++i) {
    const cplx Y = roots.y_squared[i];
    cplx l = 1.0, r = qpow(q, p.n_sites) * p.zeta;
    for (cplx t : p.t) {
      l *= 1.0 - q2 * Y / (t * t);
      r *= 1.0 - Y / (t * t);
    }
    for (int j = 0; j < roots.m_roots; ++j) {
      if (j == i) continue;
      const cplx Yj = roots.y_squared[j];
      l *= q2 - Y / Yj;
      r *= 1.0 - q2 * Y / Yj;
    }
    out.push_back((l - r) / std::max(std::abs(l), std::abs(r)));
  }
  return out;
}

AbaBlocks aba_blocks(cplx z, const ChainParams& p) {
  const ComplexMatrix m = monodromy_V(z, p);
  const long d = 1L << p.n_sites;
  return {m.block(0, 0, d, d), m.block(0, d, d, d), m.block(d, 0, d, d), m.block(d, d, d, d)};
}

cplx aba_f(cplx z, cplx q) {
  const cplx den = q * q * z * z * z * z - 1.0;
  if (std::abs(den) < 1e-14) throw DomainError("f(z) has a pole at z^4 = q^-2");
  return z * z * (1.0 - q * q) / den;
}

ComplexMatrix aba_dtilde(cplx z, const ChainParams& p) {
  const AbaBlocks b = aba_blocks(z, p);
  return b.D + aba_f(z, p.q) * b.A;
}

std::pair<cplx, cplx> aba_delta(cplx z, const ChainParams& p) {
  const cplx q = p.q;
  cplx dp = p.xi * z * z - 1.0;
  cplx dm = (p.xi - z * z) + aba_f(z, q) * (p.xi * z * z - 1.0);
  for (cplx t : p.t) {
    dp *= fa(z / t, q) * fa(z * t, q);
    dm *= fb(z / t, q) * fb(z * t, q);
  }
  return {dp, dm};
}

AbaCoefficients aba_coefficients(cplx z, cplx y, const ChainParams& p) {
  const cplx q = p.q;
  const cplx a_yz = fa(y * z, q), b_yz = fb(y * z, q), c_yz = fc(y * z, q);
  const cplx a_ydz = fa(y / z, q), b_ydz = fb(y / z, q), c_ydz = fc(y / z, q);
  const cplx a_zdy = fa(z / y, q), b_zdy = fb(z / y, q), c_zdy = fc(z / y, q);
  const cplx fz = aba_f(z, q), fy = aba_f(y, q);
  AbaCoefficients k;
  k.alpha1 = a_ydz * b_yz / (b_ydz * a_yz);
  const cplx alpha2 = -c_ydz * b_yz / (b_ydz * a_yz);
  k.alpha4 = -c_yz / a_yz;
  const cplx w = a_yz * a_yz - c_yz * c_yz;
  k.beta1 = w * a_zdy / (a_yz * b_yz * b_zdy);
  const cplx beta2 = -w * c_zdy / (a_yz * b_yz * b_zdy);
  const cplx beta4 = c_yz / (b_ydz * a_yz * b_zdy * b_zdy) *
                     (c_ydz * c_zdy * b_zdy + b_ydz * a_zdy * a_zdy);
  k.alpha2t = alpha2 - k.alpha4 * fy;
  k.beta2t = beta2 + k.alpha4 * fz;
  k.beta4t = beta4 - beta2 * fy + k.alpha2t * fz;
  const ComplexMatrix kt = ktV(z, p.xitilde, q);
  k.gamma_plus = kt(0, 0) - fz * kt(1, 1);
  k.gamma_minus = kt(1, 1);
  k.phi_plus = k.gamma_plus * k.alpha2t + k.gamma_minus * k.beta4t;
  k.phi_minus = k.gamma_plus * k.alpha4 + k.gamma_minus * k.beta2t;
  std::tie(k.delta_plus, k.delta_minus) = aba_delta(z, p);
  return k;
}

std::pair<cplx, cplx> aba_phi_explicit(cplx z, cplx y, const ChainParams& p) {
  const cplx q = p.q, q2 = q * q, y2 = y * y, z2 = z * z;
  const cplx g = (q2 - 1.0) * y * z * (1.0 - q2 * q2 * z2 * z2) / ((y2 - z2) * (1.0 - q2 * y2 * z2));
  return {g * (1.0 - y2 * y2) / (1.0 - q2 * y2 * y2) * (1.0 - p.xitilde * y2),
          g * (p.xitilde / q2 - y2)};
}

ComplexVector aba_state(const std::vector<cplx>& y, const ChainParams& p) {
  const long d = 1L << p.n_sites;
  if (static_cast<int>(y.size()) > p.n_sites) throw DomainError("more Bethe roots than sites");
  ComplexVector v = ComplexVector::Zero(d);
  v(0) = 1.0;
  for (auto it = y.rbegin(); it != y.rend(); ++it) v = aba_blocks(*it, p).B * v;
  return v;
}

cplx aba_eigenvalue(cplx z, const std::vector<cplx>& y, const ChainParams& p) {
  const auto [dp, dm] = aba_delta(z, p);
  cplx pa = 1.0, pb = 1.0;
  for (cplx yj : y) {
    const AbaCoefficients k = aba_coefficients(z, yj, p);
    pa *= k.alpha1;
    pb *= k.beta1;
  }
  const AbaCoefficients k0 = aba_coefficients(z, y.empty() ? cplx(0.5, 0.5) : y[0], p);
  return k0.gamma_plus * pa * dp + k0.gamma_minus * pb * dm;
}

std::vector<cplx> aba_bethe_residual(const std::vector<cplx>& y, const ChainParams& p, cplx z_aux) {
  std::vector<cplx> out;
  for (size_t i = 0; i < y.size(); ++i) {
    const AbaCoefficients k = aba_coefficients(z_aux, y[i], p);
    const auto [dp, dm] = aba_delta(y[i], p);
    cplx pa = 1.0, pb = 1.0;
    for (size_t j = 0; j < y.size(); ++j) {
      if (j == i) continue;
      const AbaCoefficients kij = aba_coefficients(y[i], y[j], p);
      pa *= kij.alpha1;
      pb *= kij.beta1;
    }
    const cplx t1 = k.phi_plus * dp * pa, t2 = k.phi_minus * dm * pb;
    out.push_back((t1 + t2) / std::max(std::abs(t1), std::abs(t2)));
  }
  return out;
}

ComplexVector bethe_raw_residuals(const std::vector<cplx>& Y, const ChainParams& p) {
  ComplexVector f(Y.size());
  for (int i = 0; i < static_cast<int>(Y.size()); ++i) {
    const auto [l, r] = bethe_sides(Y, i, p);
    f(i) = l - r;
  }
  return f;
}

ComplexMatrix bethe_jacobian(const std::vector<cplx>& Y, const ChainParams& p) {
  const int M = static_cast<int>(Y.size());
  ComplexMatrix jac(M, M);
  std::vector<Factor> lhs, rhs;
  std::vector<cplx> gl, gr;
  for (int i = 0; i < M; ++i) {
    side_factors(Y, i, p, lhs, rhs);
    product_grad(lhs, M, &gl);
    product_grad(rhs, M, &gr);
    for (int k = 0; k < M; ++k) jac(i, k) = gl[k] - gr[k];
  }
  return jac;
}

NewtonResult refine_bethe_newton(const BetheRootSet& seed, const ChainParams& p, int max_iter) {
  NewtonResult res;
  res.roots = seed;
  std::vector<cplx> Y = seed.y_squared;
  res.residual = Y.empty() ? 0.0 : max_normalized_residual(Y, p);
  while (res.residual >= 1e-12 && res.iterations < max_iter) {
    const ComplexVector f = bethe_raw_residuals(Y, p);
    Eigen::FullPivLU<ComplexMatrix> lu(bethe_jacobian(Y, p));
    if (lu.rank() < static_cast<Eigen::Index>(Y.size()))
      throw DomainError("singular Bethe Jacobian");
    const ComplexVector step = lu.solve(-f);
    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h < 30 && !accepted; ++h, lambda *= 0.5) {
      std::vector<cplx> trial = Y;
      for (size_t j = 0; j < Y.size(); ++j) trial[j] += lambda * step(static_cast<Eigen::Index>(j));
      if (bethe_raw_residuals(trial, p).norm() < f.norm()) {
        Y = trial;
        accepted = true;
      }
    }
    if (!accepted) break;
    ++res.iterations;
    res.residual = max_normalized_residual(Y, p);
  }
  res.converged = res.residual < 1e-12;
  res.roots.y_squared = Y;
  res.roots.partners.clear();
  for (cplx y : Y) res.roots.partners.push_back(psi(y, p.q));
  res.roots.residuals = bethe_residual(res.roots, p).product_form;
  return res;
}

}  // namespace qbaxter
