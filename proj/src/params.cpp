#include "qbaxter/params.hpp"

#include <cmath>
#include <numbers>

namespace qbaxter {

void ChainParams::validate() const {
  const double aq = std::abs(q);
  if (!(aq > 0.0 && aq < 1.0)) throw ParameterError("|q| must lie strictly between 0 and 1");
  if (n_sites < 0) throw ParameterError("n_sites must be nonnegative");
  if (static_cast<int>(t.size()) != n_sites)
    throw ParameterError("number of inhomogeneities t differs from n_sites");
  for (cplx tn : t)
    if (tn == cplx(0)) throw ParameterError("inhomogeneities must be nonzero");
  if (xi == cplx(0) || xitilde == cplx(0))
    throw ParameterError("boundary parameters xi and xitilde must be nonzero");
  if (r == cplx(0)) throw ParameterError("r must be nonzero");
  if (cutoff < 2) throw ParameterError("Fock cutoff must be at least 2");
  if (!(tol > 0.0) || !(series_tol > 0.0)) throw ParameterError("tolerances must be positive");
}

bool ChainParams::in_convergence_region() const {
  return std::abs(xi * xitilde) < std::pow(std::abs(q), 2 * n_sites);
}

void ChainParams::require_convergence_region() const {
  if (!in_convergence_region())
    throw ParameterError("parameters violate the convergence region S^(N): need |xi*xitilde| < |q|^(2N) (|xi*xitilde| = " +
                         std::to_string(std::abs(xi * xitilde)) + ", |q|^(2N) = " +
                         std::to_string(std::pow(std::abs(q), 2 * n_sites)) + ")");
}

bool ChainParams::closed_twist_ok() const {
  return std::abs(zeta) < std::pow(std::abs(q), n_sites);
}

void ChainParams::require_closed_twist() const {
  if (!closed_twist_ok())
    throw ParameterError("closed-chain twist too large: need |zeta| < |q|^N");
}

double ChainParams::tail_ratio() const {
  return std::abs(xi * xitilde) * std::pow(std::abs(q), -2 * n_sites);
}

cplx random_annulus(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> mod(lo, hi), ph(0.0, 2.0 * std::numbers::pi);
  const double m = mod(rng);
  return std::polar(m, ph(rng));
}

ChainParams sample_generic_params(int n_sites, std::mt19937_64& rng, const SamplerOptions& opt) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ChainParams p;
  p.n_sites = n_sites;
  const double aq = opt.q_min + (opt.q_max - opt.q_min) * unit(rng);
  const double arg_q = opt.complex_q ? (unit(rng) - 0.5) * 0.6 : 0.0;
  p.q = std::polar(aq, arg_q);

  const double c = opt.c_min + (opt.c_max - opt.c_min) * unit(rng);
  const double prod = c * std::pow(aq, 2 * n_sites);
  const double split = std::exp(unit(rng) - 0.5);
  const double mxi = std::sqrt(prod) * split, mxt = std::sqrt(prod) / split;
  p.xi = std::polar(mxi, 2.0 * std::numbers::pi * unit(rng));
  p.xitilde = std::polar(mxt, 2.0 * std::numbers::pi * unit(rng));

  const double cz = opt.c_min + (opt.c_max - opt.c_min) * unit(rng);
  p.zeta = std::polar(cz * std::pow(aq, n_sites), 2.0 * std::numbers::pi * unit(rng));

  p.t.clear();
  for (int n = 0; n < n_sites; ++n) {
    const double m = 1.0 + opt.t_perturb * (2.0 * unit(rng) - 1.0);
    p.t.push_back(std::polar(m, 2.0 * std::numbers::pi * unit(rng)));
  }
  return p;
}

ChainParams ChainParams::with_sites(int n, std::mt19937_64& rng) const {
  ChainParams p = *this;
  p.n_sites = n;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (static_cast<int>(p.t.size()) < n)
    p.t.push_back(std::polar(1.0 + 0.1 * (2.0 * unit(rng) - 1.0), 2.0 * std::numbers::pi * unit(rng)));
  p.t.resize(n);
  return p;
}

}  // namespace qbaxter
