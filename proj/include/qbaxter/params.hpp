#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qbaxter/tensor_core.hpp"

namespace qbaxter {

class ParameterError : public Error {
public:
  using Error::Error;
};

struct ChainParams {
  cplx q{0.5, 0.1};
  cplx xi{0.1, 0.0};
  cplx xitilde{0.1, 0.0};
  cplx zeta{0.05, 0.0};
  std::vector<cplx> t;
  cplx r{1.0, 0.0};
  int n_sites = 0;
  int cutoff = 400;            // Fock cutoff J for traced quantities
  double tol = 1e-8;           // default check tolerance
  double series_tol = 1e-15;   // tail target for traced series
  double exclusion_radius = 1e-3;

  // 0 < |q| < 1, n_sites = t.size(), nonzero t, J >= 2, xi and xitilde nonzero.
  void validate() const;
  // |xi xitilde| < |q|^{2N}
  bool in_convergence_region() const;
  void require_convergence_region() const;
  // |zeta| < |q|^N
  bool closed_twist_ok() const;
  void require_closed_twist() const;

  // Ratio governing the geometric tail of the open-chain trace.
  double tail_ratio() const;
  ChainParams with_sites(int n, std::mt19937_64& rng) const;
};

struct SamplerOptions {
  double q_min = 0.3;
  double q_max = 0.8;
  double c_min = 0.1;
  double c_max = 0.5;
  double t_perturb = 0.1;
  bool complex_q = true;
};

// Generic parameters inside the convergence region, as described in the README.
ChainParams sample_generic_params(int n_sites, std::mt19937_64& rng,
                                  const SamplerOptions& opt = {});

// Random point with modulus in [lo, hi] and uniform phase.
cplx random_annulus(std::mt19937_64& rng, double lo, double hi);

}  // namespace qbaxter
