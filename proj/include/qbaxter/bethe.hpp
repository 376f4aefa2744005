#pragma once

#include <cstdint>
#include <vector>

#include "qbaxter/chain.hpp"

namespace qbaxter {

class PairingError : public Error {
 public:
  using Error::Error;
};

class DegeneracyError : public Error {
 public:
  using Error::Error;
};

// One joint eigenvector of the commuting family. For the open chain the
// polynomial variable of q_poly is Z = z^2; for the closed chain it is z.
struct SpectrumRecord {
  int sector = 0;  // M, the number of v^1 factors
  bool closed = false;
  ComplexVector eigenvector;
  std::vector<cplx> nodes;  // spectral points z
  std::vector<cplx> tv_samples;
  std::vector<cplx> q_samples;
  std::vector<cplx> held_nodes;
  std::vector<cplx> held_q;
  Poly q_poly;
  cplx q_const = 0.0;      // leading coefficient of the deflated polynomial
  double fit_error = 0.0;  // held-out deviation relative to the sample scale
  double tv_residual = 0.0;
  double q_residual = 0.0;
};

struct SpectrumOptions {
  std::uint64_t seed = 0;
  double tol = 1e-8;
  cplx z_probe = {0.83, 0.29};
};

std::vector<SpectrumRecord> joint_spectrum(const ChainParams& p, const SpectrumOptions& opt = {});
std::vector<SpectrumRecord> closed_joint_spectrum(const ChainParams& p,
                                                  const SpectrumOptions& opt = {});

struct BetheRootSet {
  int m_roots = 0;
  cplx f = 0.0;
  std::vector<cplx> y_squared;  // one representative per psi-orbit (open) or all roots (closed)
  std::vector<cplx> partners;   // psi partners as found among the polynomial roots (open only)
  double pairing_error = 0.0;
  double product_error = 0.0;   // |prod of all 2M roots * q^{2M} - 1|
  double reconstruction_error = 0.0;
  double deflation_error = 0.0;  // size of the coefficients that must vanish
  bool degenerate = false;       // a root sits near a psi-fixed point
  std::vector<cplx> residuals;

  std::vector<cplx> roots() const;  // y_j = sqrt(y_j^2), principal branch
};

cplx psi(cplx Y, cplx q);

// Rebuilds f Z^{N-M} prod (Z - Y_j)(Z - psi(Y_j)) at Z.
cplx q_eigenvalue_from_roots(cplx Z, const BetheRootSet& roots, const ChainParams& p);
cplx closed_q_eigenvalue_from_roots(cplx z, const BetheRootSet& roots, const ChainParams& p);

BetheRootSet factorize_q_eigenvalue(const SpectrumRecord& rec, const ChainParams& p,
                                    double pairing_tol = 1e-6);
BetheRootSet factorize_closed_q_eigenvalue(const SpectrumRecord& rec, const ChainParams& p);

struct BetheResidualReport {
  std::vector<cplx> product_form;  // (LHS - RHS) / max(|LHS|, |RHS|) of the product form
  std::vector<cplx> tq_form;       // p_+ Q(qy) + p_- Q(y/q), normalized by the larger term
  double forms_mismatch = 0.0;     // mismatch of the exact proportionality between the two
};

BetheResidualReport bethe_residual(const BetheRootSet& roots, const ChainParams& p);
std::vector<cplx> closed_bethe_residual(const BetheRootSet& roots, const ChainParams& p);

// Unnormalized sides of the product-form Bethe equation for root i.
std::pair<cplx, cplx> bethe_sides(const std::vector<cplx>& Y, int i, const ChainParams& p);

// Algebraic Bethe ansatz oracle.
struct AbaBlocks {
  ComplexMatrix A, B, C, D;
};

struct AbaCoefficients {
  cplx alpha1, alpha2t, alpha4, beta1, beta2t, beta4t;
  cplx phi_plus, phi_minus, gamma_plus, gamma_minus, delta_plus, delta_minus;
};

AbaBlocks aba_blocks(cplx z, const ChainParams& p);
cplx aba_f(cplx z, cplx q);
ComplexMatrix aba_dtilde(cplx z, const ChainParams& p);
AbaCoefficients aba_coefficients(cplx z, cplx y, const ChainParams& p);
// phi_+ and phi_- from their closed forms.
std::pair<cplx, cplx> aba_phi_explicit(cplx z, cplx y, const ChainParams& p);
std::pair<cplx, cplx> aba_delta(cplx z, const ChainParams& p);

ComplexVector aba_state(const std::vector<cplx>& y, const ChainParams& p);
cplx aba_eigenvalue(cplx z, const std::vector<cplx>& y, const ChainParams& p);
std::vector<cplx> aba_bethe_residual(const std::vector<cplx>& y, const ChainParams& p,
                                     cplx z_aux = {0.71, 0.37});

struct NewtonResult {
  BetheRootSet roots;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Damped Newton on the product-form equations in the variables Y_j = y_j^2.
NewtonResult refine_bethe_newton(const BetheRootSet& seed, const ChainParams& p, int max_iter = 50);

// Analytic Jacobian of the unnormalized residuals LHS_i - RHS_i.
ComplexMatrix bethe_jacobian(const std::vector<cplx>& Y, const ChainParams& p);
ComplexVector bethe_raw_residuals(const std::vector<cplx>& Y, const ChainParams& p);

}  // namespace qbaxter
