#pragma once

#include <optional>
#include <vector>

#include "qbaxter/lattice_ops.hpp"
#include "qbaxter/params.hpp"
#include "qbaxter/polynomial.hpp"

namespace qbaxter {

// Basis index of V^{⊗N}: sum_k alpha_k 2^{N-1-k}, site 0 slowest.
int bit_of(int index, int site, int n_sites);
int spin_count(int index);  // number of v^1 factors

struct SpinSector {
  int m_down = 0;
  std::vector<int> basis;
};

std::vector<SpinSector> spin_sectors(int n_sites);
ComplexMatrix total_spin(int n_sites);
// diag(u, 1)^{⊗N}
ComplexMatrix diag_power(cplx u, int n_sites);

bool in_exclusion_set(cplx z, const ChainParams& p);

// Monodromies placed inside a larger tensor product: the auxiliary space sits
// at `aux`, quantum site n at sites[n].
ComplexMatrix monodromy_V_on(cplx z, const ChainParams& p, const SpaceShape& shape, int aux,
                             const std::vector<int>& sites);
ComplexMatrix monodromy_W_on(cplx z, cplx r, const ChainParams& p, int J, const SpaceShape& shape,
                             int aux, const std::vector<int>& sites);

ComplexMatrix monodromy_V(cplx z, const ChainParams& p);
// Dense truncated monodromy on W_J ⊗ V^{⊗N}; K^W is materialized, so J must
// stay in the range where its entries fit in double precision.
ComplexMatrix monodromy_W(cplx z, cplx r, const ChainParams& p, int J);

ComplexMatrix transfer_V(cplx z, const ChainParams& p);

struct TraceResult {
  ComplexMatrix value;
  int j_eff = 0;
  double tail_bound = 0.0;
};

// Tr_W of Kt^W(z,r) M^W(z,r), summed charge sector by charge sector with
// paired log-magnitudes. The charge j + (number of v^1) is conserved by every
// factor, so each sector is a 2^N x 2^N product and no truncation of the
// oscillator space enters except through the sector count. With
// fixed_terms, exactly `cutoff` sectors are summed and the tail test is skipped.
TraceResult transfer_W_detail(cplx z, cplx r, const ChainParams& p,
                              std::optional<int> cutoff = std::nullopt, bool fixed_terms = false);
ComplexMatrix transfer_W(cplx z, const ChainParams& p);
ComplexMatrix q_operator(cplx z, const ChainParams& p);

cplx p_plus(cplx z, const ChainParams& p);
cplx p_minus(cplx z, const ChainParams& p);

struct RecursionResult {
  Poly poly;  // in Z = z^2
  bool left_convergence_region = false;
};

// Diagonal entry of T^W by peeling off the first site repeatedly.
RecursionResult tW_diagonal_recursion(const std::vector<int>& alpha, const ChainParams& p);

ComplexMatrix closed_monodromy_V(cplx z, const ChainParams& p);
ComplexMatrix closed_transfer_V(cplx z, const ChainParams& p);
TraceResult closed_transfer_W_detail(cplx z, const ChainParams& p,
                                     std::optional<int> cutoff = std::nullopt,
                                     bool fixed_terms = false);
ComplexMatrix closed_transfer_W(cplx z, const ChainParams& p);
ComplexMatrix closed_q(cplx z, const ChainParams& p);
cplx closed_p_plus(cplx z, const ChainParams& p);
cplx closed_p_minus(cplx z, const ChainParams& p);

}  // namespace qbaxter
