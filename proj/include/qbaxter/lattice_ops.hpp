#pragma once

#include "qbaxter/qoscillator.hpp"
#include "qbaxter/tensor_core.hpp"

namespace qbaxter {

// Operators on W⊗V use the index 2*j + alpha (Fock index slowest).

ComplexMatrix r_matrix(cplx z, cplx q);
// ((R^{t1})^{-1})^{t1}
ComplexMatrix r_tilde(cplx z, cplx q);

// Assemble an operator on W⊗V from its 2x2 blocks over the oscillator space;
// block (alpha, beta) maps the v^beta component to the v^alpha component.
ComplexMatrix block2(const ComplexMatrix& b00, const ComplexMatrix& b01,
                     const ComplexMatrix& b10, const ComplexMatrix& b11);
// Inverse of block2: extract block (alpha, beta).
ComplexMatrix block_of(const ComplexMatrix& x, int alpha, int beta);

ComplexMatrix l_matrix(cplx z, cplx r, cplx q, int J);
ComplexMatrix l_inverse(cplx z, cplx r, cplx q, int J);
// Closed forms of L^{t2} and its inverse.
ComplexMatrix l_t2(cplx z, cplx r, cplx q, int J);
ComplexMatrix l_t2_inverse(cplx z, cplx r, cplx q, int J);
// ((L^{t2})^{-1})^{t2} from the closed form of the inverse.
ComplexMatrix l_tilde(cplx z, cplx r, cplx q, int J);
// Same object through numerical transposition and inversion of the truncated L.
ComplexMatrix l_tilde_pipeline(cplx z, cplx r, cplx q, int J);

ComplexMatrix kV(cplx z, cplx xi);
ComplexMatrix ktV(cplx z, cplx xitilde, cplx q);
ComplexMatrix kW_dense(cplx z, cplx r, cplx xi, cplx q, int J);
ComplexMatrix ktW_dense(cplx z, cplx r, cplx xitilde, cplx q, int J);

// Fusion intertwiners: iota maps W -> W⊗V, tau maps W⊗V -> W.
ComplexMatrix iota(cplx r, cplx q, int J);
ComplexMatrix tau(cplx r, cplx q, int J);
// Splitting maps: tau∘tau_section = Id, iota_retraction∘iota = Id,
// iota_retraction∘tau_section = 0.
ComplexMatrix tau_section(cplx q, int J);
ComplexMatrix iota_retraction(cplx r, cplx q, int J);

}  // namespace qbaxter
