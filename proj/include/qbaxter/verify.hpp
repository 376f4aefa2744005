#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qbaxter/chain.hpp"

namespace qbaxter {

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  bool conjecture = false;
  std::string params_digest;
  std::string notes;
  std::vector<std::pair<std::string, cplx>> values;
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  int samples = 5;
  double tol = 1e-8;          // default tolerance for traced quantities
  double exact_tol = 1e-10;   // identities exact in exact arithmetic
  int interior = 8;           // interior Fock rows kept in dense checks
  std::vector<cplx> z_samples;  // explicit spectral points (optional)
};

std::string params_digest(const ChainParams& p, std::uint64_t seed);

CheckResult make_check(std::string name, double residual, double tolerance, bool conjecture,
                       const std::string& digest, std::string notes = {});

// Residual restricted to rows and columns whose Fock index lies below `limit`.
// The Fock index of row i is (i / row_stride) % J (columns likewise). The
// error is relative per Fock level: max_j ||(a-b)_j|| / max(||a_j||, ||b_j||),
// where _j selects the rows at Fock index j.
double fock_interior_err(const ComplexMatrix& a, const ComplexMatrix& b, int J, long row_stride,
                         long col_stride, int limit);

// Points in the annulus lo <= |z| <= hi for which every shifted point
// z * shift (shift in `shifts`) avoids the exclusion set.
std::vector<cplx> sample_clear_points(std::mt19937_64& rng, const ChainParams& p, int n, double lo,
                                      double hi, const std::vector<cplx>& shifts = {1.0});

std::vector<CheckResult> check_ybe(const ChainParams& p, const VerifyOptions& opt);
std::vector<CheckResult> check_reflection(const ChainParams& p, const VerifyOptions& opt);
std::vector<CheckResult> check_fusion(const ChainParams& p, const VerifyOptions& opt);
std::vector<CheckResult> check_row_fusion_and_monodromy(const ChainParams& p, const VerifyOptions& opt);
std::vector<CheckResult> check_split_trace(const ChainParams& p, const VerifyOptions& opt);
CheckResult check_split_trace_theta(const ChainParams& p, const ComplexMatrix& theta, int J,
                                    const VerifyOptions& opt, const std::string& name);
std::vector<CheckResult> check_tq(const ChainParams& p, const VerifyOptions& opt);
std::vector<CheckResult> check_commutators(const ChainParams& p, const VerifyOptions& opt);
std::vector<CheckResult> check_crossing(const ChainParams& p, const VerifyOptions& opt);
std::vector<CheckResult> check_polynomiality(const ChainParams& p, const VerifyOptions& opt);
std::vector<CheckResult> check_n2_closed_forms(const ChainParams& p, const VerifyOptions& opt);
std::vector<CheckResult> check_closed_chain(const ChainParams& p, const VerifyOptions& opt);
std::vector<CheckResult> check_golden(const ChainParams& p, const VerifyOptions& opt);
std::vector<CheckResult> check_truncation_stability(const ChainParams& p, const VerifyOptions& opt);

// Closed forms used by check_n2_closed_forms.
cplx n2_offdiagonal_formula(cplx z, const ChainParams& p);
cplx n2_diagonal_difference_formula(cplx z, const ChainParams& p);

}  // namespace qbaxter
