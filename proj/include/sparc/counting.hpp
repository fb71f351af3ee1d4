// Solution counting and overlap diagnostics for a realized (s_tilde, A):
// exact enumeration of solutions, overlap-resolved counts against a
// reference codeword, and the combinatorial quantities behind the
// second-moment and correlation-inequality bookkeeping.

#ifndef SPARC_COUNTING_HPP
#define SPARC_COUNTING_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sparc/rate_theory.hpp"
#include "sparc/sparc_core.hpp"

namespace sparc {

using BigInt = boost::multiprecision::cpp_int;

// Exact number of beta with |s_tilde - A beta|^2 <= D (closed inequality,
// no epsilon slack on the computed double).
std::uint64_t count_solutions(std::span<const double> s_tilde, const DesignMatrix& A,
                              double D, double coeff,
                              std::uint64_t budget = std::uint64_t{1} << 24);

// Number of sections where the two codewords pick the same column.
int overlap(const BetaIndex& a, const BetaIndex& b);

// Exact solution counts bucketed by overlap with beta_ref; entry r holds
// the number of solutions sharing exactly r sections. The buckets
// partition the solution set, so they sum to count_solutions.
std::vector<std::uint64_t> count_overlap_solutions(
    std::span<const double> s_tilde, const DesignMatrix& A, double D, double coeff,
    const BetaIndex& beta_ref, std::uint64_t budget = std::uint64_t{1} << 24);

// C(L, r) * (M-1)^{L-r}: codewords sharing exactly r sections with a
// fixed reference. Exact big-integer value.
BigInt overlap_census(int L, long long M, int r);

// M^L - 1 - (M-1)^L: dependency-graph degree of one codeword.
BigInt dependency_degree(int L, long long M);

// Overlap census for one reference codeword together with the external
// scale E[X] used by the goodness test. ex_ref_source records where the
// estimate came from ("theory-upper", "monte-carlo", or "user").
struct SolutionCensus {
  std::uint64_t total = 0;                 // X
  std::vector<std::uint64_t> by_overlap;   // index r in [0, L]
  BetaIndex reference;
  double ex_ref = 0.0;
  std::string ex_ref_source;
};

SolutionCensus build_census(std::span<const double> s_tilde, const DesignMatrix& A,
                            double D, double coeff, const BetaIndex& beta_ref,
                            double ex_ref, const std::string& ex_ref_source,
                            std::uint64_t budget = std::uint64_t{1} << 24);

// True iff the solutions sharing at least one section with the reference
// (buckets r = 1..L, which include the reference itself at r = L) number
// fewer than eps * ex_ref. Requires the reference to be a solution.
bool is_eps_good(const SolutionCensus& census, double eps);

// Exhaustive check of the per-subset distortion-floor event: true iff
// |s_tilde - A beta_K|^2 >= d_alpha for every size-r subset K of the
// sections, where beta_K keeps beta's chosen columns on K and zeroes the
// rest. Enumerates all C(L, r) subsets; restricted to L <= 12.
bool f_alpha_event(std::span<const double> s_tilde, const DesignMatrix& A,
                   const BetaIndex& beta, double coeff, int r, double d_alpha);

// Log-domain bounds on the expected solution count at block length n:
//   upper = n (R - f(rho2, rho2-D, D))
//   lower = upper - (1/2) log n + log kappa
// kappa is a caller-supplied stand-in for the unpinned prefactor.
struct SolutionBoundsLog {
  double upper_log = 0.0;
  double lower_log = 0.0;
  double kappa = 1.0;
};
SolutionBoundsLog expected_solutions_bounds(const TheoryPoint& pt, int n,
                                            double kappa = 1.0);

}  // namespace sparc

#endif  // SPARC_COUNTING_HPP
