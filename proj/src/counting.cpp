#include "sparc/counting.hpp"

#include <cmath>
#include <stdexcept>

namespace sparc {
namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::domain_error(msg);
}

}  // namespace

std::uint64_t count_solutions(std::span<const double> s_tilde, const DesignMatrix& A,
                              double D, double coeff, std::uint64_t budget) {
  require(static_cast<int>(s_tilde.size()) == A.n(),
          "count_solutions: s_tilde length must equal n");
  A.codeword_count_or_throw(budget);
  const double raw_threshold = D * static_cast<double>(A.n());
  std::uint64_t count = 0;
  detail::enumerate_codewords(s_tilde, A, coeff, 0, A.M(),
                              [&](const std::vector<std::int32_t>&, double acc) {
                                if (acc <= raw_threshold) ++count;
                              });
  return count;
}

int overlap(const BetaIndex& a, const BetaIndex& b) {
  require(a.sections.size() == b.sections.size(),
          "overlap: codewords have mismatched geometry");
  int r = 0;
  for (std::size_t l = 0; l < a.sections.size(); ++l) {
    if (a.sections[l] == b.sections[l]) ++r;
  }
  return r;
}

std::vector<std::uint64_t> count_overlap_solutions(
    std::span<const double> s_tilde, const DesignMatrix& A, double D, double coeff,
    const BetaIndex& beta_ref, std::uint64_t budget) {
  require(static_cast<int>(s_tilde.size()) == A.n(),
          "count_overlap_solutions: s_tilde length must equal n");
  require(static_cast<int>(beta_ref.sections.size()) == A.L(),
          "count_overlap_solutions: beta_ref length must equal L");
  A.codeword_count_or_throw(budget);
  const double raw_threshold = D * static_cast<double>(A.n());
  std::vector<std::uint64_t> buckets(static_cast<std::size_t>(A.L()) + 1, 0);
  detail::enumerate_codewords(
      s_tilde, A, coeff, 0, A.M(),
      [&](const std::vector<std::int32_t>& idx, double acc) {
        if (acc > raw_threshold) return;
        int r = 0;
        for (std::size_t l = 0; l < idx.size(); ++l) {
          if (idx[l] == beta_ref.sections[l]) ++r;
        }
        ++buckets[static_cast<std::size_t>(r)];
      });
  return buckets;
}

BigInt overlap_census(int L, long long M, int r) {
  require(L >= 1, "overlap_census: L must be at least 1");
  require(M >= 2, "overlap_census: M must be at least 2");
  require(r >= 0 && r <= L, "overlap_census: r must lie in [0, L]");
  BigInt binom = 1;
  for (int i = 0; i < r; ++i) {
    binom *= (L - i);
    binom /= (i + 1);
  }
  BigInt pow_term = 1;
  for (int i = 0; i < L - r; ++i) pow_term *= (M - 1);
  return binom * pow_term;
}

BigInt dependency_degree(int L, long long M) {
  require(L >= 1, "dependency_degree: L must be at least 1");
  require(M >= 2, "dependency_degree: M must be at least 2");
  BigInt m_pow = 1;
  BigInt m1_pow = 1;
  for (int i = 0; i < L; ++i) {
    m_pow *= M;
    m1_pow *= (M - 1);
  }
  return m_pow - 1 - m1_pow;
}

SolutionCensus build_census(std::span<const double> s_tilde, const DesignMatrix& A,
                            double D, double coeff, const BetaIndex& beta_ref,
                            double ex_ref, const std::string& ex_ref_source,
                            std::uint64_t budget) {
  SolutionCensus census;
  census.by_overlap = count_overlap_solutions(s_tilde, A, D, coeff, beta_ref, budget);
  census.total = 0;
  for (const std::uint64_t c : census.by_overlap) census.total += c;
  census.reference = beta_ref;
  census.ex_ref = ex_ref;
  census.ex_ref_source = ex_ref_source;
  return census;
}

bool is_eps_good(const SolutionCensus& census, double eps) {
  require(!census.by_overlap.empty(), "is_eps_good: census has no buckets");
  require(census.ex_ref > 0.0, "is_eps_good: ex_ref must be positive");
  require(census.by_overlap.back() >= 1,
          "is_eps_good: reference codeword is not a solution");
  double overlapping = 0.0;
  for (std::size_t r = 1; r < census.by_overlap.size(); ++r) {
    overlapping += static_cast<double>(census.by_overlap[r]);
  }
  return overlapping < eps * census.ex_ref;
}

bool f_alpha_event(std::span<const double> s_tilde, const DesignMatrix& A,
                   const BetaIndex& beta, double coeff, int r, double d_alpha) {
  require(static_cast<int>(s_tilde.size()) == A.n(),
          "f_alpha_event: s_tilde length must equal n");
  require(static_cast<int>(beta.sections.size()) == A.L(),
          "f_alpha_event: beta length must equal L");
  require(r >= 1 && r <= A.L(), "f_alpha_event: r must lie in [1, L]");
  require(A.L() <= 12, "f_alpha_event: exhaustive subset mode is limited to L <= 12");

  const int n = A.n();
  const int L = A.L();
  const double raw_floor = d_alpha * static_cast<double>(n);
  std::vector<int> subset(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) subset[static_cast<std::size_t>(i)] = i;

  std::vector<double> partial(static_cast<std::size_t>(n));
  for (;;) {
    partial.assign(partial.size(), 0.0);
    for (const int l : subset) {
      const double* col = A.column(l, beta.sections[static_cast<std::size_t>(l)]);
      for (int i = 0; i < n; ++i) partial[static_cast<std::size_t>(i)] += col[i];
    }
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = s_tilde[i] - coeff * partial[static_cast<std::size_t>(i)];
      acc += d * d;
    }
    if (acc < raw_floor) return false;

    // next r-combination of {0, ..., L-1} in lexicographic order
    int pos = r - 1;
    while (pos >= 0 && subset[static_cast<std::size_t>(pos)] == L - r + pos) --pos;
    if (pos < 0) break;
    ++subset[static_cast<std::size_t>(pos)];
    for (int i = pos + 1; i < r; ++i) {
      subset[static_cast<std::size_t>(i)] = subset[static_cast<std::size_t>(i - 1)] + 1;
    }
  }
  return true;
}

SolutionBoundsLog expected_solutions_bounds(const TheoryPoint& pt, int n,
                                            double kappa) {
  require(n >= 1, "expected_solutions_bounds: n must be at least 1");
  require(pt.R > 0.0, "expected_solutions_bounds: R must be positive");
  require(kappa > 0.0, "expected_solutions_bounds: kappa must be positive");
  const double f_full = rate_fn(pt.rho2, pt.rho2 - pt.D, pt.D);
  SolutionBoundsLog out;
  out.upper_log = static_cast<double>(n) * (pt.R - f_full);
  out.lower_log = out.upper_log - 0.5 * std::log(static_cast<double>(n)) + std::log(kappa);
  out.kappa = kappa;
  return out;
}

}  // namespace sparc
