// Sparse regression codebooks at desk scale: dimension derivation, the
// seeded Gaussian design matrix, and the exact minimum-distance
// encode/decode pipeline with exhaustive search.
//
// Throughout, |v|^2 denotes the normalized squared norm ||v||^2 / n.

#ifndef SPARC_CORE_HPP
#define SPARC_CORE_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sparc/errors.hpp"

namespace sparc {

// Code geometry. M = round(L^b); R_actual = L log(M) / n in nats.
struct SparcParams {
  int n = 0;
  int L = 0;
  long long M = 0;
  double b = 0.0;
  double r_nominal = 0.0;
  double r_actual = 0.0;
};

// Picks the integer L >= 2 minimizing |L log L - n R / b| (ties to the
// smaller L), then M = max(2, round(L^b)). Rejects geometries whose
// codebook falls below e^{nR/2}.
SparcParams derive_dimensions(int n, double r_nominal, double b);

// Codeword identity: one chosen column per section.
struct BetaIndex {
  std::vector<std::int32_t> sections;

  bool operator==(const BetaIndex&) const = default;
};

// The n x (M*L) i.i.d. standard-normal dictionary. Columns are generated
// independently from (seed, section, column, n), so any single column is
// regenerable without materializing the whole matrix.
class DesignMatrix {
 public:
  // Default cap on materialized entries (doubles). Desk-scale books stay
  // far below this; crossing it signals a misconfigured geometry.
  static constexpr std::size_t kDefaultEntryCap = std::size_t{1} << 27;

  DesignMatrix(int n, int L, long long M, std::uint64_t seed,
               std::size_t max_entries = kDefaultEntryCap);

  static std::vector<double> generate_column(std::uint64_t seed, int section,
                                             long long column, int n);

  const double* column(int section, long long column) const {
    return entries_.data() + (static_cast<std::size_t>(section) * static_cast<std::size_t>(M_) +
                              static_cast<std::size_t>(column)) *
                                 static_cast<std::size_t>(n_);
  }

  int n() const { return n_; }
  int L() const { return L_; }
  long long M() const { return M_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t codeword_count_or_throw(std::uint64_t budget) const;

 private:
  int n_;
  int L_;
  long long M_;
  std::uint64_t seed_;
  std::vector<double> entries_;
};

// ||v||^2 / n.
double normalized_sq_norm(std::span<const double> v);

// coeff * sum over sections of the chosen columns.
std::vector<double> synthesize_codeword(const DesignMatrix& A, const BetaIndex& beta,
                                        double coeff);

// Uniform scalar quantizer with `levels` cells covering (D, gamma2].
// Cell i is the half-open interval (D + (g2-D)(i-1)/levels,
// D + (g2-D)i/levels]; the representative is the cell midpoint.
struct QuantizerResult {
  int cell = 0;     // 1-based cell index
  double value = 0; // midpoint representative
};
QuantizerResult scalar_quantize(double x, double D, double gamma2, int levels);

// Nonzero coefficient implied by a quantizer cell: sqrt((Q - D)/L).
// Shared by encoder and decoder so reconstructions match bit for bit.
double coeff_from_cell(int cell, double D, double gamma2, int levels, int L);

struct SearchOptions {
  std::uint64_t budget = std::uint64_t{1} << 24;
  int threads = 1;
};

struct SearchResult {
  BetaIndex beta;
  double d2 = 0.0;  // normalized squared distance of the minimizer
};

// Exact argmin of |s_tilde - A beta|^2 over all M^L codewords. Ties are
// broken toward the lexicographically smallest BetaIndex; the threaded
// path partitions the first section and reduces deterministically to the
// serial answer.
SearchResult min_distance_search(std::span<const double> s_tilde,
                                 const DesignMatrix& A, double coeff,
                                 const SearchOptions& opts = {});

enum class EncodeStatus { norm_overflow, trivial_zero, coded };

const char* to_string(EncodeStatus status);

struct EncodeOutcome {
  EncodeStatus status = EncodeStatus::norm_overflow;
  int q_index = 0;             // quantizer cell in [1, n], coded only
  BetaIndex beta_hat;          // coded only
  double coeff = 0.0;          // per-entry nonzero value c/sqrt(L)
  double distortion_tilde = 0; // |s_tilde - A beta_hat|^2
  double distortion_total = 0; // |S - S_hat|^2
};

// Full pipeline: norm-overflow check (|S|^2 >= gamma2), trivial-zero
// check (|S|^2 <= D), scalar quantization of |S|^2, rescaling to
// s_tilde, exhaustive search.
EncodeOutcome encode(std::span<const double> source, const DesignMatrix& A,
                     double D, double gamma2, const SearchOptions& opts = {});

// Reconstruction from an outcome. trivial_zero decodes to the all-zero
// vector; norm_overflow outcomes are not decodable.
std::vector<double> decode(const EncodeOutcome& outcome, const DesignMatrix& A,
                           double D, double gamma2);

// Transmitted payload with integer bit ceilings: ceil(log2 n) for the
// quantizer index plus L*ceil(log2 M) for the section choices.
struct PayloadBits {
  int q_bits = 0;
  long long beta_bits = 0;
  long long total = 0;
};
PayloadBits payload_bits(const SparcParams& params);

namespace detail {

// Enumerates every codeword in lexicographic BetaIndex order, passing
// (section indices, raw squared distance ||s_tilde - coeff*A beta||^2).
// first_lo/first_hi restrict the leading section for partitioned scans.
void enumerate_codewords(
    std::span<const double> s_tilde, const DesignMatrix& A, double coeff,
    long long first_lo, long long first_hi,
    const std::function<void(const std::vector<std::int32_t>&, double)>& visit);

}  // namespace detail

}  // namespace sparc

#endif  // SPARC_CORE_HPP
