#include "sparc/sparc_core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sparc/rng.hpp"

namespace sparc {
namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::domain_error(msg);
}

double quantizer_edge(double D, double gamma2, int levels, int k) {
  return D + (gamma2 - D) * static_cast<double>(k) / static_cast<double>(levels);
}

int ceil_log2(long long x) {
  if (x <= 1) return 0;
  return static_cast<int>(std::bit_width(static_cast<std::uint64_t>(x - 1)));
}

// Saturating M^L used for budget checks.
std::uint64_t codeword_count(int L, long long M) {
  std::uint64_t count = 1;
  for (int l = 0; l < L; ++l) {
    if (count > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(M)) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    count *= static_cast<std::uint64_t>(M);
  }
  return count;
}

template <class Visit>
void enumerate_impl(std::span<const double> s_tilde, const DesignMatrix& A,
                    double coeff, long long first_lo, long long first_hi,
                    Visit&& visit) {
  const int n = A.n();
  const int L = A.L();
  const long long M = A.M();
  std::vector<std::int32_t> idx(static_cast<std::size_t>(L), 0);

  if (L == 1) {
    for (long long m = first_lo; m < first_hi; ++m) {
      idx[0] = static_cast<std::int32_t>(m);
      const double* col = A.column(0, m);
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = s_tilde[i] - coeff * col[i];
        acc += d * d;
      }
      visit(idx, acc);
    }
    return;
  }

  // Residual stack over the leading L-1 sections; the last section is
  // folded directly into the distance evaluation.
  const int outer = L - 1;
  std::vector<std::vector<double>> res(static_cast<std::size_t>(outer),
                                       std::vector<double>(static_cast<std::size_t>(n)));
  const auto refill = [&](int level) {
    const double* col = A.column(level, idx[static_cast<std::size_t>(level)]);
    const double* prev = level == 0 ? s_tilde.data() : res[static_cast<std::size_t>(level - 1)].data();
    double* out = res[static_cast<std::size_t>(level)].data();
    for (int i = 0; i < n; ++i) out[i] = prev[i] - coeff * col[i];
  };

  idx[0] = static_cast<std::int32_t>(first_lo);
  if (first_lo >= first_hi) return;
  for (int l = 0; l < outer; ++l) refill(l);

  for (;;) {
    const double* base = res[static_cast<std::size_t>(outer - 1)].data();
    for (long long m = 0; m < M; ++m) {
      idx[static_cast<std::size_t>(outer)] = static_cast<std::int32_t>(m);
      const double* col = A.column(outer, m);
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = base[i] - coeff * col[i];
        acc += d * d;
      }
      visit(idx, acc);
    }
    int l = outer - 1;
    for (;;) {
      if (l < 0) return;
      const long long limit = l == 0 ? first_hi : M;
      if (idx[static_cast<std::size_t>(l)] + 1 < limit) {
        ++idx[static_cast<std::size_t>(l)];
        break;
      }
      if (l == 0) return;
      idx[static_cast<std::size_t>(l)] = 0;
      --l;
    }
    for (int j = l; j < outer; ++j) refill(j);
  }
}

}  // namespace

SparcParams derive_dimensions(int n, double r_nominal, double b) {
  require(n >= 8, "derive_dimensions: n must be at least 8");
  require(r_nominal > 0.0, "derive_dimensions: rate must be positive");
  require(b > 1.0, "derive_dimensions: b must exceed 1");

  const double target = static_cast<double>(n) * r_nominal / b;
  long long hi = 2;
  while (static_cast<double>(hi) * std::log(static_cast<double>(hi)) < target &&
         hi < (1ll << 26)) {
    hi *= 2;
  }
  int best_l = 2;
  double best_obj = std::numeric_limits<double>::infinity();
  for (long long l = 2; l <= hi + 1; ++l) {
    const double obj =
        std::fabs(static_cast<double>(l) * std::log(static_cast<double>(l)) - target);
    if (obj < best_obj) {
      best_obj = obj;
      best_l = static_cast<int>(l);
    }
  }

  const double m_real = std::pow(static_cast<double>(best_l), b);
  if (m_real > 9.0e18) throw std::domain_error("derive_dimensions: L^b overflows M");
  const long long m = std::max<long long>(2, std::llround(m_real));

  SparcParams params;
  params.n = n;
  params.L = best_l;
  params.M = m;
  params.b = b;
  params.r_nominal = r_nominal;
  params.r_actual = static_cast<double>(best_l) * std::log(static_cast<double>(m)) /
                    static_cast<double>(n);
  if (static_cast<double>(best_l) * std::log(static_cast<double>(m)) <
      static_cast<double>(n) * r_nominal / 2.0) {
    throw std::domain_error(
        "derive_dimensions: degenerate geometry, codebook below e^{nR/2}");
  }
  return params;
}

DesignMatrix::DesignMatrix(int n, int L, long long M, std::uint64_t seed,
                           std::size_t max_entries)
    : n_(n), L_(L), M_(M), seed_(seed) {
  require(n >= 1, "DesignMatrix: n must be at least 1");
  require(L >= 1, "DesignMatrix: L must be at least 1");
  require(M >= 1, "DesignMatrix: M must be at least 1");
  const std::size_t total = static_cast<std::size_t>(n) * static_cast<std::size_t>(L) *
                            static_cast<std::size_t>(M);
  if (total > max_entries) {
    std::ostringstream os;
    os << "DesignMatrix: n*M*L = " << total << " entries exceeds the memory cap "
       << max_entries;
    throw BudgetError(os.str());
  }
  entries_.resize(total);
  for (int l = 0; l < L; ++l) {
    for (long long m = 0; m < M; ++m) {
      GaussianStream g(mix_key(seed, static_cast<std::uint64_t>(l),
                               static_cast<std::uint64_t>(m)));
      double* out = entries_.data() +
                    (static_cast<std::size_t>(l) * static_cast<std::size_t>(M) +
                     static_cast<std::size_t>(m)) *
                        static_cast<std::size_t>(n);
      for (int i = 0; i < n; ++i) out[i] = g.next();
    }
  }
}

std::vector<double> DesignMatrix::generate_column(std::uint64_t seed, int section,
                                                  long long column, int n) {
  GaussianStream g(mix_key(seed, static_cast<std::uint64_t>(section),
                           static_cast<std::uint64_t>(column)));
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = g.next();
  return out;
}

std::uint64_t DesignMatrix::codeword_count_or_throw(std::uint64_t budget) const {
  const std::uint64_t count = codeword_count(L_, M_);
  if (count > budget) {
    std::ostringstream os;
    os << "codeword budget exceeded: M^L = " << count << " > " << budget
       << "; use a smaller (L, M)";
    throw BudgetError(os.str());
  }
  return count;
}

double normalized_sq_norm(std::span<const double> v) {
  double acc = 0.0;
  for (const double x : v) acc += x * x;
  return acc / static_cast<double>(v.size());
}

std::vector<double> synthesize_codeword(const DesignMatrix& A, const BetaIndex& beta,
                                        double coeff) {
  require(static_cast<int>(beta.sections.size()) == A.L(),
          "synthesize_codeword: beta length must equal L");
  std::vector<double> sum(static_cast<std::size_t>(A.n()), 0.0);
  for (int l = 0; l < A.L(); ++l) {
    const std::int32_t m = beta.sections[static_cast<std::size_t>(l)];
    require(m >= 0 && m < A.M(), "synthesize_codeword: column index out of range");
    const double* col = A.column(l, m);
    for (int i = 0; i < A.n(); ++i) sum[static_cast<std::size_t>(i)] += col[i];
  }
  for (double& x : sum) x *= coeff;
  return sum;
}

QuantizerResult scalar_quantize(double x, double D, double gamma2, int levels) {
  require(gamma2 > D, "scalar_quantize: gamma2 must exceed D");
  require(levels >= 1, "scalar_quantize: levels must be at least 1");
  require(x > D && x <= gamma2, "scalar_quantize: x must lie in (D, gamma2]");

  int cell = static_cast<int>(
      std::ceil((x - D) / (gamma2 - D) * static_cast<double>(levels)));
  cell = std::clamp(cell, 1, levels);
  // Nudge across cell edges if rounding placed x outside its half-open cell.
  while (cell > 1 && x <= quantizer_edge(D, gamma2, levels, cell - 1)) --cell;
  while (cell < levels && x > quantizer_edge(D, gamma2, levels, cell)) ++cell;

  QuantizerResult out;
  out.cell = cell;
  out.value = D + (gamma2 - D) * (static_cast<double>(cell) - 0.5) /
                  static_cast<double>(levels);
  return out;
}

double coeff_from_cell(int cell, double D, double gamma2, int levels, int L) {
  const double q = D + (gamma2 - D) * (static_cast<double>(cell) - 0.5) /
                       static_cast<double>(levels);
  return std::sqrt((q - D) / static_cast<double>(L));
}

namespace detail {

void enumerate_codewords(
    std::span<const double> s_tilde, const DesignMatrix& A, double coeff,
    long long first_lo, long long first_hi,
    const std::function<void(const std::vector<std::int32_t>&, double)>& visit) {
  enumerate_impl(s_tilde, A, coeff, first_lo, first_hi, visit);
}

}  // namespace detail

SearchResult min_distance_search(std::span<const double> s_tilde,
                                 const DesignMatrix& A, double coeff,
                                 const SearchOptions& opts) {
  require(static_cast<int>(s_tilde.size()) == A.n(),
          "min_distance_search: s_tilde length must equal n");
  A.codeword_count_or_throw(opts.budget);

  struct Best {
    double acc = std::numeric_limits<double>::infinity();
    std::vector<std::int32_t> idx;
  };
  const auto scan_range = [&](long long lo, long long hi, Best& best) {
    enumerate_impl(s_tilde, A, coeff, lo, hi,
                   [&](const std::vector<std::int32_t>& idx, double acc) {
                     if (acc < best.acc) {
                       best.acc = acc;
                       best.idx = idx;
                     }
                   });
  };

  Best winner;
  const int threads = std::max(1, opts.threads);
  if (threads == 1 || A.M() < 2 * threads) {
    scan_range(0, A.M(), winner);
  } else {
    std::vector<Best> partial(static_cast<std::size_t>(threads));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      const long long lo = A.M() * t / threads;
      const long long hi = A.M() * (t + 1) / threads;
      pool.emplace_back([&, lo, hi, t] { scan_range(lo, hi, partial[static_cast<std::size_t>(t)]); });
    }
    for (auto& th : pool) th.join();
    // Reduce in first-section order; strict < keeps the lexicographically
    // smallest index on ties, matching the serial scan.
    for (const Best& cand : partial) {
      if (cand.acc < winner.acc) winner = cand;
    }
  }

  SearchResult result;
  result.beta.sections = std::move(winner.idx);
  // Report the distance along the same arithmetic path the decoder uses.
  const std::vector<double> cw = synthesize_codeword(A, result.beta, coeff);
  double acc = 0.0;
  for (int i = 0; i < A.n(); ++i) {
    const double d = s_tilde[i] - cw[static_cast<std::size_t>(i)];
    acc += d * d;
  }
  result.d2 = acc / static_cast<double>(A.n());
  return result;
}

const char* to_string(EncodeStatus status) {
  switch (status) {
    case EncodeStatus::norm_overflow: return "norm_overflow";
    case EncodeStatus::trivial_zero: return "trivial_zero";
    case EncodeStatus::coded: return "coded";
  }
  return "unknown";
}

EncodeOutcome encode(std::span<const double> source, const DesignMatrix& A,
                     double D, double gamma2, const SearchOptions& opts) {
  require(static_cast<int>(source.size()) == A.n(),
          "encode: source length must equal n");
  require(D > 0.0 && gamma2 > D, "encode: require 0 < D < gamma2");
  const double ssq = normalized_sq_norm(source);
  require(std::isfinite(ssq), "encode: source norm must be finite");

  EncodeOutcome outcome;
  if (ssq >= gamma2) {
    outcome.status = EncodeStatus::norm_overflow;
    outcome.distortion_tilde = std::numeric_limits<double>::quiet_NaN();
    outcome.distortion_total = std::numeric_limits<double>::quiet_NaN();
    return outcome;
  }
  if (ssq <= D) {
    outcome.status = EncodeStatus::trivial_zero;
    outcome.distortion_tilde = std::numeric_limits<double>::quiet_NaN();
    outcome.distortion_total = ssq;
    return outcome;
  }

  const QuantizerResult qr = scalar_quantize(ssq, D, gamma2, A.n());
  const double scale = std::sqrt(qr.value / ssq);
  std::vector<double> s_tilde(source.begin(), source.end());
  for (double& x : s_tilde) x *= scale;

  outcome.status = EncodeStatus::coded;
  outcome.q_index = qr.cell;
  outcome.coeff = coeff_from_cell(qr.cell, D, gamma2, A.n(), A.L());
  SearchResult sr = min_distance_search(s_tilde, A, outcome.coeff, opts);
  outcome.beta_hat = std::move(sr.beta);
  outcome.distortion_tilde = sr.d2;

  const std::vector<double> s_hat = synthesize_codeword(A, outcome.beta_hat, outcome.coeff);
  double acc = 0.0;
  for (int i = 0; i < A.n(); ++i) {
    const double d = source[static_cast<std::size_t>(i)] - s_hat[static_cast<std::size_t>(i)];
    acc += d * d;
  }
  outcome.distortion_total = acc / static_cast<double>(A.n());
  return outcome;
}

std::vector<double> decode(const EncodeOutcome& outcome, const DesignMatrix& A,
                           double D, double gamma2) {
  if (outcome.status == EncodeStatus::norm_overflow) {
    throw std::domain_error("decode: norm_overflow outcomes carry no codeword");
  }
  if (outcome.status == EncodeStatus::trivial_zero) {
    return std::vector<double>(static_cast<std::size_t>(A.n()), 0.0);
  }
  const double coeff = coeff_from_cell(outcome.q_index, D, gamma2, A.n(), A.L());
  return synthesize_codeword(A, outcome.beta_hat, coeff);
}

PayloadBits payload_bits(const SparcParams& params) {
  PayloadBits bits;
  bits.q_bits = ceil_log2(params.n);
  bits.beta_bits = static_cast<long long>(params.L) * ceil_log2(params.M);
  bits.total = bits.q_bits + bits.beta_bits;
  return bits;
}

}  // namespace sparc
