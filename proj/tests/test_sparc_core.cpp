#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "sparc/errors.hpp"
#include "sparc/rng.hpp"
#include "sparc/sparc_core.hpp"
#include "sparc/special.hpp"

using namespace sparc;

namespace {

std::vector<double> random_source(std::uint64_t seed, int n, double sigma = 1.0) {
  GaussianStream g(seed);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (double& x : out) x = sigma * g.next();
  return out;
}

// Independent reference search: nested loops over all index tuples with
// codewords assembled column-by-column from scratch.
struct NaiveResult {
  std::vector<std::int32_t> beta;
  double d2 = 0.0;
};

NaiveResult naive_search(const std::vector<double>& s, const DesignMatrix& A,
                         double coeff) {
  NaiveResult best;
  best.d2 = std::numeric_limits<double>::infinity();
  std::vector<std::int32_t> idx(static_cast<std::size_t>(A.L()), 0);
  const long long total = static_cast<long long>(std::llround(
      std::pow(static_cast<double>(A.M()), static_cast<double>(A.L()))));
  for (long long code = 0; code < total; ++code) {
    long long rem = code;
    for (int l = A.L() - 1; l >= 0; --l) {
      idx[static_cast<std::size_t>(l)] = static_cast<std::int32_t>(rem % A.M());
      rem /= A.M();
    }
    std::vector<double> sum(static_cast<std::size_t>(A.n()), 0.0);
    for (int l = 0; l < A.L(); ++l) {
      const double* col = A.column(l, idx[static_cast<std::size_t>(l)]);
      for (int i = 0; i < A.n(); ++i) sum[static_cast<std::size_t>(i)] += col[i];
    }
    double acc = 0.0;
    for (int i = 0; i < A.n(); ++i) {
      const double d = s[static_cast<std::size_t>(i)] - coeff * sum[static_cast<std::size_t>(i)];
      acc += d * d;
    }
    acc /= A.n();
    if (acc < best.d2) {
      best.d2 = acc;
      best.beta = idx;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("derive_dimensions") {
  // n R / b = 2 log 2 has the exact solution L = 2
  {
    const double b = 3.0;
    const int n = 20;
    const double r = b * 2.0 * std::log(2.0) / n;
    const SparcParams p = derive_dimensions(n, r, b);
    CHECK(p.L == 2);
    CHECK(p.M == 8);
  }

  // scan oracle at (n=24, R=ln2, b=2)
  {
    const SparcParams p = derive_dimensions(24, std::log(2.0), 2.0);
    const double target = 24.0 * std::log(2.0) / 2.0;
    int best_l = 2;
    double best = 1e300;
    for (int l = 2; l <= 64; ++l) {
      const double obj = std::fabs(l * std::log(static_cast<double>(l)) - target);
      if (obj < best) {
        best = obj;
        best_l = l;
      }
    }
    CHECK(p.L == best_l);
    CHECK(p.M == static_cast<long long>(std::llround(std::pow(best_l, 2.0))));
  }

  // nominal-vs-actual drift stays under 25% for moderate n
  for (const int n : {64, 128, 256}) {
    for (const double r : {0.35, 0.7, 1.05, 1.4}) {
      for (const double b : {1.5, 2.0, 2.5, 3.0}) {
        const SparcParams p = derive_dimensions(n, r, b);
        CHECK(std::fabs(p.r_actual - r) / r < 0.25);
      }
    }
  }

  CHECK_THROWS_AS(derive_dimensions(4, 0.5, 2.0), std::domain_error);
  CHECK_THROWS_AS(derive_dimensions(64, -0.5, 2.0), std::domain_error);
  CHECK_THROWS_AS(derive_dimensions(64, 0.5, 1.0), std::domain_error);
}

TEST_CASE("design matrix determinism and column regeneration") {
  const DesignMatrix a1(16, 3, 5, 4242);
  const DesignMatrix a2(16, 3, 5, 4242);
  for (int l = 0; l < 3; ++l) {
    for (long long m = 0; m < 5; ++m) {
      const double* c1 = a1.column(l, m);
      const double* c2 = a2.column(l, m);
      const std::vector<double> regen = DesignMatrix::generate_column(4242, l, m, 16);
      for (int i = 0; i < 16; ++i) {
        CHECK(c1[i] == c2[i]);
        CHECK(c1[i] == regen[static_cast<std::size_t>(i)]);
      }
    }
  }
  const DesignMatrix a3(16, 3, 5, 4243);
  CHECK(a1.column(0, 0)[0] != a3.column(0, 0)[0]);
}

TEST_CASE("design matrix entry moments") {
  // 10^6 entries: mean within 0 +- 0.01 and variance within 1 +- 0.01
  const int n = 1000;
  const DesignMatrix A(n, 10, 100, 20250801);
  double sum = 0.0, sumsq = 0.0;
  const std::size_t total = static_cast<std::size_t>(n) * 1000;
  for (int l = 0; l < 10; ++l) {
    for (long long m = 0; m < 100; ++m) {
      const double* col = A.column(l, m);
      for (int i = 0; i < n; ++i) {
        sum += col[i];
        sumsq += col[i] * col[i];
      }
    }
  }
  const double mean = sum / static_cast<double>(total);
  const double var = sumsq / static_cast<double>(total) - mean * mean;
  CHECK(std::fabs(mean) < 0.01);
  CHECK(std::fabs(var - 1.0) < 0.01);
}

TEST_CASE("design matrix column pairs are uncorrelated") {
  const int n = 10000;
  const DesignMatrix A(n, 2, 100, 77);
  SplitMix64 rng(31337);
  double max_corr = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    const long long m1 = static_cast<long long>(rng.next() % 100);
    const long long m2 = static_cast<long long>(rng.next() % 100);
    const double* c1 = A.column(0, m1);
    const double* c2 = A.column(1, m2);
    double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;
    for (int i = 0; i < n; ++i) {
      s1 += c1[i];
      s2 += c2[i];
      s11 += c1[i] * c1[i];
      s22 += c2[i] * c2[i];
      s12 += c1[i] * c2[i];
    }
    const double cov = s12 / n - (s1 / n) * (s2 / n);
    const double v1 = s11 / n - (s1 / n) * (s1 / n);
    const double v2 = s22 / n - (s2 / n) * (s2 / n);
    max_corr = std::max(max_corr, std::fabs(cov / std::sqrt(v1 * v2)));
  }
  CHECK(max_corr < 0.05);
}

TEST_CASE("synthesize_codeword") {
  const DesignMatrix A(8, 3, 4, 5);
  BetaIndex beta;
  beta.sections = {1, 0, 3};

  const std::vector<double> zero = synthesize_codeword(A, beta, 0.0);
  for (const double x : zero) CHECK(x == 0.0);

  const DesignMatrix single(8, 1, 4, 5);
  BetaIndex one;
  one.sections = {2};
  const std::vector<double> cw = synthesize_codeword(single, one, 0.7);
  const double* col = single.column(0, 2);
  for (int i = 0; i < 8; ++i) CHECK(cw[static_cast<std::size_t>(i)] == 0.7 * col[i]);

  BetaIndex bad;
  bad.sections = {1, 0};
  CHECK_THROWS_AS(synthesize_codeword(A, bad, 1.0), std::domain_error);
  bad.sections = {1, 0, 4};
  CHECK_THROWS_AS(synthesize_codeword(A, bad, 1.0), std::domain_error);
}

TEST_CASE("codeword entries have variance coeff^2 L") {
  // with coeff = sqrt((rho2-D)/L) the per-entry variance is rho2 - D
  const double rho2 = 1.0, D = 0.36;
  const int L = 4;
  const double coeff = std::sqrt((rho2 - D) / L);
  SplitMix64 rng(808);
  double sum = 0.0, sumsq = 0.0;
  long long count = 0;
  for (int t = 0; t < 10000; ++t) {
    const DesignMatrix A(4, L, 3, rng.next());
    BetaIndex beta;
    for (int l = 0; l < L; ++l) {
      beta.sections.push_back(static_cast<std::int32_t>(rng.next() % 3));
    }
    const std::vector<double> cw = synthesize_codeword(A, beta, coeff);
    for (const double x : cw) {
      sum += x;
      sumsq += x * x;
      ++count;
    }
  }
  const double mean = sum / count;
  const double var = sumsq / count - mean * mean;
  // 3 sigma band for the variance of ~40000 chi-square-ish samples
  CHECK(std::fabs(var - (rho2 - D)) < 3.0 * (rho2 - D) * std::sqrt(2.0 / count));
}

TEST_CASE("scalar_quantize") {
  // midpoint of the first cell by the displayed formula
  const QuantizerResult q = scalar_quantize(1.2, 1.0, 2.0, 4);
  CHECK(q.cell == 1);
  CHECK(q.value == doctest::Approx(1.125).epsilon(1e-15));

  // the top cell is right-closed
  const QuantizerResult top = scalar_quantize(2.0, 1.0, 2.0, 4);
  CHECK(top.cell == 4);
  CHECK(top.value == doctest::Approx(2.0 - 0.125).epsilon(1e-15));

  CHECK_THROWS_AS(scalar_quantize(1.0, 1.0, 2.0, 4), std::domain_error);
  CHECK_THROWS_AS(scalar_quantize(2.1, 1.0, 2.0, 4), std::domain_error);

  // quantizer error bound over random inputs
  SplitMix64 rng(0xfeed);
  const double D = 0.5, g2 = 3.0;
  const int levels = 32;
  const double half_step = (g2 - D) / (2.0 * levels);
  for (int i = 0; i < 100000; ++i) {
    const double x = D + (g2 - D) * rng.next_unit();
    const QuantizerResult r = scalar_quantize(x, D, g2, levels);
    CHECK(std::fabs(r.value - x) <= half_step * (1.0 + 1e-12));
    CHECK(r.cell >= 1);
    CHECK(r.cell <= levels);
    // x lies in the stated half-open cell
    const double left = D + (g2 - D) * (r.cell - 1) / static_cast<double>(levels);
    const double right = D + (g2 - D) * r.cell / static_cast<double>(levels);
    CHECK(x > left);
    CHECK(x <= right);
  }
}

TEST_CASE("min_distance_search: exact codeword is found at distance zero") {
  const DesignMatrix A(12, 3, 4, 99);
  BetaIndex planted;
  planted.sections = {2, 0, 3};
  const double coeff = 0.45;
  const std::vector<double> s = synthesize_codeword(A, planted, coeff);
  const SearchResult r = min_distance_search(s, A, coeff);
  CHECK(r.beta == planted);
  CHECK(r.d2 == 0.0);
}

TEST_CASE("min_distance_search: equals the naive reference") {
  SplitMix64 rng(0xc0de);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4 + static_cast<int>(rng.next() % 6);
    const int L = 1 + static_cast<int>(rng.next() % 3);
    const long long M = 2 + static_cast<long long>(rng.next() % 3);
    if (static_cast<double>(L) * static_cast<double>(M) > 12.0) continue;
    const DesignMatrix A(n, L, M, rng.next());
    const std::vector<double> s = random_source(rng.next(), n);
    const double coeff = 0.2 + rng.next_unit_co();
    const SearchResult fast = min_distance_search(s, A, coeff);
    const NaiveResult ref = naive_search(s, A, coeff);
    CHECK(fast.beta.sections == ref.beta);
    CHECK(fast.d2 == doctest::Approx(ref.d2).epsilon(1e-12));
  }
}

TEST_CASE("min_distance_search: threaded partition matches serial") {
  const DesignMatrix A(10, 3, 7, 1234);
  const std::vector<double> s = random_source(4321, 10);
  const double coeff = 0.5;
  const SearchResult serial = min_distance_search(s, A, coeff);
  for (int threads : {2, 3, 5}) {
    SearchOptions opts;
    opts.threads = threads;
    const SearchResult par = min_distance_search(s, A, coeff, opts);
    CHECK(par.beta == serial.beta);
    CHECK(par.d2 == serial.d2);
  }
}

TEST_CASE("min_distance_search: section permutation symmetry") {
  // permuting sections of A together with beta relabeling keeps d2
  SplitMix64 rng(0xabcd);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 8;
    const DesignMatrix A(n, 3, 4, rng.next());
    const std::vector<double> s = random_source(rng.next(), n);
    const double coeff = 0.4;
    const SearchResult r = min_distance_search(s, A, coeff);

    // rebuild the same codebook with sections listed in reverse order by
    // scanning reversed indices through the naive assembler
    NaiveResult best;
    best.d2 = std::numeric_limits<double>::infinity();
    std::vector<std::int32_t> idx(3, 0);
    for (idx[0] = 0; idx[0] < 4; ++idx[0]) {
      for (idx[1] = 0; idx[1] < 4; ++idx[1]) {
        for (idx[2] = 0; idx[2] < 4; ++idx[2]) {
          std::vector<double> sum(static_cast<std::size_t>(n), 0.0);
          for (int l = 2; l >= 0; --l) {
            const double* col = A.column(l, idx[static_cast<std::size_t>(l)]);
            for (int i = 0; i < n; ++i) sum[static_cast<std::size_t>(i)] += col[i];
          }
          double acc = 0.0;
          for (int i = 0; i < n; ++i) {
            const double d = s[static_cast<std::size_t>(i)] - coeff * sum[static_cast<std::size_t>(i)];
            acc += d * d;
          }
          acc /= n;
          if (acc < best.d2) {
            best.d2 = acc;
            best.beta = idx;
          }
        }
      }
    }
    CHECK(best.beta == r.beta.sections);
    CHECK(r.d2 == doctest::Approx(best.d2).epsilon(1e-12));
  }
}

TEST_CASE("min_distance_search: budget errors") {
  const DesignMatrix A(8, 3, 8, 11);  // 512 codewords
  const std::vector<double> s = random_source(1, 8);
  SearchOptions opts;
  opts.budget = 256;
  CHECK_THROWS_AS(min_distance_search(s, A, 0.5, opts), BudgetError);
  opts.budget = 512;
  CHECK_NOTHROW(min_distance_search(s, A, 0.5, opts));
}

TEST_CASE("encode: status branches") {
  const int n = 16;
  const DesignMatrix A(n, 2, 4, 321);
  const double D = 0.5, g2 = 2.0;

  // tiny source -> trivial zero, distortion equals |S|^2 <= D
  std::vector<double> small(static_cast<std::size_t>(n), 0.1);
  const EncodeOutcome triv = encode(small, A, D, g2);
  CHECK(triv.status == EncodeStatus::trivial_zero);
  CHECK(triv.distortion_total == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(triv.distortion_total <= D);

  // huge source -> norm overflow
  std::vector<double> huge(static_cast<std::size_t>(n), 3.0);
  const EncodeOutcome over = encode(huge, A, D, g2);
  CHECK(over.status == EncodeStatus::norm_overflow);

  // boundary conventions: |S|^2 == D is trivial, |S|^2 == gamma2 overflows
  // (exactly representable squares so the comparisons hit the boundary)
  std::vector<double> at_d(static_cast<std::size_t>(n), 0.5);
  CHECK(encode(at_d, A, 0.25, g2).status == EncodeStatus::trivial_zero);
  std::vector<double> at_g(static_cast<std::size_t>(n), 2.0);
  CHECK(encode(at_g, A, D, 4.0).status == EncodeStatus::norm_overflow);

  // coded: |s_tilde|^2 equals the quantized norm
  const std::vector<double> src = random_source(888, n);
  const EncodeOutcome coded = encode(src, A, D, g2);
  REQUIRE(coded.status == EncodeStatus::coded);
  const double ssq = normalized_sq_norm(src);
  const QuantizerResult qr = scalar_quantize(ssq, D, g2, n);
  std::vector<double> s_tilde = src;
  const double scale = std::sqrt(qr.value / ssq);
  for (double& x : s_tilde) x *= scale;
  CHECK(std::fabs(normalized_sq_norm(s_tilde) - qr.value) < 1e-10);
  CHECK(coded.q_index == qr.cell);
  CHECK(coded.coeff == coeff_from_cell(qr.cell, D, g2, n, 2));
}

TEST_CASE("encode/decode round trip and determinism") {
  const int n = 16;
  const double D = 0.5, g2 = 2.0;
  SplitMix64 rng(0xdead);
  for (int trial = 0; trial < 30; ++trial) {
    const std::uint64_t seed = rng.next();
    const DesignMatrix A(n, 2, 4, seed);
    const std::vector<double> src = random_source(rng.next(), n);
    const EncodeOutcome o1 = encode(src, A, D, g2);
    const EncodeOutcome o2 = encode(src, A, D, g2);

    // (seed, params, S) fully determine the outcome
    CHECK(o1.status == o2.status);
    CHECK(o1.q_index == o2.q_index);
    CHECK(o1.beta_hat == o2.beta_hat);
    CHECK(o1.coeff == o2.coeff);

    if (o1.status == EncodeStatus::norm_overflow) {
      CHECK_THROWS_AS(decode(o1, A, D, g2), std::domain_error);
      continue;
    }
    const std::vector<double> recon = decode(o1, A, D, g2);
    if (o1.status == EncodeStatus::trivial_zero) {
      for (const double x : recon) CHECK(x == 0.0);
      continue;
    }
    // decoder reproduces the encoder-side reconstruction bit for bit
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = src[static_cast<std::size_t>(i)] - recon[static_cast<std::size_t>(i)];
      acc += d * d;
    }
    CHECK(acc / n == o1.distortion_total);
  }
}

TEST_CASE("coded trials satisfy the distortion expansion chain") {
  const int n = 20;
  const double D = 0.5, g2 = 2.0;
  SplitMix64 rng(0xbeef);
  int coded_seen = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const DesignMatrix A(n, 2, 8, rng.next());
    const std::vector<double> src = random_source(rng.next(), n);
    const EncodeOutcome o = encode(src, A, D, g2);
    if (o.status != EncodeStatus::coded) continue;
    ++coded_seen;
    const double ssq = normalized_sq_norm(src);
    const QuantizerResult qr = scalar_quantize(ssq, D, g2, n);
    const double scale = std::sqrt(qr.value / ssq);
    double dq = 0.0;
    for (const double x : src) {
      const double d = x - scale * x;
      dq += d * d;
    }
    dq /= n;
    const double rhs =
        dq + 2.0 * std::sqrt(dq) * std::sqrt(o.distortion_tilde) + o.distortion_tilde;
    CHECK(o.distortion_total <= rhs * (1.0 + 1e-9) + 1e-12);
  }
  CHECK(coded_seen > 20);
}

TEST_CASE("payload_bits") {
  SparcParams p;
  p.n = 20;
  p.L = 2;
  p.M = 8;
  const PayloadBits bits = payload_bits(p);
  CHECK(bits.q_bits == 5);       // ceil(log2 20)
  CHECK(bits.beta_bits == 6);    // 2 * ceil(log2 8)
  CHECK(bits.total == 11);

  p.n = 16;
  p.L = 3;
  p.M = 27;
  const PayloadBits b2 = payload_bits(p);
  CHECK(b2.q_bits == 4);
  CHECK(b2.beta_bits == 15);  // 3 * 5
}

TEST_CASE("codeword norm follows the chi-square law") {
  // ||A beta||^2 / (coeff^2 L) over random (A, beta) is chi-square with n
  // degrees of freedom; one-sample KS at level 0.01 with 10^4 draws.
  const int n = 16;
  const int L = 3;
  const long long M = 4;
  const double coeff = 0.37;
  SplitMix64 rng(20250808);
  const int samples = 10000;
  std::vector<double> stats;
  stats.reserve(samples);
  for (int t = 0; t < samples; ++t) {
    const DesignMatrix A(n, L, M, rng.next());
    BetaIndex beta;
    for (int l = 0; l < L; ++l) {
      beta.sections.push_back(static_cast<std::int32_t>(rng.next() % M));
    }
    const std::vector<double> cw = synthesize_codeword(A, beta, coeff);
    double raw = 0.0;
    for (const double x : cw) raw += x * x;
    stats.push_back(raw / (coeff * coeff * L));
  }
  std::sort(stats.begin(), stats.end());
  double ks = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double cdf = gamma_p(0.5 * n, 0.5 * stats[static_cast<std::size_t>(i)]);
    ks = std::max(ks, std::fabs(cdf - (i + 1.0) / samples));
    ks = std::max(ks, std::fabs(cdf - static_cast<double>(i) / samples));
  }
  // asymptotic critical value at level 0.01
  CHECK(ks < 1.628 / std::sqrt(static_cast<double>(samples)));
}
