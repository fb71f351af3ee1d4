// Closed-form rate-distortion and exponent machinery for sparse
// regression codes: the large-deviation rate function of codeword-to-
// source distance, the Shannon rate curves, the per-overlap distortion
// solver, and the correlation-inequality bookkeeping. All functions are
// pure and safe for concurrent use.

#ifndef SPARC_RATE_THEORY_HPP
#define SPARC_RATE_THEORY_HPP

#include <utility>

namespace sparc {

// Scalar problem parameters shared by the closed-form operations.
//   sigma2  source variance
//   D       target distortion, 0 < D < sigma2
//   R       rate in nats/sample
//   rho2    conditional source power, rho2 > D where used
//   gamma2  norm cutoff, sigma2 < gamma2 < a2
//   a2      exponent power D*e^{2R}, always derived from (D, R)
struct TheoryPoint {
  double sigma2 = 0.0;
  double D = 0.0;
  double R = 0.0;
  double rho2 = 0.0;
  double gamma2 = 0.0;
  double a2 = 0.0;

  static TheoryPoint make(double sigma2, double D, double R, double rho2, double gamma2);

  // Checks the type invariants; throws std::domain_error on violation.
  void validate() const;

  // Throws unless R > (1/2) log(rho2/D), the precondition shared by the
  // solver and exponent operations.
  void require_rate_above_rd() const;
};

// Arguments of the rate function f(x, y, z): per-sample source power x,
// codeword variance y, distortion level z. All strictly positive.
struct RateFnArgs {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// Overlap fraction alpha = r/L kept as an exact rational while indexing
// section grids; converts to double only inside formula evaluation.
struct OverlapFraction {
  int r = 0;
  int L = 1;

  double value() const { return static_cast<double>(r) / static_cast<double>(L); }
  double bar() const { return static_cast<double>(L - r) / static_cast<double>(L); }
};

// Parameters of the two-type solution-count model: structure size n,
// type-2 exponent rate p > 0, total configuration count N >= e^{2n}.
struct StylizedParams {
  int n = 1;
  double p = 1.0;
  double N = 0.0;

  void validate() const;
};

// Exponential decay rate of the probability that an i.i.d. N(0, y)
// codeword lands within distortion z of a power-x sequence. Zero for
// z >= x + y; strictly positive below.
double rate_fn(double x, double y, double z);
double rate_fn(const RateFnArgs& args);

// Same exponent obtained by numerically maximizing the Chernoff bound
// lambda*z - lambda*x/(1-2*lambda*y) + (1/2)ln(1-2*lambda*y) over
// lambda < 0. Independent verification route for rate_fn.
double rate_fn_chernoff(double x, double y, double z);

struct ShannonRates {
  double r_star = 0.0;  // (1/2) log(sigma2/D)
  double r0 = 0.0;      // max{r_star, 1 - D/sigma2}
};
ShannonRates shannon_rates(double sigma2, double D);

// Root x* of (1 - x) + (1/2) log x = 0 in (0, 1); the distortion ratio
// below which the two achievable-rate curves coincide.
double critical_ratio();

// h(alpha) = alpha*R - (1/2) log((1+alpha)/(1 - alpha(1 - 2D/rho2))).
double h_alpha(double alpha, const TheoryPoint& pt);

// Upper bound on the conditional solution-count exponent:
// kappa/L + (R/b) min{alpha, 1-alpha, log2/logL} - h(alpha).
// kappa is caller-supplied; the generic constant is not pinned here.
double delta_alpha_bound(double alpha, const TheoryPoint& pt, int L, double b,
                         double kappa);

// D_alpha: the root of R*alpha = f(rho2, (rho2-D)*alpha, D_alpha),
// located by bisection inside (0, rho2*(1-alpha) + D*alpha).
double solve_distortion_alpha(double alpha, const TheoryPoint& pt);

// Lambda(alpha) for alpha in [0, 1]; alpha = 0 selects the analytic
// limit. Strictly positive and strictly decreasing on (0, 1].
double lambda_alpha(double alpha, const TheoryPoint& pt);

// Minimum section exponent b for x = rho2/D (or gamma2/D), defined for
// 1 < x <= e^{2R}; strictly increasing in x.
double b_min(double x, double R);

// Positive constant lower-bounding the exponent gap when D_alpha <= D.
double c1_const(const TheoryPoint& pt);

// Tail exponents of the good-solution lemmas, as powers of L:
//   eta = L^{-2.5 (b/b_min(x) - 1)}
//   xi  = L^{-2.5 (b/b_min(x) - 7/5)}
enum class TailKind { eta, xi };
double eta_xi(int L, double b, double x, double R, TailKind kind);

// Optimal excess-distortion exponent of the i.i.d. Gaussian source:
// (1/2)(a2/sigma2 - 1 - log(a2/sigma2)) above R*(D), zero at or below.
double opt_error_exponent(double sigma2, double D, double R);

// Cramer rate of P(|S|^2 >= t) for an i.i.d. N(0, sigma2) source,
// t > sigma2: (1/2)(t/sigma2 - 1 - log(t/sigma2)).
double gaussian_ld_rate(double sigma2, double t);

// Suen correlation-inequality bound exp(-min{l/2, l/(6d), l^2/(8Dl)}).
double suen_bound(double lambda, double delta, double Delta);

// Exact lambda/delta ratio M^L / (M^L - 1 - (M-1)^L), computed in the
// log domain so large (L, M) never overflow.
double suen_lambda_over_delta(int L, long long M);

struct SuenTerms {
  double lambda_over_delta = 0.0;      // exact ratio with M = round(L^b)
  double lambda2_over_8delta_lb = 0.0; // (1-xi)^2 L^{3/2} / 4
};
SuenTerms suen_sparc_terms(int L, double b, double xi_val);

// E[X | U1=1] / E[X] of the two-type model, computed in the log domain.
// Always >= 1.
double stylized_ratio(const StylizedParams& params);

struct StylizedCondDist {
  double p_small = 0.0;  // P(X = e^n   | U1 = 1)
  double p_large = 0.0;  // P(X = e^{2n}| U1 = 1)
};
StylizedCondDist stylized_cond_dist(const StylizedParams& params);

}  // namespace sparc

#endif  // SPARC_RATE_THEORY_HPP
