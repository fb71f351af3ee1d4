// Regularized incomplete gamma functions. Series expansion below the
// a+1 crossover, Lentz continued fraction above it; a log-domain variant
// covers tail probabilities far below the smallest normal double.

#ifndef SPARC_SPECIAL_HPP
#define SPARC_SPECIAL_HPP

namespace sparc {

// Lower regularized incomplete gamma P(a, x).
double gamma_p(double a, double x);

// Upper regularized incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

// log Q(a, x); stays accurate when Q underflows a double.
double log_gamma_q(double a, double x);

// Upper tail of the standard normal, 1 - Phi(u), evaluated with the
// Laplace continued fraction. Independent of gamma_q; used as an oracle.
double normal_upper_tail_cf(double u);

}  // namespace sparc

#endif  // SPARC_SPECIAL_HPP
