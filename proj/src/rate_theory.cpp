#include "sparc/rate_theory.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sparc/log_math.hpp"

namespace sparc {
namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::domain_error(msg);
}

}  // namespace

TheoryPoint TheoryPoint::make(double sigma2, double D, double R, double rho2,
                              double gamma2) {
  TheoryPoint pt;
  pt.sigma2 = sigma2;
  pt.D = D;
  pt.R = R;
  pt.rho2 = rho2;
  pt.gamma2 = gamma2;
  pt.a2 = D * std::exp(2.0 * R);
  pt.validate();
  return pt;
}

void TheoryPoint::validate() const {
  require(D > 0.0, "TheoryPoint: D must be positive");
  require(sigma2 > D, "TheoryPoint: sigma2 must exceed D");
  require(rho2 > D, "TheoryPoint: rho2 must exceed D");
  require(gamma2 > sigma2, "TheoryPoint: gamma2 must exceed sigma2");
  require(a2 == D * std::exp(2.0 * R), "TheoryPoint: a2 must equal D*e^{2R}");
  require(gamma2 < a2, "TheoryPoint: gamma2 must lie below D*e^{2R}");
}

void TheoryPoint::require_rate_above_rd() const {
  require(R > 0.5 * std::log(rho2 / D),
          "TheoryPoint: R must exceed (1/2) log(rho2/D)");
}

double rate_fn(double x, double y, double z) {
  require(x > 0.0 && y > 0.0 && z > 0.0, "rate_fn: arguments must be positive");
  if (z > x + y) return 0.0;
  const double a = std::sqrt(y * y + 4.0 * x * z) - y;
  const double f = (x + z) / (2.0 * y) - x * z / (a * y) - a / (4.0 * y) -
                   0.5 * std::log(a / (2.0 * x));
  // Mathematically nonnegative; clip roundoff noise at the z = x+y edge.
  return f > 0.0 ? f : 0.0;
}

double rate_fn(const RateFnArgs& args) { return rate_fn(args.x, args.y, args.z); }

double rate_fn_chernoff(double x, double y, double z) {
  require(x > 0.0 && y > 0.0 && z > 0.0,
          "rate_fn_chernoff: arguments must be positive");
  if (z >= x + y) return 0.0;

  // d/dlambda of the Chernoff objective; strictly decreasing in lambda.
  const auto dphi = [&](double lam) {
    const double w = 1.0 - 2.0 * lam * y;
    return z - x / (w * w) - y / w;
  };

  // dphi(0) = z - x - y < 0 here; expand left until the sign flips.
  double lo = -1.0 / (2.0 * y);
  int guard = 0;
  while (dphi(lo) <= 0.0) {
    lo *= 2.0;
    if (++guard > 200) {
      std::ostringstream os;
      os << "rate_fn_chernoff: bracket failure, lo=" << lo << " dphi(lo)=" << dphi(lo);
      throw std::runtime_error(os.str());
    }
  }
  double hi = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (dphi(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double lam = 0.5 * (lo + hi);
  const double w = 1.0 - 2.0 * lam * y;
  const double value = lam * z - lam * x / w + 0.5 * std::log(w);
  return value > 0.0 ? value : 0.0;
}

ShannonRates shannon_rates(double sigma2, double D) {
  require(D > 0.0 && D < sigma2, "shannon_rates: require 0 < D < sigma2");
  ShannonRates out;
  out.r_star = 0.5 * std::log(sigma2 / D);
  out.r0 = std::max(out.r_star, 1.0 - D / sigma2);
  return out;
}

double critical_ratio() {
  // (1-x) + (1/2) log x is increasing up to x = 1/2 and crosses zero
  // once below it; bisect on (0, 1/2).
  const auto phi = [](double x) { return (1.0 - x) + 0.5 * std::log(x); };
  double lo = 1e-12;
  double hi = 0.5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (phi(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double h_alpha(double alpha, const TheoryPoint& pt) {
  require(alpha > 0.0 && alpha <= 1.0, "h_alpha: alpha must be in (0, 1]");
  require(pt.rho2 > pt.D, "h_alpha: rho2 must exceed D");
  const double denom = 1.0 - alpha * (1.0 - 2.0 * pt.D / pt.rho2);
  const double arg = (1.0 + alpha) / denom;
  require(arg > 0.0, "h_alpha: log argument must be positive");
  return alpha * pt.R - 0.5 * std::log(arg);
}

double delta_alpha_bound(double alpha, const TheoryPoint& pt, int L, double b,
                         double kappa) {
  require(L >= 2, "delta_alpha_bound: L must be at least 2");
  require(b > 0.0, "delta_alpha_bound: b must be positive");
  require(kappa >= 0.0, "delta_alpha_bound: kappa must be nonnegative");
  const double log_l = std::log(static_cast<double>(L));
  const double clause =
      std::min({alpha, 1.0 - alpha, std::log(2.0) / log_l});
  return kappa / static_cast<double>(L) + (pt.R / b) * clause - h_alpha(alpha, pt);
}

double solve_distortion_alpha(double alpha, const TheoryPoint& pt) {
  require(alpha > 0.0 && alpha <= 1.0,
          "solve_distortion_alpha: alpha must be in (0, 1]");
  pt.require_rate_above_rd();

  const double target = pt.R * alpha;
  const double y = (pt.rho2 - pt.D) * alpha;
  const double ub = pt.rho2 * (1.0 - alpha) + pt.D * alpha;
  const auto f_of = [&](double z) { return rate_fn(pt.rho2, y, z); };

  // f is strictly decreasing in z: f(0+) = +inf and f(ub) < target by the
  // concavity of R*alpha - (1/2)log(rho2/ub) in alpha.
  double lo = ub * 1e-12;
  int guard = 0;
  while (f_of(lo) <= target) {
    lo *= 0.0625;
    if (++guard > 300) {
      throw std::runtime_error(
          "solve_distortion_alpha: internal error, no bracket below upper bound");
    }
  }
  double hi = ub;
  if (f_of(hi) >= target) {
    throw std::runtime_error(
        "solve_distortion_alpha: internal error, bound violates bracketing");
  }
  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < 300; ++i) {
    mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (f_of(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return mid;
}

double lambda_alpha(double alpha, const TheoryPoint& pt) {
  require(alpha >= 0.0 && alpha <= 1.0, "lambda_alpha: alpha must be in [0, 1]");
  pt.require_rate_above_rd();
  const double ratio = pt.D / pt.rho2;  // in (0, 1)
  const double common = 0.125 * ratio * ratio * ratio * ratio *
                        (1.0 + ratio) * (1.0 + ratio) * (1.0 - ratio);
  // R - (1/(2a)) log(rho2/(rho2(1-a)+Da)) = R + log1p(-a(1-ratio))/(2a),
  // with the alpha -> 0 limit R - (1-ratio)/2.
  const double inner = alpha == 0.0
                           ? pt.R - 0.5 * (1.0 - ratio)
                           : pt.R + std::log1p(-alpha * (1.0 - ratio)) / (2.0 * alpha);
  const double coef = 2.0 * std::sqrt(pt.rho2 / pt.D) / (pt.rho2 / pt.D - 1.0);
  const double bracket = -1.0 + std::sqrt(1.0 + coef * inner);
  return common * bracket * bracket;
}

double b_min(double x, double R) {
  require(R > 0.0, "b_min: R must be positive");
  require(x > 1.0 && x <= std::exp(2.0 * R),
          "b_min: require 1 < x <= e^{2R}");
  const double inv = 1.0 / x;
  const double inner = R - 0.5 * (1.0 - inv);
  const double bracket =
      -1.0 + std::sqrt(1.0 + 2.0 * std::sqrt(x) / (x - 1.0) * inner);
  const double num = 20.0 * R * x * x * x * x;
  const double den = (1.0 + inv) * (1.0 + inv) * (1.0 - inv) * bracket * bracket;
  return num / den;
}

double c1_const(const TheoryPoint& pt) {
  pt.require_rate_above_rd();
  const double gap = pt.R - 0.5 * std::log(pt.rho2 / pt.D);
  const double rad =
      std::sqrt(pt.R * pt.R + 2.0 * pt.rho2 * gap / (pt.rho2 - pt.D));
  const double bracket = -pt.R + rad;
  return (pt.rho2 - pt.D) / (24.0 * pt.rho2) * bracket * bracket;
}

double eta_xi(int L, double b, double x, double R, TailKind kind) {
  require(L >= 2, "eta_xi: L must be at least 2");
  const double bmin = b_min(x, R);
  const double shift = kind == TailKind::eta ? 1.0 : 1.4;
  const double expo = 2.5 * (b / bmin - shift);
  return std::pow(static_cast<double>(L), -expo);
}

double opt_error_exponent(double sigma2, double D, double R) {
  require(sigma2 > 0.0 && D > 0.0, "opt_error_exponent: require positive inputs");
  const double r_star = 0.5 * std::log(sigma2 / D);
  if (R <= r_star) return 0.0;
  const double u = D * std::exp(2.0 * R) / sigma2;
  return 0.5 * (u - 1.0 - std::log(u));
}

double gaussian_ld_rate(double sigma2, double t) {
  require(sigma2 > 0.0, "gaussian_ld_rate: sigma2 must be positive");
  require(t > sigma2, "gaussian_ld_rate: require t > sigma2");
  const double u = t / sigma2;
  return 0.5 * (u - 1.0 - std::log(u));
}

double suen_bound(double lambda, double delta, double Delta) {
  require(lambda >= 0.0, "suen_bound: lambda must be nonnegative");
  require(delta > 0.0 && Delta > 0.0, "suen_bound: delta, Delta must be positive");
  const double m = std::min(
      {lambda / 2.0, lambda / (6.0 * delta), lambda * lambda / (8.0 * Delta)});
  return std::exp(-m);
}

double suen_lambda_over_delta(int L, long long M) {
  require(L >= 1, "suen_lambda_over_delta: L must be at least 1");
  require(M >= 2, "suen_lambda_over_delta: M must be at least 2");
  // M^L / (M^L - 1 - (M-1)^L) = 1 / (1 - M^{-L} - (1 - 1/M)^L), with the
  // complement of (1-1/M)^L taken through expm1 to dodge cancellation.
  const double dl = static_cast<double>(L);
  const double one_minus_pow =
      -std::expm1(dl * std::log1p(-1.0 / static_cast<double>(M)));
  const double m_to_minus_l = std::exp(-dl * std::log(static_cast<double>(M)));
  const double denom = one_minus_pow - m_to_minus_l;
  require(denom > 0.0, "suen_lambda_over_delta: degenerate geometry");
  return 1.0 / denom;
}

SuenTerms suen_sparc_terms(int L, double b, double xi_val) {
  require(L >= 2, "suen_sparc_terms: L must be at least 2");
  require(b > 1.0, "suen_sparc_terms: b must exceed 1");
  require(xi_val >= 0.0 && xi_val < 1.0, "suen_sparc_terms: xi must be in [0, 1)");
  const double m_real = std::pow(static_cast<double>(L), b);
  if (m_real > 9.0e18) {
    throw std::domain_error("suen_sparc_terms: L^b overflows integer M");
  }
  const long long m = std::max<long long>(2, std::llround(m_real));
  SuenTerms out;
  out.lambda_over_delta = suen_lambda_over_delta(L, m);
  out.lambda2_over_8delta_lb =
      (1.0 - xi_val) * (1.0 - xi_val) * std::pow(static_cast<double>(L), 1.5) / 4.0;
  return out;
}

void StylizedParams::validate() const {
  require(n >= 1, "StylizedParams: n must be at least 1");
  require(p > 0.0, "StylizedParams: p must be positive");
  require(N >= std::exp(2.0 * static_cast<double>(n)),
          "StylizedParams: N must be at least e^{2n}");
}

double stylized_ratio(const StylizedParams& params) {
  params.validate();
  const double n = static_cast<double>(params.n);
  const double p = params.p;
  // With q = e^{-np}, A = 1 - q, u = e^n, the ratio
  //   (A e^{2n} + q e^{4n}) / (A e^n + q e^{2n})^2
  // reduces to 1 + q A (u-1)^2 / (A + q u)^2, nonnegative by inspection.
  const double log_q = -n * p;
  const double log_a = log1m_exp(n * p);
  const double log_u_minus_1 = n + log1m_exp(n);
  const double log_den = log_add_exp(log_a, n * (1.0 - p));
  const double log_extra = log_q + log_a + 2.0 * log_u_minus_1 - 2.0 * log_den;
  return 1.0 + std::exp(log_extra);
}

StylizedCondDist stylized_cond_dist(const StylizedParams& params) {
  params.validate();
  const double n = static_cast<double>(params.n);
  const double p = params.p;
  const double la = log1m_exp(n * p) + n;  // log((1 - e^{-np}) e^n)
  const double lb = n * (2.0 - p);         // log(e^{n(2-p)})
  const double lse = log_add_exp(la, lb);
  StylizedCondDist out;
  out.p_small = std::exp(la - lse);
  out.p_large = std::exp(lb - lse);
  return out;
}

}  // namespace sparc
