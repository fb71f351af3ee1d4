// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Statistical fixtures (seeds, grids, trial counts) were calibrated once
// with a pilot run and are frozen here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "sparc/counting.hpp"
#include "sparc/experiments.hpp"
#include "sparc/rate_theory.hpp"
#include "sparc/rng.hpp"
#include "sparc/sparc_core.hpp"

using namespace sparc;

namespace {

int g_failures = 0;

class Criterion {
 public:
  Criterion(int index, std::string name)
      : index_(index), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}

  void require(bool cond, const std::string& what) {
    if (!cond && detail_.empty()) detail_ = what;
    ok_ = ok_ && cond;
  }

  void finish() {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::printf("[%s] criterion %d: %s (%.2fs)%s%s\n", ok_ ? "PASS" : "FAIL", index_,
                name_.c_str(), secs, detail_.empty() ? "" : " -- ", detail_.c_str());
    std::fflush(stdout);
    if (!ok_) ++g_failures;
  }

 private:
  int index_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
  bool ok_ = true;
  std::string detail_;
};

template <class F>
double golden_min_arg(F&& fn, double a, double b) {
  const double gr = 0.6180339887498949;
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = fn(x1), f2 = fn(x2);
  for (int i = 0; i < 200 && (b - a) > 1e-12 * (1.0 + std::fabs(a)); ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = fn(x2);
    }
  }
  return 0.5 * (a + b);
}

// Random valid theory point with R above the rate-distortion value.
TheoryPoint random_point(SplitMix64& rng) {
  const double rho2 = 0.6 + 1.4 * rng.next_unit_co();
  const double ratio = 0.15 + 0.65 * rng.next_unit_co();  // D / rho2
  const double d = rho2 * ratio;
  const double rate = 0.5 * std::log(rho2 / d) + 0.02 + rng.next_unit_co();
  const double a2 = d * std::exp(2.0 * rate);
  const double sigma2 = 1.05 * d;
  return TheoryPoint::make(sigma2, d, rate, rho2, 0.5 * (sigma2 + a2));
}

void criterion1_rate_fn_properties() {
  Criterion c(1, "rate function properties and Chernoff oracle");
  SplitMix64 rng(0xace00001);

  for (int i = 0; i < 10000; ++i) {
    const double x = 0.1 + 4.0 * rng.next_unit_co();
    const double y = 0.05 + 3.0 * rng.next_unit_co();
    // property 1: strictly decreasing in z on (0, x+y)
    const double z1 = (x + y) * (0.02 + 0.5 * rng.next_unit_co());
    const double z2 = z1 + (x + y - z1) * (0.05 + 0.9 * rng.next_unit_co());
    c.require(rate_fn(x, y, z1) > rate_fn(x, y, z2), "property 1 (decreasing in z)");
    // property 2: strictly increasing in x on (z, inf)
    const double z = x * (0.05 + 0.9 * rng.next_unit_co());
    const double x2 = x + 0.05 + 2.0 * rng.next_unit_co();
    c.require(rate_fn(x2, y, z) > rate_fn(x, y, z), "property 2 (increasing in x)");
    // identity at y = x - z
    c.require(std::fabs(rate_fn(x, x - z, z) - 0.5 * std::log(x / z)) < 1e-12,
              "identity f(x, x-z, z) = (1/2) log(x/z)");
  }

  // property 3: convexity in y and the pinned minimum, via golden section
  for (int i = 0; i < 10000; ++i) {
    const double x = 0.5 + 2.0 * rng.next_unit_co();
    const double z = x * (0.1 + 0.7 * rng.next_unit_co());
    const double ystar = x - z;
    const auto fy = [&](double y) { return rate_fn(x, y, z); };
    const double y1 = ystar * (0.3 + 0.5 * rng.next_unit_co());
    const double y2 = ystar * (1.2 + 2.0 * rng.next_unit_co());
    c.require(fy(0.5 * (y1 + y2)) <= 0.5 * (fy(y1) + fy(y2)) + 1e-12,
              "property 3 (midpoint convexity in y)");
    const double ymin = golden_min_arg(fy, 0.2 * ystar, 5.0 * ystar);
    c.require(std::fabs(fy(ymin) - 0.5 * std::log(x / z)) < 1e-8,
              "property 3 (minimum value via golden section)");
  }

  // oracle agreement on a 20x20x20 grid spanning both clauses
  for (int ix = 0; ix < 20; ++ix) {
    for (int iy = 0; iy < 20; ++iy) {
      for (int iz = 0; iz < 20; ++iz) {
        const double x = 0.1 + 0.25 * ix;
        const double y = 0.05 + 0.15 * iy;
        const double z = 0.02 + 0.3 * iz;
        const double closed = rate_fn(x, y, z);
        const double oracle = rate_fn_chernoff(x, y, z);
        c.require(std::fabs(closed - oracle) < 1e-8, "Chernoff oracle agreement");
      }
    }
  }
  c.finish();
}

void criterion2_critical_ratio() {
  Criterion c(2, "crossover ratio x*");
  const double xs = critical_ratio();
  c.require(std::fabs((1.0 - xs) + 0.5 * std::log(xs)) < 1e-12, "defining residual");
  c.require(xs >= 0.2025 && xs <= 0.2035, "x* in [0.2025, 0.2035]");
  const ShannonRates sr = shannon_rates(1.0, xs);
  c.require(std::fabs(sr.r_star - sr.r0) < 1e-10, "rate curves meet at x*");
  c.finish();
}

void criterion3_distortion_solver() {
  Criterion c(3, "D_alpha solver residual and upper bound");
  SplitMix64 rng(0xace00003);
  for (int point = 0; point < 10; ++point) {
    const TheoryPoint pt = random_point(rng);
    for (int r = 1; r <= 64; ++r) {
      const OverlapFraction frac{r, 64};
      const double alpha = frac.value();
      const double da = solve_distortion_alpha(alpha, pt);
      const double residual =
          std::fabs(pt.R * alpha - rate_fn(pt.rho2, (pt.rho2 - pt.D) * alpha, da));
      c.require(residual < 1e-10, "solver residual below 1e-10");
      c.require(da < pt.rho2 * frac.bar() + pt.D * alpha,
                "D_alpha below rho2(1-alpha) + D alpha");
      c.require(da > 0.0, "D_alpha positive");
    }
  }
  c.finish();
}

void criterion4_lambda_bmin() {
  Criterion c(4, "Lambda endpoints, monotonicity, b_min identity");
  SplitMix64 rng(0xace00004);
  for (int point = 0; point < 10; ++point) {
    const TheoryPoint pt = random_point(rng);
    const double ratio = pt.D / pt.rho2;
    const double common = 0.125 * std::pow(ratio, 4.0) * (1.0 + ratio) * (1.0 + ratio) *
                          (1.0 - ratio);
    const double coef = 2.0 * std::sqrt(pt.rho2 / pt.D) / (pt.rho2 / pt.D - 1.0);
    const double l0 =
        common *
        std::pow(-1.0 + std::sqrt(1.0 + coef * (pt.R - 0.5 * (1.0 - ratio))), 2.0);
    const double l1 =
        common * std::pow(-1.0 + std::sqrt(1.0 + coef * (pt.R - 0.5 * std::log(pt.rho2 / pt.D))),
                          2.0);
    c.require(std::fabs(lambda_alpha(0.0, pt) - l0) < 1e-12, "Lambda(0) closed form");
    c.require(std::fabs(lambda_alpha(1.0, pt) - l1) < 1e-12, "Lambda(1) closed form");

    double prev = lambda_alpha(0.0, pt);
    for (int r = 1; r <= 64; ++r) {
      const double cur = lambda_alpha(r / 64.0, pt);
      c.require(cur < prev, "Lambda strictly decreasing");
      prev = cur;
    }

    const double via_lambda = 2.5 * pt.R / lambda_alpha(0.0, pt);
    const double direct = b_min(pt.rho2 / pt.D, pt.R);
    c.require(std::fabs(direct - via_lambda) <= 1e-10 * std::max(1.0, direct),
              "b_min = 2.5 R / Lambda(0)");
  }
  c.finish();
}

void criterion5_cramer_chi2() {
  Criterion c(5, "chi-square tail converges to the Cramer rate");
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::ld_rate;
  cfg.grid = {1.5, 2.0, 3.0};
  cfg.n_grid = {100, 400, 1600};
  cfg.sigma2 = 1.0;
  const std::vector<LdRateRow> rows = run_ld_rate(cfg);
  for (const double u : cfg.grid) {
    double prev_gap = 1e300;
    for (const LdRateRow& r : rows) {
      if (r.t_over_sigma2 != u) continue;
      c.require(r.gap < prev_gap, "gap decreasing in n");
      prev_gap = r.gap;
      if (r.n == 1600) c.require(r.gap < r.bound, "gap below 5 log(n)/n at n=1600");
    }
  }
  c.finish();
}

void criterion6_combinatorics() {
  Criterion c(6, "overlap census and dependency degree");
  // full pair enumeration at (L=3, M=4): every reference, every r
  const int L = 3, M = 4;
  for (int ref_code = 0; ref_code < 64; ++ref_code) {
    BetaIndex ref;
    int rem = ref_code;
    for (int l = 0; l < L; ++l) {
      ref.sections.push_back(static_cast<std::int32_t>(rem % M));
      rem /= M;
    }
    std::vector<long long> tally(L + 1, 0);
    for (int code = 0; code < 64; ++code) {
      BetaIndex other;
      int orem = code;
      for (int l = 0; l < L; ++l) {
        other.sections.push_back(static_cast<std::int32_t>(orem % M));
        orem /= M;
      }
      ++tally[overlap(ref, other)];
    }
    for (int r = 0; r <= L; ++r) {
      c.require(BigInt(tally[r]) == overlap_census(L, M, r),
                "census equals pair enumeration at (L=3, M=4)");
    }
  }

  // closed form vs r-sum up to L = 20
  SplitMix64 rng(0xace00006);
  for (int l = 1; l <= 20; ++l) {
    for (const long long m : {2ll, 3ll, 17ll, 2 + static_cast<long long>(rng.next() % 500)}) {
      BigInt r_sum = 0;
      for (int r = 1; r <= l - 1; ++r) r_sum += overlap_census(l, m, r);
      r_sum += overlap_census(l, m, l) - 1;
      c.require(dependency_degree(l, m) == r_sum, "degree closed form equals r-sum");
    }
  }
  c.finish();
}

void criterion7_second_moment() {
  Criterion c(7, "second-moment identity E[X^2] = E[X] E[X|U1=1]");
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::second_mom;
  cfg.trials = 100000;
  cfg.base_seed = 0x5eed0007;
  cfg.grid = {1.0};
  cfg.n = 12;
  cfg.L = 2;
  cfg.M = 4;
  cfg.rho2 = 1.0;
  cfg.D = 0.5;
  const SecondMomReport rep = run_second_mom(cfg);
  std::ostringstream os;
  os << "residual_sigma=" << rep.residual_sigma << " accepted=" << rep.accepted;
  c.require(rep.status == "ok", "conditional stream conclusive (>= 100 acceptances)");
  c.require(rep.residual_sigma <= 3.0, "identity within 3 pooled standard errors: " + os.str());
  c.finish();
}

void criterion8_stylized() {
  Criterion c(8, "stylized two-type model matches its closed forms");
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::stylized;
  cfg.trials = 400000;
  cfg.base_seed = 0x5eed0008;
  cfg.grid = {0.5, 1.5, 3.0};
  cfg.stylized_n = 6;
  const std::vector<StylizedRow> rows = run_stylized(cfg);
  c.require(rows.size() == 3, "three grid points");
  const int expected_case[3] = {3, 2, 1};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const StylizedRow& r = rows[i];
    std::ostringstream os;
    os << "p=" << r.p;
    c.require(r.status == "ok", os.str() + " conclusive");
    c.require(std::fabs(r.ratio_z) <= 3.0, os.str() + " ratio within 3 sigma");
    c.require(std::fabs(r.cond_z) <= 3.0, os.str() + " conditional mean within 3 sigma");
    c.require(std::fabs(r.cond_large_z) <= 3.0,
              os.str() + " conditional distribution within 3 sigma");
    c.require(std::fabs(r.ex_z) <= 3.0, os.str() + " unconditional mean within 3 sigma");
    c.require(r.regime_case == expected_case[i], os.str() + " regime classification");
  }
  c.finish();
}

void criterion9_encoder_end_to_end() {
  Criterion c(9, "encoder end-to-end success and distortion chain");
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::pe_sweep;
  cfg.trials = 100;
  cfg.base_seed = 0x5eed0009;
  cfg.grid = {0.21, 0.49, 0.71};
  cfg.n = 20;
  cfg.b = 3.0;
  cfg.sigma2 = 1.0;
  cfg.D = 0.55;
  cfg.gamma2 = 2.0;
  const std::vector<PeSweepRow> rows = run_pe_sweep(cfg);

  const double threshold_rate = shannon_rates(cfg.sigma2, cfg.D).r_star + 0.5;
  bool any_above = false;
  for (const PeSweepRow& r : rows) {
    c.require(r.triangle_ok, "triangle expansion chain holds in every coded trial");
    if (r.r_actual >= threshold_rate) {
      any_above = true;
      std::ostringstream os;
      os << "R_actual=" << r.r_actual << " success=" << (1.0 - r.pe_slack);
      c.require(1.0 - r.pe_slack >= 0.9, "success >= 0.9 above R*(D)+0.5: " + os.str());
    }
  }
  c.require(any_above, "grid reaches R*(D) + 0.5");

  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double hw_i = 0.5 * (rows[i].ci_slack.hi - rows[i].ci_slack.lo);
    const double hw_j = 0.5 * (rows[i + 1].ci_slack.hi - rows[i + 1].ci_slack.lo);
    c.require(rows[i + 1].pe_slack <= rows[i].pe_slack + 2.0 * std::max(hw_i, hw_j),
              "error probability non-increasing in R up to 2 ci95");
  }
  c.finish();
}

void criterion10_determinism() {
  Criterion c(10, "byte-identical experiment reruns");
  const auto check_rerun = [&c](const ExperimentConfig& cfg, const char* what) {
    const ExperimentOutput a = run_experiment(cfg);
    const ExperimentOutput b = run_experiment(cfg);
    c.require(a.csv_files == b.csv_files, std::string(what) + " CSV bytes identical");
  };
  {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::stylized;
    cfg.trials = 20000;
    cfg.base_seed = 0x5eed000a;
    cfg.grid = {0.5, 3.0};
    cfg.stylized_n = 6;
    check_rerun(cfg, "stylized");
  }
  {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::pe_sweep;
    cfg.trials = 20;
    cfg.base_seed = 0x5eed000b;
    cfg.grid = {0.21, 0.49};
    cfg.n = 20;
    cfg.b = 3.0;
    cfg.sigma2 = 1.0;
    cfg.D = 0.55;
    cfg.gamma2 = 2.0;
    check_rerun(cfg, "pe_sweep");
  }
  {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::second_mom;
    cfg.trials = 2000;
    cfg.base_seed = 0x5eed000c;
    cfg.grid = {1.0};
    cfg.n = 10;
    cfg.L = 2;
    cfg.M = 4;
    cfg.rho2 = 1.0;
    cfg.D = 0.55;
    check_rerun(cfg, "second_mom");
  }
  {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::ld_rate;
    cfg.grid = {1.5, 3.0};
    cfg.n_grid = {100, 400};
    check_rerun(cfg, "ld_rate");
  }
  {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::rate_curves;
    cfg.sigma2 = 1.0;
    cfg.grid = {0.1, 0.3, 0.5};
    check_rerun(cfg, "rate_curves");
  }
  c.finish();
}

}  // namespace

int main() {
  criterion1_rate_fn_properties();
  criterion2_critical_ratio();
  criterion3_distortion_solver();
  criterion4_lambda_bmin();
  criterion5_cramer_chi2();
  criterion6_combinatorics();
  criterion7_second_moment();
  criterion8_stylized();
  criterion9_encoder_end_to_end();
  criterion10_determinism();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
