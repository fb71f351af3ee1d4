// Seeded Monte Carlo campaigns confronting the closed-form machinery
// with the simulation modules at desk scale, plus the exact chi-square
// tail oracle and the achievable-rate curve table. Campaign outputs are
// deterministic functions of the configuration: identical configs give
// byte-identical CSV.

#ifndef SPARC_EXPERIMENTS_HPP
#define SPARC_EXPERIMENTS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sparc/sparc_core.hpp"

namespace sparc {

enum class ExperimentKind { pe_sweep, second_mom, stylized, ld_rate, rate_curves };

const char* to_string(ExperimentKind kind);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::pe_sweep;
  int trials = 1;
  std::uint64_t base_seed = 0;
  std::vector<double> grid;

  // SPARC geometry and source model (pe_sweep, second_mom). When L and M
  // are set they override derivation from (n, grid R, b).
  int n = 0;
  double b = 0.0;
  int L = 0;
  long long M = 0;
  double sigma2 = 1.0;
  double D = 0.0;
  double gamma2 = 0.0;
  double rho2 = 0.0;
  std::uint64_t budget = std::uint64_t{1} << 24;
  int threads = 1;

  // Two-type model (stylized). stylized_N = 0 selects ceil(e^{2n}).
  int stylized_n = 0;
  double stylized_N = 0.0;

  // Block lengths for the chi-square tail table (ld_rate).
  std::vector<int> n_grid;

  // Parses a JSON document; collects every offending field into one
  // domain_error message.
  static ExperimentConfig from_json_text(const std::string& text);

  // Canonical JSON form used for the manifest and the config hash.
  std::string to_json_text() const;
};

struct TrialRecord {
  std::uint64_t seed = 0;
  int grid_index = 0;
  int trial_index = 0;
  double grid_value = 0.0;
  EncodeStatus status = EncodeStatus::norm_overflow;
  double distortion_tilde = 0.0;
  double distortion_total = 0.0;
  long long x = -1;      // solution count where measured
  int eps_good = -1;     // 1/0 where measured
  double runtime_ms = 0; // never serialized into CSV
};

struct WilsonInterval {
  double lo = 0.0;
  double hi = 0.0;
};
// 95% Wilson score interval for a binomial proportion.
WilsonInterval wilson95(long long successes, long long trials);

struct PeSweepRow {
  int grid_index = 0;
  double r_nominal = 0.0;
  int n = 0;
  int L = 0;
  long long M = 0;
  double r_actual = 0.0;
  long long bits_total = 0;
  int trials = 0;
  int overflow_count = 0;
  int trivial_count = 0;
  int coded_count = 0;
  int err_strict = 0;   // distortion_total > D
  int err_slack = 0;    // distortion_total > D + per-trial triangle slack
  double pe_strict = 0.0;
  WilsonInterval ci_strict;
  double pe_slack = 0.0;
  WilsonInterval ci_slack;
  double mean_distortion_coded = 0.0;
  bool triangle_ok = true;  // every coded trial satisfied the expansion chain
};
std::vector<PeSweepRow> run_pe_sweep(const ExperimentConfig& cfg,
                                     std::vector<TrialRecord>* trial_log = nullptr);

struct SecondMomReport {
  double ex_hat = 0.0;
  double ex_se = 0.0;
  double ex2_hat = 0.0;
  double ex2_se = 0.0;
  double cond_hat = 0.0;
  double cond_se = 0.0;
  long long accepted = 0;
  double residual = 0.0;        // ex2_hat - ex_hat * cond_hat
  double residual_sigma = 0.0;  // |residual| in pooled standard errors
  std::string status;           // "ok" or "inconclusive"
};
SecondMomReport run_second_mom(const ExperimentConfig& cfg);

struct StylizedRow {
  double p = 0.0;
  int n = 0;
  double N = 0.0;
  int trials = 0;
  long long accepted = 0;
  double type2_freq = 0.0;
  double type2_expected = 0.0;
  double type2_z = 0.0;
  double ex_hat = 0.0;
  double ex_closed = 0.0;
  double ex_z = 0.0;
  double cond_hat = 0.0;
  double cond_closed = 0.0;
  double cond_z = 0.0;
  double ratio_hat = 0.0;
  double ratio_closed = 0.0;
  double ratio_z = 0.0;
  double cond_large_hat = 0.0;
  double cond_large_closed = 0.0;
  double cond_large_z = 0.0;
  int regime_case = 0;
  std::string regime;
  std::string status;
};
std::vector<StylizedRow> run_stylized(const ExperimentConfig& cfg);

struct LdRateRow {
  int n = 0;
  double t_over_sigma2 = 0.0;
  double log_tail = 0.0;
  double rate_empirical = 0.0;  // -(1/n) log P(chi2_n >= n t / sigma2)
  double rate_closed = 0.0;
  double gap = 0.0;
  double bound = 0.0;  // 5 log(n) / n
};
std::vector<LdRateRow> run_ld_rate(const ExperimentConfig& cfg);

struct RateCurveRow {
  double d_over_sigma2 = 0.0;
  double r_star = 0.0;
  double r0 = 0.0;
  double gap = 0.0;
};
std::vector<RateCurveRow> emit_rate_curves(double sigma2, std::span<const double> d_grid);

// Exact upper tail P(chi^2_dof >= threshold) via the regularized
// incomplete gamma function, and its log-domain variant for tails that
// underflow a double.
double chi2_upper_tail(int dof, double threshold);
double log_chi2_upper_tail(int dof, double threshold);

// A complete campaign: named CSV contents, the JSON manifest (config,
// config hash, seed-derivation identifier, runtime), and a short summary
// table for the terminal.
struct ExperimentOutput {
  std::vector<std::pair<std::string, std::string>> csv_files;
  std::string manifest_json;
  std::string summary;
};
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

// Doubles rendered with 17 significant digits so emitted text
// round-trips the exact binary value.
std::string fmt_double(double x);

}  // namespace sparc

#endif  // SPARC_EXPERIMENTS_HPP
