#include "sparc/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "sparc/counting.hpp"
#include "sparc/log_math.hpp"
#include "sparc/rate_theory.hpp"
#include "sparc/rng.hpp"
#include "sparc/special.hpp"

namespace sparc {
namespace {

using nlohmann::json;

constexpr const char* kArtifactVersion = "1.0.0";
constexpr const char* kSeedAlgorithm = "splitmix64-mix-v1";

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (const unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

// Tracks per-trial seeds and rejects collisions, so the derived-seed map
// stays injective over a run.
class SeedRegistry {
 public:
  std::uint64_t derive(std::uint64_t base, std::uint64_t stream, std::uint64_t trial) {
    const std::uint64_t seed = derive_seed(base, stream, trial);
    if (!seen_.insert(seed).second) {
      throw std::runtime_error("derived seed collision detected within run");
    }
    return seed;
  }

 private:
  std::unordered_set<std::uint64_t> seen_;
};

std::vector<double> gaussian_vector(std::uint64_t seed, int n, double sigma) {
  GaussianStream g(seed);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (double& x : out) x = sigma * g.next();
  return out;
}

struct CsvBuilder {
  std::string text;

  void row_raw(const std::string& line) {
    text += line;
    text += '\n';
  }
};

const char* regime_label(int regime_case) {
  switch (regime_case) {
    case 1: return "second-mom-succeeds";
    case 2: return "conditional-count-inflated";
    case 3: return "condensation";
  }
  return "unknown";
}

void append_errors(std::vector<std::string>& errors, bool ok, const std::string& msg) {
  if (!ok) errors.push_back(msg);
}

}  // namespace

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::pe_sweep: return "pe_sweep";
    case ExperimentKind::second_mom: return "second_mom";
    case ExperimentKind::stylized: return "stylized";
    case ExperimentKind::ld_rate: return "ld_rate";
    case ExperimentKind::rate_curves: return "rate_curves";
  }
  return "unknown";
}

WilsonInterval wilson95(long long successes, long long trials) {
  if (trials <= 0) throw std::domain_error("wilson95: trials must be positive");
  const double z = 1.959963984540054;
  const double nn = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double hw = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  WilsonInterval w;
  w.lo = successes == 0 ? 0.0 : std::max(0.0, center - hw);
  w.hi = successes == trials ? 1.0 : std::min(1.0, center + hw);
  return w;
}

double chi2_upper_tail(int dof, double threshold) {
  if (dof < 1) throw std::domain_error("chi2_upper_tail: dof must be at least 1");
  if (threshold < 0.0) throw std::domain_error("chi2_upper_tail: threshold must be nonnegative");
  return gamma_q(0.5 * static_cast<double>(dof), 0.5 * threshold);
}

double log_chi2_upper_tail(int dof, double threshold) {
  if (dof < 1) throw std::domain_error("log_chi2_upper_tail: dof must be at least 1");
  if (threshold < 0.0) throw std::domain_error("log_chi2_upper_tail: threshold must be nonnegative");
  return log_gamma_q(0.5 * static_cast<double>(dof), 0.5 * threshold);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::domain_error(std::string("config: JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw std::domain_error("config: document must be a JSON object");

  static const std::unordered_set<std::string> known = {
      "kind",   "trials", "base_seed", "grid",       "n",          "b",
      "L",      "M",      "sigma2",    "D",          "gamma2",     "rho2",
      "budget", "threads", "stylized_n", "stylized_N", "n_grid"};

  std::vector<std::string> errors;
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) errors.push_back("unknown field: " + item.key());
  }

  ExperimentConfig cfg;
  const auto get = [&](const char* key, auto& target, bool required) {
    if (!j.contains(key)) {
      if (required) errors.push_back(std::string(key) + ": missing");
      return;
    }
    try {
      j.at(key).get_to(target);
    } catch (const json::exception&) {
      errors.push_back(std::string(key) + ": wrong type");
    }
  };

  std::string kind_str;
  get("kind", kind_str, true);
  if (kind_str == "pe_sweep") cfg.kind = ExperimentKind::pe_sweep;
  else if (kind_str == "second_mom") cfg.kind = ExperimentKind::second_mom;
  else if (kind_str == "stylized") cfg.kind = ExperimentKind::stylized;
  else if (kind_str == "ld_rate") cfg.kind = ExperimentKind::ld_rate;
  else if (kind_str == "rate_curves") cfg.kind = ExperimentKind::rate_curves;
  else if (!kind_str.empty())
    errors.push_back("kind: must be one of pe_sweep|second_mom|stylized|ld_rate|rate_curves");

  get("trials", cfg.trials, false);
  get("base_seed", cfg.base_seed, false);
  get("grid", cfg.grid, false);
  get("n", cfg.n, false);
  get("b", cfg.b, false);
  get("L", cfg.L, false);
  get("M", cfg.M, false);
  get("sigma2", cfg.sigma2, false);
  get("D", cfg.D, false);
  get("gamma2", cfg.gamma2, false);
  get("rho2", cfg.rho2, false);
  get("budget", cfg.budget, false);
  get("threads", cfg.threads, false);
  get("stylized_n", cfg.stylized_n, false);
  get("stylized_N", cfg.stylized_N, false);
  get("n_grid", cfg.n_grid, false);

  if (cfg.kind == ExperimentKind::second_mom && cfg.grid.empty()) cfg.grid = {1.0};

  append_errors(errors, cfg.trials >= 1, "trials: must be at least 1");
  append_errors(errors, !cfg.grid.empty(), "grid: must be nonempty");
  append_errors(errors, cfg.threads >= 1, "threads: must be at least 1");
  append_errors(errors, cfg.budget >= 1, "budget: must be at least 1");

  switch (cfg.kind) {
    case ExperimentKind::pe_sweep:
      append_errors(errors, cfg.n >= 8, "n: must be at least 8");
      append_errors(errors, cfg.b > 1.0, "b: must exceed 1");
      append_errors(errors, cfg.sigma2 > 0.0, "sigma2: must be positive");
      append_errors(errors, cfg.D > 0.0, "D: must be positive");
      append_errors(errors, cfg.gamma2 > cfg.D, "gamma2: must exceed D");
      for (const double r : cfg.grid) {
        append_errors(errors, r > 0.0, "grid: rate values must be positive");
      }
      break;
    case ExperimentKind::second_mom:
      append_errors(errors, cfg.n >= 1, "n: must be at least 1");
      append_errors(errors, cfg.L >= 1, "L: must be at least 1");
      append_errors(errors, cfg.M >= 2, "M: must be at least 2");
      append_errors(errors, cfg.D > 0.0, "D: must be positive");
      append_errors(errors, cfg.rho2 > 0.0, "rho2: must be positive");
      if (cfg.L >= 1 && cfg.M >= 2) {
        const double book = static_cast<double>(cfg.L) * std::log(static_cast<double>(cfg.M));
        append_errors(errors, book <= std::log(4096.0),
                      "L,M: second_mom requires M^L <= 4096");
      }
      break;
    case ExperimentKind::stylized:
      append_errors(errors, cfg.stylized_n >= 1, "stylized_n: must be at least 1");
      for (const double p : cfg.grid) {
        append_errors(errors, p > 0.0, "grid: p values must be positive");
      }
      if (cfg.stylized_N > 0.0 && cfg.stylized_n >= 1) {
        append_errors(errors,
                      cfg.stylized_N >= std::exp(2.0 * cfg.stylized_n),
                      "stylized_N: must be at least e^{2n}");
      }
      break;
    case ExperimentKind::ld_rate:
      append_errors(errors, !cfg.n_grid.empty(), "n_grid: must be nonempty");
      for (const int nn : cfg.n_grid) {
        append_errors(errors, nn >= 1, "n_grid: entries must be at least 1");
      }
      append_errors(errors, cfg.sigma2 > 0.0, "sigma2: must be positive");
      for (const double u : cfg.grid) {
        append_errors(errors, u > 1.0, "grid: t/sigma2 values must exceed 1");
      }
      break;
    case ExperimentKind::rate_curves:
      append_errors(errors, cfg.sigma2 > 0.0, "sigma2: must be positive");
      for (const double d : cfg.grid) {
        append_errors(errors, d > 0.0 && d < cfg.sigma2,
                      "grid: distortions must lie in (0, sigma2)");
      }
      break;
  }

  if (!errors.empty()) {
    std::ostringstream os;
    os << "config validation failed:";
    for (const std::string& e : errors) os << "\n  - " << e;
    throw std::domain_error(os.str());
  }
  return cfg;
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["kind"] = to_string(kind);
  j["trials"] = trials;
  j["base_seed"] = base_seed;
  j["grid"] = grid;
  j["n"] = n;
  j["b"] = b;
  j["L"] = L;
  j["M"] = M;
  j["sigma2"] = sigma2;
  j["D"] = D;
  j["gamma2"] = gamma2;
  j["rho2"] = rho2;
  j["budget"] = budget;
  j["threads"] = threads;
  j["stylized_n"] = stylized_n;
  j["stylized_N"] = stylized_N;
  j["n_grid"] = n_grid;
  return j.dump(2);
}

std::vector<PeSweepRow> run_pe_sweep(const ExperimentConfig& cfg,
                                     std::vector<TrialRecord>* trial_log) {
  if (cfg.kind != ExperimentKind::pe_sweep) {
    throw std::domain_error("run_pe_sweep: config kind mismatch");
  }
  SeedRegistry seeds;
  std::vector<PeSweepRow> rows;
  const double sigma = std::sqrt(cfg.sigma2);

  for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
    const double r_nominal = cfg.grid[g];
    const SparcParams params = derive_dimensions(cfg.n, r_nominal, cfg.b);
    if (std::fabs(params.r_actual - r_nominal) > 0.5 * r_nominal) {
      std::ostringstream os;
      os << "run_pe_sweep: grid point " << g << " (R=" << r_nominal
         << ") yields R_actual=" << params.r_actual << ", drift above 50%";
      throw std::domain_error(os.str());
    }

    PeSweepRow row;
    row.grid_index = static_cast<int>(g);
    row.r_nominal = r_nominal;
    row.n = params.n;
    row.L = params.L;
    row.M = params.M;
    row.r_actual = params.r_actual;
    row.bits_total = payload_bits(params).total;
    row.trials = cfg.trials;

    double coded_distortion_sum = 0.0;
    SearchOptions opts;
    opts.budget = cfg.budget;
    opts.threads = cfg.threads;

    for (int t = 0; t < cfg.trials; ++t) {
      const auto t0 = std::chrono::steady_clock::now();
      const std::uint64_t seed = seeds.derive(cfg.base_seed, g, static_cast<std::uint64_t>(t));
      const DesignMatrix A(params.n, params.L, params.M, mix_key(seed, 1));
      const std::vector<double> source = gaussian_vector(mix_key(seed, 2), params.n, sigma);
      const EncodeOutcome outcome = encode(source, A, cfg.D, cfg.gamma2, opts);

      bool strict_err = false;
      bool slack_err = false;
      switch (outcome.status) {
        case EncodeStatus::norm_overflow:
          ++row.overflow_count;
          strict_err = true;
          slack_err = true;
          break;
        case EncodeStatus::trivial_zero:
          ++row.trivial_count;
          break;
        case EncodeStatus::coded: {
          ++row.coded_count;
          coded_distortion_sum += outcome.distortion_total;
          // Per-trial expansion chain:
          // |S - S_hat|^2 <= |S - S_tilde|^2 + 2|S - S_tilde||S_tilde - S_hat| + |S_tilde - S_hat|^2
          const double ssq = normalized_sq_norm(source);
          const QuantizerResult qr = scalar_quantize(ssq, cfg.D, cfg.gamma2, params.n);
          const double scale = std::sqrt(qr.value / ssq);
          double dq_acc = 0.0;
          for (const double x : source) {
            const double d = x - scale * x;
            dq_acc += d * d;
          }
          const double dq = dq_acc / static_cast<double>(params.n);
          const double cross = 2.0 * std::sqrt(dq) * std::sqrt(outcome.distortion_tilde);
          const double slack = dq + cross;
          const double rhs = slack + outcome.distortion_tilde;
          if (outcome.distortion_total > rhs * (1.0 + 1e-9) + 1e-12) {
            row.triangle_ok = false;
          }
          strict_err = outcome.distortion_total > cfg.D;
          slack_err = outcome.distortion_total > cfg.D + slack;
          break;
        }
      }
      row.err_strict += strict_err ? 1 : 0;
      row.err_slack += slack_err ? 1 : 0;

      if (trial_log != nullptr) {
        TrialRecord rec;
        rec.seed = seed;
        rec.grid_index = static_cast<int>(g);
        rec.trial_index = t;
        rec.grid_value = r_nominal;
        rec.status = outcome.status;
        rec.distortion_tilde = outcome.distortion_tilde;
        rec.distortion_total = outcome.distortion_total;
        rec.runtime_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
        trial_log->push_back(std::move(rec));
      }
    }

    row.pe_strict = static_cast<double>(row.err_strict) / cfg.trials;
    row.ci_strict = wilson95(row.err_strict, cfg.trials);
    row.pe_slack = static_cast<double>(row.err_slack) / cfg.trials;
    row.ci_slack = wilson95(row.err_slack, cfg.trials);
    row.mean_distortion_coded =
        row.coded_count > 0 ? coded_distortion_sum / row.coded_count
                            : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(std::move(row));
  }
  return rows;
}

SecondMomReport run_second_mom(const ExperimentConfig& cfg) {
  if (cfg.kind != ExperimentKind::second_mom) {
    throw std::domain_error("run_second_mom: config kind mismatch");
  }
  SeedRegistry seeds;
  const int n = cfg.n;
  const int L = cfg.L;
  const long long M = cfg.M;
  // D >= rho2 degenerates to the zero codebook: every codeword is the
  // zero vector and all M^L of them count as solutions.
  const double coeff = std::sqrt(std::max(cfg.rho2 - cfg.D, 0.0) / static_cast<double>(L));
  const std::vector<double> s_tilde(static_cast<std::size_t>(n), std::sqrt(cfg.rho2));
  const double raw_threshold = cfg.D * static_cast<double>(n);

  BetaIndex beta_ref;
  beta_ref.sections.assign(static_cast<std::size_t>(L), 0);

  // Unconditional stream: moments of X up to fourth order.
  double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (int t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed = seeds.derive(cfg.base_seed, 0, static_cast<std::uint64_t>(t));
    const DesignMatrix A(n, L, M, seed);
    const double x = static_cast<double>(count_solutions(s_tilde, A, cfg.D, coeff, cfg.budget));
    m1 += x;
    m2 += x * x;
    m3 += x * x * x;
    m4 += x * x * x * x;
  }
  const double T = static_cast<double>(cfg.trials);
  const double ex_hat = m1 / T;
  const double ex2_hat = m2 / T;
  const double var_x = std::max(0.0, m2 / T - ex_hat * ex_hat);
  const double var_x2 = std::max(0.0, m4 / T - ex2_hat * ex2_hat);
  const double cov_x2_x = m3 / T - ex2_hat * ex_hat;

  // Conditional stream: rejection on the fixed reference being a solution.
  long long accepted = 0;
  double c1 = 0.0, c2 = 0.0;
  for (int t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed = seeds.derive(cfg.base_seed, 1, static_cast<std::uint64_t>(t));
    const DesignMatrix A(n, L, M, seed);
    const std::vector<double> cw = synthesize_codeword(A, beta_ref, coeff);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = s_tilde[static_cast<std::size_t>(i)] - cw[static_cast<std::size_t>(i)];
      acc += d * d;
    }
    if (acc > raw_threshold) continue;
    ++accepted;
    const double x = static_cast<double>(count_solutions(s_tilde, A, cfg.D, coeff, cfg.budget));
    c1 += x;
    c2 += x * x;
  }

  SecondMomReport rep;
  rep.ex_hat = ex_hat;
  rep.ex2_hat = ex2_hat;
  rep.ex_se = std::sqrt(var_x / T);
  rep.ex2_se = std::sqrt(var_x2 / T);
  rep.accepted = accepted;
  if (accepted < 100) {
    rep.status = "inconclusive";
    rep.cond_hat = accepted > 0 ? c1 / static_cast<double>(accepted)
                                : std::numeric_limits<double>::quiet_NaN();
    rep.cond_se = std::numeric_limits<double>::quiet_NaN();
    rep.residual = std::numeric_limits<double>::quiet_NaN();
    rep.residual_sigma = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  const double K = static_cast<double>(accepted);
  rep.cond_hat = c1 / K;
  const double var_c = std::max(0.0, c2 / K - rep.cond_hat * rep.cond_hat);
  rep.cond_se = std::sqrt(var_c / K);
  rep.residual = ex2_hat - ex_hat * rep.cond_hat;
  const double var_res = std::max(
      0.0, var_x2 / T + rep.cond_hat * rep.cond_hat * var_x / T +
               ex_hat * ex_hat * var_c / K - 2.0 * rep.cond_hat * cov_x2_x / T);
  if (var_res == 0.0) {
    rep.residual_sigma = rep.residual == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    rep.residual_sigma = std::fabs(rep.residual) / std::sqrt(var_res);
  }
  rep.status = "ok";
  return rep;
}

std::vector<StylizedRow> run_stylized(const ExperimentConfig& cfg) {
  if (cfg.kind != ExperimentKind::stylized) {
    throw std::domain_error("run_stylized: config kind mismatch");
  }
  SeedRegistry seeds;
  std::vector<StylizedRow> rows;
  const int n = cfg.stylized_n;
  const double en = std::exp(static_cast<double>(n));
  const double e2n = std::exp(2.0 * static_cast<double>(n));
  const double N = cfg.stylized_N > 0.0 ? cfg.stylized_N : std::ceil(e2n);

  for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
    const double p = cfg.grid[g];
    StylizedParams params;
    params.n = n;
    params.p = p;
    params.N = N;
    params.validate();

    const double q = std::exp(-static_cast<double>(n) * p);  // P(type 2)
    const double a = -std::expm1(-static_cast<double>(n) * p);
    const double ex_closed = a * en + q * e2n;
    const double ex2_closed = a * en * en + q * e2n * e2n;
    const double var_x = std::max(0.0, ex2_closed - ex_closed * ex_closed);
    const StylizedCondDist cond = stylized_cond_dist(params);
    const double cond_closed = cond.p_small * en + cond.p_large * e2n;
    const double cond2_closed = cond.p_small * en * en + cond.p_large * e2n * e2n;
    const double var_cond = std::max(0.0, cond2_closed - cond_closed * cond_closed);
    const double ratio_closed = stylized_ratio(params);

    StylizedRow row;
    row.p = p;
    row.n = n;
    row.N = N;
    row.trials = cfg.trials;
    row.type2_expected = q;
    row.cond_large_closed = cond.p_large;
    row.ex_closed = ex_closed;
    row.cond_closed = cond_closed;
    row.ratio_closed = ratio_closed;

    // Unconditional stream.
    long long type2_count = 0;
    double x_sum = 0.0;
    for (int t = 0; t < cfg.trials; ++t) {
      SplitMix64 rng(seeds.derive(cfg.base_seed, 2 * g, static_cast<std::uint64_t>(t)));
      const bool type2 = rng.next_unit_co() < q;
      type2_count += type2 ? 1 : 0;
      x_sum += type2 ? e2n : en;
    }
    const double T = static_cast<double>(cfg.trials);
    row.type2_freq = static_cast<double>(type2_count) / T;
    row.type2_z = (row.type2_freq - q) / std::sqrt(q * (1.0 - q) / T);
    row.ex_hat = x_sum / T;
    row.ex_z = (row.ex_hat - ex_closed) / std::sqrt(var_x / T);

    // Conditional stream: rejection on U1 = 1.
    long long accepted = 0;
    long long accepted_type2 = 0;
    double cx_sum = 0.0;
    for (int t = 0; t < cfg.trials; ++t) {
      SplitMix64 rng(seeds.derive(cfg.base_seed, 2 * g + 1, static_cast<std::uint64_t>(t)));
      const bool type2 = rng.next_unit_co() < q;
      const double pu = (type2 ? e2n : en) / N;
      if (rng.next_unit_co() >= pu) continue;
      ++accepted;
      accepted_type2 += type2 ? 1 : 0;
      cx_sum += type2 ? e2n : en;
    }
    row.accepted = accepted;
    if (accepted < 100) {
      row.status = "inconclusive";
      row.regime_case = p >= 2.0 ? 1 : (p > 1.0 ? 2 : 3);
      row.regime = regime_label(row.regime_case);
      rows.push_back(std::move(row));
      continue;
    }
    const double K = static_cast<double>(accepted);
    row.cond_hat = cx_sum / K;
    row.cond_z = (row.cond_hat - cond_closed) / std::sqrt(var_cond / K);
    row.cond_large_hat = static_cast<double>(accepted_type2) / K;
    row.cond_large_z = (row.cond_large_hat - cond.p_large) /
                       std::sqrt(cond.p_large * (1.0 - cond.p_large) / K);
    row.ratio_hat = row.cond_hat / row.ex_hat;
    const double var_ratio = var_cond / (K * ex_closed * ex_closed) +
                             cond_closed * cond_closed * var_x /
                                 (T * ex_closed * ex_closed * ex_closed * ex_closed);
    row.ratio_z = (row.ratio_hat - ratio_closed) / std::sqrt(var_ratio);
    row.regime_case = p >= 2.0 ? 1 : (p > 1.0 ? 2 : 3);
    row.regime = regime_label(row.regime_case);
    row.status = "ok";
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<LdRateRow> run_ld_rate(const ExperimentConfig& cfg) {
  if (cfg.kind != ExperimentKind::ld_rate) {
    throw std::domain_error("run_ld_rate: config kind mismatch");
  }
  std::vector<LdRateRow> rows;
  for (const int n : cfg.n_grid) {
    for (const double u : cfg.grid) {
      LdRateRow row;
      row.n = n;
      row.t_over_sigma2 = u;
      row.log_tail = log_chi2_upper_tail(n, static_cast<double>(n) * u);
      row.rate_empirical = -row.log_tail / static_cast<double>(n);
      row.rate_closed = gaussian_ld_rate(1.0, u);
      row.gap = std::fabs(row.rate_empirical - row.rate_closed);
      row.bound = 5.0 * std::log(static_cast<double>(n)) / static_cast<double>(n);
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<RateCurveRow> emit_rate_curves(double sigma2, std::span<const double> d_grid) {
  if (!(sigma2 > 0.0)) throw std::domain_error("emit_rate_curves: sigma2 must be positive");
  std::vector<RateCurveRow> rows;
  for (const double d : d_grid) {
    if (!(d > 0.0 && d < sigma2)) {
      throw std::domain_error("emit_rate_curves: distortions must lie in (0, sigma2)");
    }
    const ShannonRates r = shannon_rates(sigma2, d);
    RateCurveRow row;
    row.d_over_sigma2 = d / sigma2;
    row.r_star = r.r_star;
    row.r0 = r.r0;
    row.gap = r.r0 - r.r_star;
    rows.push_back(row);
  }
  return rows;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentOutput out;
  std::ostringstream summary;

  switch (cfg.kind) {
    case ExperimentKind::pe_sweep: {
      std::vector<TrialRecord> trial_log;
      const std::vector<PeSweepRow> rows = run_pe_sweep(cfg, &trial_log);
      CsvBuilder csv;
      csv.row_raw(
          "grid_index,r_nominal,n,L,M,r_actual_nats,bits_total,trials,overflow_count,"
          "trivial_count,coded_count,err_strict,err_slack,pe_strict,pe_strict_lo,"
          "pe_strict_hi,pe_slack,pe_slack_lo,pe_slack_hi,mean_distortion_coded,triangle_ok");
      for (const PeSweepRow& r : rows) {
        std::ostringstream line;
        line << r.grid_index << ',' << fmt_double(r.r_nominal) << ',' << r.n << ','
             << r.L << ',' << r.M << ',' << fmt_double(r.r_actual) << ','
             << r.bits_total << ',' << r.trials << ',' << r.overflow_count << ','
             << r.trivial_count << ',' << r.coded_count << ',' << r.err_strict << ','
             << r.err_slack << ',' << fmt_double(r.pe_strict) << ','
             << fmt_double(r.ci_strict.lo) << ',' << fmt_double(r.ci_strict.hi) << ','
             << fmt_double(r.pe_slack) << ',' << fmt_double(r.ci_slack.lo) << ','
             << fmt_double(r.ci_slack.hi) << ',' << fmt_double(r.mean_distortion_coded)
             << ',' << (r.triangle_ok ? 1 : 0);
        csv.row_raw(line.str());
        summary << "R=" << fmt_double(r.r_nominal) << " (L=" << r.L << ", M=" << r.M
                << ", R_actual=" << fmt_double(r.r_actual)
                << "): pe_slack=" << fmt_double(r.pe_slack) << " ["
                << fmt_double(r.ci_slack.lo) << ", " << fmt_double(r.ci_slack.hi)
                << "], pe_strict=" << fmt_double(r.pe_strict) << "\n";
      }
      out.csv_files.emplace_back("pe_sweep.csv", csv.text);

      CsvBuilder trials_csv;
      trials_csv.row_raw(
          "grid_index,trial_index,seed,grid_value,status,distortion_tilde,distortion_total");
      for (const TrialRecord& rec : trial_log) {
        std::ostringstream line;
        line << rec.grid_index << ',' << rec.trial_index << ',' << rec.seed << ','
             << fmt_double(rec.grid_value) << ',' << to_string(rec.status) << ','
             << fmt_double(rec.distortion_tilde) << ',' << fmt_double(rec.distortion_total);
        trials_csv.row_raw(line.str());
      }
      out.csv_files.emplace_back("trials.csv", trials_csv.text);
      break;
    }
    case ExperimentKind::second_mom: {
      const SecondMomReport rep = run_second_mom(cfg);
      CsvBuilder csv;
      csv.row_raw("ex_hat,ex_se,ex2_hat,ex2_se,cond_hat,cond_se,accepted,residual,"
                  "residual_sigma,status");
      std::ostringstream line;
      line << fmt_double(rep.ex_hat) << ',' << fmt_double(rep.ex_se) << ','
           << fmt_double(rep.ex2_hat) << ',' << fmt_double(rep.ex2_se) << ','
           << fmt_double(rep.cond_hat) << ',' << fmt_double(rep.cond_se) << ','
           << rep.accepted << ',' << fmt_double(rep.residual) << ','
           << fmt_double(rep.residual_sigma) << ',' << rep.status;
      csv.row_raw(line.str());
      out.csv_files.emplace_back("second_mom.csv", csv.text);
      summary << "E[X]=" << fmt_double(rep.ex_hat) << " E[X^2]=" << fmt_double(rep.ex2_hat)
              << " E[X|U1=1]=" << fmt_double(rep.cond_hat) << " accepted=" << rep.accepted
              << " residual=" << fmt_double(rep.residual) << " ("
              << fmt_double(rep.residual_sigma) << " sigma), status=" << rep.status << "\n";
      break;
    }
    case ExperimentKind::stylized: {
      const std::vector<StylizedRow> rows = run_stylized(cfg);
      CsvBuilder csv;
      csv.row_raw("p,n,N,trials,accepted,type2_freq,type2_expected,type2_z,ex_hat,"
                  "ex_closed,ex_z,cond_hat,cond_closed,cond_z,ratio_hat,ratio_closed,"
                  "ratio_z,cond_large_hat,cond_large_closed,cond_large_z,regime_case,"
                  "regime,status");
      for (const StylizedRow& r : rows) {
        std::ostringstream line;
        line << fmt_double(r.p) << ',' << r.n << ',' << fmt_double(r.N) << ',' << r.trials
             << ',' << r.accepted << ',' << fmt_double(r.type2_freq) << ','
             << fmt_double(r.type2_expected) << ',' << fmt_double(r.type2_z) << ','
             << fmt_double(r.ex_hat) << ',' << fmt_double(r.ex_closed) << ','
             << fmt_double(r.ex_z) << ',' << fmt_double(r.cond_hat) << ','
             << fmt_double(r.cond_closed) << ',' << fmt_double(r.cond_z) << ','
             << fmt_double(r.ratio_hat) << ',' << fmt_double(r.ratio_closed) << ','
             << fmt_double(r.ratio_z) << ',' << fmt_double(r.cond_large_hat) << ','
             << fmt_double(r.cond_large_closed) << ',' << fmt_double(r.cond_large_z) << ','
             << r.regime_case << ',' << r.regime << ',' << r.status;
        csv.row_raw(line.str());
        summary << "p=" << fmt_double(r.p) << ": regime=" << r.regime
                << " ratio_hat=" << fmt_double(r.ratio_hat) << " (closed "
                << fmt_double(r.ratio_closed) << ", z=" << fmt_double(r.ratio_z)
                << "), accepted=" << r.accepted << ", status=" << r.status << "\n";
      }
      out.csv_files.emplace_back("stylized.csv", csv.text);
      break;
    }
    case ExperimentKind::ld_rate: {
      const std::vector<LdRateRow> rows = run_ld_rate(cfg);
      CsvBuilder csv;
      csv.row_raw("n,t_over_sigma2,log_tail,rate_empirical,rate_closed,gap,bound");
      for (const LdRateRow& r : rows) {
        std::ostringstream line;
        line << r.n << ',' << fmt_double(r.t_over_sigma2) << ',' << fmt_double(r.log_tail)
             << ',' << fmt_double(r.rate_empirical) << ',' << fmt_double(r.rate_closed)
             << ',' << fmt_double(r.gap) << ',' << fmt_double(r.bound);
        csv.row_raw(line.str());
        summary << "n=" << r.n << " t/sigma2=" << fmt_double(r.t_over_sigma2)
                << ": gap=" << fmt_double(r.gap) << " bound=" << fmt_double(r.bound) << "\n";
      }
      out.csv_files.emplace_back("ld_rate.csv", csv.text);
      break;
    }
    case ExperimentKind::rate_curves: {
      const std::vector<RateCurveRow> rows = emit_rate_curves(cfg.sigma2, cfg.grid);
      CsvBuilder csv;
      csv.row_raw("d_over_sigma2,r_star,r0,gap");
      for (const RateCurveRow& r : rows) {
        std::ostringstream line;
        line << fmt_double(r.d_over_sigma2) << ',' << fmt_double(r.r_star) << ','
             << fmt_double(r.r0) << ',' << fmt_double(r.gap);
        csv.row_raw(line.str());
      }
      out.csv_files.emplace_back("rate_curves.csv", csv.text);
      summary << "rate_curves: " << rows.size() << " grid points\n";
      break;
    }
  }

  const double runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  const std::string canonical = cfg.to_json_text();
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical)));
  json manifest;
  manifest["artifact_version"] = kArtifactVersion;
  manifest["seed_algorithm"] = kSeedAlgorithm;
  manifest["config_hash"] = std::string("fnv1a64:") + hash_hex;
  manifest["config"] = json::parse(canonical);
  manifest["runtime_ms"] = runtime_ms;
  out.manifest_json = manifest.dump(2) + "\n";
  out.summary = summary.str();
  return out;
}

}  // namespace sparc
