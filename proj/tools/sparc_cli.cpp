// Command-line surface for the sparse regression code toolkit: theory
// evaluation, encode/decode round trips, solution censuses, experiment
// campaigns, and the achievable-rate curve table.
//
// Exit codes: 0 success, 2 domain/config error, 3 codeword-budget error.

#include <CLI11.hpp>
#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sparc/counting.hpp"
#include "sparc/errors.hpp"
#include "sparc/experiments.hpp"
#include "sparc/rate_theory.hpp"
#include "sparc/rng.hpp"
#include "sparc/sparc_core.hpp"

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------
// vector file IO: raw little-endian doubles, or CSV with one sample per
// line when the path ends in .csv/.txt

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::uint64_t load_le64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void store_le64(std::uint64_t v, unsigned char* p) {
  for (int i = 0; i < 8; ++i) {
    p[i] = static_cast<unsigned char>(v & 0xff);
    v >>= 8;
  }
}

std::vector<double> read_vector(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::domain_error("cannot open source file: " + path);
  std::vector<double> out;
  if (ends_with(path, ".csv") || ends_with(path, ".txt")) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      out.push_back(std::stod(line));
    }
    return out;
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() % 8 != 0) {
    throw std::domain_error("raw source file length is not a multiple of 8: " + path);
  }
  out.resize(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::bit_cast<double>(load_le64(bytes.data() + 8 * i));
  }
  return out;
}

void write_vector(const std::string& path, const std::vector<double>& v) {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw std::domain_error("cannot open output file: " + path);
  if (ends_with(path, ".csv") || ends_with(path, ".txt")) {
    for (const double x : v) outf << sparc::fmt_double(x) << "\n";
    return;
  }
  std::vector<unsigned char> bytes(v.size() * 8);
  for (std::size_t i = 0; i < v.size(); ++i) {
    store_le64(std::bit_cast<std::uint64_t>(v[i]), bytes.data() + 8 * i);
  }
  outf.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw std::domain_error("cannot open output file: " + path);
  outf << text;
}

// ---------------------------------------------------------------------

void print_resolved(const json& j) {
  std::cerr << "resolved-config: " << j.dump() << "\n";
}

json outcome_to_json(const sparc::EncodeOutcome& o) {
  json j;
  j["status"] = sparc::to_string(o.status);
  if (o.status == sparc::EncodeStatus::coded) {
    j["q_index"] = o.q_index;
    j["beta_hat"] = o.beta_hat.sections;
  } else {
    j["q_index"] = nullptr;
    j["beta_hat"] = nullptr;
  }
  j["coeff"] = o.coeff;
  j["distortion_tilde"] = o.distortion_tilde;  // NaN serializes as null
  j["distortion_total"] = o.distortion_total;
  return j;
}

sparc::EncodeOutcome outcome_from_json(const json& j) {
  sparc::EncodeOutcome o;
  const std::string status = j.at("status").get<std::string>();
  if (status == "norm_overflow") {
    o.status = sparc::EncodeStatus::norm_overflow;
  } else if (status == "trivial_zero") {
    o.status = sparc::EncodeStatus::trivial_zero;
  } else if (status == "coded") {
    o.status = sparc::EncodeStatus::coded;
  } else {
    throw std::domain_error("outcome: unknown status " + status);
  }
  if (o.status == sparc::EncodeStatus::coded) {
    o.q_index = j.at("q_index").get<int>();
    o.beta_hat.sections = j.at("beta_hat").get<std::vector<std::int32_t>>();
  }
  if (j.contains("coeff") && !j.at("coeff").is_null()) o.coeff = j.at("coeff").get<double>();
  const auto get_d = [&](const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    return j.at(key).get<double>();
  };
  o.distortion_tilde = get_d("distortion_tilde");
  o.distortion_total = get_d("distortion_total");
  return o;
}

struct GenerateSpec {
  int n = 0;
  double sigma2 = 1.0;
  std::uint64_t seed = 0;
};

GenerateSpec parse_generate(const std::vector<std::string>& args) {
  GenerateSpec gs;
  gs.n = std::stoi(args.at(0));
  gs.sigma2 = std::stod(args.at(1));
  gs.seed = std::stoull(args.at(2));
  if (gs.n < 1) throw std::domain_error("--generate: n must be at least 1");
  if (!(gs.sigma2 > 0.0)) throw std::domain_error("--generate: sigma2 must be positive");
  return gs;
}

std::vector<double> generate_source(const GenerateSpec& gs) {
  sparc::GaussianStream g(gs.seed);
  std::vector<double> out(static_cast<std::size_t>(gs.n));
  const double sigma = std::sqrt(gs.sigma2);
  for (double& x : out) x = sigma * g.next();
  return out;
}

std::vector<std::int32_t> parse_index_list(const std::string& text) {
  std::vector<std::int32_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

// ---------------------------------------------------------------------
// theory subcommand

struct TheoryFlags {
  std::string op;
  bool all = false;
  double x = 0, y = 0, z = 0;
  double sigma2 = 0, D = 0, R = 0, rho2 = 0, gamma2 = 0;
  double alpha = 0, b = 2.0, kappa = 1.0, t = 0, p = 0, N = 0;
  double lambda = 0, delta = 0, Delta = 0, xi_val = 0, threshold = 0;
  int L = 16, n = 1, dof = 1;
  bool bits = false;
};

sparc::TheoryPoint point_from(const TheoryFlags& f) {
  return sparc::TheoryPoint::make(f.sigma2, f.D, f.R, f.rho2, f.gamma2);
}

int run_theory(const TheoryFlags& f) {
  json inputs;
  json result;
  const double nats_to_bits = 1.4426950408889634;

  if (f.all) {
    const sparc::TheoryPoint pt = point_from(f);
    inputs = {{"sigma2", f.sigma2}, {"D", f.D},           {"R", f.R},
              {"rho2", f.rho2},     {"gamma2", f.gamma2}, {"L", f.L},
              {"b", f.b},           {"kappa", f.kappa}};
    print_resolved(inputs);
    const sparc::ShannonRates sr = sparc::shannon_rates(f.sigma2, f.D);
    json panel;
    panel["r_star"] = sr.r_star;
    panel["r0"] = sr.r0;
    panel["x_star"] = sparc::critical_ratio();
    json d_alpha = json::array();
    json lambda_grid = json::array();
    for (int r = 1; r <= f.L; ++r) {
      const double alpha = static_cast<double>(r) / f.L;
      d_alpha.push_back({{"alpha", alpha},
                         {"value", sparc::solve_distortion_alpha(alpha, pt)}});
    }
    for (int r = 0; r <= f.L; ++r) {
      const double alpha = static_cast<double>(r) / f.L;
      lambda_grid.push_back({{"alpha", alpha}, {"value", sparc::lambda_alpha(alpha, pt)}});
    }
    panel["d_alpha"] = d_alpha;
    panel["lambda"] = lambda_grid;
    panel["b_min"] = sparc::b_min(f.rho2 / f.D, f.R);
    panel["c1"] = sparc::c1_const(pt);
    panel["eta"] = sparc::eta_xi(f.L, f.b, f.rho2 / f.D, f.R, sparc::TailKind::eta);
    panel["xi"] = sparc::eta_xi(f.L, f.b, f.rho2 / f.D, f.R, sparc::TailKind::xi);
    panel["opt_exponent"] = sparc::opt_error_exponent(f.sigma2, f.D, f.R);
    json out = {{"op", "all"}, {"inputs", inputs}, {"values", panel}};
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  const std::string& op = f.op;
  if (op == "f") {
    inputs = {{"x", f.x}, {"y", f.y}, {"z", f.z}};
    result = sparc::rate_fn(f.x, f.y, f.z);
  } else if (op == "f_oracle") {
    inputs = {{"x", f.x}, {"y", f.y}, {"z", f.z}};
    result = sparc::rate_fn_chernoff(f.x, f.y, f.z);
  } else if (op == "shannon") {
    inputs = {{"sigma2", f.sigma2}, {"D", f.D}};
    const sparc::ShannonRates sr = sparc::shannon_rates(f.sigma2, f.D);
    result = {{"r_star", f.bits ? sr.r_star * nats_to_bits : sr.r_star},
              {"r0", f.bits ? sr.r0 * nats_to_bits : sr.r0}};
  } else if (op == "xstar") {
    inputs = json::object();
    result = sparc::critical_ratio();
  } else if (op == "h_alpha") {
    inputs = {{"alpha", f.alpha}, {"R", f.R}, {"D", f.D}, {"rho2", f.rho2}};
    result = sparc::h_alpha(f.alpha, point_from(f));
  } else if (op == "delta_alpha") {
    inputs = {{"alpha", f.alpha}, {"L", f.L}, {"b", f.b}, {"kappa", f.kappa}};
    result = sparc::delta_alpha_bound(f.alpha, point_from(f), f.L, f.b, f.kappa);
  } else if (op == "d_alpha") {
    inputs = {{"alpha", f.alpha}, {"R", f.R}, {"D", f.D}, {"rho2", f.rho2}};
    result = sparc::solve_distortion_alpha(f.alpha, point_from(f));
  } else if (op == "lambda") {
    inputs = {{"alpha", f.alpha}, {"R", f.R}, {"D", f.D}, {"rho2", f.rho2}};
    result = sparc::lambda_alpha(f.alpha, point_from(f));
  } else if (op == "bmin") {
    inputs = {{"x", f.x}, {"R", f.R}};
    result = sparc::b_min(f.x, f.R);
  } else if (op == "c1") {
    inputs = {{"R", f.R}, {"D", f.D}, {"rho2", f.rho2}};
    result = sparc::c1_const(point_from(f));
  } else if (op == "eta" || op == "xi") {
    inputs = {{"L", f.L}, {"b", f.b}, {"x", f.x}, {"R", f.R}};
    result = sparc::eta_xi(f.L, f.b, f.x, f.R,
                           op == "eta" ? sparc::TailKind::eta : sparc::TailKind::xi);
  } else if (op == "opt_exponent") {
    inputs = {{"sigma2", f.sigma2}, {"D", f.D}, {"R", f.R}};
    result = sparc::opt_error_exponent(f.sigma2, f.D, f.R);
  } else if (op == "ld_rate") {
    inputs = {{"sigma2", f.sigma2}, {"t", f.t}};
    result = sparc::gaussian_ld_rate(f.sigma2, f.t);
  } else if (op == "suen") {
    inputs = {{"lambda", f.lambda}, {"delta", f.delta}, {"Delta", f.Delta}};
    result = sparc::suen_bound(f.lambda, f.delta, f.Delta);
  } else if (op == "suen_terms") {
    inputs = {{"L", f.L}, {"b", f.b}, {"xi", f.xi_val}};
    const sparc::SuenTerms st = sparc::suen_sparc_terms(f.L, f.b, f.xi_val);
    result = {{"lambda_over_delta", st.lambda_over_delta},
              {"lambda2_over_8delta_lb", st.lambda2_over_8delta_lb}};
  } else if (op == "stylized_ratio") {
    sparc::StylizedParams sp{f.n, f.p, f.N};
    inputs = {{"n", f.n}, {"p", f.p}, {"N", f.N}};
    result = sparc::stylized_ratio(sp);
  } else if (op == "stylized_cond") {
    sparc::StylizedParams sp{f.n, f.p, f.N};
    inputs = {{"n", f.n}, {"p", f.p}, {"N", f.N}};
    const sparc::StylizedCondDist cd = sparc::stylized_cond_dist(sp);
    result = {{"p_small", cd.p_small}, {"p_large", cd.p_large}};
  } else if (op == "chi2_tail") {
    inputs = {{"dof", f.dof}, {"threshold", f.threshold}};
    result = {{"tail", sparc::chi2_upper_tail(f.dof, f.threshold)},
              {"log_tail", sparc::log_chi2_upper_tail(f.dof, f.threshold)}};
  } else {
    throw std::domain_error("theory: unknown op '" + op + "'");
  }

  print_resolved(inputs);
  json out;
  out["op"] = op;
  out["inputs"] = inputs;
  if (result.is_object()) {
    out["values"] = result;
  } else {
    out["value"] = result;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------
// shared geometry flags for encode/decode/census

struct GeometryFlags {
  int n = 0;
  int L = 0;
  long long M = 0;
  double R = 0.0;
  double b = 0.0;
  std::uint64_t seed = 0;
};

sparc::SparcParams resolve_geometry(const GeometryFlags& g) {
  if (g.L > 0 && g.M > 0) {
    sparc::SparcParams params;
    params.n = g.n;
    params.L = g.L;
    params.M = g.M;
    params.b = g.b > 0 ? g.b
                       : std::log(static_cast<double>(g.M)) /
                             std::log(static_cast<double>(g.L == 1 ? 2 : g.L));
    params.r_nominal = g.R;
    params.r_actual = static_cast<double>(g.L) * std::log(static_cast<double>(g.M)) /
                      static_cast<double>(g.n);
    return params;
  }
  if (g.R > 0.0 && g.b > 1.0) return sparc::derive_dimensions(g.n, g.R, g.b);
  throw std::domain_error("geometry: give either --L and --M, or --R and --b");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse regression code toolkit: exact minimum-distance encoding "
               "at desk scale with the matching rate/exponent calculations",
               "sparc"};
  app.require_subcommand(1);

  // ---- theory ----
  TheoryFlags tf;
  CLI::App* theory = app.add_subcommand("theory", "Evaluate a closed-form quantity");
  theory->add_option("--op", tf.op,
                     "One of: f f_oracle shannon xstar h_alpha delta_alpha d_alpha "
                     "lambda bmin c1 eta xi opt_exponent ld_rate suen suen_terms "
                     "stylized_ratio stylized_cond chi2_tail");
  theory->add_flag("--all", tf.all, "Emit the full panel for a theory point");
  theory->add_option("--x", tf.x, "Rate-function x / b_min argument");
  theory->add_option("--y", tf.y, "Rate-function y");
  theory->add_option("--z", tf.z, "Rate-function z");
  theory->add_option("--sigma2", tf.sigma2, "Source variance");
  theory->add_option("--D", tf.D, "Target distortion");
  theory->add_option("--R", tf.R, "Rate in nats/sample");
  theory->add_option("--rho2", tf.rho2, "Conditional source power");
  theory->add_option("--gamma2", tf.gamma2, "Norm cutoff");
  theory->add_option("--alpha", tf.alpha, "Overlap fraction in (0,1]");
  theory->add_option("--L", tf.L, "Section count / grid size");
  theory->add_option("--b", tf.b, "Section exponent");
  theory->add_option("--kappa", tf.kappa, "Caller-supplied generic constant");
  theory->add_option("--t", tf.t, "Tail threshold for ld_rate");
  theory->add_option("--p", tf.p, "Two-type model exponent rate");
  theory->add_option("--n", tf.n, "Two-type model structure size");
  theory->add_option("--N", tf.N, "Two-type model configuration count");
  theory->add_option("--lambda", tf.lambda, "Suen lambda");
  theory->add_option("--delta", tf.delta, "Suen delta");
  theory->add_option("--Delta", tf.Delta, "Suen Delta");
  theory->add_option("--xi-val", tf.xi_val, "xi value for suen_terms");
  theory->add_option("--dof", tf.dof, "Chi-square degrees of freedom");
  theory->add_option("--threshold", tf.threshold, "Chi-square tail threshold");
  theory->add_flag("--bits", tf.bits, "Report rates in bits instead of nats");

  // ---- encode ----
  GeometryFlags enc_geo;
  std::string enc_source, enc_out, enc_save_source;
  std::vector<std::string> enc_generate;
  double enc_D = 0, enc_gamma2 = 0;
  std::uint64_t enc_budget = std::uint64_t{1} << 24;
  int enc_threads = 1;
  bool enc_bits = false;
  CLI::App* enc = app.add_subcommand("encode", "Encode a source block");
  enc->add_option("--n", enc_geo.n, "Block length")->required();
  enc->add_option("--L", enc_geo.L, "Section count");
  enc->add_option("--M", enc_geo.M, "Columns per section");
  enc->add_option("--R", enc_geo.R, "Nominal rate for geometry derivation");
  enc->add_option("--b", enc_geo.b, "Section exponent for geometry derivation");
  enc->add_option("--seed", enc_geo.seed, "Design matrix seed")->required();
  enc->add_option("--D", enc_D, "Target distortion")->required();
  enc->add_option("--gamma2", enc_gamma2, "Norm cutoff")->required();
  enc->add_option("--source", enc_source, "Source file (.f64 raw LE doubles, or .csv)");
  enc->add_option("--generate", enc_generate,
                  "Generate an i.i.d. Gaussian source: n sigma2 seed")
      ->expected(3);
  enc->add_option("--save-source", enc_save_source, "Write the generated source here");
  enc->add_option("--out", enc_out, "EncodeOutcome JSON output path")->required();
  enc->add_option("--budget", enc_budget, "Codeword enumeration cap");
  enc->add_option("--threads", enc_threads, "Search worker threads");
  enc->add_flag("--bits", enc_bits, "Report rates in bits as well");

  // ---- decode ----
  GeometryFlags dec_geo;
  std::string dec_outcome, dec_out;
  double dec_D = 0, dec_gamma2 = 0;
  CLI::App* dec = app.add_subcommand("decode", "Reconstruct from an EncodeOutcome");
  dec->add_option("--n", dec_geo.n, "Block length")->required();
  dec->add_option("--L", dec_geo.L, "Section count")->required();
  dec->add_option("--M", dec_geo.M, "Columns per section")->required();
  dec->add_option("--seed", dec_geo.seed, "Design matrix seed")->required();
  dec->add_option("--D", dec_D, "Target distortion")->required();
  dec->add_option("--gamma2", dec_gamma2, "Norm cutoff")->required();
  dec->add_option("--outcome", dec_outcome, "EncodeOutcome JSON path")->required();
  dec->add_option("--out", dec_out, "Reconstruction output (.f64 or .csv)")->required();

  // ---- census ----
  GeometryFlags cen_geo;
  std::string cen_source, cen_out, cen_csv, cen_ref;
  std::vector<std::string> cen_generate;
  double cen_D = 0, cen_ex_ref = 0, cen_eps = -1;
  std::uint64_t cen_budget = std::uint64_t{1} << 24;
  CLI::App* cen = app.add_subcommand(
      "census", "Count solutions and overlap buckets for a realized (s_tilde, A)");
  cen->add_option("--n", cen_geo.n, "Block length")->required();
  cen->add_option("--L", cen_geo.L, "Section count")->required();
  cen->add_option("--M", cen_geo.M, "Columns per section")->required();
  cen->add_option("--seed", cen_geo.seed, "Design matrix seed")->required();
  cen->add_option("--D", cen_D, "Solution distortion threshold")->required();
  cen->add_option("--source", cen_source, "s_tilde file (.f64 or .csv)");
  cen->add_option("--generate", cen_generate,
                  "Generate an i.i.d. Gaussian s_tilde: n sigma2 seed")
      ->expected(3);
  cen->add_option("--ref", cen_ref,
                  "Reference codeword, comma-separated indices (default: all zeros)");
  cen->add_option("--ex-ref", cen_ex_ref,
                  "External E[X] estimate (default: theory upper bound)");
  cen->add_option("--eps", cen_eps, "Report the eps-goodness classification");
  cen->add_option("--out", cen_out, "Census JSON output path");
  cen->add_option("--csv", cen_csv, "Bucket table CSV output path");
  cen->add_option("--budget", cen_budget, "Codeword enumeration cap");

  // ---- experiment ----
  std::string exp_config, exp_out = ".";
  CLI::App* exp = app.add_subcommand("experiment", "Run a seeded campaign from a config");
  exp->add_option("--config", exp_config, "JSON config path")->required();
  exp->add_option("--out", exp_out, "Output directory for CSV + manifest");

  // ---- curves ----
  double cur_sigma2 = 1.0;
  std::string cur_grid, cur_out;
  CLI::App* cur = app.add_subcommand("curves", "Emit the achievable-rate comparison table");
  cur->add_option("--sigma2", cur_sigma2, "Source variance")->required();
  cur->add_option("--d-grid", cur_grid, "Comma-separated distortion values in (0, sigma2)")
      ->required();
  cur->add_option("--out", cur_out, "CSV output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*theory) {
      if (tf.all != tf.op.empty()) {
        throw std::domain_error("theory: give exactly one of --op or --all");
      }
      return run_theory(tf);
    }

    if (*enc) {
      const sparc::SparcParams params = resolve_geometry(enc_geo);
      std::vector<double> source;
      if (!enc_generate.empty()) {
        const GenerateSpec gs = parse_generate(enc_generate);
        if (gs.n != params.n) {
          throw std::domain_error("--generate n must match the code block length");
        }
        source = generate_source(gs);
        if (!enc_save_source.empty()) write_vector(enc_save_source, source);
      } else if (!enc_source.empty()) {
        source = read_vector(enc_source);
      } else {
        throw std::domain_error("encode: give --source or --generate");
      }
      if (static_cast<int>(source.size()) != params.n) {
        throw std::domain_error("encode: source length does not match --n");
      }
      json resolved = {{"subcommand", "encode"}, {"n", params.n},
                       {"L", params.L},          {"M", params.M},
                       {"seed", enc_geo.seed},   {"D", enc_D},
                       {"gamma2", enc_gamma2},   {"budget", enc_budget},
                       {"threads", enc_threads}};
      print_resolved(resolved);

      const sparc::DesignMatrix A(params.n, params.L, params.M, enc_geo.seed);
      sparc::SearchOptions opts;
      opts.budget = enc_budget;
      opts.threads = enc_threads;
      const sparc::EncodeOutcome outcome = sparc::encode(source, A, enc_D, enc_gamma2, opts);
      write_text(enc_out, outcome_to_json(outcome).dump(2) + "\n");

      const sparc::PayloadBits bits = sparc::payload_bits(params);
      json summary;
      summary["status"] = sparc::to_string(outcome.status);
      summary["distortion_tilde"] = outcome.distortion_tilde;
      summary["distortion_total"] = outcome.distortion_total;
      summary["bits"] = {{"q_bits", bits.q_bits},
                         {"beta_bits", bits.beta_bits},
                         {"total", bits.total}};
      summary["r_actual_nats"] = params.r_actual;
      if (enc_bits) summary["r_actual_bits"] = params.r_actual * 1.4426950408889634;
      summary["outcome_path"] = enc_out;
      std::cout << summary.dump(2) << "\n";
      return 0;
    }

    if (*dec) {
      json resolved = {{"subcommand", "decode"}, {"n", dec_geo.n},
                       {"L", dec_geo.L},         {"M", dec_geo.M},
                       {"seed", dec_geo.seed},   {"D", dec_D},
                       {"gamma2", dec_gamma2}};
      print_resolved(resolved);
      std::ifstream in(dec_outcome);
      if (!in) throw std::domain_error("cannot open outcome file: " + dec_outcome);
      json j = json::parse(in);
      const sparc::EncodeOutcome outcome = outcome_from_json(j);
      const sparc::DesignMatrix A(dec_geo.n, dec_geo.L, dec_geo.M, dec_geo.seed);
      const std::vector<double> recon = sparc::decode(outcome, A, dec_D, dec_gamma2);
      write_vector(dec_out, recon);
      json summary = {{"status", sparc::to_string(outcome.status)},
                      {"samples", dec_geo.n},
                      {"out", dec_out}};
      std::cout << summary.dump(2) << "\n";
      return 0;
    }

    if (*cen) {
      std::vector<double> s_tilde;
      if (!cen_generate.empty()) {
        const GenerateSpec gs = parse_generate(cen_generate);
        if (gs.n != cen_geo.n) {
          throw std::domain_error("--generate n must match --n");
        }
        s_tilde = generate_source(gs);
      } else if (!cen_source.empty()) {
        s_tilde = read_vector(cen_source);
      } else {
        throw std::domain_error("census: give --source or --generate");
      }
      if (static_cast<int>(s_tilde.size()) != cen_geo.n) {
        throw std::domain_error("census: s_tilde length does not match --n");
      }
      const double rho2 = sparc::normalized_sq_norm(s_tilde);
      if (!(rho2 > cen_D)) {
        throw std::domain_error("census: |s_tilde|^2 must exceed D");
      }
      const double coeff = std::sqrt((rho2 - cen_D) / cen_geo.L);
      sparc::BetaIndex ref;
      if (!cen_ref.empty()) {
        ref.sections = parse_index_list(cen_ref);
        if (static_cast<int>(ref.sections.size()) != cen_geo.L) {
          throw std::domain_error("census: --ref must list exactly L indices");
        }
      } else {
        ref.sections.assign(static_cast<std::size_t>(cen_geo.L), 0);
      }

      const double r_actual = static_cast<double>(cen_geo.L) *
                              std::log(static_cast<double>(cen_geo.M)) / cen_geo.n;
      std::string ex_source = "user";
      double ex_ref = cen_ex_ref;
      if (!(ex_ref > 0.0)) {
        ex_ref = std::exp(cen_geo.n * (r_actual - 0.5 * std::log(rho2 / cen_D)));
        ex_source = "theory-upper";
      }
      json resolved = {{"subcommand", "census"}, {"n", cen_geo.n},
                       {"L", cen_geo.L},         {"M", cen_geo.M},
                       {"seed", cen_geo.seed},   {"D", cen_D},
                       {"rho2", rho2},           {"coeff", coeff},
                       {"ex_ref", ex_ref},       {"ex_ref_source", ex_source}};
      print_resolved(resolved);

      const sparc::DesignMatrix A(cen_geo.n, cen_geo.L, cen_geo.M, cen_geo.seed);
      const sparc::SolutionCensus census = sparc::build_census(
          s_tilde, A, cen_D, coeff, ref, ex_ref, ex_source, cen_budget);

      json jc;
      jc["total"] = census.total;
      jc["by_overlap"] = census.by_overlap;
      jc["reference"] = census.reference.sections;
      jc["ex_ref"] = census.ex_ref;
      jc["ex_ref_source"] = census.ex_ref_source;
      if (cen_eps >= 0.0) {
        jc["eps"] = cen_eps;
        jc["eps_good"] = sparc::is_eps_good(census, cen_eps);
      }
      const std::string census_text = jc.dump(2) + "\n";
      if (!cen_out.empty()) write_text(cen_out, census_text);
      std::cout << census_text;

      if (!cen_csv.empty()) {
        std::ostringstream csv;
        csv << "r,alpha,count,census,ratio_to_EXref\n";
        for (std::size_t r = 0; r < census.by_overlap.size(); ++r) {
          const double alpha = static_cast<double>(r) / cen_geo.L;
          csv << r << ',' << sparc::fmt_double(alpha) << ',' << census.by_overlap[r]
              << ','
              << sparc::overlap_census(cen_geo.L, cen_geo.M, static_cast<int>(r)).str()
              << ','
              << sparc::fmt_double(static_cast<double>(census.by_overlap[r]) / ex_ref)
              << "\n";
        }
        write_text(cen_csv, csv.str());
      }
      return 0;
    }

    if (*exp) {
      std::ifstream in(exp_config);
      if (!in) throw std::domain_error("cannot open config file: " + exp_config);
      std::stringstream ss;
      ss << in.rdbuf();
      const sparc::ExperimentConfig cfg = sparc::ExperimentConfig::from_json_text(ss.str());
      print_resolved(json::parse(cfg.to_json_text()));
      const sparc::ExperimentOutput out = sparc::run_experiment(cfg);
      std::filesystem::create_directories(exp_out);
      for (const auto& [name, text] : out.csv_files) {
        write_text((std::filesystem::path(exp_out) / name).string(), text);
      }
      write_text((std::filesystem::path(exp_out) / "manifest.json").string(),
                 out.manifest_json);
      std::cout << out.summary;
      return 0;
    }

    if (*cur) {
      std::vector<double> grid;
      std::stringstream ss(cur_grid);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) grid.push_back(std::stod(item));
      }
      json resolved = {{"subcommand", "curves"}, {"sigma2", cur_sigma2}, {"grid", grid}};
      print_resolved(resolved);
      const std::vector<sparc::RateCurveRow> rows = sparc::emit_rate_curves(cur_sigma2, grid);
      std::ostringstream csv;
      csv << "d_over_sigma2,r_star,r0,gap\n";
      for (const sparc::RateCurveRow& r : rows) {
        csv << sparc::fmt_double(r.d_over_sigma2) << ',' << sparc::fmt_double(r.r_star)
            << ',' << sparc::fmt_double(r.r0) << ',' << sparc::fmt_double(r.gap) << "\n";
      }
      if (cur_out.empty()) {
        std::cout << csv.str();
      } else {
        write_text(cur_out, csv.str());
        std::cout << "wrote " << rows.size() << " rows to " << cur_out << "\n";
      }
      return 0;
    }
  } catch (const sparc::BudgetError& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
