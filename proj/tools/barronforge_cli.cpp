#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "barronforge/analysis.hpp"
#include "barronforge/constructor.hpp"
#include "barronforge/io.hpp"
#include "barronforge/metrics.hpp"
#include "barronforge/sweep.hpp"
#include "barronforge/verify.hpp"

namespace fs = std::filesystem;
using namespace barronforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t env_seed() {
  const char* raw = std::getenv("BARRONFORGE_SEED");
  if (!raw || !*raw) return 0;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(raw, &used);
    if (used != std::string(raw).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("BARRONFORGE_SEED is not an unsigned integer: ") + raw);
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_filename(out.stem().string() + suffix);
  return p;
}

void write_metadata(const fs::path& out, const std::string& command, nlohmann::json resolved) {
  nlohmann::json meta{{"command", command}, {"created_utc", utc_timestamp()}, {"config", std::move(resolved)}};
  write_json_file(sibling(out, ".meta.json"), meta);
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  bool inject_fault = false;
  double fault_size = 1e-3;
};

int cmd_verify(const VerifyArgs& args) {
  VerifyOptions opt;
  opt.seed = env_seed();
  if (args.inject_fault) opt.gamma_bias_fault = args.fault_size;
  const auto results = run_verify_suite(opt);

  bool ok = true;
  std::printf("%-38s %14s %10s %8s  %s\n", "check", "deviation", "tolerance", "seconds", "result");
  for (const auto& r : results) {
    std::printf("%-38s %14.6e %10.1e %8.2f  %s\n", r.name.c_str(), r.value, r.tolerance, r.seconds,
                r.passed ? "PASS" : "FAIL");
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitFailed;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::string config_path;
  std::string out = "sweep.csv";
  std::string svg;
  std::vector<int> dims;
  std::vector<int> ms;
  std::vector<std::uint64_t> seeds;
  std::string variant;
  int quad_points = 0;
  int max_retries = 0;
  int workers = -1;
};

int cmd_sweep(const SweepArgs& args, const CLI::App& sub) {
  SweepConfig config;
  const std::uint64_t base = env_seed();
  config.seeds.clear();
  for (std::uint64_t i = 0; i < 5; ++i) config.seeds.push_back(base + i);
  if (!args.config_path.empty()) merge_sweep_config(config, read_json_file(args.config_path));
  if (sub.count("--dims")) config.dims = args.dims;
  if (sub.count("--ms")) config.ms = args.ms;
  if (sub.count("--seeds")) config.seeds = args.seeds;
  if (sub.count("--variant")) config.variant = parse_variant(args.variant);
  if (sub.count("--quad-points")) config.quad_points = args.quad_points;
  if (sub.count("--max-retries")) config.max_retries = args.max_retries;
  if (sub.count("--workers")) config.workers = args.workers;
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const auto rows = run_sweep(config);
  const auto summaries = summarize_sweep(rows);
  const fs::path out = args.out;
  write_text_file(out, sweep_csv(rows));
  write_text_file(sibling(out, "_summary.csv"), summary_csv(summaries));
  if (!args.svg.empty()) write_text_file(args.svg, sweep_svg(summaries));
  write_metadata(out, "sweep", sweep_config_to_json(config));

  int rejected = 0;
  for (const auto& r : rows) rejected += r.accepted ? 0 : 1;
  for (const auto& s : summaries) {
    std::printf("d=%d  slope %.4f  r2 %.4f\n", s.d, s.fit.slope, s.fit.r2);
  }
  std::printf("%zu cells, %d not accepted, wrote %s\n", rows.size(), rejected, out.string().c_str());
  return kExitOk;
}

// ---------------------------------------------------------------- rademacher

struct RademacherArgs {
  std::string out = "rademacher.csv";
  std::vector<int> ns{64, 256, 1024, 4096};
  RademacherConfig config;
};

int cmd_rademacher(RademacherArgs args, const CLI::App& sub) {
  if (!sub.count("--seed")) args.config.seed = env_seed();
  std::ostringstream csv;
  csv << "n,d,Q,estimate,bound,candidates\n";
  std::vector<std::pair<double, double>> points;
  bool positive = true;
  for (int n : args.ns) {
    RademacherConfig c = args.config;
    c.n = n;
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    const RademacherResult r = rademacher_estimate(c);
    csv << n << ',' << c.d << ',' << csv_number(c.Q) << ',' << csv_number(r.estimate) << ',' << csv_number(r.bound)
        << ',' << r.candidate_count << '\n';
    points.emplace_back(n, r.estimate);
    positive = positive && r.estimate > 0.0;
  }
  write_text_file(args.out, csv.str());

  nlohmann::json resolved{{"ns", args.ns},
                          {"d", args.config.d},
                          {"Q", args.config.Q},
                          {"sigma_draws", args.config.sigma_draws},
                          {"shells", args.config.shells},
                          {"candidates_per_shell", args.config.candidates_per_shell},
                          {"seed", args.config.seed}};
  std::ostringstream fit;
  fit << "quantity,exponent,intercept,r2\n";
  if (positive && points.size() >= 3) {
    const SlopeFit f = slope_fit(points);
    fit << "estimate_vs_n," << csv_number(f.slope) << ',' << csv_number(f.intercept) << ',' << csv_number(f.r2) << '\n';
    std::printf("fitted exponent of estimate vs n: %.4f (r2 %.4f)\n", f.slope, f.r2);
  } else {
    std::printf("no exponent fitted (needs >= 3 sample sizes and positive estimates)\n");
  }
  write_text_file(sibling(args.out, "_fit.csv"), fit.str());
  write_metadata(args.out, "rademacher", resolved);
  std::printf("wrote %s\n", args.out.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------- embedding

struct EmbeddingArgs {
  std::string out = "embedding.csv";
  std::string construction = "prop42";
  ShellSpectrum spec;
};

int cmd_embedding(EmbeddingArgs args) {
  if (args.construction == "prop42") {
    args.spec.construction = ShellSpectrum::Construction::Prop42;
  } else if (args.construction == "prop43") {
    args.spec.construction = ShellSpectrum::Construction::Prop43;
  } else {
    throw UsageError("construction must be prop42 or prop43");
  }
  EmbeddingTable table;
  try {
    table = embedding_series(args.spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  std::ostringstream csv;
  csv << "k,hs_increment_log2,hs_partial_log2,blog_increment_log2,blog_partial_log2\n";
  for (const auto& r : table.rows) {
    csv << r.k << ',' << csv_number(r.hs_increment_log2) << ',' << csv_number(r.hs_partial_log2) << ','
        << csv_number(r.blog_increment_log2) << ',' << csv_number(r.blog_partial_log2) << '\n';
  }
  write_text_file(args.out, csv.str());

  std::ostringstream verdicts;
  verdicts << "series,convergent,increment_test,model,ratio,power_exponent\n";
  auto line = [&](const char* name, const SeriesVerdict& v) {
    verdicts << name << ',' << (v.convergent ? 1 : 0) << ',' << (v.increment_test ? 1 : 0) << ','
             << (v.model == SeriesVerdict::Model::Geometric ? "geometric" : "power") << ',' << csv_number(v.ratio)
             << ',' << csv_number(v.power_exponent) << '\n';
    std::printf("%-5s %s\n", name, v.describe().c_str());
  };
  line("hs", table.hs);
  line("blog", table.blog);
  write_text_file(sibling(args.out, "_verdict.csv"), verdicts.str());
  write_metadata(args.out, "embedding",
                 {{"construction", args.construction},
                  {"d", args.spec.d},
                  {"s", args.spec.s},
                  {"p", args.spec.p},
                  {"K", args.spec.K}});
  return kExitOk;
}

// ---------------------------------------------------------------- build

struct BuildArgs {
  std::string target_path;
  std::string out = "network.json";
  std::string report;
  int dim = 4;
  int modes = 16;
  double log_exponent = 3.0;
  std::uint64_t target_seed = 0;
  int m = 64;
  std::string variant = "L2";
  std::uint64_t seed = 0;
  int quad_points = 4096;
  int max_retries = 16;
  double error_slack = 1.0;
};

int cmd_build(BuildArgs args, const CLI::App& sub) {
  if (!sub.count("--seed")) args.seed = env_seed();
  const SpectralTarget target = args.target_path.empty()
                                    ? synth_target(args.dim, args.modes, args.log_exponent, args.target_seed)
                                    : target_from_json(read_json_file(args.target_path));
  BuildConfig config;
  config.m = args.m;
  config.variant = parse_variant(args.variant);
  config.seed = args.seed;
  config.max_retries = args.max_retries;
  config.error_slack = args.error_slack;
  config.quad = sweep_quadrature(target.dim(), args.quad_points, RandomStream(args.seed).split(2).seed());
  try {
    config.validate();
    config.quad.validate(target.dim());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const BuildResult res = build(target, config);
  write_json_file(args.out, network_to_json(res.network));
  const fs::path report_path = args.report.empty() ? sibling(args.out, "_report.json") : fs::path(args.report);
  write_json_file(report_path, report_to_json(res.report));
  const BuildReport& r = res.report;
  std::printf("%s build, m=%d: error %.6g (se %.2g) vs bound %.6g, depth %d vs %.6g, retries %d, %s\n",
              variant_name(r.variant), r.m, r.error_estimate, r.error_std_err, r.error_bound, r.total_depth,
              r.depth_bound, r.retries_used, r.accepted ? "accepted" : "NOT accepted");
  std::printf("network: depth %d, width %d, %zu parameters -> %s\n", res.network.depth(), res.network.width(),
              res.network.param_count(), args.out.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------- eval

int cmd_eval(const std::string& network_path) {
  const ReluNetwork net = network_from_json(read_json_file(network_path));
  const int d = net.input_dim();
  std::string line;
  int line_no = 0;
  while (std::getline(std::cin, line)) {
    ++line_no;
    std::istringstream is(line);
    std::vector<double> values;
    double v;
    while (is >> v) values.push_back(v);
    if (!is.eof()) throw UsageError("line " + std::to_string(line_no) + ": not a number");
    if (values.empty()) continue;
    if (static_cast<int>(values.size()) != d) {
      throw UsageError("line " + std::to_string(line_no) + ": expected " + std::to_string(d) + " values");
    }
    const Eigen::VectorXd out = net.eval(Eigen::Map<const Eigen::VectorXd>(values.data(), d));
    for (Eigen::Index i = 0; i < out.size(); ++i) std::printf(i ? " %.17g" : "%.17g", out[i]);
    std::printf("\n");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constructive deep narrow ReLU approximation of log-Barron targets"};
  app.require_subcommand(1);

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "Exactness checks for the network primitives and identities");
  verify->add_flag("--inject-fault", verify_args.inject_fault, "Perturb the gamma tail bias (the check must fail)");
  verify->add_option("--fault-size", verify_args.fault_size, "Bias perturbation used by --inject-fault")
      ->capture_default_str();

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Error-vs-m convergence sweep over (d, m, seed) cells");
  sweep->add_option("--config", sweep_args.config_path, "JSON config; flags override its values")
      ->check(CLI::ExistingFile);
  sweep->add_option("--out", sweep_args.out, "Output CSV")->capture_default_str();
  sweep->add_option("--svg", sweep_args.svg, "Write a log-log plot of the median error per d");
  sweep->add_option("--dims", sweep_args.dims, "Input dimensions")->delimiter(',');
  sweep->add_option("--ms", sweep_args.ms, "Sample counts m")->delimiter(',');
  sweep->add_option("--seeds", sweep_args.seeds, "Build seeds")->delimiter(',');
  sweep->add_option("--variant", sweep_args.variant, "L2 or H1");
  sweep->add_option("--quad-points", sweep_args.quad_points, "Quadrature points per error estimate");
  sweep->add_option("--max-retries", sweep_args.max_retries, "Resamples before giving up on a cell");
  sweep->add_option("--workers", sweep_args.workers, "Worker threads (0 = hardware concurrency)");

  RademacherArgs rad_args;
  auto* rad = app.add_subcommand("rademacher", "Empirical Rademacher complexity vs sample size");
  rad->add_option("--out", rad_args.out, "Output CSV")->capture_default_str();
  rad->add_option("--ns", rad_args.ns, "Sample sizes")->delimiter(',')->capture_default_str();
  rad->add_option("--d", rad_args.config.d, "Dimension")->capture_default_str();
  rad->add_option("--Q", rad_args.config.Q, "Ball radius")->capture_default_str();
  rad->add_option("--sigma-draws", rad_args.config.sigma_draws, "Sign vectors averaged")->capture_default_str();
  rad->add_option("--shells", rad_args.config.shells, "Largest dyadic shell index")->capture_default_str();
  rad->add_option("--candidates", rad_args.config.candidates_per_shell, "Random frequencies per shell")
      ->capture_default_str();
  rad->add_option("--seed", rad_args.config.seed, "Seed (default BARRONFORGE_SEED or 0)");

  EmbeddingArgs emb_args;
  auto* emb = app.add_subcommand("embedding", "Shell series of the embedding counterexamples");
  emb->add_option("--out", emb_args.out, "Output CSV")->capture_default_str();
  emb->add_option("--construction", emb_args.construction, "prop42 or prop43")->capture_default_str();
  emb->add_option("--d", emb_args.spec.d, "Dimension")->capture_default_str();
  emb->add_option("--s", emb_args.spec.s, "Sobolev order")->capture_default_str();
  emb->add_option("--p", emb_args.spec.p, "prop43 exponent (> 2)")->capture_default_str();
  emb->add_option("--K", emb_args.spec.K, "Number of shells")->capture_default_str();

  BuildArgs build_args;
  auto* bld = app.add_subcommand("build", "Build one network and write it with its report");
  bld->add_option("--target", build_args.target_path, "Target JSON (default: synthetic target)")
      ->check(CLI::ExistingFile);
  bld->add_option("--out", build_args.out, "Network JSON")->capture_default_str();
  bld->add_option("--report", build_args.report, "Report JSON (default: <out>_report.json)");
  bld->add_option("--dim", build_args.dim, "Synthetic target dimension")->capture_default_str();
  bld->add_option("--modes", build_args.modes, "Synthetic target mode count")->capture_default_str();
  bld->add_option("--target-seed", build_args.target_seed, "Synthetic target seed")->capture_default_str();
  bld->add_option("--m", build_args.m, "Sample count")->capture_default_str();
  bld->add_option("--variant", build_args.variant, "L2 or H1")->capture_default_str();
  bld->add_option("--seed", build_args.seed, "Build seed (default BARRONFORGE_SEED or 0)");
  bld->add_option("--quad-points", build_args.quad_points, "Quadrature points")->capture_default_str();
  bld->add_option("--max-retries", build_args.max_retries, "Resamples")->capture_default_str();
  bld->add_option("--error-slack", build_args.error_slack, "Multiplier on the error bound")->capture_default_str();

  std::string network_path;
  auto* ev = app.add_subcommand("eval", "Evaluate a network JSON at points read from stdin, one per line");
  ev->add_option("network", network_path, "Network JSON")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*verify) return cmd_verify(verify_args);
    if (*sweep) return cmd_sweep(sweep_args, *sweep);
    if (*rad) return cmd_rademacher(rad_args, *rad);
    if (*emb) return cmd_embedding(emb_args);
    if (*bld) return cmd_build(build_args, *bld);
    if (*ev) return cmd_eval(network_path);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailed;
  }
  return kExitUsage;
}
