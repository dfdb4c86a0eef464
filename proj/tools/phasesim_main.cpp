#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "phasesim/config.hpp"
#include "phasesim/errors.hpp"
#include "phasesim/report.hpp"

namespace fs = std::filesystem;
using namespace phasesim;

namespace {

unsigned default_threads() {
  // PHASESIM_THREADS overrides hardware concurrency; 0 means auto.
  if (const char* env = std::getenv("PHASESIM_THREADS"))
    return static_cast<unsigned>(std::strtoul(env, nullptr, 10));
  return 0;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int cmd_gen(const std::string& spec_path, const std::string& out) {
  SyntheticSpec spec = load_synthetic_spec(spec_path);
  Trace trace = generate_trace(spec);
  std::string out_path = out;
  if (fs::is_directory(out))
    out_path = (fs::path(out) / (fs::path(spec_path).stem().string() + ".phtr")).string();
  write_trace(trace, out_path);
  std::cout << "wrote " << trace.size() << " records to " << out_path << "\n";
  return 0;
}

int cmd_run(const std::string& plan_path, const std::string& out, unsigned threads) {
  ExperimentPlan plan = load_plan(plan_path);
  IpcMatrix matrix = run_experiment(plan, threads ? threads : default_threads());
  save_matrix(matrix, out);
  std::cout << "wrote " << matrix.benchmarks().size() << "x" << matrix.timesteps()
            << "x" << matrix.policies().size() << " matrix to " << out << "\n";
  return 0;
}

int cmd_analyze(const std::string& matrix_path, const std::string& out_dir,
                const ReportOptions& options) {
  std::string bytes = read_file(matrix_path);
  IpcMatrix matrix = load_matrix(matrix_path);
  ReportBundle bundle = build_report(matrix, fnv1a64(bytes), options);
  write_report(bundle, out_dir, options);
  std::cout << "wrote report for " << bundle.total_timesteps << " timesteps to "
            << out_dir << "\n";
  return 0;
}

int cmd_report(const std::string& in_dir, const std::string& out_dir,
               const std::string& format) {
  reemit_report(in_dir, out_dir, format);
  std::cout << "re-emitted report as " << format << " to " << out_dir << "\n";
  return 0;
}

int cmd_bias(const std::string& trace_path, const std::string& policy_id,
             const std::string& lengths_arg) {
  Trace trace = read_trace(trace_path);
  PolicyConfig policy = PolicyConfig::parse(policy_id);
  std::vector<uint64_t> lengths;
  std::istringstream ss(lengths_arg);
  std::string tok;
  while (std::getline(ss, tok, ','))
    lengths.push_back(std::stoull(tok));
  if (lengths.empty()) throw ValidationError("--lengths must list chunk lengths");
  auto points =
      measure_truncation_bias(trace, policy, TimingModel{}, HierarchyConfig{}, lengths);
  std::cout << "chunk_len,mean_abs_gap_pct\n";
  for (const BiasPoint& p : points)
    std::cout << p.chunk_len << ',' << format_pct(p.mean_abs_gap_pct, 4) << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"phasesim: trace-driven policy simulator and limit-study analytics"};
  app.require_subcommand(1);

  std::string spec_path, out, plan_path, matrix_path, in_dir, format = "csv";
  std::string trace_path, policy_id, lengths, subset_objective = "mean_loss";
  unsigned threads = 0;
  ReportOptions options;

  auto* gen = app.add_subcommand("gen", "generate a synthetic trace file");
  gen->add_option("--spec", spec_path, "synthetic spec JSON")->required();
  gen->add_option("--out", out, "output trace file (or directory)")->required();

  auto* run = app.add_subcommand("run", "run an experiment plan to an IPC matrix");
  run->add_option("--plan", plan_path, "experiment plan JSON")->required();
  run->add_option("--out", out, "output matrix CSV")->required();
  run->add_option("--threads", threads, "worker threads (0 = auto)");

  auto* analyze = app.add_subcommand("analyze", "analyze an IPC matrix into a report");
  analyze->add_option("--matrix", matrix_path, "matrix CSV")->required();
  analyze->add_option("--out", out, "report output directory")->required();
  analyze->add_option("--precision", options.precision, "percent decimal places");
  analyze->add_option("--max-k", options.max_subset_k, "largest subset size to search");
  analyze->add_option("--subset-objective", subset_objective,
                      "mean_loss or mean_ipc");
  analyze->add_option("--headroom-reference", options.headroom_reference,
                      "\"oracle\" or a policy id");
  analyze->add_option("--headroom-threshold", options.headroom_threshold_pct,
                      "headroom exceedance threshold (%)");

  auto* report = app.add_subcommand("report", "re-emit a report directory");
  report->add_option("--in", in_dir, "report directory")->required();
  report->add_option("--out", out, "output directory")->required();
  report->add_option("--format", format, "csv or json");

  auto* bias = app.add_subcommand("bias", "measure history-truncation bias");
  bias->add_option("--trace", trace_path, "trace file")->required();
  bias->add_option("--policy", policy_id, "policy id \"l1d/l1i/l2\"")->required();
  bias->add_option("--lengths", lengths, "comma-separated chunk lengths")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*gen) return cmd_gen(spec_path, out);
    if (*run) return cmd_run(plan_path, out, threads);
    if (*analyze) {
      if (subset_objective == "mean_loss")
        options.subset_objective = SubsetObjective::MeanLoss;
      else if (subset_objective == "mean_ipc")
        options.subset_objective = SubsetObjective::MeanIpc;
      else
        throw ValidationError("--subset-objective must be mean_loss or mean_ipc");
      return cmd_analyze(matrix_path, out, options);
    }
    if (*report) return cmd_report(in_dir, out, format);
    if (*bias) return cmd_bias(trace_path, policy_id, lengths);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
