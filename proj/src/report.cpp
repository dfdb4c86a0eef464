#include "phasesim/report.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "phasesim/errors.hpp"

namespace phasesim {

namespace fs = std::filesystem;

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string format_pct(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

ReportBundle build_report(const IpcMatrix& matrix, uint64_t matrix_hash,
                          const ReportOptions& options) {
  matrix.validate();
  ReportBundle bundle;
  bundle.matrix_hash = matrix_hash;
  bundle.total_timesteps = matrix.total_timesteps();

  OracleResult oracle = compute_oracle(matrix);
  for (const std::string& pid : matrix.policies()) {
    bundle.summaries.push_back(summarize_policy(matrix, oracle, pid));
    bundle.buckets.emplace_back(pid,
                                bucket_histogram(compute_loss(matrix, oracle, pid)));
  }
  bundle.best_static_id = best_static(matrix);
  bundle.best_static_distribution = per_benchmark_distribution(
      matrix, compute_loss(matrix, oracle, bundle.best_static_id));

  std::vector<double> freq = optimality_frequency(oracle);
  for (size_t p = 0; p < matrix.policies().size(); ++p)
    bundle.optimality.emplace_back(matrix.policies()[p], freq[p]);
  for (const auto& ws : oracle.winner_sets)
    if (ws.size() > 1) bundle.ties_present = true;

  uint64_t max_k = std::min<uint64_t>(options.max_subset_k, matrix.policies().size());
  for (uint64_t k = 1; k <= max_k; ++k)
    bundle.subsets.push_back(
        best_k_subset(matrix, oracle, k, options.subset_objective));

  for (size_t a = 0; a < matrix.policies().size(); ++a)
    for (size_t b = a + 1; b < matrix.policies().size(); ++b)
      bundle.duels.push_back(
          pairwise_compare(matrix, matrix.policies()[a], matrix.policies()[b]));

  for (const std::string& pid : matrix.policies())
    bundle.headroom.push_back(baseline_headroom(
        matrix, pid, options.headroom_reference, options.headroom_threshold_pct));

  return bundle;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  return f;
}

} // namespace

void write_report(const ReportBundle& bundle, const std::string& out_dir,
                  const ReportOptions& options) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create report directory: " + out_dir);
  const int prec = options.precision;
  auto p = [&](double v) { return format_pct(v, prec); };

  {
    auto f = open_out(fs::path(out_dir) / "summary.csv");
    f << "policy,mean_loss_pct,match_rate_pct,exceed_1,exceed_2_5,exceed_5,"
         "exceed_10,mean_ipc,is_best_static\n";
    for (const PolicySummary& s : bundle.summaries)
      f << s.policy_id << ',' << p(s.mean_loss_pct) << ',' << p(s.match_rate_pct)
        << ',' << s.exceed_1 << ',' << s.exceed_2_5 << ',' << s.exceed_5 << ','
        << s.exceed_10 << ',' << format_ipc(s.mean_ipc) << ','
        << (s.policy_id == bundle.best_static_id ? 1 : 0) << '\n';
  }
  {
    // Bucket order is bottom-to-top: 0%, 0-0.1%, ..., >10%.
    auto f = open_out(fs::path(out_dir) / "buckets.csv");
    f << "policy,bucket_label,count,fraction\n";
    for (const auto& [pid, hist] : bundle.buckets) {
      double total = static_cast<double>(hist.total());
      for (size_t i = 0; i < kNumBuckets; ++i)
        f << pid << ',' << kBucketLabels[i] << ',' << hist.counts[i] << ','
          << p(static_cast<double>(hist.counts[i]) / total * 100.0) << '\n';
    }
  }
  {
    auto f = open_out(fs::path(out_dir) / "benchmark_distribution.csv");
    f << "benchmark,policy,min,q1,median,q3,max\n";
    for (const BenchmarkDistribution& d : bundle.best_static_distribution)
      f << d.benchmark_id << ',' << bundle.best_static_id << ',' << p(d.min) << ','
        << p(d.q1) << ',' << p(d.median) << ',' << p(d.q3) << ',' << p(d.max) << '\n';
  }
  {
    auto f = open_out(fs::path(out_dir) / "optimality.csv");
    f << "policy,frequency_pct\n";
    for (const auto& [pid, freq] : bundle.optimality)
      f << pid << ',' << p(freq) << '\n';
  }
  {
    auto f = open_out(fs::path(out_dir) / "subsets.csv");
    f << "k,policies,mean_loss_pct,match_rate_pct\n";
    for (const SubsetSelection& s : bundle.subsets) {
      f << s.k << ',';
      for (size_t i = 0; i < s.policy_ids.size(); ++i)
        f << (i ? "+" : "") << s.policy_ids[i];
      f << ',' << p(s.mean_loss_pct) << ',' << p(s.match_rate_pct) << '\n';
    }
  }
  {
    auto f = open_out(fs::path(out_dir) / "duels.csv");
    f << "policy_a,policy_b,win_rate_a_pct,mean_speedup_on_wins_pct,"
         "loss_rate_a_pct,mean_slowdown_on_losses_pct,tie_rate_pct\n";
    for (const DuelStats& d : bundle.duels) {
      f << d.policy_a << ',' << d.policy_b << ',' << p(d.win_rate_a_pct) << ',';
      if (d.mean_speedup_on_wins_pct) f << p(*d.mean_speedup_on_wins_pct);
      f << ',' << p(d.loss_rate_a_pct) << ',';
      if (d.mean_slowdown_on_losses_pct) f << p(*d.mean_slowdown_on_losses_pct);
      f << ',' << p(d.tie_rate_pct) << '\n';
    }
  }
  {
    auto f = open_out(fs::path(out_dir) / "headroom.csv");
    f << "baseline,reference,mean_improvement_pct,threshold_pct,"
         "count_above_threshold,mean_improvement_above_threshold_pct,"
         "benchmarks_covered\n";
    for (const HeadroomStats& h : bundle.headroom)
      f << h.baseline_id << ',' << h.reference << ',' << p(h.mean_improvement_pct)
        << ',' << p(h.threshold_pct) << ',' << h.count_above_threshold << ','
        << p(h.mean_improvement_above_threshold) << ',' << h.benchmarks_covered
        << '\n';
  }
  {
    nlohmann::json meta;
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(bundle.matrix_hash));
    meta["matrix_hash"] = hash;
    meta["tool_version"] = kToolVersion;
    meta["total_timesteps"] = bundle.total_timesteps;
    meta["best_static"] = bundle.best_static_id;
    meta["tie_epsilon"] = kTieEpsilon;
    meta["ties_present"] = bundle.ties_present;
    meta["winner_credit"] = "full credit per tied winner";
    meta["precision"] = options.precision;
    // Only an explicitly pinned timestamp is recorded; outputs stay
    // byte-identical across invocations otherwise.
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"))
      meta["timestamp_epoch"] = epoch;
    auto f = open_out(fs::path(out_dir) / "metadata.json");
    f << meta.dump(2) << '\n';
  }
}

namespace {

const char* const kReportCsvFiles[] = {
    "summary.csv",     "buckets.csv", "benchmark_distribution.csv",
    "optimality.csv",  "subsets.csv", "duels.csv",
    "headroom.csv"};

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open report table: " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw FormatError(path.string() + ": empty report table");
  return rows;
}

} // namespace

void reemit_report(const std::string& in_dir, const std::string& out_dir,
                   const std::string& format) {
  if (format != "csv" && format != "json")
    throw ValidationError("report format must be \"csv\" or \"json\"");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create report directory: " + out_dir);

  std::ifstream meta_in(fs::path(in_dir) / "metadata.json");
  if (!meta_in) throw IoError("cannot open " + in_dir + "/metadata.json");
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("metadata.json: ") + e.what());
  }

  if (format == "csv") {
    for (const char* name : kReportCsvFiles) {
      auto rows = read_csv(fs::path(in_dir) / name);
      auto f = open_out(fs::path(out_dir) / name);
      for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
        f << '\n';
      }
    }
    auto f = open_out(fs::path(out_dir) / "metadata.json");
    f << meta.dump(2) << '\n';
    return;
  }

  // Combined JSON: one object per table, header row as keys, cell text kept
  // verbatim so the emission is lossless.
  nlohmann::json doc;
  doc["metadata"] = meta;
  for (const char* name : kReportCsvFiles) {
    auto rows = read_csv(fs::path(in_dir) / name);
    nlohmann::json table = nlohmann::json::array();
    const auto& header = rows.front();
    for (size_t r = 1; r < rows.size(); ++r) {
      nlohmann::json obj;
      for (size_t c = 0; c < header.size() && c < rows[r].size(); ++c)
        obj[header[c]] = rows[r][c];
      table.push_back(std::move(obj));
    }
    std::string key(name);
    doc[key.substr(0, key.size() - 4)] = std::move(table);
  }
  auto f = open_out(fs::path(out_dir) / "bundle.json");
  f << doc.dump(2) << '\n';
}

} // namespace phasesim
