#ifndef PHASESIM_REPORT_HPP
#define PHASESIM_REPORT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "phasesim/analytics.hpp"
#include "phasesim/matrix.hpp"

namespace phasesim {

inline constexpr const char* kToolVersion = "1.0.0";

struct ReportOptions {
  int precision = 2;              // decimal places for percentages
  uint64_t max_subset_k = 3;      // subset records for k = 1..min(max_subset_k, |P|)
  SubsetObjective subset_objective = SubsetObjective::MeanLoss;
  std::string headroom_reference = "oracle";
  double headroom_threshold_pct = 2.5;
};

// Everything the analyze pipeline derives from one matrix. Every number is
// recomputable from the matrix CSV alone.
struct ReportBundle {
  std::vector<PolicySummary> summaries;
  std::string best_static_id;
  std::vector<std::pair<std::string, BucketHistogram>> buckets; // per policy
  std::vector<BenchmarkDistribution> best_static_distribution;
  std::vector<std::pair<std::string, double>> optimality; // policy, freq %
  bool ties_present = false;
  std::vector<SubsetSelection> subsets;
  std::vector<DuelStats> duels; // all unordered pairs, a < b
  std::vector<HeadroomStats> headroom; // each policy as baseline vs reference
  uint64_t total_timesteps = 0;
  uint64_t matrix_hash = 0; // FNV-1a of the matrix CSV bytes
};

ReportBundle build_report(const IpcMatrix& matrix, uint64_t matrix_hash,
                          const ReportOptions& options = {});

// Writes one CSV per figure analogue plus summary tables and metadata.json
// into out_dir (created if absent). Column schemas are in the README.
void write_report(const ReportBundle& bundle, const std::string& out_dir,
                  const ReportOptions& options = {});

// Re-emits a previously written report directory as CSV (copy) or as a single
// combined JSON document on stdout-style output file bundle.json.
void reemit_report(const std::string& in_dir, const std::string& out_dir,
                   const std::string& format);

uint64_t fnv1a64(const std::string& bytes);

std::string format_pct(double v, int precision);

} // namespace phasesim

#endif
