#ifndef PHASESIM_ANALYTICS_HPP
#define PHASESIM_ANALYTICS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phasesim/matrix.hpp"

namespace phasesim {

// Relative tie tolerance: a policy is a winner at a timestep iff its IPC is
// within this relative distance of the per-timestep maximum.
inline constexpr double kTieEpsilon = 1e-9;
// Same tolerance expressed in loss-percent units.
inline constexpr double kTieEpsilonPct = kTieEpsilon * 100.0;

// Per-timestep best IPC and the set of policies attaining it (within epsilon).
struct OracleResult {
  // Indexed [benchmark * timesteps + timestep].
  std::vector<double> oracle_ipc;
  std::vector<std::vector<size_t>> winner_sets; // policy indices, ascending
  size_t num_policies = 0;
};

struct PolicySummary {
  std::string policy_id;
  double mean_loss_pct = 0.0;
  double match_rate_pct = 0.0;
  // Timesteps with loss strictly above 1, 2.5, 5, 10 percent.
  uint64_t exceed_1 = 0, exceed_2_5 = 0, exceed_5 = 0, exceed_10 = 0;
  double mean_ipc = 0.0;
};

inline constexpr size_t kNumBuckets = 8;
// Loss ranges: 0 (<= epsilon), (eps,0.1], (0.1,0.5], (0.5,1], (1,2], (2,5],
// (5,10], (10,inf); upper edges closed.
extern const char* const kBucketLabels[kNumBuckets];

struct BucketHistogram {
  uint64_t counts[kNumBuckets] = {};
  uint64_t total() const;
};

struct BenchmarkDistribution {
  std::string benchmark_id;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

struct DuelStats {
  std::string policy_a, policy_b;
  double win_rate_a_pct = 0.0;  // A strictly faster (outside the tie band)
  double loss_rate_a_pct = 0.0;
  double tie_rate_pct = 0.0;
  std::optional<double> mean_speedup_on_wins_pct;    // (A/B - 1) * 100
  std::optional<double> mean_slowdown_on_losses_pct; // (1 - A/B) * 100
};

struct HeadroomStats {
  std::string baseline_id;
  std::string reference;        // "oracle" or a policy id
  double mean_improvement_pct = 0.0;
  double threshold_pct = 2.5;
  uint64_t count_above_threshold = 0;
  double mean_improvement_above_threshold = 0.0; // 0 when count is 0
  uint64_t benchmarks_covered = 0; // benchmarks containing such timesteps
};

struct SubsetSelection {
  uint64_t k = 0;
  std::vector<std::string> policy_ids; // sorted
  double mean_loss_pct = 0.0;
  double match_rate_pct = 0.0;
};

enum class SubsetObjective : uint8_t { MeanLoss = 0, MeanIpc = 1 };

OracleResult compute_oracle(const IpcMatrix& matrix);

// Per-timestep relative loss of one policy versus the oracle, in percent.
std::vector<double> compute_loss(const IpcMatrix& matrix, const OracleResult& oracle,
                                 const std::string& policy_id);

PolicySummary summarize_policy(const IpcMatrix& matrix, const OracleResult& oracle,
                               const std::string& policy_id);

// Fixed policy with the highest mean IPC across all timesteps; ties broken
// by lexicographic policy id.
std::string best_static(const IpcMatrix& matrix);

// Percent of timesteps each policy appears in the winner set. Full credit to
// every tied winner, so the values may sum past 100.
std::vector<double> optimality_frequency(const OracleResult& oracle);

BucketHistogram bucket_histogram(const std::vector<double>& loss_row);

// Five-number summary per benchmark; quartiles by linear interpolation
// between order statistics.
std::vector<BenchmarkDistribution> per_benchmark_distribution(
    const IpcMatrix& matrix, const std::vector<double>& loss_row);

DuelStats pairwise_compare(const IpcMatrix& matrix, const std::string& policy_a,
                           const std::string& policy_b);

HeadroomStats baseline_headroom(const IpcMatrix& matrix, const std::string& baseline_id,
                                const std::string& reference = "oracle",
                                double threshold_pct = 2.5);

SubsetSelection best_k_subset(const IpcMatrix& matrix, const OracleResult& oracle,
                              uint64_t k,
                              SubsetObjective objective = SubsetObjective::MeanLoss);

} // namespace phasesim

#endif
