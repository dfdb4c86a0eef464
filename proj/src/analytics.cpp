#include "phasesim/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "phasesim/errors.hpp"

namespace phasesim {

const char* const kBucketLabels[kNumBuckets] = {
    "0%", "0-0.1%", "0.1-0.5%", "0.5-1%", "1-2%", "2-5%", "5-10%", ">10%"};

uint64_t BucketHistogram::total() const {
  uint64_t t = 0;
  for (uint64_t c : counts) t += c;
  return t;
}

OracleResult compute_oracle(const IpcMatrix& matrix) {
  matrix.validate();
  size_t T = matrix.total_timesteps();
  size_t P = matrix.policies().size();
  OracleResult out;
  out.num_policies = P;
  out.oracle_ipc.resize(T);
  out.winner_sets.resize(T);
  for (size_t b = 0; b < matrix.benchmarks().size(); ++b)
    for (uint64_t t = 0; t < matrix.timesteps(); ++t) {
      size_t idx = b * matrix.timesteps() + t;
      double best = 0.0;
      for (size_t p = 0; p < P; ++p) best = std::max(best, matrix.at(b, t, p));
      out.oracle_ipc[idx] = best;
      for (size_t p = 0; p < P; ++p)
        if (matrix.at(b, t, p) >= best * (1.0 - kTieEpsilon))
          out.winner_sets[idx].push_back(p);
    }
  return out;
}

std::vector<double> compute_loss(const IpcMatrix& matrix, const OracleResult& oracle,
                                 const std::string& policy_id) {
  size_t p = matrix.policy_index(policy_id);
  std::vector<double> loss(matrix.total_timesteps());
  for (size_t b = 0; b < matrix.benchmarks().size(); ++b)
    for (uint64_t t = 0; t < matrix.timesteps(); ++t) {
      size_t idx = b * matrix.timesteps() + t;
      double o = oracle.oracle_ipc[idx];
      loss[idx] = (o - matrix.at(b, t, p)) / o * 100.0;
    }
  return loss;
}

PolicySummary summarize_policy(const IpcMatrix& matrix, const OracleResult& oracle,
                               const std::string& policy_id) {
  size_t p = matrix.policy_index(policy_id);
  std::vector<double> loss = compute_loss(matrix, oracle, policy_id);
  PolicySummary s;
  s.policy_id = policy_id;
  size_t T = loss.size();
  double loss_sum = 0.0, ipc_sum = 0.0;
  uint64_t matches = 0;
  for (size_t b = 0; b < matrix.benchmarks().size(); ++b)
    for (uint64_t t = 0; t < matrix.timesteps(); ++t)
      ipc_sum += matrix.at(b, t, p);
  for (double l : loss) {
    loss_sum += l;
    if (l <= kTieEpsilonPct) ++matches;
    if (l > 1.0) ++s.exceed_1;
    if (l > 2.5) ++s.exceed_2_5;
    if (l > 5.0) ++s.exceed_5;
    if (l > 10.0) ++s.exceed_10;
  }
  s.mean_loss_pct = loss_sum / static_cast<double>(T);
  s.match_rate_pct = static_cast<double>(matches) / static_cast<double>(T) * 100.0;
  s.mean_ipc = ipc_sum / static_cast<double>(T);
  return s;
}

std::string best_static(const IpcMatrix& matrix) {
  matrix.validate();
  size_t T = matrix.total_timesteps();
  size_t best = 0;
  double best_mean = -1.0;
  for (size_t p = 0; p < matrix.policies().size(); ++p) {
    double sum = 0.0;
    for (size_t b = 0; b < matrix.benchmarks().size(); ++b)
      for (uint64_t t = 0; t < matrix.timesteps(); ++t) sum += matrix.at(b, t, p);
    double mean = sum / static_cast<double>(T);
    // Policies are sorted, so strict > keeps the lexicographically first on ties.
    if (mean > best_mean) {
      best_mean = mean;
      best = p;
    }
  }
  return matrix.policies()[best];
}

std::vector<double> optimality_frequency(const OracleResult& oracle) {
  std::vector<uint64_t> wins(oracle.num_policies, 0);
  for (const auto& ws : oracle.winner_sets)
    for (size_t p : ws) ++wins[p];
  std::vector<double> out(oracle.num_policies);
  double T = static_cast<double>(oracle.winner_sets.size());
  for (size_t p = 0; p < oracle.num_policies; ++p)
    out[p] = static_cast<double>(wins[p]) / T * 100.0;
  return out;
}

BucketHistogram bucket_histogram(const std::vector<double>& loss_row) {
  // Upper edges are closed: a loss of exactly 0.1 lands in the 0-0.1 bucket.
  static constexpr double kEdges[] = {0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
  BucketHistogram h;
  for (double l : loss_row) {
    if (l <= kTieEpsilonPct) {
      h.counts[0]++;
      continue;
    }
    size_t bucket = kNumBuckets - 1;
    for (size_t e = 0; e < 6; ++e)
      if (l <= kEdges[e]) {
        bucket = e + 1;
        break;
      }
    h.counts[bucket]++;
  }
  return h;
}

namespace {

// Quartile at fraction p by linear interpolation between order statistics.
double quantile_sorted(const std::vector<double>& sorted, double p) {
  double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  size_t lo = static_cast<size_t>(std::floor(h));
  size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

} // namespace

std::vector<BenchmarkDistribution> per_benchmark_distribution(
    const IpcMatrix& matrix, const std::vector<double>& loss_row) {
  if (loss_row.size() != matrix.total_timesteps())
    throw ValidationError("loss row length does not match matrix");
  std::vector<BenchmarkDistribution> out;
  for (size_t b = 0; b < matrix.benchmarks().size(); ++b) {
    std::vector<double> vals(loss_row.begin() + b * matrix.timesteps(),
                             loss_row.begin() + (b + 1) * matrix.timesteps());
    std::sort(vals.begin(), vals.end());
    BenchmarkDistribution d;
    d.benchmark_id = matrix.benchmarks()[b];
    d.min = vals.front();
    d.q1 = quantile_sorted(vals, 0.25);
    d.median = quantile_sorted(vals, 0.5);
    d.q3 = quantile_sorted(vals, 0.75);
    d.max = vals.back();
    out.push_back(std::move(d));
  }
  return out;
}

DuelStats pairwise_compare(const IpcMatrix& matrix, const std::string& policy_a,
                           const std::string& policy_b) {
  if (policy_a == policy_b)
    throw ValidationError("pairwise_compare: policies must differ");
  size_t pa = matrix.policy_index(policy_a);
  size_t pb = matrix.policy_index(policy_b);
  DuelStats d;
  d.policy_a = policy_a;
  d.policy_b = policy_b;
  uint64_t wins = 0, losses = 0, ties = 0;
  double speedup_sum = 0.0, slowdown_sum = 0.0;
  for (size_t b = 0; b < matrix.benchmarks().size(); ++b)
    for (uint64_t t = 0; t < matrix.timesteps(); ++t) {
      double a = matrix.at(b, t, pa);
      double bb = matrix.at(b, t, pb);
      bool tie = a >= bb * (1.0 - kTieEpsilon) && bb >= a * (1.0 - kTieEpsilon);
      if (tie) {
        ++ties;
      } else if (a > bb) {
        ++wins;
        speedup_sum += (a / bb - 1.0) * 100.0;
      } else {
        ++losses;
        slowdown_sum += (1.0 - a / bb) * 100.0;
      }
    }
  double T = static_cast<double>(matrix.total_timesteps());
  d.win_rate_a_pct = static_cast<double>(wins) / T * 100.0;
  d.loss_rate_a_pct = static_cast<double>(losses) / T * 100.0;
  d.tie_rate_pct = static_cast<double>(ties) / T * 100.0;
  if (wins) d.mean_speedup_on_wins_pct = speedup_sum / static_cast<double>(wins);
  if (losses) d.mean_slowdown_on_losses_pct = slowdown_sum / static_cast<double>(losses);
  return d;
}

HeadroomStats baseline_headroom(const IpcMatrix& matrix, const std::string& baseline_id,
                                const std::string& reference, double threshold_pct) {
  size_t pb = matrix.policy_index(baseline_id);
  bool vs_oracle = reference == "oracle";
  size_t pr = vs_oracle ? 0 : matrix.policy_index(reference);
  OracleResult oracle;
  if (vs_oracle) oracle = compute_oracle(matrix);

  HeadroomStats h;
  h.baseline_id = baseline_id;
  h.reference = reference;
  h.threshold_pct = threshold_pct;
  double sum = 0.0, sum_above = 0.0;
  std::set<size_t> covered;
  for (size_t b = 0; b < matrix.benchmarks().size(); ++b)
    for (uint64_t t = 0; t < matrix.timesteps(); ++t) {
      double base = matrix.at(b, t, pb);
      double ref = vs_oracle ? oracle.oracle_ipc[b * matrix.timesteps() + t]
                             : matrix.at(b, t, pr);
      double imp = (ref - base) / base * 100.0;
      sum += imp;
      if (imp > threshold_pct) {
        ++h.count_above_threshold;
        sum_above += imp;
        covered.insert(b);
      }
    }
  double T = static_cast<double>(matrix.total_timesteps());
  h.mean_improvement_pct = sum / T;
  if (h.count_above_threshold)
    h.mean_improvement_above_threshold =
        sum_above / static_cast<double>(h.count_above_threshold);
  h.benchmarks_covered = covered.size();
  return h;
}

SubsetSelection best_k_subset(const IpcMatrix& matrix, const OracleResult& oracle,
                              uint64_t k, SubsetObjective objective) {
  size_t P = matrix.policies().size();
  if (k < 1 || k > P)
    throw ValidationError("best_k_subset: k must be in [1, " + std::to_string(P) + "]");
  size_t T = matrix.total_timesteps();

  std::vector<size_t> subset(k);
  std::vector<size_t> best_subset;
  double best_obj = 0.0, best_match = -1.0, best_loss = 0.0;
  bool have_best = false;

  auto evaluate = [&](const std::vector<size_t>& s) {
    double loss_sum = 0.0, ipc_sum = 0.0;
    uint64_t matches = 0;
    for (size_t b = 0; b < matrix.benchmarks().size(); ++b)
      for (uint64_t t = 0; t < matrix.timesteps(); ++t) {
        size_t idx = b * matrix.timesteps() + t;
        double sub_best = 0.0;
        for (size_t p : s) sub_best = std::max(sub_best, matrix.at(b, t, p));
        double o = oracle.oracle_ipc[idx];
        loss_sum += (o - sub_best) / o * 100.0;
        ipc_sum += sub_best;
        if (sub_best >= o * (1.0 - kTieEpsilon)) ++matches;
      }
    double mean_loss = loss_sum / static_cast<double>(T);
    double match = static_cast<double>(matches) / static_cast<double>(T) * 100.0;
    // Objective value is minimized.
    double obj = objective == SubsetObjective::MeanLoss
                     ? mean_loss
                     : -ipc_sum / static_cast<double>(T);
    // Tie-breaks: higher match rate, then lexicographic id tuple. Subsets are
    // enumerated in lexicographic index order over sorted ids, so strict
    // comparisons keep the earliest.
    if (!have_best || obj < best_obj ||
        (obj == best_obj && match > best_match)) {
      have_best = true;
      best_obj = obj;
      best_match = match;
      best_loss = mean_loss;
      best_subset = s;
    }
  };

  // Exhaustive enumeration of all size-k index subsets.
  for (size_t i = 0; i < k; ++i) subset[i] = i;
  for (;;) {
    evaluate(subset);
    size_t i = k;
    while (i > 0 && subset[i - 1] == P - k + (i - 1)) --i;
    if (i == 0) break;
    ++subset[i - 1];
    for (size_t j = i; j < k; ++j) subset[j] = subset[j - 1] + 1;
  }

  SubsetSelection out;
  out.k = k;
  for (size_t p : best_subset) out.policy_ids.push_back(matrix.policies()[p]);
  out.mean_loss_pct = best_loss;
  out.match_rate_pct = best_match;
  return out;
}

} // namespace phasesim
