#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "phasesim/analytics.hpp"
#include "phasesim/errors.hpp"
#include "phasesim/prng.hpp"

using namespace phasesim;

namespace {

IpcMatrix make_matrix(const std::vector<std::string>& benchmarks, uint64_t timesteps,
                      const std::vector<std::string>& policies,
                      const std::vector<double>& values) {
  IpcMatrix m(benchmarks, timesteps, policies);
  size_t i = 0;
  for (size_t b = 0; b < m.benchmarks().size(); ++b)
    for (uint64_t t = 0; t < timesteps; ++t)
      for (size_t p = 0; p < m.policies().size(); ++p) m.set(b, t, p, values[i++]);
  return m;
}

IpcMatrix random_matrix(SplitMix64& rng, size_t max_b = 6, uint64_t max_t = 8,
                        size_t max_p = 6) {
  size_t nb = 1 + rng.next_below(max_b);
  uint64_t nt = 1 + rng.next_below(max_t);
  size_t np = 1 + rng.next_below(max_p);
  std::vector<std::string> benchmarks, policies;
  for (size_t b = 0; b < nb; ++b) benchmarks.push_back("bench" + std::to_string(b));
  for (size_t p = 0; p < np; ++p) policies.push_back("pol" + std::to_string(p));
  IpcMatrix m(benchmarks, nt, policies);
  for (size_t b = 0; b < nb; ++b)
    for (uint64_t t = 0; t < nt; ++t)
      for (size_t p = 0; p < np; ++p) {
        // Occasional exact duplicates so tie handling gets exercised.
        double v = rng.next_below(100) < 20
                       ? 1.0
                       : 0.1 + static_cast<double>(rng.next_below(4000)) / 1000.0;
        m.set(b, t, p, v);
      }
  return m;
}

// Loss row for one policy: a 1-benchmark matrix where a reference policy pins
// the oracle at 100 and "x" realizes each requested loss.
IpcMatrix loss_fixture(const std::vector<double>& losses) {
  std::vector<double> values;
  for (double l : losses) {
    values.push_back(100.0);             // "ref"
    values.push_back(100.0 - l);         // "x"
  }
  return make_matrix({"b"}, losses.size(), {"ref", "x"}, values);
}

} // namespace

TEST_CASE("oracle is the exhaustive per-timestep max with tied winners") {
  IpcMatrix m = make_matrix({"b"}, 1, {"p1", "p2", "p3"}, {1.0, 1.2, 1.1});
  OracleResult o = compute_oracle(m);
  CHECK(o.oracle_ipc[0] == 1.2);
  REQUIRE(o.winner_sets[0].size() == 1);
  CHECK(m.policies()[o.winner_sets[0][0]] == "p2");

  IpcMatrix eq = make_matrix({"b"}, 1, {"p1", "p2", "p3"}, {1.0, 1.0, 1.0});
  OracleResult oe = compute_oracle(eq);
  CHECK(oe.winner_sets[0].size() == 3);

  SplitMix64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    IpcMatrix r = random_matrix(rng);
    OracleResult res = compute_oracle(r);
    for (size_t b = 0; b < r.benchmarks().size(); ++b)
      for (uint64_t t = 0; t < r.timesteps(); ++t) {
        size_t idx = b * r.timesteps() + t;
        double best = 0;
        for (size_t p = 0; p < r.policies().size(); ++p)
          best = std::max(best, r.at(b, t, p));
        CHECK(res.oracle_ipc[idx] == best);
        CHECK_FALSE(res.winner_sets[idx].empty());
        for (size_t p = 0; p < r.policies().size(); ++p) {
          CHECK(r.at(b, t, p) <= res.oracle_ipc[idx]);
          bool winner = std::find(res.winner_sets[idx].begin(),
                                  res.winner_sets[idx].end(),
                                  p) != res.winner_sets[idx].end();
          CHECK(winner == (r.at(b, t, p) >= best * (1.0 - kTieEpsilon)));
        }
      }
  }
}

TEST_CASE("loss follows the oracle-relative formula") {
  IpcMatrix m = make_matrix({"b"}, 1, {"p1", "p2"}, {2.0, 1.9});
  OracleResult o = compute_oracle(m);
  std::vector<double> loss = compute_loss(m, o, "p2");
  CHECK(loss[0] == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(compute_loss(m, o, "p1")[0] == 0.0);

  SplitMix64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    IpcMatrix r = random_matrix(rng);
    OracleResult res = compute_oracle(r);
    for (const std::string& pid : r.policies()) {
      std::vector<double> row = compute_loss(r, res, pid);
      size_t p = r.policy_index(pid);
      for (size_t b = 0; b < r.benchmarks().size(); ++b)
        for (uint64_t t = 0; t < r.timesteps(); ++t) {
          size_t idx = b * r.timesteps() + t;
          double expect =
              (res.oracle_ipc[idx] - r.at(b, t, p)) / res.oracle_ipc[idx] * 100.0;
          CHECK(row[idx] == expect);
          CHECK(row[idx] >= 0.0);
          CHECK(row[idx] < 100.0);
        }
    }
  }
}

TEST_CASE("policy summary on hand-counted losses") {
  IpcMatrix zero = make_matrix({"b"}, 2, {"p1", "p2"}, {1.0, 1.0, 2.0, 2.0});
  PolicySummary s0 = summarize_policy(zero, compute_oracle(zero), "p1");
  CHECK(s0.mean_loss_pct == 0.0);
  CHECK(s0.match_rate_pct == 100.0);
  CHECK(s0.exceed_1 == 0);
  CHECK(s0.exceed_10 == 0);

  IpcMatrix m = loss_fixture({0.0, 3.0, 6.0, 11.0});
  PolicySummary s = summarize_policy(m, compute_oracle(m), "x");
  CHECK(s.mean_loss_pct == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(s.match_rate_pct == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(s.exceed_1 == 3);
  CHECK(s.exceed_2_5 == 3);
  CHECK(s.exceed_5 == 2);
  CHECK(s.exceed_10 == 1);
  // Exceedance counts are monotone across thresholds.
  CHECK(s.exceed_1 >= s.exceed_2_5);
  CHECK(s.exceed_2_5 >= s.exceed_5);
  CHECK(s.exceed_5 >= s.exceed_10);
}

TEST_CASE("best_static is the mean-IPC argmax") {
  IpcMatrix one = make_matrix({"b"}, 1, {"only"}, {1.0});
  CHECK(best_static(one) == "only");

  IpcMatrix two = make_matrix({"b"}, 1, {"p1", "p2"}, {1.00, 1.01});
  CHECK(best_static(two) == "p2");

  SplitMix64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    IpcMatrix r = random_matrix(rng);
    std::string best;
    double best_mean = -1;
    for (size_t p = 0; p < r.policies().size(); ++p) {
      double sum = 0;
      for (size_t b = 0; b < r.benchmarks().size(); ++b)
        for (uint64_t t = 0; t < r.timesteps(); ++t) sum += r.at(b, t, p);
      if (sum / static_cast<double>(r.total_timesteps()) > best_mean) {
        best_mean = sum / static_cast<double>(r.total_timesteps());
        best = r.policies()[p];
      }
    }
    CHECK(best_static(r) == best);
  }
}

TEST_CASE("optimality frequency gives full credit to tied winners") {
  IpcMatrix dom = make_matrix({"b"}, 2, {"p1", "p2"}, {2.0, 1.0, 2.0, 1.0});
  auto freq = optimality_frequency(compute_oracle(dom));
  CHECK(freq[0] == 100.0);
  CHECK(freq[1] == 0.0);

  IpcMatrix eq = make_matrix({"b"}, 2, {"p1", "p2"}, {1.0, 1.0, 1.0, 1.0});
  freq = optimality_frequency(compute_oracle(eq));
  CHECK(freq[0] == 100.0);
  CHECK(freq[1] == 100.0);
}

TEST_CASE("bucket histogram edges and conservation") {
  BucketHistogram all_zero = bucket_histogram({0.0, 0.0, 0.0});
  CHECK(all_zero.counts[0] == 3);
  CHECK(all_zero.total() == 3);

  BucketHistogram one_each =
      bucket_histogram({0.0, 0.05, 0.3, 0.7, 1.5, 3.0, 7.0, 15.0});
  for (size_t i = 0; i < kNumBuckets; ++i) CHECK(one_each.counts[i] == 1);

  // Upper edges are closed: exactly 0.1 lands in the (eps, 0.1] bucket.
  BucketHistogram edge = bucket_histogram({0.1});
  CHECK(edge.counts[1] == 1);

  SplitMix64 rng(4);
  std::vector<double> row;
  for (int i = 0; i < 500; ++i)
    row.push_back(static_cast<double>(rng.next_below(20000)) / 1000.0);
  CHECK(bucket_histogram(row).total() == row.size());
}

TEST_CASE("per-benchmark five-number summaries") {
  IpcMatrix same = loss_fixture(std::vector<double>(10, 4.2));
  auto d = per_benchmark_distribution(same, compute_loss(same, compute_oracle(same), "x"));
  REQUIRE(d.size() == 1);
  CHECK(d[0].min == doctest::Approx(4.2));
  CHECK(d[0].q1 == doctest::Approx(4.2));
  CHECK(d[0].median == doctest::Approx(4.2));
  CHECK(d[0].q3 == doctest::Approx(4.2));
  CHECK(d[0].max == doctest::Approx(4.2));

  IpcMatrix ten = loss_fixture({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  d = per_benchmark_distribution(ten, compute_loss(ten, compute_oracle(ten), "x"));
  CHECK(d[0].min == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(d[0].q1 == doctest::Approx(3.25).epsilon(1e-9));
  CHECK(d[0].median == doctest::Approx(5.5).epsilon(1e-9));
  CHECK(d[0].q3 == doctest::Approx(7.75).epsilon(1e-9));
  CHECK(d[0].max == doctest::Approx(10.0).epsilon(1e-9));

  IpcMatrix single = loss_fixture({2.5});
  d = per_benchmark_distribution(single,
                                 compute_loss(single, compute_oracle(single), "x"));
  CHECK(d[0].min == d[0].max);
  CHECK(d[0].median == doctest::Approx(2.5));
}

TEST_CASE("pairwise duels classify and close to 100 percent") {
  IpcMatrix faster =
      make_matrix({"b"}, 2, {"a", "b"}, {1.02, 1.0, 2.04, 2.0});
  DuelStats d = pairwise_compare(faster, "a", "b");
  CHECK(d.win_rate_a_pct == 100.0);
  REQUIRE(d.mean_speedup_on_wins_pct.has_value());
  CHECK(*d.mean_speedup_on_wins_pct == doctest::Approx(2.0).epsilon(1e-9));
  CHECK_FALSE(d.mean_slowdown_on_losses_pct.has_value());

  IpcMatrix equal = make_matrix({"b"}, 2, {"a", "b"}, {1.0, 1.0, 2.0, 2.0});
  d = pairwise_compare(equal, "a", "b");
  CHECK(d.tie_rate_pct == 100.0);

  CHECK_THROWS_AS(pairwise_compare(equal, "a", "a"), ValidationError);

  SplitMix64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    IpcMatrix r = random_matrix(rng);
    if (r.policies().size() < 2) continue;
    DuelStats ds = pairwise_compare(r, r.policies()[0], r.policies()[1]);
    CHECK(ds.win_rate_a_pct + ds.loss_rate_a_pct + ds.tie_rate_pct ==
          doctest::Approx(100.0).epsilon(1e-12));
  }
}

TEST_CASE("baseline headroom on hand arithmetic") {
  IpcMatrix equal = make_matrix({"b"}, 2, {"base", "ref"}, {1.0, 1.0, 2.0, 2.0});
  HeadroomStats h = baseline_headroom(equal, "base", "ref");
  CHECK(h.mean_improvement_pct == 0.0);
  CHECK(h.count_above_threshold == 0);
  CHECK(h.mean_improvement_above_threshold == 0.0);
  CHECK(h.benchmarks_covered == 0);

  IpcMatrix toy = make_matrix({"b"}, 2, {"base", "ref"}, {1.0, 1.1, 2.0, 2.0});
  h = baseline_headroom(toy, "base", "ref");
  CHECK(h.mean_improvement_pct == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(h.count_above_threshold == 1);
  CHECK(h.mean_improvement_above_threshold == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(h.benchmarks_covered == 1);

  // Against the oracle the improvement is never negative.
  SplitMix64 rng(6);
  IpcMatrix r = random_matrix(rng);
  HeadroomStats ho = baseline_headroom(r, r.policies()[0], "oracle");
  CHECK(ho.mean_improvement_pct >= 0.0);
}

TEST_CASE("best_k_subset matches brute force and is monotone in k") {
  // 3-policy toy: each policy wins one timestep, so the best pair must be
  // found by actual enumeration.
  IpcMatrix toy = make_matrix({"b"}, 3, {"p1", "p2", "p3"},
                              {2.0, 1.0, 1.0,
                               1.0, 2.0, 1.0,
                               1.0, 1.0, 1.5});
  OracleResult o = compute_oracle(toy);
  SubsetSelection pair = best_k_subset(toy, o, 2);
  // Brute force over the three pairs.
  double best = 1e18;
  std::vector<std::string> best_ids;
  std::vector<std::vector<size_t>> pairs = {{0, 1}, {0, 2}, {1, 2}};
  for (const auto& s : pairs) {
    double sum = 0;
    for (uint64_t t = 0; t < 3; ++t) {
      double sub = std::max(toy.at(0, t, s[0]), toy.at(0, t, s[1]));
      sum += (o.oracle_ipc[t] - sub) / o.oracle_ipc[t] * 100.0;
    }
    if (sum / 3.0 < best) {
      best = sum / 3.0;
      best_ids = {toy.policies()[s[0]], toy.policies()[s[1]]};
    }
  }
  CHECK(pair.policy_ids == best_ids);
  CHECK(pair.mean_loss_pct == doctest::Approx(best).epsilon(1e-12));

  SubsetSelection full = best_k_subset(toy, o, 3);
  CHECK(full.mean_loss_pct == 0.0);
  CHECK(full.match_rate_pct == 100.0);

  CHECK_THROWS_AS(best_k_subset(toy, o, 0), ValidationError);
  CHECK_THROWS_AS(best_k_subset(toy, o, 4), ValidationError);

  SplitMix64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    IpcMatrix r = random_matrix(rng);
    OracleResult ro = compute_oracle(r);
    double prev = 1e18;
    for (uint64_t k = 1; k <= r.policies().size(); ++k) {
      SubsetSelection s = best_k_subset(r, ro, k);
      CHECK(s.mean_loss_pct <= prev + 1e-12);
      prev = s.mean_loss_pct;
    }
    // k = |P| recovers the oracle exactly.
    SubsetSelection all = best_k_subset(r, ro, r.policies().size());
    CHECK(all.mean_loss_pct <= 1e-12);
    CHECK(all.match_rate_pct == 100.0);
    // best_1 is at least as good as every individual policy's mean loss.
    SubsetSelection one = best_k_subset(r, ro, 1);
    for (const std::string& pid : r.policies()) {
      PolicySummary s = summarize_policy(r, ro, pid);
      CHECK(one.mean_loss_pct <= s.mean_loss_pct + 1e-12);
    }
  }
}
