#include "phasesim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <set>
#include <thread>

#include "phasesim/errors.hpp"

namespace phasesim {

void ExperimentPlan::validate() const {
  if (traces.empty()) throw ValidationError("plan has no traces");
  if (chunk_len < 1) throw ValidationError("plan.chunk_len must be >= 1");
  if (policy_space.empty()) throw ValidationError("plan has no policies");
  std::set<std::string> ids;
  for (const TraceSource& t : traces)
    if (!ids.insert(t.benchmark_id).second)
      throw ValidationError("duplicate benchmark id: " + t.benchmark_id);
  std::set<std::string> pids;
  for (const PolicyConfig& p : policy_space)
    if (!pids.insert(p.id()).second)
      throw ValidationError("duplicate policy id: " + p.id());
  timing.validate();
  hardware.validate();
}

IpcMatrix run_experiment(const ExperimentPlan& plan, unsigned threads) {
  plan.validate();

  // Load or generate all traces up front; read-only afterwards.
  std::vector<Trace> traces(plan.traces.size());
  std::vector<std::string> benchmark_ids;
  for (size_t i = 0; i < plan.traces.size(); ++i) {
    const TraceSource& src = plan.traces[i];
    benchmark_ids.push_back(src.benchmark_id);
    try {
      if (const auto* path = std::get_if<std::string>(&src.source))
        traces[i] = read_trace(*path);
      else
        traces[i] = generate_trace(std::get<SyntheticSpec>(src.source));
    } catch (const ValidationError& e) {
      throw ValidationError("benchmark " + src.benchmark_id + ": " + e.what());
    } catch (const FormatError& e) {
      throw ValidationError("benchmark " + src.benchmark_id + ": " + e.what());
    } catch (const IoError& e) {
      throw IoError("benchmark " + src.benchmark_id + ": " + e.what());
    }
  }

  uint64_t timesteps = traces[0].size() / plan.chunk_len;
  for (size_t i = 0; i < traces.size(); ++i) {
    uint64_t n = traces[i].size() / plan.chunk_len;
    if (n == 0)
      throw ValidationError("benchmark " + plan.traces[i].benchmark_id +
                            ": trace shorter than one chunk");
    if (n != timesteps)
      throw ValidationError("benchmark " + plan.traces[i].benchmark_id +
                            ": timestep count " + std::to_string(n) +
                            " differs from " + std::to_string(timesteps) +
                            "; the matrix cross-product must be complete");
  }

  std::vector<std::string> policy_ids;
  for (const PolicyConfig& p : plan.policy_space) policy_ids.push_back(p.id());
  IpcMatrix matrix(benchmark_ids, timesteps, policy_ids);

  // One work item per (benchmark, policy) row; continuous mode carries state
  // across the row's timesteps in order, so a row is the atomic unit.
  struct Row { size_t trace_idx; size_t policy_idx; };
  std::vector<Row> rows;
  for (size_t b = 0; b < traces.size(); ++b)
    for (size_t p = 0; p < plan.policy_space.size(); ++p)
      rows.push_back({b, p});

  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::string error_msg;
  std::mutex error_mu;

  auto worker = [&]() {
    for (;;) {
      size_t r = next.fetch_add(1);
      if (r >= rows.size() || failed.load()) return;
      const Row& row = rows[r];
      const Trace& trace = traces[row.trace_idx];
      const PolicyConfig& policy = plan.policy_space[row.policy_idx];
      try {
        auto segments =
            segment_trace(trace, plan.traces[row.trace_idx].benchmark_id, plan.chunk_len);
        MachineState state(policy, plan.hardware);
        size_t bidx = static_cast<size_t>(
            std::lower_bound(matrix.benchmarks().begin(), matrix.benchmarks().end(),
                             plan.traces[row.trace_idx].benchmark_id) -
            matrix.benchmarks().begin());
        size_t pidx = matrix.policy_index(policy.id());
        for (uint64_t t = 0; t < timesteps; ++t) {
          if (plan.mode == RunMode::ColdChunk) state = MachineState(policy, plan.hardware);
          SegmentResult res = simulate_segment(segments[t], plan.timing, state);
          matrix.set(bidx, t, pidx, res.ipc);
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!failed.exchange(true))
          error_msg = "cell (" + plan.traces[row.trace_idx].benchmark_id + ", *, " +
                      policy.id() + "): " + e.what();
        return;
      }
    }
  };

  unsigned n = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(rows.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw ValidationError(error_msg);

  matrix.validate();
  return matrix;
}

std::vector<BiasPoint> measure_truncation_bias(const Trace& trace,
                                               const PolicyConfig& policy,
                                               const TimingModel& timing,
                                               const HierarchyConfig& hardware,
                                               const std::vector<uint64_t>& chunk_lengths) {
  if (chunk_lengths.empty()) throw ValidationError("no chunk lengths given");
  for (uint64_t len : chunk_lengths)
    if (len < 1 || trace.size() < len)
      throw ValidationError("trace shorter than one chunk of length " +
                            std::to_string(len));

  std::vector<BiasPoint> out;
  for (uint64_t len : chunk_lengths) {
    auto segments = segment_trace(trace, "bias", len);
    MachineState cont(policy, hardware);
    double sum = 0.0;
    for (const Segment& seg : segments) {
      SegmentResult rc = simulate_segment(seg, timing, cont);
      MachineState cold(policy, hardware);
      SegmentResult rk = simulate_segment(seg, timing, cold);
      sum += std::abs(rk.ipc - rc.ipc) / rc.ipc * 100.0;
    }
    out.push_back({len, sum / static_cast<double>(segments.size())});
  }
  return out;
}

} // namespace phasesim
