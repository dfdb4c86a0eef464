#ifndef PHASESIM_HARNESS_HPP
#define PHASESIM_HARNESS_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "phasesim/engine.hpp"
#include "phasesim/matrix.hpp"
#include "phasesim/trace.hpp"

namespace phasesim {

enum class RunMode : uint8_t { Continuous = 0, ColdChunk = 1 };

struct TraceSource {
  std::string benchmark_id;
  std::variant<std::string, SyntheticSpec> source; // file path or inline spec
};

struct ExperimentPlan {
  std::vector<TraceSource> traces;
  uint64_t chunk_len = 200000;
  std::vector<PolicyConfig> policy_space;
  TimingModel timing;
  HierarchyConfig hardware;
  RunMode mode = RunMode::Continuous;

  void validate() const;
};

// Runs every (benchmark, timestep, policy) cell. Parallelism is over
// (benchmark, policy) rows; the result is bit-identical for any thread count.
// threads == 0 picks the hardware concurrency.
IpcMatrix run_experiment(const ExperimentPlan& plan, unsigned threads = 0);

struct BiasPoint {
  uint64_t chunk_len;
  double mean_abs_gap_pct; // mean over chunks of |ipc_cold - ipc_cont|/ipc_cont * 100
};

// History-truncation bias: compares cold-chunk against continuous simulation
// of the same trace prefix at each chunk length.
std::vector<BiasPoint> measure_truncation_bias(const Trace& trace,
                                               const PolicyConfig& policy,
                                               const TimingModel& timing,
                                               const HierarchyConfig& hardware,
                                               const std::vector<uint64_t>& chunk_lengths);

} // namespace phasesim

#endif
