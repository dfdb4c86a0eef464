#ifndef PHASESIM_ENGINE_HPP
#define PHASESIM_ENGINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "phasesim/cache.hpp"
#include "phasesim/prefetch.hpp"
#include "phasesim/trace.hpp"

namespace phasesim {

// One point in the policy space. Canonical id: "l1d/l1i/l2", lowercase.
struct PolicyConfig {
  DataPrefetcherKind l1d_prefetcher = DataPrefetcherKind::None;
  InstPrefetcherKind l1i_prefetcher = InstPrefetcherKind::NextLine;
  ReplacementPolicyId l2_replacement;

  std::string id() const;
  static PolicyConfig parse(const std::string& id);
};

struct TimingModel {
  double base_cpi = 0.25;
  double l2_hit_penalty = 12.0;
  double mem_penalty = 200.0;
  double overlap = 0.6; // fraction of a miss penalty hidden, in [0,1)

  void validate() const;
  double effective(double nominal) const { return nominal * (1.0 - overlap); }
};

struct HierarchyConfig {
  CacheGeometry l1i{64, 8, 64};   // 32 KiB
  CacheGeometry l1d{64, 8, 64};   // 32 KiB
  CacheGeometry l2{1024, 8, 64};  // 512 KiB
  PrefetcherParams prefetch;
  uint64_t replacement_seed = 1;

  void validate() const;
};

struct SegmentResult {
  double ipc = 0.0;
  uint64_t instructions = 0;
  double cycles = 0.0;
  CacheStats l1i;
  CacheStats l1d;
  CacheStats l2;
  bool operator==(const SegmentResult&) const = default;
};

// Full microarchitectural state carried across segments: the three caches,
// both prefetchers, and cumulative counters.
class MachineState {
public:
  MachineState() = default;
  MachineState(const PolicyConfig& policy, const HierarchyConfig& hw);

  // Serialized form: magic "PHCK1", version byte, then fields in documented
  // order, little-endian throughout.
  std::string checkpoint() const;
  static MachineState restore(const std::string& blob);

  bool state_equals(const MachineState& other) const;

  const Cache& l1i() const { return l1i_; }
  const Cache& l1d() const { return l1d_; }
  const Cache& l2() const { return l2_; }
  const PolicyConfig& policy() const { return policy_; }

private:
  friend SegmentResult simulate_segment(const Segment&, const TimingModel&, MachineState&);

  PolicyConfig policy_;
  HierarchyConfig hw_;
  Cache l1i_, l1d_, l2_;
  DataPrefetcher dpf_;
  InstPrefetcher ipf_;
  uint64_t total_instructions_ = 0;
  double total_cycles_ = 0.0;
};

// Runs one segment, mutating `state` in place for continuation.
SegmentResult simulate_segment(const Segment& segment, const TimingModel& timing,
                               MachineState& state);

// Cartesian product of the option lists in lexicographic id order.
std::vector<PolicyConfig> enumerate_policy_space(
    const std::vector<DataPrefetcherKind>& l1d_options,
    const std::vector<InstPrefetcherKind>& l1i_options,
    const std::vector<ReplacementKind>& l2_options,
    uint64_t replacement_seed = 1);

} // namespace phasesim

#endif
