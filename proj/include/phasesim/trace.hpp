#ifndef PHASESIM_TRACE_HPP
#define PHASESIM_TRACE_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace phasesim {

enum class AccessKind : uint8_t { Load = 0, Store = 1, Branch = 2, Other = 3 };

// One instruction. The sequence number is implicit: a record's position in
// its trace. addr is 0 for non-memory kinds.
struct TraceRecord {
  uint64_t pc = 0;
  AccessKind kind = AccessKind::Other;
  uint64_t addr = 0;

  bool is_memory() const {
    return kind == AccessKind::Load || kind == AccessKind::Store;
  }
  bool operator==(const TraceRecord&) const = default;
};

using Trace = std::vector<TraceRecord>;

// Synthetic phase patterns.
struct StridePattern {
  uint64_t step = 64;
  uint64_t region_base = 0;
};
struct RandomWsPattern {
  uint64_t working_set_bytes = 4096; // power of two
  uint64_t region_base = 0;
};
struct ChasePattern {
  uint64_t permutation_size = 1024; // line-granularity slots, power of two
  uint64_t region_base = 0;
};

struct PhaseSpec {
  std::variant<StridePattern, RandomWsPattern, ChasePattern> pattern;
  uint64_t length = 0;      // instruction count, >= 1
  double load_fraction = 1.0;
};

struct SyntheticSpec {
  uint64_t seed = 0;
  std::vector<PhaseSpec> phases;
};

// One fixed-length timestep slice of a benchmark trace.
struct Segment {
  std::string benchmark_id;
  uint64_t timestep_index = 0;
  const TraceRecord* records = nullptr;
  uint64_t length = 0;
};

// Throws ValidationError naming the offending field.
void validate_spec(const SyntheticSpec& spec);

// Deterministic: identical spec yields a bit-identical trace.
Trace generate_trace(const SyntheticSpec& spec);

// Splits into floor(len/chunk_len) full segments; the trailing partial chunk
// is discarded. Segments alias the trace storage, which must outlive them.
std::vector<Segment> segment_trace(const Trace& trace,
                                   const std::string& benchmark_id,
                                   uint64_t chunk_len);

// Binary trace file: magic "PHTR1", u64 record count, then 17-byte records
// (u64 pc LE, u8 kind, u64 addr LE).
void write_trace(const Trace& trace, const std::string& path);
Trace read_trace(const std::string& path);

} // namespace phasesim

#endif
