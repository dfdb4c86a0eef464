#ifndef PHASESIM_CACHE_HPP
#define PHASESIM_CACHE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phasesim/prng.hpp"

namespace phasesim {

struct CacheGeometry {
  uint32_t sets = 64;       // power of two
  uint32_t ways = 8;        // >= 1
  uint32_t line_size = 64;  // power of two bytes

  uint64_t capacity() const {
    return static_cast<uint64_t>(sets) * ways * line_size;
  }
  void validate(const std::string& name) const;
};

enum class ReplacementKind : uint8_t { Lru = 0, Fifo = 1, Random = 2, Srrip = 3, Drrip = 4 };

struct ReplacementPolicyId {
  ReplacementKind kind = ReplacementKind::Lru;
  uint64_t random_seed = 1; // used by Random (victim stream) and DRRIP (BRRIP stream)
};

ReplacementPolicyId parse_replacement(const std::string& token);
std::string replacement_token(ReplacementKind kind);

enum class AccessClass : uint8_t { Demand = 0, PrefetchFill = 1 };

struct AccessOutcome {
  bool hit = false;
  std::optional<uint64_t> victim; // line address of the evicted line
};

struct CacheStats {
  uint64_t accesses = 0;
  uint64_t hits = 0;
  uint64_t misses = 0;
  uint64_t evictions = 0;
  uint64_t prefetch_fills = 0;
  uint64_t prefetch_hits = 0;
  bool operator==(const CacheStats&) const = default;
};

// Set-associative cache with a pluggable replacement policy. Policy metadata
// is one u64 per way (recency stamp, fifo order, or RRPV).
class Cache {
public:
  Cache() = default;
  Cache(CacheGeometry geo, ReplacementPolicyId policy);

  // Demand access: probes, updates replacement state, installs on miss.
  AccessOutcome access(uint64_t addr) { return access_internal(addr, AccessClass::Demand); }

  // Prefetch path: returns false (no fill) if the line is already resident.
  bool prefetch_fill(uint64_t addr);

  bool is_resident(uint64_t addr) const;

  const CacheStats& stats() const { return stats_; }
  const CacheGeometry& geometry() const { return geo_; }
  ReplacementPolicyId policy() const { return policy_; }

  uint64_t line_addr(uint64_t addr) const { return addr & ~uint64_t{geo_.line_size - 1}; }

  // DRRIP set-dueling counter, [0, 1023], starts at 512.
  uint32_t psel() const { return psel_; }

  void serialize(std::string& out) const;
  size_t deserialize(const unsigned char* data, size_t size, size_t off);

  bool state_equals(const Cache& other) const;

private:
  struct Line {
    uint64_t tag = 0;
    bool valid = false;
    bool prefetched = false; // set on prefetch fill, cleared on first demand hit
    uint64_t meta = 0;       // recency stamp | fifo order | RRPV
  };

  AccessOutcome access_internal(uint64_t addr, AccessClass cls);
  uint32_t pick_victim(uint32_t set);
  void on_hit(uint32_t set, uint32_t way);
  void install(uint32_t set, uint32_t way, uint64_t tag, AccessClass cls);
  bool srrip_leader(uint32_t set) const;
  bool brrip_leader(uint32_t set) const;
  bool use_brrip_insert(uint32_t set);

  CacheGeometry geo_;
  ReplacementPolicyId policy_;
  std::vector<Line> lines_; // sets * ways, row-major by set
  uint64_t tick_ = 0;       // recency / fifo stamp source
  uint32_t psel_ = 512;
  SplitMix64 rng_;          // random victims / BRRIP insertion stream
  CacheStats stats_;

  friend class MachineState;
};

// Test oracle: per-set LRU stack distance, hit iff distance <= ways.
uint64_t lru_reference_hits(const std::vector<uint64_t>& addrs, CacheGeometry geo);

} // namespace phasesim

#endif
