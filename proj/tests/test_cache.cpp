#include <doctest.h>

#include <set>
#include <vector>

#include "phasesim/cache.hpp"
#include "phasesim/prng.hpp"

using namespace phasesim;

namespace {

// Single-set caches make hand traces easy to follow.
CacheGeometry one_set(uint32_t ways) { return CacheGeometry{1, ways, 64}; }

Cache make(CacheGeometry geo, ReplacementKind kind, uint64_t seed = 1) {
  return Cache(geo, ReplacementPolicyId{kind, seed});
}

} // namespace

TEST_CASE("cold cache misses with no victim") {
  Cache c = make(one_set(2), ReplacementKind::Lru);
  AccessOutcome out = c.access(0x1000);
  CHECK_FALSE(out.hit);
  CHECK_FALSE(out.victim.has_value());
}

TEST_CASE("2-way LRU: A,B,A,C evicts B") {
  Cache c = make(one_set(2), ReplacementKind::Lru);
  const uint64_t A = 0x0, B = 0x40, C = 0x80;
  c.access(A);
  c.access(B);
  CHECK(c.access(A).hit);
  AccessOutcome out = c.access(C);
  CHECK_FALSE(out.hit);
  REQUIRE(out.victim.has_value());
  CHECK(*out.victim == B);
}

TEST_CASE("2-way SRRIP: A,B,C ages both to 3 and evicts A") {
  Cache c = make(one_set(2), ReplacementKind::Srrip);
  const uint64_t A = 0x0, B = 0x40, C = 0x80;
  c.access(A);
  c.access(B);
  AccessOutcome out = c.access(C);
  CHECK_FALSE(out.hit);
  REQUIRE(out.victim.has_value());
  CHECK(*out.victim == A);
}

TEST_CASE("FIFO evicts in insertion order regardless of hits") {
  Cache c = make(one_set(2), ReplacementKind::Fifo);
  const uint64_t A = 0x0, B = 0x40, C = 0x80;
  c.access(A);
  c.access(B);
  CHECK(c.access(A).hit); // does not refresh FIFO order
  AccessOutcome out = c.access(C);
  REQUIRE(out.victim.has_value());
  CHECK(*out.victim == A);
}

TEST_CASE("stack distance oracle basics") {
  CacheGeometry geo = one_set(2);
  CHECK(lru_reference_hits({0x0, 0x0}, geo) == 1);
  CHECK(lru_reference_hits({0x0, 0x40, 0x80, 0x0}, geo) == 0);
  // Fully associative containment: second pass over a fitting working set hits.
  CacheGeometry fa{1, 8, 64};
  std::vector<uint64_t> seq;
  for (int pass = 0; pass < 2; ++pass)
    for (uint64_t i = 0; i < 8; ++i) seq.push_back(i * 64);
  CHECK(lru_reference_hits(seq, fa) == 8);
}

TEST_CASE("LRU simulator matches the stack-distance oracle") {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    CacheGeometry geo{static_cast<uint32_t>(1u << rng.next_below(5)),
                      static_cast<uint32_t>(1 + rng.next_below(8)), 64};
    Cache c = make(geo, ReplacementKind::Lru);
    std::vector<uint64_t> seq;
    for (int i = 0; i < 1000; ++i) seq.push_back(rng.next_below(256) * 64);
    uint64_t hits = 0;
    for (uint64_t a : seq) hits += c.access(a).hit ? 1 : 0;
    CHECK(hits == lru_reference_hits(seq, geo));
  }
}

TEST_CASE("hits plus misses equals accesses") {
  SplitMix64 rng(7);
  for (ReplacementKind kind : {ReplacementKind::Lru, ReplacementKind::Fifo,
                               ReplacementKind::Random, ReplacementKind::Srrip,
                               ReplacementKind::Drrip}) {
    Cache c = make(CacheGeometry{16, 4, 64}, kind, 5);
    for (int i = 0; i < 5000; ++i) c.access(rng.next_below(4096) * 64);
    const CacheStats& s = c.stats();
    CHECK(s.hits + s.misses == s.accesses);
    CHECK(s.accesses == 5000);
  }
}

TEST_CASE("every victim was resident immediately before eviction") {
  SplitMix64 rng(13);
  for (ReplacementKind kind : {ReplacementKind::Lru, ReplacementKind::Random,
                               ReplacementKind::Srrip, ReplacementKind::Drrip}) {
    Cache c = make(CacheGeometry{4, 2, 64}, kind, 3);
    std::set<uint64_t> resident;
    for (int i = 0; i < 3000; ++i) {
      uint64_t addr = rng.next_below(128) * 64;
      AccessOutcome out = c.access(addr);
      if (out.victim) {
        CHECK(resident.count(*out.victim) == 1);
        resident.erase(*out.victim);
      }
      resident.insert(addr);
    }
  }
}

TEST_CASE("random replacement is deterministic given the seed") {
  auto run = [](uint64_t seed) {
    Cache c = make(CacheGeometry{4, 2, 64}, ReplacementKind::Random, seed);
    SplitMix64 rng(21);
    std::vector<bool> outcomes;
    for (int i = 0; i < 2000; ++i)
      outcomes.push_back(c.access(rng.next_below(512) * 64).hit);
    return outcomes;
  };
  CHECK(run(42) == run(42));
}

TEST_CASE("DRRIP PSEL saturates and steps by one") {
  // 2 sets: set 0 is the SRRIP leader, set 1 the BRRIP leader.
  CacheGeometry geo{2, 1, 64};
  Cache c = make(geo, ReplacementKind::Drrip, 1);
  CHECK(c.psel() == 512);
  // One BRRIP-leader miss decrements from the midpoint by exactly 1.
  c.access(1 * 64); // set 1
  CHECK(c.psel() == 511);
  // SRRIP-leader misses increment and saturate at the top.
  for (int i = 0; i < 3000; ++i) c.access((2 * i) * 64); // even lines -> set 0
  CHECK(c.psel() == 1023);
  for (int i = 0; i < 3000; ++i) c.access((2 * i) * 64);
  CHECK(c.psel() == 1023);
}

TEST_CASE("DRRIP tracks SRRIP on a streaming scan") {
  CacheGeometry geo{16, 4, 64}; // 4 KiB
  Cache srrip = make(geo, ReplacementKind::Srrip);
  Cache drrip = make(geo, ReplacementKind::Drrip, 1);
  // Repeated scan over 16 KiB, four times the cache.
  for (int pass = 0; pass < 20; ++pass)
    for (uint64_t line = 0; line < 256; ++line) {
      srrip.access(line * 64);
      drrip.access(line * 64);
    }
  double srrip_rate = static_cast<double>(srrip.stats().hits) /
                      static_cast<double>(srrip.stats().accesses);
  double drrip_rate = static_cast<double>(drrip.stats().hits) /
                      static_cast<double>(drrip.stats().accesses);
  CHECK(drrip_rate >= srrip_rate - 0.05);
}

TEST_CASE("prefetch fill and prefetch hit accounting") {
  Cache c = make(one_set(4), ReplacementKind::Lru);
  CHECK(c.prefetch_fill(0x40));
  CHECK_FALSE(c.prefetch_fill(0x40)); // already resident
  CHECK(c.stats().prefetch_fills == 1);
  CHECK(c.access(0x40).hit);
  CHECK(c.stats().prefetch_hits == 1);
  c.access(0x40);
  CHECK(c.stats().prefetch_hits == 1); // counted once per fill
}

TEST_CASE("misaligned addresses are line-masked") {
  Cache c = make(one_set(2), ReplacementKind::Lru);
  c.access(0x1007);
  CHECK(c.access(0x103F).hit);
  CHECK_FALSE(c.access(0x1040).hit);
}
