#include "phasesim/cache.hpp"

#include <algorithm>
#include <cstring>
#include <deque>

#include "phasesim/errors.hpp"

namespace phasesim {

namespace {

bool is_pow2(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

constexpr uint64_t kRrpvMax = 3;   // 2-bit RRPV
constexpr uint64_t kRrpvInsert = 2;
constexpr uint32_t kPselMax = 1023; // 10-bit saturating
constexpr uint32_t kPselMid = 512;

void put_u64(std::string& buf, uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

uint64_t get_u64(const unsigned char* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

} // namespace

void CacheGeometry::validate(const std::string& name) const {
  if (!is_pow2(sets)) throw ValidationError(name + ": sets must be a power of two");
  if (ways < 1) throw ValidationError(name + ": ways must be >= 1");
  if (!is_pow2(line_size)) throw ValidationError(name + ": line_size must be a power of two");
}

ReplacementPolicyId parse_replacement(const std::string& token) {
  ReplacementPolicyId id;
  if (token == "lru") id.kind = ReplacementKind::Lru;
  else if (token == "fifo") id.kind = ReplacementKind::Fifo;
  else if (token == "random") id.kind = ReplacementKind::Random;
  else if (token == "srrip") id.kind = ReplacementKind::Srrip;
  else if (token == "drrip") id.kind = ReplacementKind::Drrip;
  else throw ValidationError("unknown replacement policy: " + token);
  return id;
}

std::string replacement_token(ReplacementKind kind) {
  switch (kind) {
    case ReplacementKind::Lru: return "lru";
    case ReplacementKind::Fifo: return "fifo";
    case ReplacementKind::Random: return "random";
    case ReplacementKind::Srrip: return "srrip";
    case ReplacementKind::Drrip: return "drrip";
  }
  return "?";
}

Cache::Cache(CacheGeometry geo, ReplacementPolicyId policy)
    : geo_(geo), policy_(policy), rng_(policy.random_seed) {
  geo_.validate("cache");
  lines_.assign(static_cast<size_t>(geo_.sets) * geo_.ways, Line{});
}

bool Cache::is_resident(uint64_t addr) const {
  uint64_t line = addr / geo_.line_size;
  uint32_t set = static_cast<uint32_t>(line & (geo_.sets - 1));
  const Line* base = &lines_[static_cast<size_t>(set) * geo_.ways];
  for (uint32_t w = 0; w < geo_.ways; ++w)
    if (base[w].valid && base[w].tag == line) return true;
  return false;
}

// Leader-set layout for DRRIP set-dueling: with period p = max(sets/32, 2),
// set i is an SRRIP leader iff i % p == 0 and a BRRIP leader iff i % p == p/2.
// At 1024 sets this gives 32 leaders per team.
bool Cache::srrip_leader(uint32_t set) const {
  uint32_t p = std::max(geo_.sets / 32, 2u);
  return set % p == 0;
}

bool Cache::brrip_leader(uint32_t set) const {
  uint32_t p = std::max(geo_.sets / 32, 2u);
  return set % p == p / 2;
}

bool Cache::use_brrip_insert(uint32_t set) {
  if (srrip_leader(set)) return false;
  if (brrip_leader(set)) return true;
  return psel_ > kPselMid;
}

void Cache::on_hit(uint32_t set, uint32_t way) {
  Line& ln = lines_[static_cast<size_t>(set) * geo_.ways + way];
  switch (policy_.kind) {
    case ReplacementKind::Lru:
      ln.meta = ++tick_;
      break;
    case ReplacementKind::Srrip:
    case ReplacementKind::Drrip:
      ln.meta = 0;
      break;
    case ReplacementKind::Fifo:
    case ReplacementKind::Random:
      break;
  }
}

uint32_t Cache::pick_victim(uint32_t set) {
  Line* base = &lines_[static_cast<size_t>(set) * geo_.ways];
  for (uint32_t w = 0; w < geo_.ways; ++w)
    if (!base[w].valid) return w;

  switch (policy_.kind) {
    case ReplacementKind::Lru:
    case ReplacementKind::Fifo: {
      uint32_t victim = 0;
      for (uint32_t w = 1; w < geo_.ways; ++w)
        if (base[w].meta < base[victim].meta) victim = w;
      return victim;
    }
    case ReplacementKind::Random:
      return static_cast<uint32_t>(rng_.next_below(geo_.ways));
    case ReplacementKind::Srrip:
    case ReplacementKind::Drrip:
      // Victimize the first way at RRPV max, ascending; age everyone when
      // no candidate exists.
      for (;;) {
        for (uint32_t w = 0; w < geo_.ways; ++w)
          if (base[w].meta == kRrpvMax) return w;
        for (uint32_t w = 0; w < geo_.ways; ++w) ++base[w].meta;
      }
  }
  return 0;
}

void Cache::install(uint32_t set, uint32_t way, uint64_t tag, AccessClass cls) {
  Line& ln = lines_[static_cast<size_t>(set) * geo_.ways + way];
  ln.tag = tag;
  ln.valid = true;
  ln.prefetched = (cls == AccessClass::PrefetchFill);
  switch (policy_.kind) {
    case ReplacementKind::Lru:
    case ReplacementKind::Fifo:
      ln.meta = ++tick_;
      break;
    case ReplacementKind::Random:
      ln.meta = 0;
      break;
    case ReplacementKind::Srrip:
      ln.meta = kRrpvInsert;
      break;
    case ReplacementKind::Drrip:
      if (use_brrip_insert(set)) {
        // BRRIP: distant insertion, near-distant with probability 1/32.
        ln.meta = (rng_.next() & 31) == 0 ? kRrpvInsert : kRrpvMax;
      } else {
        ln.meta = kRrpvInsert;
      }
      break;
  }
}

AccessOutcome Cache::access_internal(uint64_t addr, AccessClass cls) {
  uint64_t line = addr / geo_.line_size;
  uint32_t set = static_cast<uint32_t>(line & (geo_.sets - 1));
  Line* base = &lines_[static_cast<size_t>(set) * geo_.ways];

  stats_.accesses++;
  for (uint32_t w = 0; w < geo_.ways; ++w) {
    if (base[w].valid && base[w].tag == line) {
      stats_.hits++;
      if (base[w].prefetched) {
        stats_.prefetch_hits++;
        base[w].prefetched = false;
      }
      on_hit(set, w);
      return {true, std::nullopt};
    }
  }

  stats_.misses++;
  if (policy_.kind == ReplacementKind::Drrip) {
    if (srrip_leader(set)) psel_ = std::min(psel_ + 1, kPselMax);
    else if (brrip_leader(set) && psel_ > 0) psel_--;
  }

  uint32_t way = pick_victim(set);
  AccessOutcome out{false, std::nullopt};
  if (base[way].valid) {
    out.victim = base[way].tag * geo_.line_size;
    stats_.evictions++;
  }
  install(set, way, line, cls);
  return out;
}

bool Cache::prefetch_fill(uint64_t addr) {
  if (is_resident(addr)) return false;
  uint64_t line = addr / geo_.line_size;
  uint32_t set = static_cast<uint32_t>(line & (geo_.sets - 1));
  Line* base = &lines_[static_cast<size_t>(set) * geo_.ways];

  if (policy_.kind == ReplacementKind::Drrip) {
    if (srrip_leader(set)) psel_ = std::min(psel_ + 1, kPselMax);
    else if (brrip_leader(set) && psel_ > 0) psel_--;
  }

  uint32_t way = pick_victim(set);
  if (base[way].valid) stats_.evictions++;
  install(set, way, line, AccessClass::PrefetchFill);
  stats_.prefetch_fills++;
  return true;
}

void Cache::serialize(std::string& out) const {
  put_u64(out, geo_.sets);
  put_u64(out, geo_.ways);
  put_u64(out, geo_.line_size);
  out.push_back(static_cast<char>(policy_.kind));
  put_u64(out, policy_.random_seed);
  put_u64(out, tick_);
  put_u64(out, psel_);
  put_u64(out, rng_.state());
  put_u64(out, stats_.accesses);
  put_u64(out, stats_.hits);
  put_u64(out, stats_.misses);
  put_u64(out, stats_.evictions);
  put_u64(out, stats_.prefetch_fills);
  put_u64(out, stats_.prefetch_hits);
  for (const Line& ln : lines_) {
    put_u64(out, ln.tag);
    out.push_back(ln.valid ? 1 : 0);
    out.push_back(ln.prefetched ? 1 : 0);
    put_u64(out, ln.meta);
  }
}

size_t Cache::deserialize(const unsigned char* data, size_t size, size_t off) {
  auto need = [&](size_t n) {
    if (off + n > size)
      throw FormatError("checkpoint truncated at byte offset " + std::to_string(size));
  };
  need(8 * 3);
  geo_.sets = static_cast<uint32_t>(get_u64(data + off)); off += 8;
  geo_.ways = static_cast<uint32_t>(get_u64(data + off)); off += 8;
  geo_.line_size = static_cast<uint32_t>(get_u64(data + off)); off += 8;
  geo_.validate("checkpoint cache");
  need(1 + 8);
  uint8_t kind = data[off++];
  if (kind > 4) throw FormatError("checkpoint: invalid replacement kind");
  policy_.kind = static_cast<ReplacementKind>(kind);
  policy_.random_seed = get_u64(data + off); off += 8;
  need(8 * 9);
  tick_ = get_u64(data + off); off += 8;
  psel_ = static_cast<uint32_t>(get_u64(data + off)); off += 8;
  rng_.set_state(get_u64(data + off)); off += 8;
  stats_.accesses = get_u64(data + off); off += 8;
  stats_.hits = get_u64(data + off); off += 8;
  stats_.misses = get_u64(data + off); off += 8;
  stats_.evictions = get_u64(data + off); off += 8;
  stats_.prefetch_fills = get_u64(data + off); off += 8;
  stats_.prefetch_hits = get_u64(data + off); off += 8;
  size_t n = static_cast<size_t>(geo_.sets) * geo_.ways;
  lines_.assign(n, Line{});
  for (size_t i = 0; i < n; ++i) {
    need(8 + 1 + 1 + 8);
    lines_[i].tag = get_u64(data + off); off += 8;
    lines_[i].valid = data[off++] != 0;
    lines_[i].prefetched = data[off++] != 0;
    lines_[i].meta = get_u64(data + off); off += 8;
  }
  return off;
}

bool Cache::state_equals(const Cache& other) const {
  if (geo_.sets != other.geo_.sets || geo_.ways != other.geo_.ways ||
      geo_.line_size != other.geo_.line_size)
    return false;
  if (tick_ != other.tick_ || psel_ != other.psel_ ||
      rng_.state() != other.rng_.state() || !(stats_ == other.stats_))
    return false;
  for (size_t i = 0; i < lines_.size(); ++i) {
    const Line& a = lines_[i];
    const Line& b = other.lines_[i];
    if (a.tag != b.tag || a.valid != b.valid || a.prefetched != b.prefetched ||
        a.meta != b.meta)
      return false;
  }
  return true;
}

uint64_t lru_reference_hits(const std::vector<uint64_t>& addrs, CacheGeometry geo) {
  geo.validate("oracle");
  std::vector<std::deque<uint64_t>> stacks(geo.sets);
  uint64_t hits = 0;
  for (uint64_t addr : addrs) {
    uint64_t line = addr / geo.line_size;
    uint32_t set = static_cast<uint32_t>(line & (geo.sets - 1));
    auto& stk = stacks[set];
    auto it = std::find(stk.begin(), stk.end(), line);
    if (it != stk.end()) {
      uint64_t distance = static_cast<uint64_t>(it - stk.begin()) + 1;
      if (distance <= geo.ways) ++hits;
      stk.erase(it);
    }
    stk.push_front(line);
  }
  return hits;
}

} // namespace phasesim
