#include "phasesim/engine.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <set>

#include "phasesim/errors.hpp"

namespace phasesim {

namespace {

void put_u64(std::string& buf, uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& buf, double v) { put_u64(buf, std::bit_cast<uint64_t>(v)); }

uint64_t get_u64(const unsigned char* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

constexpr char kCheckpointMagic[5] = {'P', 'H', 'C', 'K', '1'};
constexpr uint8_t kCheckpointVersion = 1;

} // namespace

std::string PolicyConfig::id() const {
  return data_prefetcher_token(l1d_prefetcher) + "/" +
         inst_prefetcher_token(l1i_prefetcher) + "/" +
         replacement_token(l2_replacement.kind);
}

PolicyConfig PolicyConfig::parse(const std::string& id) {
  size_t a = id.find('/');
  size_t b = id.find('/', a == std::string::npos ? a : a + 1);
  if (a == std::string::npos || b == std::string::npos ||
      id.find('/', b + 1) != std::string::npos)
    throw ValidationError("policy id must be \"l1d/l1i/l2\": " + id);
  PolicyConfig cfg;
  cfg.l1d_prefetcher = parse_data_prefetcher(id.substr(0, a));
  cfg.l1i_prefetcher = parse_inst_prefetcher(id.substr(a + 1, b - a - 1));
  cfg.l2_replacement = parse_replacement(id.substr(b + 1));
  return cfg;
}

void TimingModel::validate() const {
  if (!(base_cpi > 0)) throw ValidationError("timing.base_cpi must be > 0");
  if (l2_hit_penalty < 0 || mem_penalty < 0)
    throw ValidationError("timing penalties must be >= 0");
  if (!(overlap >= 0 && overlap < 1))
    throw ValidationError("timing.overlap must be in [0,1)");
}

void HierarchyConfig::validate() const {
  l1i.validate("l1i");
  l1d.validate("l1d");
  l2.validate("l2");
  prefetch.validate();
  if (l1i.line_size != l1d.line_size || l1d.line_size != l2.line_size)
    throw ValidationError("all cache levels must share one line_size");
}

MachineState::MachineState(const PolicyConfig& policy, const HierarchyConfig& hw)
    : policy_(policy), hw_(hw) {
  hw_.validate();
  // L1 caches are always LRU; only the L2 replacement policy varies.
  l1i_ = Cache(hw_.l1i, ReplacementPolicyId{ReplacementKind::Lru, 0});
  l1d_ = Cache(hw_.l1d, ReplacementPolicyId{ReplacementKind::Lru, 0});
  ReplacementPolicyId l2pol = policy.l2_replacement;
  l2pol.random_seed = hw_.replacement_seed;
  l2_ = Cache(hw_.l2, l2pol);
  dpf_ = DataPrefetcher(policy.l1d_prefetcher, hw_.prefetch, hw_.l2.line_size);
  ipf_ = InstPrefetcher(policy.l1i_prefetcher, hw_.l2.line_size);
}

SegmentResult simulate_segment(const Segment& segment, const TimingModel& timing,
                               MachineState& state) {
  timing.validate();
  if (segment.records == nullptr && segment.length > 0)
    throw ValidationError("segment has no record storage");

  Cache& l1i = state.l1i_;
  Cache& l1d = state.l1d_;
  Cache& l2 = state.l2_;
  const CacheStats l1i0 = l1i.stats(), l1d0 = l1d.stats(), l20 = l2.stats();

  auto fill_path = [&](Cache& l1, const std::vector<uint64_t>& candidates) {
    // Dedupe within one call; fills go to L1 and, when absent, L2 as well.
    for (size_t i = 0; i < candidates.size(); ++i) {
      uint64_t line = l1.line_addr(candidates[i]);
      bool dup = false;
      for (size_t j = 0; j < i; ++j)
        if (l1.line_addr(candidates[j]) == line) { dup = true; break; }
      if (dup) continue;
      if (!l1.is_resident(line)) {
        if (!l2.is_resident(line)) l2.prefetch_fill(line);
        l1.prefetch_fill(line);
      }
    }
  };

  double cycles = 0.0;
  for (uint64_t i = 0; i < segment.length; ++i) {
    const TraceRecord& rec = segment.records[i];
    cycles += timing.base_cpi;

    // Instruction side.
    if (!l1i.access(rec.pc).hit) {
      if (l2.access(rec.pc).hit)
        cycles += timing.effective(timing.l2_hit_penalty);
      else
        cycles += timing.effective(timing.mem_penalty);
    }
    fill_path(l1i, state.ipf_.observe(rec.pc));

    // Data side.
    if (rec.is_memory()) {
      bool hit = l1d.access(rec.addr).hit;
      if (!hit) {
        if (l2.access(rec.addr).hit)
          cycles += timing.effective(timing.l2_hit_penalty);
        else
          cycles += timing.effective(timing.mem_penalty);
      }
      fill_path(l1d, state.dpf_.observe(rec.pc, rec.addr, hit));
    }
  }

  state.total_instructions_ += segment.length;
  state.total_cycles_ += cycles;

  auto delta = [](const CacheStats& now, const CacheStats& before) {
    CacheStats d;
    d.accesses = now.accesses - before.accesses;
    d.hits = now.hits - before.hits;
    d.misses = now.misses - before.misses;
    d.evictions = now.evictions - before.evictions;
    d.prefetch_fills = now.prefetch_fills - before.prefetch_fills;
    d.prefetch_hits = now.prefetch_hits - before.prefetch_hits;
    return d;
  };

  SegmentResult res;
  res.instructions = segment.length;
  res.cycles = cycles;
  res.ipc = cycles > 0 ? static_cast<double>(segment.length) / cycles : 0.0;
  res.l1i = delta(l1i.stats(), l1i0);
  res.l1d = delta(l1d.stats(), l1d0);
  res.l2 = delta(l2.stats(), l20);
  return res;
}

std::string MachineState::checkpoint() const {
  std::string out;
  out.append(kCheckpointMagic, 5);
  out.push_back(static_cast<char>(kCheckpointVersion));
  std::string pid = policy_.id();
  put_u64(out, pid.size());
  out.append(pid);
  // Hierarchy config.
  for (const CacheGeometry* g : {&hw_.l1i, &hw_.l1d, &hw_.l2}) {
    put_u64(out, g->sets);
    put_u64(out, g->ways);
    put_u64(out, g->line_size);
  }
  put_u64(out, hw_.prefetch.ip_stride.table_size);
  put_u64(out, hw_.prefetch.ip_stride.confidence_threshold);
  put_u64(out, hw_.prefetch.ip_stride.degree);
  put_u64(out, hw_.prefetch.stream.detect_window);
  put_u64(out, hw_.prefetch.stream.degree);
  put_u64(out, hw_.replacement_seed);
  l1i_.serialize(out);
  l1d_.serialize(out);
  l2_.serialize(out);
  dpf_.serialize(out);
  put_u64(out, total_instructions_);
  put_f64(out, total_cycles_);
  return out;
}

MachineState MachineState::restore(const std::string& blob) {
  const auto* p = reinterpret_cast<const unsigned char*>(blob.data());
  size_t size = blob.size();
  if (size < 6 || std::memcmp(blob.data(), kCheckpointMagic, 5) != 0)
    throw FormatError("checkpoint: bad magic");
  if (p[5] != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(p[5]));
  size_t off = 6;
  auto need = [&](size_t n) {
    if (off + n > size)
      throw FormatError("checkpoint truncated at byte offset " + std::to_string(size));
  };
  need(8);
  uint64_t pid_len = get_u64(p + off); off += 8;
  need(pid_len);
  std::string pid(blob.data() + off, pid_len); off += pid_len;

  MachineState st;
  st.policy_ = PolicyConfig::parse(pid);
  for (CacheGeometry* g : {&st.hw_.l1i, &st.hw_.l1d, &st.hw_.l2}) {
    need(24);
    g->sets = static_cast<uint32_t>(get_u64(p + off)); off += 8;
    g->ways = static_cast<uint32_t>(get_u64(p + off)); off += 8;
    g->line_size = static_cast<uint32_t>(get_u64(p + off)); off += 8;
  }
  need(48);
  st.hw_.prefetch.ip_stride.table_size = static_cast<uint32_t>(get_u64(p + off)); off += 8;
  st.hw_.prefetch.ip_stride.confidence_threshold = static_cast<uint32_t>(get_u64(p + off)); off += 8;
  st.hw_.prefetch.ip_stride.degree = static_cast<uint32_t>(get_u64(p + off)); off += 8;
  st.hw_.prefetch.stream.detect_window = static_cast<uint32_t>(get_u64(p + off)); off += 8;
  st.hw_.prefetch.stream.degree = static_cast<uint32_t>(get_u64(p + off)); off += 8;
  st.hw_.replacement_seed = get_u64(p + off); off += 8;
  st.hw_.validate();
  off = st.l1i_.deserialize(p, size, off);
  off = st.l1d_.deserialize(p, size, off);
  off = st.l2_.deserialize(p, size, off);
  st.dpf_ = DataPrefetcher(st.policy_.l1d_prefetcher, st.hw_.prefetch, st.hw_.l2.line_size);
  off = st.dpf_.deserialize(p, size, off);
  st.ipf_ = InstPrefetcher(st.policy_.l1i_prefetcher, st.hw_.l2.line_size);
  need(16);
  st.total_instructions_ = get_u64(p + off); off += 8;
  st.total_cycles_ = std::bit_cast<double>(get_u64(p + off)); off += 8;
  if (off != size)
    throw FormatError("checkpoint: trailing bytes at offset " + std::to_string(off));
  return st;
}

bool MachineState::state_equals(const MachineState& other) const {
  return policy_.id() == other.policy_.id() && l1i_.state_equals(other.l1i_) &&
         l1d_.state_equals(other.l1d_) && l2_.state_equals(other.l2_) &&
         dpf_.state_equals(other.dpf_) &&
         total_instructions_ == other.total_instructions_ &&
         total_cycles_ == other.total_cycles_;
}

std::vector<PolicyConfig> enumerate_policy_space(
    const std::vector<DataPrefetcherKind>& l1d_options,
    const std::vector<InstPrefetcherKind>& l1i_options,
    const std::vector<ReplacementKind>& l2_options,
    uint64_t replacement_seed) {
  if (l1d_options.empty() || l1i_options.empty() || l2_options.empty())
    throw ValidationError("policy option lists must be non-empty");
  std::vector<PolicyConfig> out;
  for (DataPrefetcherKind d : l1d_options)
    for (InstPrefetcherKind i : l1i_options)
      for (ReplacementKind r : l2_options) {
        PolicyConfig cfg;
        cfg.l1d_prefetcher = d;
        cfg.l1i_prefetcher = i;
        cfg.l2_replacement = ReplacementPolicyId{r, replacement_seed};
        out.push_back(cfg);
      }
  std::sort(out.begin(), out.end(),
            [](const PolicyConfig& a, const PolicyConfig& b) { return a.id() < b.id(); });
  std::set<std::string> seen;
  for (const PolicyConfig& c : out)
    if (!seen.insert(c.id()).second)
      throw ValidationError("duplicate policy id: " + c.id());
  return out;
}

} // namespace phasesim
