#include "phasesim/trace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

#include "phasesim/errors.hpp"
#include "phasesim/prng.hpp"

namespace phasesim {

namespace {

constexpr uint64_t kLineSize = 64;
constexpr int kLoopPcs = 16; // loop body size per phase

bool is_pow2(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

} // namespace

void validate_spec(const SyntheticSpec& spec) {
  if (spec.phases.empty())
    throw ValidationError("synthetic spec: phases must be non-empty");
  for (size_t i = 0; i < spec.phases.size(); ++i) {
    const PhaseSpec& p = spec.phases[i];
    const std::string where = "phase " + std::to_string(i) + ": ";
    if (p.length < 1)
      throw ValidationError(where + "length must be >= 1");
    if (!(p.load_fraction >= 0.0 && p.load_fraction <= 1.0))
      throw ValidationError(where + "load_fraction must be in [0,1]");
    if (const auto* ws = std::get_if<RandomWsPattern>(&p.pattern)) {
      if (!is_pow2(ws->working_set_bytes))
        throw ValidationError(where + "working_set_bytes must be a power of two");
    } else if (const auto* ch = std::get_if<ChasePattern>(&p.pattern)) {
      if (!is_pow2(ch->permutation_size))
        throw ValidationError(where + "permutation_size must be a power of two");
    }
  }
}

Trace generate_trace(const SyntheticSpec& spec) {
  validate_spec(spec);
  uint64_t total = 0;
  for (const PhaseSpec& p : spec.phases) total += p.length;
  Trace trace;
  trace.reserve(total);

  for (size_t pi = 0; pi < spec.phases.size(); ++pi) {
    const PhaseSpec& phase = spec.phases[pi];
    SplitMix64 rng(mix64(spec.seed, pi));

    // Distinct small pc set per phase so IP-indexed prefetchers can train.
    // round(load_fraction * 16) slots of the loop body issue loads, at fixed
    // positions, so each load pc sees a constant per-pc stride.
    const uint64_t pc_base = 0x400000 + static_cast<uint64_t>(pi) * 0x1000;
    int loads_per_iter =
        static_cast<int>(std::lround(phase.load_fraction * kLoopPcs));
    if (phase.load_fraction > 0.0 && loads_per_iter == 0) loads_per_iter = 1;

    // Chase pattern: seeded random cyclic permutation over line slots.
    std::vector<uint32_t> chase_next;
    uint64_t chase_pos = 0;
    if (const auto* ch = std::get_if<ChasePattern>(&phase.pattern)) {
      std::vector<uint32_t> order(ch->permutation_size);
      std::iota(order.begin(), order.end(), 0u);
      for (uint64_t i = ch->permutation_size - 1; i > 0; --i) {
        uint64_t j = rng.next_below(i + 1);
        std::swap(order[i], order[j]);
      }
      // Single cycle visiting every slot once: order[i] -> order[i+1].
      chase_next.resize(ch->permutation_size);
      for (uint64_t i = 0; i < ch->permutation_size; ++i)
        chase_next[order[i]] = order[(i + 1) % ch->permutation_size];
      chase_pos = order[0];
    }

    uint64_t load_counter = 0;
    for (uint64_t i = 0; i < phase.length; ++i) {
      int slot = static_cast<int>(i % kLoopPcs);
      TraceRecord rec;
      rec.pc = pc_base + static_cast<uint64_t>(slot) * 4;
      if (slot < loads_per_iter) {
        rec.kind = AccessKind::Load;
        if (const auto* st = std::get_if<StridePattern>(&phase.pattern)) {
          rec.addr = st->region_base + load_counter * st->step;
        } else if (const auto* ws = std::get_if<RandomWsPattern>(&phase.pattern)) {
          rec.addr = ws->region_base + (rng.next() & (ws->working_set_bytes - 1));
        } else {
          const auto& ch = std::get<ChasePattern>(phase.pattern);
          rec.addr = ch.region_base + chase_pos * kLineSize;
          chase_pos = chase_next[chase_pos];
        }
        ++load_counter;
      } else {
        rec.kind = (slot & 1) ? AccessKind::Other : AccessKind::Branch;
        rec.addr = 0;
      }
      trace.push_back(rec);
    }
  }
  return trace;
}

std::vector<Segment> segment_trace(const Trace& trace,
                                   const std::string& benchmark_id,
                                   uint64_t chunk_len) {
  if (chunk_len < 1) throw ValidationError("chunk_len must be >= 1");
  std::vector<Segment> out;
  uint64_t n = trace.size() / chunk_len;
  out.reserve(n);
  for (uint64_t t = 0; t < n; ++t) {
    Segment s;
    s.benchmark_id = benchmark_id;
    s.timestep_index = t;
    s.records = trace.data() + t * chunk_len;
    s.length = chunk_len;
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

constexpr char kTraceMagic[5] = {'P', 'H', 'T', 'R', '1'};

void put_u64(std::string& buf, uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

uint64_t get_u64(const unsigned char* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

} // namespace

void write_trace(const Trace& trace, const std::string& path) {
  std::string buf;
  buf.reserve(5 + 8 + trace.size() * 17);
  buf.append(kTraceMagic, 5);
  put_u64(buf, trace.size());
  for (const TraceRecord& r : trace) {
    put_u64(buf, r.pc);
    buf.push_back(static_cast<char>(r.kind));
    put_u64(buf, r.addr);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open trace file for writing: " + path);
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) throw IoError("write failed: " + path);
}

Trace read_trace(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open trace file: " + path);
  std::string buf((std::istreambuf_iterator<char>(f)),
                  std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  if (buf.size() < 5 || std::memcmp(buf.data(), kTraceMagic, 5) != 0)
    throw FormatError(path + ": bad magic at byte offset 0");
  if (buf.size() < 13)
    throw FormatError(path + ": truncated header at byte offset " +
                      std::to_string(buf.size()));
  uint64_t count = get_u64(p + 5);
  uint64_t need = 13 + count * 17;
  if (buf.size() != need)
    throw FormatError(path + ": truncated record data at byte offset " +
                      std::to_string(buf.size()) + " (expected " +
                      std::to_string(need) + " bytes)");
  Trace trace;
  trace.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    const unsigned char* r = p + 13 + i * 17;
    TraceRecord rec;
    rec.pc = get_u64(r);
    uint8_t kind = r[8];
    if (kind > 3)
      throw FormatError(path + ": invalid record kind at byte offset " +
                        std::to_string(13 + i * 17 + 8));
    rec.kind = static_cast<AccessKind>(kind);
    rec.addr = get_u64(r + 9);
    trace.push_back(rec);
  }
  return trace;
}

} // namespace phasesim
