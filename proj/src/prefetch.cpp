#include "phasesim/prefetch.hpp"

#include <cstdlib>

#include "phasesim/errors.hpp"

namespace phasesim {

namespace {

bool is_pow2(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

void put_u64(std::string& buf, uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

uint64_t get_u64(const unsigned char* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

} // namespace

void PrefetcherParams::validate() const {
  if (!is_pow2(ip_stride.table_size))
    throw ValidationError("ip_stride.table_size must be a power of two");
  if (ip_stride.confidence_threshold < 1 || ip_stride.confidence_threshold > 3)
    throw ValidationError("ip_stride.confidence_threshold must be in [1,3]");
  if (ip_stride.degree < 1) throw ValidationError("ip_stride.degree must be >= 1");
  if (stream.degree < 1) throw ValidationError("stream.degree must be >= 1");
  if (stream.detect_window < 1) throw ValidationError("stream.detect_window must be >= 1");
}

DataPrefetcherKind parse_data_prefetcher(const std::string& token) {
  if (token == "none") return DataPrefetcherKind::None;
  if (token == "next_line") return DataPrefetcherKind::NextLine;
  if (token == "ip_stride") return DataPrefetcherKind::IpStride;
  if (token == "stream") return DataPrefetcherKind::Stream;
  throw ValidationError("unknown L1D prefetcher: " + token);
}

std::string data_prefetcher_token(DataPrefetcherKind kind) {
  switch (kind) {
    case DataPrefetcherKind::None: return "none";
    case DataPrefetcherKind::NextLine: return "next_line";
    case DataPrefetcherKind::IpStride: return "ip_stride";
    case DataPrefetcherKind::Stream: return "stream";
  }
  return "?";
}

InstPrefetcherKind parse_inst_prefetcher(const std::string& token) {
  if (token == "i_next_line") return InstPrefetcherKind::NextLine;
  if (token == "i_next_2_line") return InstPrefetcherKind::Next2Line;
  throw ValidationError("unknown L1I prefetcher: " + token);
}

std::string inst_prefetcher_token(InstPrefetcherKind kind) {
  return kind == InstPrefetcherKind::NextLine ? "i_next_line" : "i_next_2_line";
}

DataPrefetcher::DataPrefetcher(DataPrefetcherKind kind, PrefetcherParams params,
                               uint32_t line_size)
    : kind_(kind), params_(params), line_size_(line_size) {
  params_.validate();
  if (kind_ == DataPrefetcherKind::IpStride)
    table_.assign(params_.ip_stride.table_size, IpEntry{});
}

std::vector<uint64_t> DataPrefetcher::observe(uint64_t pc, uint64_t addr, bool /*was_hit*/) {
  switch (kind_) {
    case DataPrefetcherKind::None:
      return {};
    case DataPrefetcherKind::NextLine: {
      uint64_t line = addr & ~uint64_t{line_size_ - 1};
      return {line + line_size_};
    }
    case DataPrefetcherKind::IpStride:
      return observe_ip_stride(pc, addr);
    case DataPrefetcherKind::Stream:
      return observe_stream(addr);
  }
  return {};
}

std::vector<uint64_t> DataPrefetcher::observe_ip_stride(uint64_t pc, uint64_t addr) {
  // Direct-mapped, indexed by pc bits above the instruction-size bits.
  uint32_t idx = static_cast<uint32_t>((pc >> 2) & (params_.ip_stride.table_size - 1));
  IpEntry& e = table_[idx];

  if (!e.valid || e.pc != pc) {
    // Install or retrain on collision.
    e = IpEntry{pc, true, addr, 0, 0};
    return {};
  }

  int64_t observed = static_cast<int64_t>(addr) - static_cast<int64_t>(e.last_addr);
  if (observed == e.stride && observed != 0) {
    if (e.confidence < 3) e.confidence++;
  } else if (e.confidence > 0) {
    e.confidence--;
  } else {
    // Confidence exhausted: adopt the new stride. The adopting transition
    // counts as its first confirmation.
    e.stride = observed;
    e.confidence = 1;
  }
  e.last_addr = addr;

  std::vector<uint64_t> out;
  if (e.confidence >= params_.ip_stride.confidence_threshold && e.stride != 0) {
    for (uint32_t i = 1; i <= params_.ip_stride.degree; ++i) {
      uint64_t target = addr + static_cast<uint64_t>(e.stride) * i;
      out.push_back(target & ~uint64_t{line_size_ - 1});
    }
  }
  return out;
}

std::vector<uint64_t> DataPrefetcher::observe_stream(uint64_t addr) {
  uint64_t line = addr / line_size_;
  std::vector<uint64_t> out;
  if (have_last_ && line != last_line_) {
    int64_t delta = static_cast<int64_t>(line) - static_cast<int64_t>(last_line_);
    int dir = delta > 0 ? 1 : -1;
    if (dir == stream_dir_ && std::llabs(delta) <= params_.stream.detect_window) {
      run_len_++;
    } else {
      stream_dir_ = dir;
      run_len_ = 1;
    }
    // A run of >= 3 monotonic accesses arms the stream.
    if (run_len_ >= 2) {
      for (uint32_t i = 1; i <= params_.stream.degree; ++i) {
        uint64_t target = line + static_cast<uint64_t>(dir) * i;
        out.push_back(target * line_size_);
      }
    }
  }
  last_line_ = line;
  have_last_ = true;
  return out;
}

void DataPrefetcher::serialize(std::string& out) const {
  out.push_back(static_cast<char>(kind_));
  put_u64(out, table_.size());
  for (const IpEntry& e : table_) {
    put_u64(out, e.pc);
    out.push_back(e.valid ? 1 : 0);
    put_u64(out, e.last_addr);
    put_u64(out, static_cast<uint64_t>(e.stride));
    put_u64(out, e.confidence);
  }
  put_u64(out, last_line_);
  out.push_back(have_last_ ? 1 : 0);
  put_u64(out, static_cast<uint64_t>(static_cast<int64_t>(stream_dir_)));
  put_u64(out, run_len_);
}

size_t DataPrefetcher::deserialize(const unsigned char* data, size_t size, size_t off) {
  auto need = [&](size_t n) {
    if (off + n > size)
      throw FormatError("checkpoint truncated at byte offset " + std::to_string(size));
  };
  need(1 + 8);
  uint8_t kind = data[off++];
  if (kind > 3) throw FormatError("checkpoint: invalid prefetcher kind");
  kind_ = static_cast<DataPrefetcherKind>(kind);
  uint64_t n = get_u64(data + off); off += 8;
  table_.assign(n, IpEntry{});
  for (uint64_t i = 0; i < n; ++i) {
    need(8 + 1 + 8 + 8 + 8);
    table_[i].pc = get_u64(data + off); off += 8;
    table_[i].valid = data[off++] != 0;
    table_[i].last_addr = get_u64(data + off); off += 8;
    table_[i].stride = static_cast<int64_t>(get_u64(data + off)); off += 8;
    table_[i].confidence = static_cast<uint32_t>(get_u64(data + off)); off += 8;
  }
  need(8 + 1 + 8 + 8);
  last_line_ = get_u64(data + off); off += 8;
  have_last_ = data[off++] != 0;
  stream_dir_ = static_cast<int>(static_cast<int64_t>(get_u64(data + off))); off += 8;
  run_len_ = static_cast<uint32_t>(get_u64(data + off)); off += 8;
  return off;
}

bool DataPrefetcher::state_equals(const DataPrefetcher& other) const {
  if (kind_ != other.kind_ || table_.size() != other.table_.size()) return false;
  for (size_t i = 0; i < table_.size(); ++i) {
    const IpEntry& a = table_[i];
    const IpEntry& b = other.table_[i];
    if (a.pc != b.pc || a.valid != b.valid || a.last_addr != b.last_addr ||
        a.stride != b.stride || a.confidence != b.confidence)
      return false;
  }
  return last_line_ == other.last_line_ && have_last_ == other.have_last_ &&
         stream_dir_ == other.stream_dir_ && run_len_ == other.run_len_;
}

std::vector<uint64_t> InstPrefetcher::observe(uint64_t pc) {
  uint64_t line = pc & ~uint64_t{line_size_ - 1};
  if (kind_ == InstPrefetcherKind::NextLine) return {line + line_size_};
  return {line + line_size_, line + 2 * uint64_t{line_size_}};
}

} // namespace phasesim
