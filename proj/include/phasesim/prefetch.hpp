#ifndef PHASESIM_PREFETCH_HPP
#define PHASESIM_PREFETCH_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace phasesim {

enum class DataPrefetcherKind : uint8_t { None = 0, NextLine = 1, IpStride = 2, Stream = 3 };
enum class InstPrefetcherKind : uint8_t { NextLine = 0, Next2Line = 1 };

struct IpStrideParams {
  uint32_t table_size = 256;        // power of two, direct-mapped
  uint32_t confidence_threshold = 2; // in [1,3]
  uint32_t degree = 2;              // >= 1
};

struct StreamParams {
  uint32_t detect_window = 16; // max line gap counted as part of a run
  uint32_t degree = 2;
};

struct PrefetcherParams {
  IpStrideParams ip_stride;
  StreamParams stream;
  void validate() const;
};

DataPrefetcherKind parse_data_prefetcher(const std::string& token);
std::string data_prefetcher_token(DataPrefetcherKind kind);
InstPrefetcherKind parse_inst_prefetcher(const std::string& token);
std::string inst_prefetcher_token(InstPrefetcherKind kind);

// L1D-side prefetcher state machine. observe() consumes one demand access and
// returns candidate prefetch line addresses, at most `degree` of them.
class DataPrefetcher {
public:
  DataPrefetcher() = default;
  DataPrefetcher(DataPrefetcherKind kind, PrefetcherParams params, uint32_t line_size);

  std::vector<uint64_t> observe(uint64_t pc, uint64_t addr, bool was_hit);

  DataPrefetcherKind kind() const { return kind_; }

  void serialize(std::string& out) const;
  size_t deserialize(const unsigned char* data, size_t size, size_t off);
  bool state_equals(const DataPrefetcher& other) const;

private:
  struct IpEntry {
    uint64_t pc = 0;
    bool valid = false;
    uint64_t last_addr = 0;
    int64_t stride = 0;
    uint32_t confidence = 0; // 2-bit saturating
  };

  std::vector<uint64_t> observe_ip_stride(uint64_t pc, uint64_t addr);
  std::vector<uint64_t> observe_stream(uint64_t addr);

  DataPrefetcherKind kind_ = DataPrefetcherKind::None;
  PrefetcherParams params_;
  uint32_t line_size_ = 64;

  std::vector<IpEntry> table_; // ip_stride

  // stream detector
  uint64_t last_line_ = 0;
  bool have_last_ = false;
  int stream_dir_ = 0;
  uint32_t run_len_ = 0;
};

// L1I-side prefetcher: observes the sequential pc stream at line granularity
// and emits the next one or two lines.
class InstPrefetcher {
public:
  InstPrefetcher() = default;
  InstPrefetcher(InstPrefetcherKind kind, uint32_t line_size)
      : kind_(kind), line_size_(line_size) {}

  std::vector<uint64_t> observe(uint64_t pc);

  InstPrefetcherKind kind() const { return kind_; }

private:
  InstPrefetcherKind kind_ = InstPrefetcherKind::NextLine;
  uint32_t line_size_ = 64;
};

} // namespace phasesim

#endif
