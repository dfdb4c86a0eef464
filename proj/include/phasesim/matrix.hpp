#ifndef PHASESIM_MATRIX_HPP
#define PHASESIM_MATRIX_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace phasesim {

// Dense (benchmark, timestep, policy) -> IPC map, the central dataset.
// Benchmarks and policies are kept sorted; the cross-product is complete and
// every cell is positive.
class IpcMatrix {
public:
  IpcMatrix() = default;
  IpcMatrix(std::vector<std::string> benchmarks, uint64_t timesteps,
            std::vector<std::string> policies);

  double at(size_t benchmark, size_t timestep, size_t policy) const {
    return values_[(benchmark * timesteps_ + timestep) * policies_.size() + policy];
  }
  void set(size_t benchmark, size_t timestep, size_t policy, double ipc) {
    values_[(benchmark * timesteps_ + timestep) * policies_.size() + policy] = ipc;
  }

  const std::vector<std::string>& benchmarks() const { return benchmarks_; }
  const std::vector<std::string>& policies() const { return policies_; }
  uint64_t timesteps() const { return timesteps_; }
  size_t total_timesteps() const { return benchmarks_.size() * timesteps_; }

  size_t policy_index(const std::string& id) const; // throws if absent

  // Throws ValidationError naming the offending cell.
  void validate() const;

  bool operator==(const IpcMatrix&) const = default;

private:
  std::vector<std::string> benchmarks_;
  std::vector<std::string> policies_;
  uint64_t timesteps_ = 0;
  std::vector<double> values_; // (benchmark, timestep, policy) row-major, -1 = unset
};

// CSV schema: header "benchmark,timestep,policy,ipc"; rows sorted by
// (benchmark asc, timestep numeric asc, policy asc); IPC printed with 9
// significant digits; UTF-8, LF endings.
void save_matrix(const IpcMatrix& matrix, const std::string& path);
IpcMatrix load_matrix(const std::string& path);

std::string format_ipc(double ipc); // 9 significant digits, round-half-even

} // namespace phasesim

#endif
