#include "phasesim/matrix.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "phasesim/errors.hpp"

namespace phasesim {

IpcMatrix::IpcMatrix(std::vector<std::string> benchmarks, uint64_t timesteps,
                     std::vector<std::string> policies)
    : benchmarks_(std::move(benchmarks)), policies_(std::move(policies)),
      timesteps_(timesteps) {
  std::sort(benchmarks_.begin(), benchmarks_.end());
  std::sort(policies_.begin(), policies_.end());
  if (std::adjacent_find(benchmarks_.begin(), benchmarks_.end()) != benchmarks_.end())
    throw ValidationError("duplicate benchmark id in matrix");
  if (std::adjacent_find(policies_.begin(), policies_.end()) != policies_.end())
    throw ValidationError("duplicate policy id in matrix");
  values_.assign(benchmarks_.size() * timesteps_ * policies_.size(), -1.0);
}

size_t IpcMatrix::policy_index(const std::string& id) const {
  auto it = std::lower_bound(policies_.begin(), policies_.end(), id);
  if (it == policies_.end() || *it != id)
    throw ValidationError("policy not in matrix: " + id);
  return static_cast<size_t>(it - policies_.begin());
}

void IpcMatrix::validate() const {
  for (size_t b = 0; b < benchmarks_.size(); ++b)
    for (uint64_t t = 0; t < timesteps_; ++t)
      for (size_t p = 0; p < policies_.size(); ++p) {
        double v = at(b, t, p);
        std::string cell = "(" + benchmarks_[b] + ", " + std::to_string(t) +
                           ", " + policies_[p] + ")";
        if (v < 0)
          throw ValidationError("matrix missing cell " + cell);
        if (!(v > 0))
          throw ValidationError("matrix cell " + cell + " has non-positive ipc");
      }
}

std::string format_ipc(double ipc) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", ipc);
  return buf;
}

void save_matrix(const IpcMatrix& matrix, const std::string& path) {
  matrix.validate();
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open matrix file for writing: " + path);
  f << "benchmark,timestep,policy,ipc\n";
  for (size_t b = 0; b < matrix.benchmarks().size(); ++b)
    for (uint64_t t = 0; t < matrix.timesteps(); ++t)
      for (size_t p = 0; p < matrix.policies().size(); ++p)
        f << matrix.benchmarks()[b] << ',' << t << ',' << matrix.policies()[p]
          << ',' << format_ipc(matrix.at(b, t, p)) << '\n';
  if (!f) throw IoError("write failed: " + path);
}

IpcMatrix load_matrix(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open matrix file: " + path);
  std::string line;
  if (!std::getline(f, line) || (line != "benchmark,timestep,policy,ipc" &&
                                 line != "benchmark,timestep,policy,ipc\r"))
    throw FormatError(path + ": missing or malformed CSV header");

  struct Row { std::string benchmark; uint64_t timestep; std::string policy; double ipc; };
  std::vector<Row> rows;
  std::map<std::string, uint64_t> bench_steps;
  size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    Row r;
    std::string ts, ipc;
    if (!std::getline(ss, r.benchmark, ',') || !std::getline(ss, ts, ',') ||
        !std::getline(ss, r.policy, ',') || !std::getline(ss, ipc))
      throw FormatError(path + ":" + std::to_string(lineno) + ": malformed row");
    try {
      r.timestep = std::stoull(ts);
      r.ipc = std::stod(ipc);
    } catch (const std::exception&) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": non-numeric field");
    }
    uint64_t& steps = bench_steps[r.benchmark];
    steps = std::max(steps, r.timestep + 1);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw FormatError(path + ": matrix has no data rows");

  std::vector<std::string> benchmarks;
  for (const auto& [b, _] : bench_steps) benchmarks.push_back(b);
  uint64_t timesteps = bench_steps.begin()->second;
  for (const auto& [b, n] : bench_steps) timesteps = std::max(timesteps, n);

  std::vector<std::string> policies;
  for (const Row& r : rows) policies.push_back(r.policy);
  std::sort(policies.begin(), policies.end());
  policies.erase(std::unique(policies.begin(), policies.end()), policies.end());

  IpcMatrix m(benchmarks, timesteps, policies);
  for (const Row& r : rows) {
    size_t b = static_cast<size_t>(
        std::lower_bound(m.benchmarks().begin(), m.benchmarks().end(), r.benchmark) -
        m.benchmarks().begin());
    size_t p = m.policy_index(r.policy);
    std::string cell = "(" + r.benchmark + ", " + std::to_string(r.timestep) +
                       ", " + r.policy + ")";
    if (r.timestep >= timesteps)
      throw ValidationError(path + ": timestep out of range at cell " + cell);
    if (m.at(b, r.timestep, p) >= 0)
      throw ValidationError(path + ": duplicate cell " + cell);
    if (!(r.ipc > 0))
      throw ValidationError(path + ": non-positive ipc at cell " + cell);
    m.set(b, r.timestep, p, r.ipc);
  }
  m.validate();
  return m;
}

} // namespace phasesim
