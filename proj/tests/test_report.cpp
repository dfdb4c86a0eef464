#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "phasesim/errors.hpp"
#include "phasesim/prng.hpp"
#include "phasesim/report.hpp"

using namespace phasesim;
namespace fs = std::filesystem;

namespace {

IpcMatrix fixture_matrix() {
  std::vector<std::string> benchmarks = {"alpha", "beta"};
  std::vector<std::string> policies = {"none/i_next_line/lru", "none/i_next_line/srrip",
                                       "stream/i_next_line/lru"};
  IpcMatrix m(benchmarks, 4, policies);
  SplitMix64 rng(91);
  for (size_t b = 0; b < 2; ++b)
    for (uint64_t t = 0; t < 4; ++t)
      for (size_t p = 0; p < 3; ++p)
        m.set(b, t, p, 0.5 + static_cast<double>(rng.next_below(3000)) / 1000.0);
  return m;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string slurp_dir(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) all += f.filename().string() + "\n" + slurp(f);
  return all;
}

} // namespace

TEST_CASE("report bundle satisfies the conservation invariants") {
  IpcMatrix m = fixture_matrix();
  ReportBundle bundle = build_report(m, 1234);

  CHECK(bundle.summaries.size() == 3);
  CHECK(bundle.total_timesteps == 8);
  for (const auto& [pid, hist] : bundle.buckets) CHECK(hist.total() == 8);
  for (const PolicySummary& s : bundle.summaries) {
    CHECK(s.exceed_1 >= s.exceed_2_5);
    CHECK(s.exceed_2_5 >= s.exceed_5);
    CHECK(s.exceed_5 >= s.exceed_10);
  }
  for (const DuelStats& d : bundle.duels)
    CHECK(d.win_rate_a_pct + d.loss_rate_a_pct + d.tie_rate_pct ==
          doctest::Approx(100.0).epsilon(1e-12));
  CHECK(bundle.duels.size() == 3); // all unordered pairs of 3 policies
  CHECK(bundle.subsets.size() == 3);
  CHECK(bundle.best_static_distribution.size() == 2);
}

TEST_CASE("written reports are byte-stable across invocations") {
  IpcMatrix m = fixture_matrix();
  ReportBundle bundle = build_report(m, 99);
  fs::path dir1 = fs::temp_directory_path() / "phasesim_rep1";
  fs::path dir2 = fs::temp_directory_path() / "phasesim_rep2";
  write_report(bundle, dir1.string());
  write_report(build_report(m, 99), dir2.string());
  CHECK(slurp_dir(dir1) == slurp_dir(dir2));
  for (const char* name :
       {"summary.csv", "buckets.csv", "benchmark_distribution.csv", "optimality.csv",
        "subsets.csv", "duels.csv", "headroom.csv", "metadata.json"})
    CHECK(fs::exists(dir1 / name));
  // Bucket table: one row per bucket per policy plus the header.
  std::string buckets = slurp(dir1 / "buckets.csv");
  CHECK(std::count(buckets.begin(), buckets.end(), '\n') == 1 + 3 * 8);
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("report re-emission round-trips csv and produces json") {
  IpcMatrix m = fixture_matrix();
  fs::path dir = fs::temp_directory_path() / "phasesim_rep_src";
  fs::path csv_out = fs::temp_directory_path() / "phasesim_rep_csv";
  fs::path json_out = fs::temp_directory_path() / "phasesim_rep_json";
  write_report(build_report(m, 7), dir.string());
  reemit_report(dir.string(), csv_out.string(), "csv");
  CHECK(slurp_dir(dir) == slurp_dir(csv_out));
  reemit_report(dir.string(), json_out.string(), "json");
  CHECK(fs::exists(json_out / "bundle.json"));
  std::string doc = slurp(json_out / "bundle.json");
  CHECK(doc.find("\"summary\"") != std::string::npos);
  CHECK(doc.find("\"metadata\"") != std::string::npos);
  CHECK_THROWS_AS(reemit_report(dir.string(), csv_out.string(), "xml"),
                  ValidationError);
  fs::remove_all(dir);
  fs::remove_all(csv_out);
  fs::remove_all(json_out);
}
