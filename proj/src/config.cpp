#include "phasesim/config.hpp"

#include <fstream>

#include <json.hpp>

#include "phasesim/errors.hpp"

namespace phasesim {

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file: " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) { ok = true; break; }
    if (!ok) throw ValidationError(where + ": unknown field \"" + it.key() + "\"");
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("field \"") + key + "\" has the wrong type");
  }
}

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key))
    throw ValidationError(where + ": missing required field \"" + key + "\"");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + ": field \"" + key + "\" has the wrong type");
  }
}

SyntheticSpec parse_spec(const json& j) {
  check_keys(j, {"seed", "phases"}, "synthetic spec");
  SyntheticSpec spec;
  spec.seed = get_or<uint64_t>(j, "seed", 0);
  const json& phases = j.contains("phases") ? j.at("phases") : json::array();
  if (!phases.is_array() || phases.empty())
    throw ValidationError("synthetic spec: \"phases\" must be a non-empty array");
  for (size_t i = 0; i < phases.size(); ++i) {
    const json& p = phases[i];
    const std::string where = "phase " + std::to_string(i);
    check_keys(p,
               {"pattern", "length", "load_fraction", "step", "region_base",
                "working_set_bytes", "permutation_size"},
               where);
    PhaseSpec ps;
    std::string pattern = require<std::string>(p, "pattern", where);
    ps.length = require<uint64_t>(p, "length", where);
    ps.load_fraction = get_or<double>(p, "load_fraction", 1.0);
    uint64_t base = get_or<uint64_t>(p, "region_base", 0);
    if (pattern == "stride") {
      StridePattern sp;
      sp.step = get_or<uint64_t>(p, "step", 64);
      sp.region_base = base;
      ps.pattern = sp;
    } else if (pattern == "random_ws") {
      RandomWsPattern wp;
      wp.working_set_bytes = require<uint64_t>(p, "working_set_bytes", where);
      wp.region_base = base;
      ps.pattern = wp;
    } else if (pattern == "chase") {
      ChasePattern cp;
      cp.permutation_size = require<uint64_t>(p, "permutation_size", where);
      cp.region_base = base;
      ps.pattern = cp;
    } else {
      throw ValidationError(where + ": unknown pattern \"" + pattern + "\"");
    }
    spec.phases.push_back(std::move(ps));
  }
  validate_spec(spec);
  return spec;
}

CacheGeometry parse_geometry(const json& j, CacheGeometry fallback, const std::string& where) {
  check_keys(j, {"sets", "ways", "line_size"}, where);
  CacheGeometry g = fallback;
  g.sets = get_or<uint32_t>(j, "sets", g.sets);
  g.ways = get_or<uint32_t>(j, "ways", g.ways);
  g.line_size = get_or<uint32_t>(j, "line_size", g.line_size);
  return g;
}

} // namespace

SyntheticSpec parse_synthetic_spec_json(const std::string& json_text) {
  try {
    return parse_spec(json::parse(json_text));
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("synthetic spec: ") + e.what());
  }
}

SyntheticSpec load_synthetic_spec(const std::string& path) {
  return parse_spec(load_json(path));
}

ExperimentPlan load_plan(const std::string& path) {
  json j = load_json(path);
  check_keys(j, {"traces", "chunk_len", "mode", "policies", "timing", "hardware"},
             "plan");
  ExperimentPlan plan;
  plan.chunk_len = get_or<uint64_t>(j, "chunk_len", plan.chunk_len);

  std::string mode = get_or<std::string>(j, "mode", "continuous");
  if (mode == "continuous") plan.mode = RunMode::Continuous;
  else if (mode == "cold_chunk") plan.mode = RunMode::ColdChunk;
  else throw ValidationError("plan: mode must be \"continuous\" or \"cold_chunk\"");

  if (!j.contains("traces") || !j.at("traces").is_array() || j.at("traces").empty())
    throw ValidationError("plan: \"traces\" must be a non-empty array");
  for (const json& t : j.at("traces")) {
    check_keys(t, {"benchmark", "path", "synthetic"}, "trace entry");
    TraceSource src;
    src.benchmark_id = require<std::string>(t, "benchmark", "trace entry");
    if (t.contains("path") == t.contains("synthetic"))
      throw ValidationError("trace entry \"" + src.benchmark_id +
                            "\": exactly one of \"path\" or \"synthetic\" required");
    if (t.contains("path"))
      src.source = require<std::string>(t, "path", "trace entry");
    else
      src.source = parse_spec(t.at("synthetic"));
    plan.traces.push_back(std::move(src));
  }

  if (j.contains("timing")) {
    const json& tm = j.at("timing");
    check_keys(tm, {"base_cpi", "l2_hit_penalty", "mem_penalty", "overlap"}, "timing");
    plan.timing.base_cpi = get_or<double>(tm, "base_cpi", plan.timing.base_cpi);
    plan.timing.l2_hit_penalty = get_or<double>(tm, "l2_hit_penalty", plan.timing.l2_hit_penalty);
    plan.timing.mem_penalty = get_or<double>(tm, "mem_penalty", plan.timing.mem_penalty);
    plan.timing.overlap = get_or<double>(tm, "overlap", plan.timing.overlap);
  }

  if (j.contains("hardware")) {
    const json& hw = j.at("hardware");
    check_keys(hw, {"l1i", "l1d", "l2", "ip_stride", "stream", "replacement_seed"},
               "hardware");
    HierarchyConfig& h = plan.hardware;
    if (hw.contains("l1i")) h.l1i = parse_geometry(hw.at("l1i"), h.l1i, "hardware.l1i");
    if (hw.contains("l1d")) h.l1d = parse_geometry(hw.at("l1d"), h.l1d, "hardware.l1d");
    if (hw.contains("l2")) h.l2 = parse_geometry(hw.at("l2"), h.l2, "hardware.l2");
    if (hw.contains("ip_stride")) {
      const json& ip = hw.at("ip_stride");
      check_keys(ip, {"table_size", "confidence_threshold", "degree"}, "hardware.ip_stride");
      h.prefetch.ip_stride.table_size =
          get_or<uint32_t>(ip, "table_size", h.prefetch.ip_stride.table_size);
      h.prefetch.ip_stride.confidence_threshold =
          get_or<uint32_t>(ip, "confidence_threshold", h.prefetch.ip_stride.confidence_threshold);
      h.prefetch.ip_stride.degree = get_or<uint32_t>(ip, "degree", h.prefetch.ip_stride.degree);
    }
    if (hw.contains("stream")) {
      const json& st = hw.at("stream");
      check_keys(st, {"detect_window", "degree"}, "hardware.stream");
      h.prefetch.stream.detect_window =
          get_or<uint32_t>(st, "detect_window", h.prefetch.stream.detect_window);
      h.prefetch.stream.degree = get_or<uint32_t>(st, "degree", h.prefetch.stream.degree);
    }
    h.replacement_seed = get_or<uint64_t>(hw, "replacement_seed", h.replacement_seed);
  }

  const json& pol = j.contains("policies") ? j.at("policies") : json::object();
  check_keys(pol, {"l1d", "l1i", "l2"}, "policies");
  auto tokens = [&](const char* key) {
    if (!pol.contains(key) || !pol.at(key).is_array() || pol.at(key).empty())
      throw ValidationError(std::string("policies: \"") + key +
                            "\" must be a non-empty array");
    return pol.at(key).get<std::vector<std::string>>();
  };
  std::vector<DataPrefetcherKind> l1d;
  for (const std::string& s : tokens("l1d")) l1d.push_back(parse_data_prefetcher(s));
  std::vector<InstPrefetcherKind> l1i;
  for (const std::string& s : tokens("l1i")) l1i.push_back(parse_inst_prefetcher(s));
  std::vector<ReplacementKind> l2;
  for (const std::string& s : tokens("l2")) l2.push_back(parse_replacement(s).kind);
  plan.policy_space =
      enumerate_policy_space(l1d, l1i, l2, plan.hardware.replacement_seed);

  plan.validate();
  return plan;
}

} // namespace phasesim
