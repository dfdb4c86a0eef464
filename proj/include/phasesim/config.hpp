#ifndef PHASESIM_CONFIG_HPP
#define PHASESIM_CONFIG_HPP

#include <string>

#include "phasesim/harness.hpp"
#include "phasesim/trace.hpp"

namespace phasesim {

// JSON schemas are documented in the README. Unknown keys are rejected so a
// typo'd field cannot silently fall back to a default.

SyntheticSpec load_synthetic_spec(const std::string& path);
SyntheticSpec parse_synthetic_spec_json(const std::string& json_text);

ExperimentPlan load_plan(const std::string& path);

} // namespace phasesim

#endif
