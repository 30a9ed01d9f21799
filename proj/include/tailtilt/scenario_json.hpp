#pragma once

#include <string>

#include <json.hpp>

#include "tailtilt/sim.hpp"

namespace tailtilt {

/// Parses and validates a scenario config document. Population file paths
/// are resolved against `baseDir` and loaded immediately. Violations throw
/// ConfigError carrying the path of the offending field.
ScenarioConfig scenario_from_json(const nlohmann::json& doc, const std::string& baseDir = ".");

/// The parsed config with every default filled in, for provenance echoes.
nlohmann::ordered_json scenario_echo_json(const ScenarioConfig& cfg);

nlohmann::ordered_json scenario_result_json(const ScenarioResult& result);
nlohmann::ordered_json sweep_json(const SweepResult& sweep);

}  // namespace tailtilt
