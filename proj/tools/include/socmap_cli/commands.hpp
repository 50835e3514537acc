#pragma once

#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "socmap_cli/config.hpp"

namespace socmap::cli {

/// Each command writes its artifacts under config.output/<command>/ and a
/// manifest.json there; the returned JSON is the command's main report.
nlohmann::json cmd_stats(const RunConfig& config, std::ostream& log);
nlohmann::json cmd_covariates(const RunConfig& config, std::ostream& log);
nlohmann::json cmd_select(const RunConfig& config, std::ostream& log);
nlohmann::json cmd_evaluate(const RunConfig& config, std::ostream& log);
nlohmann::json cmd_map(const RunConfig& config, std::ostream& log);

/// Dispatches by name; unknown names are a configuration error.
nlohmann::json run_command(const std::string& name, const RunConfig& config, std::ostream& log);

/// Full command-line entry point; returns the process exit code.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace socmap::cli
