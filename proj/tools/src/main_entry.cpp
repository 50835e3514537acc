#include <CLI11.hpp>

#include "socmap/error.hpp"
#include "socmap/raster/covariates.hpp"
#include "socmap/version.hpp"
#include "socmap_cli/commands.hpp"

namespace socmap::cli {

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Soil organic carbon mapping pipeline"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path;
  int threads = -1;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::vector<std::string> overrides;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"stats", "Descriptive statistics of the target before and after transform"},
      {"covariates", "Build a covariate stack from bands, a DEM and external layers"},
      {"select", "Genetic-algorithm feature selection"},
      {"evaluate", "Cross-validated comparison of the learners"},
      {"map", "Prediction maps with intervals, coverage, importance and strata"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "JSON run configuration");
    sub->add_option("-t,--threads", threads, "Worker thread cap (0 = default)")->check(CLI::NonNegativeNumber);
    sub->add_option("-s,--seed", seed, "Top-level seed");
    sub->add_option("-o,--out", output, "Output run directory");
    sub->add_option("--set", overrides, "Override a config value, e.g. --set select.generations=40");
  }
  app.add_subcommand("indices", "List the computable band indices");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 3;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  if (command == "indices") {
    for (const auto& name : supported_indices()) out << name << '\n';
    return 0;
  }

  try {
    nlohmann::json document = nlohmann::json::object();
    std::filesystem::path base = std::filesystem::current_path();
    if (!config_path.empty()) {
      document = read_config_file(config_path);
      base = std::filesystem::absolute(config_path).parent_path();
    }
    for (const auto& o : overrides) apply_override(document, o);
    if (seed) document["seed"] = *seed;
    if (threads >= 0) document["threads"] = threads;
    if (!output.empty()) document["output"] = std::filesystem::absolute(output).string();

    const auto config = parse_config(document, base);
    const auto report = run_command(command, config, err);
    out << report.dump(2) << '\n';
    return 0;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const nlohmann::json::exception& e) {
    err << "error [configuration]: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace socmap::cli
