#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "twincalib/dataset.hpp"
#include "twincalib/experiment.hpp"
#include "twincalib/netsim.hpp"
#include "twincalib/search_space.hpp"

namespace twincalib::cli {

/// Everything a subcommand needs, merged from built-in defaults and a TOML
/// config file. Sections: [space], [layout], [band.<label>], [sim], [field],
/// [site.<label>], [experiment], [pso], [bo], [run].
struct CliConfig {
  SearchSpace space = netsim::default_search_space();
  netsim::NetworkLayout layout = netsim::NetworkLayout::defaults();
  netsim::SimConfig sim;
  harness::FieldConfig field = harness::FieldConfig::defaults();
  harness::ExperimentConfig experiment = harness::ExperimentConfig::defaults();
  std::string data_path;  // [run] data

  /// Throws ConfigError naming `source` and the offending section.
  void validate(const std::string& source) const;

  harness::ExperimentSetup setup() const { return {space, layout, sim, experiment}; }
};

/// Defaults overlaid with `doc`. Unknown sections or keys and mistyped
/// values throw ConfigError "<source>: <section>.<key>: <message>".
CliConfig config_from_json(const nlohmann::json& doc, const std::string& source);

/// The complete effective configuration, every key present.
nlohmann::json config_to_json(const CliConfig& cfg);

/// Reads and parses a TOML file; the data path is resolved against the
/// file's directory. An empty path yields the defaults.
CliConfig load_config(const std::string& path);

/// TOML text that load_config turns back into `cfg`.
std::string config_snapshot(const CliConfig& cfg);

}  // namespace twincalib::cli
