#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "doef/experiment.hpp"

namespace doef {

/// Sets one `section.field` key. Throws ConfigError naming the key on an
/// unknown key or a malformed value.
///
/// Numbers accept a plain decimal/exponent form or a fraction `a/b`.
/// `clustering.policy=aggressive` selects the CFC policy and resets its knobs
/// to CfcConfig::aggressive(); knobs set afterwards still apply.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

// Splits "key=value" and applies it.
void apply_assignment(ExperimentConfig& config, std::string_view assignment);

/// Reads flat `key = value` lines on top of `base`. Blank lines and `#`
/// comments are skipped. Errors carry "<source>:<line>: ".
ExperimentConfig parse_config(std::istream& in, std::string_view source = "<config>",
                              ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

// Every key with its current value, one per line; parse_config reads it back.
std::string format_config(const ExperimentConfig& config);

// Names of every key apply_setting understands.
std::vector<std::string> config_keys();

}  // namespace doef
