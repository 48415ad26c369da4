#pragma once

#include <maxshape/optimizer.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace maxshape {

struct VerifyConfig {
    std::vector<std::string> suites{"convergence", "taylor", "danskin", "reciprocity"};
    std::string report = "report.csv";

    bool operator==(const VerifyConfig&) const = default;
};

/// Everything the command line tool reads from a config file.
struct ConfigFile {
    RunConfig run;
    CostKind cost = CostKind::linfty;
    VerifyConfig verify;

    bool operator==(const ConfigFile&) const = default;
};

/// JSON with // and /* */ comments. Every key is optional; unknown keys and
/// wrong types raise ConfigError naming the offending key.
ConfigFile parse_config(const std::string& text);
ConfigFile load_config(const std::filesystem::path& path);

/// Commented default configuration. parse_config(config_template()) equals
/// ConfigFile{}.
std::string config_template();
std::string config_template(const ConfigFile& config);

} // namespace maxshape
