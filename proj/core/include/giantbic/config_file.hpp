// config_file.hpp - "key = value" run configuration files.
//
// Recognized keys: omega_c, xi, omega_1, omega_2, g_1, g_2, n_1, n_2, m_1, m_2,
// t_max, dt, n_c. Blank lines and '#' comments are ignored; unknown or
// duplicated keys are errors reported with their line number.

#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>

#include "giantbic/model.hpp"

namespace giantbic {

struct RunConfig {
    SystemConfig system{};
    double t_max{700.0};
    double dt{0.02};
    int n_c{600};

    TimeGrid grid() const { return TimeGrid(t_max, dt); }
};

RunConfig parse_config(std::istream& in, std::string_view source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

// Inverse of parse_config; the output parses back to an equal RunConfig.
std::string format_config(const RunConfig& cfg);

}  // namespace giantbic
