#include "giantbic/config_file.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include "giantbic/csv.hpp"

namespace giantbic {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(std::string_view source, int line, const std::string& what) {
    std::ostringstream os;
    os << source << ":" << line << ": " << what;
    throw ConfigError(os.str());
}

double parse_real(std::string_view text, std::string_view source, int line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        fail(source, line, "expected a real number, got '" + std::string(text) + "'");
    }
    return v;
}

int parse_int(std::string_view text, std::string_view source, int line) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        fail(source, line, "expected an integer, got '" + std::string(text) + "'");
    }
    return v;
}

}  // namespace

RunConfig parse_config(std::istream& in, std::string_view source) {
    RunConfig rc;
    SystemConfig& s = rc.system;
    std::set<std::string, std::less<>> seen;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view text = raw;
        if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
        text = trim(text);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) fail(source, line, "expected 'key = value'");
        const std::string key(trim(text.substr(0, eq)));
        const std::string_view value = trim(text.substr(eq + 1));
        if (value.empty()) fail(source, line, "missing value for '" + key + "'");
        if (!seen.insert(key).second) fail(source, line, "duplicate key '" + key + "'");

        if (key == "omega_c") s.omega_c = parse_real(value, source, line);
        else if (key == "xi") s.xi = parse_real(value, source, line);
        else if (key == "omega_1") s.omega_1 = parse_real(value, source, line);
        else if (key == "omega_2") s.omega_2 = parse_real(value, source, line);
        else if (key == "g_1") s.g_1 = parse_real(value, source, line);
        else if (key == "g_2") s.g_2 = parse_real(value, source, line);
        else if (key == "n_1") s.n_1 = parse_int(value, source, line);
        else if (key == "n_2") s.n_2 = parse_int(value, source, line);
        else if (key == "m_1") s.m_1 = parse_int(value, source, line);
        else if (key == "m_2") s.m_2 = parse_int(value, source, line);
        else if (key == "t_max") rc.t_max = parse_real(value, source, line);
        else if (key == "dt") rc.dt = parse_real(value, source, line);
        else if (key == "n_c") rc.n_c = parse_int(value, source, line);
        else fail(source, line, "unknown key '" + key + "'");
    }
    try {
        rc.system = validate_config(rc.system);
        (void)rc.grid();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(source) + ": " + e.what());
    }
    if (rc.n_c <= 0) throw ConfigError(std::string(source) + ": n_c must be positive");
    return rc;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    return parse_config(in, path.string());
}

std::string format_config(const RunConfig& rc) {
    const SystemConfig& s = rc.system;
    std::ostringstream os;
    os << "omega_c = " << format_real(s.omega_c) << "\n"
       << "xi = " << format_real(s.xi) << "\n"
       << "omega_1 = " << format_real(s.omega_1) << "\n"
       << "omega_2 = " << format_real(s.omega_2) << "\n"
       << "g_1 = " << format_real(s.g_1) << "\n"
       << "g_2 = " << format_real(s.g_2) << "\n"
       << "n_1 = " << s.n_1 << "\n"
       << "n_2 = " << s.n_2 << "\n"
       << "m_1 = " << s.m_1 << "\n"
       << "m_2 = " << s.m_2 << "\n"
       << "t_max = " << format_real(rc.t_max) << "\n"
       << "dt = " << format_real(rc.dt) << "\n"
       << "n_c = " << rc.n_c << "\n";
    return os.str();
}

}  // namespace giantbic
