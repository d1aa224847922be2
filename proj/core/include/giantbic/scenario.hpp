// scenario.hpp - Bundled scenarios, artifact writers, acceptance checks and
// parameter sweeps. Everything that touches the file system lives here.

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "giantbic/bic.hpp"
#include "giantbic/config_file.hpp"
#include "giantbic/dynamics.hpp"
#include "giantbic/model.hpp"
#include "giantbic/spectrum.hpp"

namespace giantbic {

std::string library_version();

enum class ScenarioKind { dynamics, census };

struct Scenario {
    std::string name;
    ScenarioKind kind{ScenarioKind::dynamics};
    RunConfig run{};
    AtomSelector initial{AtomSelector::atom1};

    // Heat-map window of field.csv; field_hi < field_lo selects the coupling
    // region widened by 10 sites on each side.
    int field_lo{0};
    int field_hi{-1};
    double field_every{5.0};   // snapshot spacing of field.csv
    double output_every{0.5};  // row spacing of dynamics.csv and mtrace.csv
    double norm_every{50.0};   // spacing of wide-window norm audits
    double trace_late{200.0};  // time at which the M(t) eigenvalues are judged

    bool exact_reference{false};      // compare against exact lattice propagation
    std::vector<int> field_peaks;     // expected residual photon sites, if any

    // Census scenarios: atom size and the offsets scanned for it.
    std::vector<std::pair<int, std::vector<int>>> census;

    std::pair<int, int> field_window() const noexcept;
};

std::vector<std::string> preset_names();
std::optional<Scenario> preset(std::string_view name);

// A preset name, or the path of a "key = value" config file. Throws ConfigError.
Scenario load_scenario(std::string_view preset_or_path);

// $GIANTBIC_OUT when set and non-empty, otherwise "giantbic-out".
std::filesystem::path default_output_dir();

// ---- artifact bodies (byte-identical for identical inputs) ----

std::string spectrum_csv(const Classification& lattice);
std::string profile_csv(const Classification& lattice, std::size_t index);
std::string bic_json(const SystemConfig& cfg, const RootSearch& search,
                     const std::optional<Classification>& lattice = std::nullopt);
std::string dynamics_csv(const AtomTrajectory& trajectory, std::size_t stride,
                         const std::map<std::size_t, double>& norm_deficits = {});
std::string field_csv(const std::vector<FieldSnapshot>& snapshots);
std::string mtrace_csv(const EigenTrace& trace, std::size_t stride);
std::string census_csv(const std::vector<CensusRow>& rows);

// Writes all files into dir or none of them. Throws ConfigError when the
// directory cannot be created or written.
void write_artifacts(const std::filesystem::path& dir, const std::map<std::string, std::string>& files);

// Fails early with ConfigError when dir cannot receive files.
void ensure_writable(const std::filesystem::path& dir);

// ---- checks ----

struct Check {
    std::string name;
    bool passed{false};
    double value{0.0};
    double limit{0.0};
    std::string detail;
};

// Period of |alpha_1|^2 from crossings of its mid level; nullopt with fewer than three crossings.
std::optional<double> oscillation_period(const AtomTrajectory& trajectory);

// Share of the photon weight inside [lo, hi] that sits more than one site away from every peak.
double off_peak_fraction(const FieldSnapshot& field, int lo, int hi, std::span<const int> peaks);

struct ScenarioReport {
    std::string name;
    std::vector<Check> checks;
    std::vector<std::string> files;
    std::vector<std::string> warnings;
    double wall_seconds{0.0};

    bool all_passed() const noexcept;
    const Check* find(std::string_view check_name) const noexcept;
};

struct RunOptions {
    unsigned workers{1};
    bool write{true};  // false: compute and check only
};

// Runs the scenario end to end and writes its artifact set into dir.
ScenarioReport run_scenario(const Scenario& scenario, const std::filesystem::path& dir,
                            const RunOptions& opts = {});

// ---- sweeps ----

enum class SweepKey { delta, size, g, dt };

std::optional<SweepKey> parse_sweep_key(std::string_view key);
std::string to_string(SweepKey key);

struct SweepOptions {
    unsigned workers{1};
    bool dynamics{false};
    RootOptions roots{};
};

struct SweepRow {
    double value{0.0};
    SystemConfig config{};
    RootSearch search;
    std::optional<std::size_t> lattice_bic_count;
    std::optional<Plateau> plateau;
    double final_population_1{0.0};
    double final_population_2{0.0};
};

// One row per value, in input order regardless of the worker count.
std::vector<SweepRow> sweep(const RunConfig& base, SweepKey key, std::span<const double> values,
                            const SweepOptions& opts = {});
std::string sweep_csv(SweepKey key, const std::vector<SweepRow>& rows);

}  // namespace giantbic
