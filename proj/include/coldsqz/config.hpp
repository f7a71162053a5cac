#pragma once

// Flat key-value run configuration. Keys are `section.name`; later sources
// override earlier ones: built-in defaults < config file < command-line flags.
//
// File syntax, one entry per line:
//     model.C = 220        # trailing comments allowed
//     [scan]               # optional section header, prefixes bare keys
//     seed = 7

#include "coldsqz/cloud.hpp"
#include "coldsqz/experiment.hpp"
#include "coldsqz/model.hpp"
#include "coldsqz/noise.hpp"

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace coldsqz {

struct ConfigIssue {
    std::string key;    // empty when the line could not be parsed into a key
    std::string source; // file path or "flag"
    int line = 0;       // 0 for flags and cross-field checks
    std::string message;
};

std::string to_string(const ConfigIssue& issue);

// Carries every issue found, not only the first.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues);
    const std::vector<ConfigIssue>& issues() const { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

struct SpectrumGrid {
    double omega_min_hz = 0.0;
    double omega_max_hz = 20.0e6;
    int count = 41;
    int fock_cutoff = 15;

    std::vector<double> frequencies() const;
};

struct McRun {
    double waist_m = 260.0e-6;
    double t_max_s = 30.0e-3;
    int n_times = 31;
    McOptions options;
};

class RunConfig {
public:
    // Defaults only.
    RunConfig();

    // Merges a file; throws ConfigError listing every bad line or value.
    void merge_file(const std::string& path);
    // Each flag is `--section.key=value` or `section.key=value`.
    void merge_flags(const std::vector<std::string>& flags);

    bool is_set(const std::string& key) const; // set by file or flag
    std::string raw(const std::string& key) const;
    // Sets a value as if given by a flag.
    void set(const std::string& key, const std::string& value);
    // Replaces the default of a key the user did not set.
    void set_default(const std::string& key, const std::string& value);

    // Typed views; each collects every per-key and cross-field violation into
    // one ConfigError.
    ModelParams model() const;
    CloudParams cloud() const;
    ScanConfig scan(ScanMode mode) const;
    DetectionChain detection() const;
    SpectrumGrid spectrum_grid() const;
    McRun mc() const;
    std::string output_path() const;

    // Drive in saturation units: scan.drive_Y when set, otherwise
    // scan.probe_power_w / model.sat_power_w.
    double drive_Y() const;

    // Checks every key once; throws ConfigError.
    void validate() const;

    static const std::vector<std::string>& known_keys();

private:
    void merge(const std::string& key, const std::string& value, const std::string& source,
               int line, std::vector<ConfigIssue>& issues);

    std::map<std::string, std::string> values_;
    std::set<std::string> explicit_;
};

} // namespace coldsqz
