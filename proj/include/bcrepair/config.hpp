#ifndef BCREPAIR_CONFIG_HPP
#define BCREPAIR_CONFIG_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace bcrepair {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& key, const std::string& what)
        : std::runtime_error("config error: " + key + ": " + what), offending_key(key) {}
    std::string offending_key;
};

enum class FlMode { Perfect, Spectrum };

// Flat `key = value` document; later keys override earlier ones, blank lines
// and '#' comments ignored.
struct RepairConfig {
    std::string classes_dir;
    std::string test_command;
    std::vector<std::string> pov_tests;  // comma-separated in the file
    FlMode fl_mode = FlMode::Spectrum;
    std::string perfect_locations_file;  // PERFECT mode only
    std::string traces_dir;              // SPECTRUM mode only
    double budget_seconds = 14400.0;
    double per_test_timeout_seconds = 60.0;
    std::string output_dir;
    int max_donors = 50;
    int subpatch_depth = 3;
    int worker_slots = 1;
    std::string secure_pairs_file;  // optional extra pair table
};

RepairConfig load_config(const std::string& path);
// Shared validation for configs assembled in memory (tests, flag overrides).
void validate_config(const RepairConfig& cfg);

}  // namespace bcrepair

#endif
