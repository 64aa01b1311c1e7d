#include "bcrepair/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace bcrepair {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_positive(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size() || v <= 0) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key, "expected a positive number, got '" + value + "'");
    }
}

int parse_positive_int(const std::string& key, const std::string& value) {
    int v = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size() || v <= 0) {
        throw ConfigError(key, "expected a positive integer, got '" + value + "'");
    }
    return v;
}

}  // namespace

void validate_config(const RepairConfig& cfg) {
    if (cfg.classes_dir.empty()) throw ConfigError("classes_dir", "required");
    if (cfg.test_command.empty()) throw ConfigError("test_command", "required");
    if (cfg.output_dir.empty()) throw ConfigError("output_dir", "required");
    if (cfg.pov_tests.empty()) throw ConfigError("pov_tests", "at least one PoV test id required");
    if (cfg.fl_mode == FlMode::Perfect) {
        if (cfg.perfect_locations_file.empty()) {
            throw ConfigError("perfect_locations_file", "required in perfect FL mode");
        }
        if (!cfg.traces_dir.empty()) {
            throw ConfigError("traces_dir", "must not be set in perfect FL mode");
        }
    } else {
        if (cfg.traces_dir.empty()) {
            throw ConfigError("traces_dir", "required in spectrum FL mode");
        }
        if (!cfg.perfect_locations_file.empty()) {
            throw ConfigError("perfect_locations_file", "must not be set in spectrum FL mode");
        }
    }
    if (cfg.budget_seconds <= 0) throw ConfigError("budget_seconds", "must be positive");
    if (cfg.per_test_timeout_seconds <= 0) {
        throw ConfigError("per_test_timeout_seconds", "must be positive");
    }
    if (cfg.max_donors <= 0) throw ConfigError("max_donors", "must be positive");
    if (cfg.subpatch_depth < 0) throw ConfigError("subpatch_depth", "must be non-negative");
    if (cfg.worker_slots <= 0) throw ConfigError("worker_slots", "must be positive");
}

RepairConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open config file");
    RepairConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno), "expected key = value");
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key == "classes_dir") cfg.classes_dir = value;
        else if (key == "test_command") cfg.test_command = value;
        else if (key == "pov_tests") {
            cfg.pov_tests.clear();
            std::istringstream s(value);
            std::string id;
            while (std::getline(s, id, ',')) {
                id = trim(id);
                if (!id.empty()) cfg.pov_tests.push_back(id);
            }
        } else if (key == "fl_mode") {
            if (value == "perfect") cfg.fl_mode = FlMode::Perfect;
            else if (value == "spectrum") cfg.fl_mode = FlMode::Spectrum;
            else throw ConfigError(key, "expected perfect or spectrum, got '" + value + "'");
        } else if (key == "perfect_locations_file") cfg.perfect_locations_file = value;
        else if (key == "traces_dir") cfg.traces_dir = value;
        else if (key == "budget_seconds") cfg.budget_seconds = parse_positive(key, value);
        else if (key == "per_test_timeout_seconds") {
            cfg.per_test_timeout_seconds = parse_positive(key, value);
        } else if (key == "output_dir") cfg.output_dir = value;
        else if (key == "max_donors") cfg.max_donors = parse_positive_int(key, value);
        else if (key == "subpatch_depth") cfg.subpatch_depth = parse_positive_int(key, value);
        else if (key == "worker_slots") cfg.worker_slots = parse_positive_int(key, value);
        else if (key == "secure_pairs_file") cfg.secure_pairs_file = value;
        else throw ConfigError(key, "unknown key");
    }
    validate_config(cfg);
    return cfg;
}

}  // namespace bcrepair
