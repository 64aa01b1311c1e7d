#ifndef BCREPAIR_PIPELINE_HPP
#define BCREPAIR_PIPELINE_HPP

#include <string>

#include "bcrepair/config.hpp"

namespace bcrepair {

struct RunOutcome {
    int exit_code = 2;   // 0: >=1 plausible patch; 2: none; 3: config/environment
    std::string status;  // plausible_found | no_plausible | budget_exhausted | aborted
    std::string error;   // set when aborted
    std::string report_json;  // the serialized report document
};

// Runs the whole pipeline: baseline, fault localization, candidate
// enumeration, validation, sub-patch composition, ranking, patch-tree and
// report emission under cfg.output_dir.
RunOutcome orchestrate_repair(const RepairConfig& cfg);

// Writes the report document to <output_dir>/report.json.
void emit_report(const RunOutcome& outcome, const std::string& output_dir);

}  // namespace bcrepair

#endif
