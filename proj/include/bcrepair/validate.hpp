#ifndef BCREPAIR_VALIDATE_HPP
#define BCREPAIR_VALIDATE_HPP

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace bcrepair {

struct NoPoV : std::runtime_error {
    NoPoV() : std::runtime_error("all PoV tests pass on the vulnerable build") {}
};
struct CommandFailure : std::runtime_error {
    explicit CommandFailure(const std::string& what) : std::runtime_error(what) {}
};
struct BudgetExhausted : std::runtime_error {
    BudgetExhausted() : std::runtime_error("time budget exhausted") {}
};
struct IncomparableReports : std::runtime_error {
    explicit IncomparableReports(const std::string& what) : std::runtime_error(what) {}
};

enum class TestResult : char { Pass, Fail, Error, Timeout };
const char* test_result_name(TestResult r);

struct TestReport {
    std::map<std::string, TestResult> results;
    double wall_seconds = 0.0;
    std::string output_path;  // captured runner stdout+stderr
    bool timed_out = false;   // the runner was killed at the deadline
};

struct Budget {
    double total_seconds = 14400.0;
    double per_test_seconds = 60.0;
    double consumed = 0.0;
    bool exhausted() const { return consumed >= total_seconds; }
    double remaining() const { return total_seconds - consumed; }
};

struct RunnerConfig {
    std::string command;  // run via sh -c with REPAIR_CLASSPATH_DIR/REPAIR_RESULT_FILE set
    std::vector<std::string> pov_tests;
};

// Runs the configured command against `classes_dir`, capturing output to
// `capture_path`, enforcing `time_limit` seconds (0 = none), and parsing the
// result file (`<test_id> <PASS|FAIL|ERROR>` per line). Exit status is
// ignored in favor of the file.
TestReport run_suite(const RunnerConfig& runner, const std::string& classes_dir,
                     const std::string& capture_path, double time_limit);

// Baseline: every PoV test must be present and at least one must fail.
TestReport baseline_run(const RunnerConfig& runner, const std::string& classes_dir,
                        const std::string& capture_path, Budget& budget);

// One candidate: budget-gated, per-test timeout scaled by the baseline suite
// size; tests missing from the result file become TIMEOUT (when the runner
// was killed) or ERROR.
TestReport run_candidate(const RunnerConfig& runner, const std::string& classes_dir,
                         const std::string& capture_path, Budget& budget,
                         const TestReport& baseline);

enum class Outcome : char { Plausible, PlausibleSubpatch, Incorrect };
const char* outcome_name(Outcome o);

// Pure comparison of two reports over the same test ids. TIMEOUT/ERROR count
// as not passing.
Outcome classify_outcome(const TestReport& baseline, const TestReport& candidate);

}  // namespace bcrepair

#endif
