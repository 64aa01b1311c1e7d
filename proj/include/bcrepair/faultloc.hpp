#ifndef BCREPAIR_FAULTLOC_HPP
#define BCREPAIR_FAULTLOC_HPP

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcrepair/program.hpp"

namespace bcrepair {

struct MalformedTrace : std::runtime_error {
    MalformedTrace(const std::string& file, std::size_t line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what) {}
};
struct UnknownClass : std::runtime_error {
    explicit UnknownClass(const std::string& name)
        : std::runtime_error("trace references unloaded class " + name) {}
};
struct NoFailingTests : std::runtime_error {
    NoFailingTests() : std::runtime_error("no failing tests; repair cannot start") {}
};
struct UnresolvableLocation : std::runtime_error {
    explicit UnresolvableLocation(const std::string& what)
        : std::runtime_error("unresolvable location: " + what) {}
};

enum class TestOutcome : u1 { Pass, Fail };

struct CoveredPc {
    std::string class_name, method_name, descriptor;
    u4 pc;
    auto operator<=>(const CoveredPc&) const = default;
};

struct TestTrace {
    std::string test_id;
    TestOutcome outcome = TestOutcome::Pass;
    std::set<CoveredPc> covered;
};

struct Location {
    std::string class_name;
    u2 line = 0;
    auto operator<=>(const Location&) const = default;
};

struct LineTally {
    int e_f = 0, e_p = 0, n_f = 0, n_p = 0;
};

struct CoverageMatrix {
    int total_failing = 0, total_passing = 0;
    std::map<Location, LineTally> tallies;
    std::map<std::string, std::set<Location>> covered_by_test;
    std::map<std::string, TestOutcome> outcomes;
    std::vector<std::string> warnings;  // e.g. traces whose pcs were all unmapped
};

// Labels are method-scoped, so a location's instructions come grouped per
// enclosing method.
struct SiteInstructions {
    std::string method_name, descriptor;
    std::vector<Label> labels;
};
struct SuspiciousLocation {
    Location location;
    double score = 0.0;
    std::vector<SiteInstructions> instructions;
};

// Trace file: `test <id> <PASS|FAIL>` header, then one
// `<class> <method> <descriptor> <pc>` per covered instruction.
TestTrace parse_trace(const std::string& path);
std::vector<TestTrace> ingest_traces(const std::vector<std::string>& paths);
// Every .trace / .txt file directly under `dir`, sorted.
std::vector<TestTrace> ingest_trace_dir(const std::string& dir);

CoverageMatrix lift_to_lines(const std::vector<TestTrace>& traces, const ProgramModel& program);

// e_f / sqrt((e_f + n_f) * (e_f + e_p)); 0 when the denominator vanishes.
double ochiai_score(int e_f, int n_f, int e_p);

std::vector<SuspiciousLocation> rank_locations(const CoverageMatrix& matrix,
                                               const ProgramModel& program);

// Externally supplied locations ("class:line" per entry), all scored 1.0,
// order preserved.
std::vector<SuspiciousLocation> perfect_locations(const std::vector<std::string>& entries,
                                                  const ProgramModel& program);

}  // namespace bcrepair

#endif
