#include "bcrepair/validate.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace bcrepair {

const char* test_result_name(TestResult r) {
    switch (r) {
        case TestResult::Pass: return "PASS";
        case TestResult::Fail: return "FAIL";
        case TestResult::Error: return "ERROR";
        case TestResult::Timeout: return "TIMEOUT";
    }
    return "?";
}

const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Plausible: return "PLAUSIBLE";
        case Outcome::PlausibleSubpatch: return "PLAUSIBLE_SUBPATCH";
        case Outcome::Incorrect: return "INCORRECT";
    }
    return "?";
}

namespace {

namespace fs = std::filesystem;

// Runs `sh -c command` in its own process group with the contract environment
// set, output redirected to `capture_path`. Returns true when the deadline
// killed it.
bool run_command(const std::string& command, const std::string& classes_dir,
                 const std::string& result_file, const std::string& capture_path,
                 double time_limit) {
    pid_t pid = fork();
    if (pid < 0) throw CommandFailure("fork failed");
    if (pid == 0) {
        setpgid(0, 0);
        int fd = open(capture_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
        if (fd >= 0) {
            dup2(fd, STDOUT_FILENO);
            dup2(fd, STDERR_FILENO);
            close(fd);
        }
        setenv("REPAIR_CLASSPATH_DIR", classes_dir.c_str(), 1);
        setenv("REPAIR_RESULT_FILE", result_file.c_str(), 1);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    setpgid(pid, pid);
    auto start = std::chrono::steady_clock::now();
    bool killed = false;
    for (;;) {
        int status = 0;
        pid_t done = waitpid(pid, &status, WNOHANG);
        if (done == pid) break;
        if (done < 0) break;
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (time_limit > 0 && elapsed >= time_limit && !killed) {
            kill(-pid, SIGKILL);
            killed = true;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    return killed;
}

std::map<std::string, TestResult> parse_result_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CommandFailure("test command did not produce the result file " + path);
    std::map<std::string, TestResult> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream s(line);
        std::string id, verdict;
        if (!(s >> id >> verdict)) {
            throw CommandFailure("malformed result line: '" + line + "'");
        }
        TestResult r;
        if (verdict == "PASS") r = TestResult::Pass;
        else if (verdict == "FAIL") r = TestResult::Fail;
        else if (verdict == "ERROR") r = TestResult::Error;
        else throw CommandFailure("unknown verdict '" + verdict + "' in result file");
        out[id] = r;
    }
    return out;
}

}  // namespace

TestReport run_suite(const RunnerConfig& runner, const std::string& classes_dir,
                     const std::string& capture_path, double time_limit) {
    std::string result_file = capture_path + ".results";
    std::error_code ec;
    fs::remove(result_file, ec);

    auto start = std::chrono::steady_clock::now();
    bool killed = run_command(runner.command, classes_dir, result_file, capture_path, time_limit);
    TestReport report;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.output_path = capture_path;
    report.timed_out = killed;
    if (fs::exists(result_file)) {
        report.results = parse_result_file(result_file);
    } else if (!killed) {
        throw CommandFailure("test command did not produce the result file " + result_file);
    }
    return report;
}

TestReport baseline_run(const RunnerConfig& runner, const std::string& classes_dir,
                        const std::string& capture_path, Budget& budget) {
    TestReport report = run_suite(runner, classes_dir, capture_path, budget.remaining());
    budget.consumed += report.wall_seconds;
    if (report.timed_out) throw CommandFailure("baseline run exceeded the time budget");
    bool any_pov_fail = false;
    for (const std::string& pov : runner.pov_tests) {
        auto it = report.results.find(pov);
        if (it == report.results.end()) {
            throw CommandFailure("PoV test '" + pov + "' missing from baseline results");
        }
        if (it->second != TestResult::Pass) any_pov_fail = true;
    }
    if (!any_pov_fail) throw NoPoV();
    return report;
}

TestReport run_candidate(const RunnerConfig& runner, const std::string& classes_dir,
                         const std::string& capture_path, Budget& budget,
                         const TestReport& baseline) {
    if (budget.exhausted()) throw BudgetExhausted();
    double suite_limit =
        budget.per_test_seconds * static_cast<double>(std::max<std::size_t>(
                                      1, baseline.results.size()));
    double limit = std::min(suite_limit, budget.remaining());
    TestReport report = run_suite(runner, classes_dir, capture_path, limit);
    budget.consumed += report.wall_seconds;
    // Tests the runner never reported: timed out with it, or dropped on a crash.
    for (const auto& [id, _] : baseline.results) {
        if (!report.results.count(id)) {
            report.results[id] = report.timed_out ? TestResult::Timeout : TestResult::Error;
        }
    }
    return report;
}

Outcome classify_outcome(const TestReport& baseline, const TestReport& candidate) {
    if (baseline.results.size() != candidate.results.size()) {
        throw IncomparableReports("test id sets differ in size");
    }
    bool all_pass = true, fixed_one = false, regressed = false;
    for (const auto& [id, before] : baseline.results) {
        auto it = candidate.results.find(id);
        if (it == candidate.results.end()) {
            throw IncomparableReports("candidate report lacks test '" + id + "'");
        }
        bool was_pass = before == TestResult::Pass;
        bool now_pass = it->second == TestResult::Pass;
        if (!now_pass) all_pass = false;
        if (!was_pass && now_pass) fixed_one = true;
        if (was_pass && !now_pass) regressed = true;
    }
    if (all_pass) return Outcome::Plausible;
    if (fixed_one && !regressed) return Outcome::PlausibleSubpatch;
    return Outcome::Incorrect;
}

}  // namespace bcrepair
