#include "bcrepair/faultloc.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace bcrepair {

namespace fs = std::filesystem;

TestTrace parse_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedTrace(path, 0, "cannot open trace file");
    TestTrace trace;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw MalformedTrace(path, 1, "missing header");
    ++lineno;
    {
        std::istringstream h(line);
        std::string kw, id, outcome, extra;
        if (!(h >> kw >> id >> outcome) || kw != "test" || (h >> extra)) {
            throw MalformedTrace(path, lineno, "bad header: '" + line + "'");
        }
        if (outcome == "PASS") {
            trace.outcome = TestOutcome::Pass;
        } else if (outcome == "FAIL") {
            trace.outcome = TestOutcome::Fail;
        } else {
            throw MalformedTrace(path, lineno, "unknown outcome '" + outcome + "'");
        }
        trace.test_id = id;
    }
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream c(line);
        CoveredPc pc;
        std::string pc_text, extra;
        if (!(c >> pc.class_name >> pc.method_name >> pc.descriptor >> pc_text) || (c >> extra)) {
            throw MalformedTrace(path, lineno, "bad coverage line: '" + line + "'");
        }
        u4 value = 0;
        auto [ptr, ec] = std::from_chars(pc_text.data(), pc_text.data() + pc_text.size(), value);
        if (ec != std::errc() || ptr != pc_text.data() + pc_text.size()) {
            throw MalformedTrace(path, lineno, "non-numeric pc '" + pc_text + "'");
        }
        pc.pc = value;
        trace.covered.insert(std::move(pc));
    }
    return trace;
}

std::vector<TestTrace> ingest_traces(const std::vector<std::string>& paths) {
    std::vector<TestTrace> out;
    std::set<std::string> seen;
    for (const std::string& p : paths) {
        TestTrace t = parse_trace(p);
        if (!seen.insert(t.test_id).second) {
            throw MalformedTrace(p, 1, "duplicate test id '" + t.test_id + "'");
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<TestTrace> ingest_trace_dir(const std::string& dir) {
    std::vector<std::string> paths;
    if (!fs::is_directory(dir)) throw MalformedTrace(dir, 0, "trace directory does not exist");
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        if (ext == ".trace" || ext == ".txt") paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    return ingest_traces(paths);
}

CoverageMatrix lift_to_lines(const std::vector<TestTrace>& traces, const ProgramModel& program) {
    CoverageMatrix m;
    for (const TestTrace& t : traces) {
        (t.outcome == TestOutcome::Fail ? m.total_failing : m.total_passing) += 1;
        m.outcomes[t.test_id] = t.outcome;
        std::set<Location>& covered = m.covered_by_test[t.test_id];
        for (const CoveredPc& pc : t.covered) {
            if (!program.find(pc.class_name)) throw UnknownClass(pc.class_name);
            const CodeBody* body =
                program.body({pc.class_name, pc.method_name, pc.descriptor});
            if (!body) continue;  // method absent or abstract: nothing to map
            const Instruction* at = nullptr;
            for (const Instruction& insn : body->instructions) {
                if (insn.orig_pc == pc.pc) {
                    at = &insn;
                    break;
                }
            }
            if (!at) continue;
            std::optional<u2> line = line_of(*body, at->label);
            if (!line) continue;  // UNMAPPED instructions are never suspicious
            covered.insert({pc.class_name, *line});
        }
        if (!t.covered.empty() && covered.empty()) {
            m.warnings.push_back("all covered pcs of test " + t.test_id + " are unmapped");
        }
    }
    // Tallies per line.
    for (const auto& [test_id, lines] : m.covered_by_test) {
        bool failing = m.outcomes[test_id] == TestOutcome::Fail;
        for (const Location& loc : lines) {
            LineTally& tally = m.tallies[loc];
            (failing ? tally.e_f : tally.e_p) += 1;
        }
    }
    for (auto& [loc, tally] : m.tallies) {
        tally.n_f = m.total_failing - tally.e_f;
        tally.n_p = m.total_passing - tally.e_p;
    }
    return m;
}

double ochiai_score(int e_f, int n_f, int e_p) {
    double denom = std::sqrt(static_cast<double>(e_f + n_f) * static_cast<double>(e_f + e_p));
    if (denom == 0.0) return 0.0;
    return static_cast<double>(e_f) / denom;
}

namespace {

std::vector<SiteInstructions> instructions_at(const ProgramModel& program,
                                              const Location& loc) {
    std::vector<SiteInstructions> out;
    for (const MethodId& id : program.methods_of(loc.class_name)) {
        const CodeBody* body = program.body(id);
        if (!body) continue;
        std::vector<Label> labels = offsets_for_line(*body, loc.line);
        if (!labels.empty()) out.push_back({id.method_name, id.descriptor, std::move(labels)});
    }
    return out;
}

}  // namespace

std::vector<SuspiciousLocation> rank_locations(const CoverageMatrix& matrix,
                                               const ProgramModel& program) {
    if (matrix.total_failing == 0) throw NoFailingTests();
    std::vector<SuspiciousLocation> out;
    for (const auto& [loc, tally] : matrix.tallies) {
        double score = ochiai_score(tally.e_f, tally.n_f, tally.e_p);
        if (score <= 0.0) continue;
        SuspiciousLocation s;
        s.location = loc;
        s.score = score;
        s.instructions = instructions_at(program, loc);
        out.push_back(std::move(s));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const SuspiciousLocation& a, const SuspiciousLocation& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.location < b.location;
                     });
    return out;
}

std::vector<SuspiciousLocation> perfect_locations(const std::vector<std::string>& entries,
                                                  const ProgramModel& program) {
    std::vector<SuspiciousLocation> out;
    for (const std::string& e : entries) {
        std::size_t colon = e.rfind(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 >= e.size()) {
            throw UnresolvableLocation("expected class:line, got '" + e + "'");
        }
        SuspiciousLocation s;
        s.location.class_name = e.substr(0, colon);
        int line = 0;
        auto text = e.substr(colon + 1);
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), line);
        if (ec != std::errc() || ptr != text.data() + text.size() || line <= 0 || line > 65535) {
            throw UnresolvableLocation("bad line number in '" + e + "'");
        }
        s.location.line = static_cast<u2>(line);
        if (!program.find(s.location.class_name)) {
            throw UnresolvableLocation("class " + s.location.class_name + " is not loaded");
        }
        s.score = 1.0;
        s.instructions = instructions_at(program, s.location);
        if (s.instructions.empty()) {
            throw UnresolvableLocation("line " + std::to_string(line) + " of " +
                                       s.location.class_name + " has no instructions");
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace bcrepair
