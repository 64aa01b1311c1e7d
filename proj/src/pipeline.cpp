#include "bcrepair/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "bcrepair/faultloc.hpp"
#include "bcrepair/io.hpp"
#include "bcrepair/patch.hpp"
#include "bcrepair/validate.hpp"
#include "json.hpp"

namespace bcrepair {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string location_string(const Location& loc) {
    return loc.class_name + ":" + std::to_string(loc.line);
}

struct RunState {
    explicit RunState(const RepairConfig& c) : cfg(c) {}
    const RepairConfig& cfg;
    ProgramModel program;
    PatchContext* ctx = nullptr;
    RunnerConfig runner;
    Budget budget;
    TestReport baseline;
    std::vector<SuspiciousLocation> sites;
    CoverageMatrix coverage;  // spectrum mode only
    bool have_coverage = false;

    std::vector<Patch> plausible;
    std::vector<Patch> subpatches;
    long candidates_generated = 0;
    long candidates_validated = 0;
    long candidates_discarded = 0;
    bool budget_out = false;
    bool saw_subpatch_to_plausible = false;

    double baseline_s = 0, fl_s = 0, validation_s = 0;
};

// Materializes the full class tree for one candidate: the original input
// files with the patched classes overwritten.
void write_tree(const RunState& st, const std::string& dir,
                const std::map<std::string, Bytes>& patched) {
    fs::create_directories(dir);
    fs::copy(st.cfg.classes_dir, dir,
             fs::copy_options::recursive | fs::copy_options::overwrite_existing);
    for (const auto& [name, bytes] : patched) {
        const std::string& rel = st.program.rel_path(name);
        fs::path target = fs::path(dir) / rel;
        fs::create_directories(target.parent_path());
        write_file(target.string(), std::span<const u1>(bytes.data(), bytes.size()));
    }
}

struct ValidatedCandidate {
    Patch patch;
    Outcome outcome;
};

// Validates candidates from `stream` until it ends, the budget runs out, or
// `stop` says to. Classified patches are recorded into the run state.
template <typename StopFn>
void validation_loop(RunState& st, CandidateStream& stream, int parent_index, StopFn stop) {
    std::mutex budget_mu;
    for (;;) {
        if (stop()) return;
        // Collect a batch of applicable candidates.
        struct Job {
            Patch patch;
            AppliedPatch applied;
            TestReport report;
            bool ran = false;
        };
        std::vector<Job> batch;
        // candidates_generated counts candidates the pipeline consumed
        // (discarded or classified); lookahead pulled into an abandoned batch
        // stays uncounted so the statistic is worker-slot invariant.
        auto discard = [&st]() {
            ++st.candidates_generated;
            ++st.candidates_discarded;
        };
        while (static_cast<int>(batch.size()) < st.cfg.worker_slots) {
            std::optional<Patch> cand = stream.next();
            if (!cand) break;
            cand->parent = parent_index;
            Job job;
            job.patch = std::move(*cand);
            try {
                job.applied = apply_patch(*st.ctx, job.patch);
                job.patch.frames_status = job.applied.frames_status;
            } catch (const ApplyConflict&) {
                discard();
                continue;
            } catch (const StructuralRegression&) {
                discard();
                continue;
            } catch (const InconsistentStack&) {
                discard();
                continue;
            } catch (const FrameRegenerationFailed&) {
                discard();
                continue;
            } catch (const UnencodableCode&) {
                discard();
                continue;
            } catch (const UnencodableClass&) {
                discard();
                continue;
            }
            batch.push_back(std::move(job));
        }
        if (batch.empty()) return;  // stream exhausted

        auto t0 = std::chrono::steady_clock::now();
        std::vector<std::thread> workers;
        for (Job& job : batch) {
            workers.emplace_back([&st, &job, &budget_mu]() {
                std::string work = st.cfg.output_dir + "/work/cand-" +
                                   std::to_string(job.patch.seq);
                std::string log = st.cfg.output_dir + "/logs/cand-" +
                                  std::to_string(job.patch.seq) + ".log";
                {
                    std::lock_guard<std::mutex> lock(budget_mu);
                    if (st.budget.exhausted()) return;
                }
                write_tree(st, work, job.applied.classes);
                TestReport report;
                try {
                    // Budget accounting is serialized; the run itself is not.
                    double limit;
                    {
                        std::lock_guard<std::mutex> lock(budget_mu);
                        if (st.budget.exhausted()) return;
                        limit = std::min(st.budget.per_test_seconds *
                                             static_cast<double>(std::max<std::size_t>(
                                                 1, st.baseline.results.size())),
                                         st.budget.remaining());
                    }
                    report = run_suite(st.runner, work, log, limit);
                    {
                        std::lock_guard<std::mutex> lock(budget_mu);
                        st.budget.consumed += report.wall_seconds;
                    }
                    for (const auto& [id, _] : st.baseline.results) {
                        if (!report.results.count(id)) {
                            report.results[id] =
                                report.timed_out ? TestResult::Timeout : TestResult::Error;
                        }
                    }
                } catch (const CommandFailure&) {
                    // A crashing runner marks every test as erroring.
                    for (const auto& [id, _] : st.baseline.results) {
                        report.results[id] = TestResult::Error;
                    }
                }
                job.report = std::move(report);
                job.ran = true;
                std::error_code ec;
                fs::remove_all(work, ec);
            });
        }
        for (std::thread& t : workers) t.join();
        st.validation_s += seconds_since(t0);

        // Classify in enumeration order.
        for (Job& job : batch) {
            if (!job.ran) {
                st.budget_out = true;
                return;
            }
            ++st.candidates_generated;
            ++st.candidates_validated;
            Outcome outcome = classify_outcome(st.baseline, job.report);
            switch (outcome) {
                case Outcome::Plausible:
                    job.patch.classify(PatchClass::Plausible);
                    if (job.patch.depth > 1) st.saw_subpatch_to_plausible = true;
                    st.plausible.push_back(std::move(job.patch));
                    break;
                case Outcome::PlausibleSubpatch: {
                    job.patch.classify(PatchClass::PlausibleSubpatch);
                    for (const auto& [id, r] : job.report.results) {
                        if (r != TestResult::Pass) job.patch.failing_after.insert(id);
                    }
                    st.subpatches.push_back(std::move(job.patch));
                    break;
                }
                case Outcome::Incorrect:
                    job.patch.classify(PatchClass::Incorrect);
                    break;
            }
            if (stop()) return;
        }
        if (st.budget.exhausted()) {
            st.budget_out = true;
            return;
        }
    }
}

// Sites not already touched by the chain; in spectrum mode additionally
// restricted to lines covered by a test the sub-patch still fails.
std::vector<SuspiciousLocation> remaining_sites(const RunState& st, const Patch& sub) {
    std::vector<SuspiciousLocation> out;
    for (const SuspiciousLocation& s : st.sites) {
        bool touched = std::find(sub.locations_touched.begin(), sub.locations_touched.end(),
                                 s.location) != sub.locations_touched.end();
        if (touched) continue;
        if (st.have_coverage) {
            bool implicated = false;
            for (const std::string& t : sub.failing_after) {
                auto it = st.coverage.covered_by_test.find(t);
                if (it != st.coverage.covered_by_test.end() && it->second.count(s.location)) {
                    implicated = true;
                    break;
                }
            }
            if (!implicated) continue;
        }
        out.push_back(s);
    }
    return out;
}

json patch_json(const Patch& p) {
    json j;
    j["templates"] = json::array();
    for (TemplateId t : p.templates) j["templates"].push_back(template_name(t));
    j["locations"] = json::array();
    for (const Location& l : p.locations_touched) j["locations"].push_back(location_string(l));
    j["instruction_delta"] = p.instruction_delta;
    j["frames_status"] = p.frames_status;
    j["depth"] = p.depth;
    j["mutations"] = json::array();
    for (const Mutant& m : p.mutants) j["mutations"].push_back(m.description);
    return j;
}

}  // namespace

RunOutcome orchestrate_repair(const RepairConfig& cfg) {
    auto t_start = std::chrono::steady_clock::now();
    RunOutcome outcome;
    RunState st(cfg);

    fs::create_directories(cfg.output_dir);
    fs::create_directories(cfg.output_dir + "/logs");
    fs::create_directories(cfg.output_dir + "/work");

    json report;
    report["schema"] = 1;
    report["status"] = "aborted";
    report["fl_mode"] = cfg.fl_mode == FlMode::Perfect ? "perfect" : "spectrum";

    auto flush = [&](const std::string& status, int code, const std::string& error) {
        report["status"] = status;
        if (!error.empty()) report["error"] = error;
        json timings;
        timings["baseline_s"] = st.baseline_s;
        timings["fl_s"] = st.fl_s;
        timings["validation_s"] = st.validation_s;
        timings["total_s"] = seconds_since(t_start);
        report["timings"] = std::move(timings);
        outcome.status = status;
        outcome.exit_code = code;
        outcome.error = error;
        outcome.report_json = report.dump(2) + "\n";
        emit_report(outcome, cfg.output_dir);
    };

    try {
        st.program.load_dir(cfg.classes_dir);
        st.runner.command = cfg.test_command;
        st.runner.pov_tests = cfg.pov_tests;
        st.budget.total_seconds = cfg.budget_seconds;
        st.budget.per_test_seconds = cfg.per_test_timeout_seconds;

        auto t0 = std::chrono::steady_clock::now();
        st.baseline = baseline_run(st.runner, cfg.classes_dir,
                                   cfg.output_dir + "/logs/baseline.log", st.budget);
        st.baseline_s = seconds_since(t0);

        t0 = std::chrono::steady_clock::now();
        if (cfg.fl_mode == FlMode::Spectrum) {
            std::vector<TestTrace> traces = ingest_trace_dir(cfg.traces_dir);
            st.coverage = lift_to_lines(traces, st.program);
            st.have_coverage = true;
            st.sites = rank_locations(st.coverage, st.program);
        } else {
            std::vector<std::string> entries;
            std::istringstream in(read_text_file(cfg.perfect_locations_file));
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty() || line[0] == '#') continue;
                entries.push_back(line);
            }
            st.sites = perfect_locations(entries, st.program);
        }
        st.fl_s = seconds_since(t0);

        json locs = json::array();
        for (std::size_t i = 0; i < st.sites.size() && i < 100; ++i) {
            json l;
            l["class"] = st.sites[i].location.class_name;
            l["line"] = st.sites[i].location.line;
            l["score"] = st.sites[i].score;
            locs.push_back(std::move(l));
        }
        report["suspicious_locations"] = std::move(locs);

        std::vector<SecurePair> pairs;
        if (!cfg.secure_pairs_file.empty()) pairs = load_secure_pairs(cfg.secure_pairs_file);
        PatchContext ctx(st.program, std::move(pairs), GenerateOptions{cfg.max_donors});
        st.ctx = &ctx;

        // Pass 1: single-mutant candidates over all ranked sites.
        CandidateStream stream(ctx, st.sites);
        validation_loop(st, stream, -1, [] { return false; });

        // Pass 2: extend plausible sub-patches until a plausible descendant
        // appears, candidates run out, or the budget expires.
        for (std::size_t qi = 0; qi < st.subpatches.size() && !st.budget_out; ++qi) {
            const Patch sub = st.subpatches[qi];  // copy: the vector may grow
            if (sub.depth >= cfg.subpatch_depth) continue;
            std::vector<SuspiciousLocation> rest = remaining_sites(st, sub);
            if (rest.empty()) continue;
            std::size_t plausible_before = st.plausible.size();
            CandidateStream descend(ctx, rest, &sub);
            validation_loop(st, descend, static_cast<int>(qi),
                            [&] { return st.plausible.size() > plausible_before; });
        }

        // Rank and materialize the plausible patches.
        st.plausible = rank_patches(std::move(st.plausible));
        json patches = json::array();
        for (std::size_t i = 0; i < st.plausible.size(); ++i) {
            const Patch& p = st.plausible[i];
            std::string dir_name = "patch-" + std::to_string(i + 1);
            AppliedPatch applied = apply_patch(ctx, p);
            write_tree(st, cfg.output_dir + "/" + dir_name, applied.classes);
            json j = patch_json(p);
            j["rank"] = static_cast<int>(i + 1);
            j["dir"] = dir_name;
            patches.push_back(std::move(j));
        }
        report["candidates_generated"] = st.candidates_generated;
        report["candidates_validated"] = st.candidates_validated;
        report["candidates_discarded"] = st.candidates_discarded;
        report["patches"] = std::move(patches);
        json subs = json::array();
        for (const Patch& p : st.subpatches) {
            json j = patch_json(p);
            j["still_failing"] = json::array();
            for (const std::string& t : p.failing_after) j["still_failing"].push_back(t);
            subs.push_back(std::move(j));
        }
        report["subpatches"] = std::move(subs);

        std::error_code ec;
        fs::remove_all(cfg.output_dir + "/work", ec);

        if (!st.plausible.empty()) {
            flush("plausible_found", 0, "");
        } else if (st.budget_out) {
            flush("budget_exhausted", 2, "");
        } else {
            flush("no_plausible", 2, "");
        }
    } catch (const NoPoV& e) {
        flush("aborted", 3, e.what());
    } catch (const NoFailingTests& e) {
        flush("aborted", 3, e.what());
    } catch (const CommandFailure& e) {
        flush("aborted", 3, e.what());
    } catch (const UnresolvableLocation& e) {
        flush("aborted", 3, e.what());
    } catch (const MalformedTrace& e) {
        flush("aborted", 3, e.what());
    } catch (const UnknownClass& e) {
        flush("aborted", 3, e.what());
    } catch (const MalformedClass& e) {
        flush("aborted", 3, e.what());
    } catch (const IoError& e) {
        flush("aborted", 3, e.what());
    }
    return outcome;
}

void emit_report(const RunOutcome& outcome, const std::string& output_dir) {
    write_text_file(output_dir + "/report.json", outcome.report_json);
}

}  // namespace bcrepair
