#ifndef BCREPAIR_PATCH_HPP
#define BCREPAIR_PATCH_HPP

#include <map>
#include <memory>
#include <set>

#include "bcrepair/frames.hpp"
#include "bcrepair/templates.hpp"

namespace bcrepair {

struct ApplyConflict : std::runtime_error {
    explicit ApplyConflict(const std::string& what) : std::runtime_error(what) {}
};
struct StructuralRegression : std::runtime_error {
    explicit StructuralRegression(const std::string& what) : std::runtime_error(what) {}
};

enum class PatchClass : u1 { Unvalidated, Incorrect, PlausibleSubpatch, Plausible };
const char* patch_class_name(PatchClass c);

struct Patch {
    std::vector<Mutant> mutants;  // parent chain first, own mutant last
    std::vector<Location> locations_touched;
    std::vector<TemplateId> templates;
    int instruction_delta = 0;
    double max_suspiciousness = 0.0;
    int depth = 1;    // mutants in the chain
    int parent = -1;  // index into the run's patch store, -1 for roots
    u8 seq = 0;       // generation order, the final ranking tie-break
    std::set<std::string> failing_after;  // filled for plausible sub-patches

    PatchClass classification = PatchClass::Unvalidated;
    std::string frames_status = "preserved";

    // UNVALIDATED may move to exactly one terminal classification.
    void classify(PatchClass c);
};

// Shared working state: per-class copies whose pools accumulate the appends
// made during mutant generation (append-only, so earlier candidates stay
// valid), plus donor-pool and match caches.
class PatchContext {
public:
    PatchContext(const ProgramModel& program, std::vector<SecurePair> secure_pairs,
                 GenerateOptions opts);

    const ProgramModel& program() const { return program_; }
    const GenerateOptions& options() const { return opts_; }
    const std::vector<SecurePair>& secure_pairs() const { return secure_pairs_; }

    ClassFile& working_class(const std::string& name);
    const DonorPool& donors(const MethodId& method, Label site);
    u8 next_seq() { return seq_++; }

private:
    const ProgramModel& program_;
    std::vector<SecurePair> secure_pairs_;
    GenerateOptions opts_;
    std::map<std::string, std::unique_ptr<ClassFile>> working_;
    std::map<std::pair<MethodId, Label>, std::unique_ptr<DonorPool>> donor_cache_;
    u8 seq_ = 0;
};

// Deterministic, restartable stream of candidate patches: sites in rank
// order, templates in catalog order, donors in pool order. With a parent the
// stream yields one-mutant extensions of the parent chain.
class CandidateStream {
public:
    CandidateStream(PatchContext& ctx, const std::vector<SuspiciousLocation>& sites,
                    const Patch* parent = nullptr);
    std::optional<Patch> next();
    void reset();

private:
    void refill();

    PatchContext& ctx_;
    std::vector<SuspiciousLocation> sites_;
    const Patch* parent_;
    std::size_t site_ = 0, group_ = 0, match_ = 0;
    std::vector<TemplateMatch> matches_;
    std::vector<Mutant> pending_;
    std::size_t pending_pos_ = 0;
    // Donor cap is per (template, site): lines matching one template at many
    // instructions still emit at most max_donors mutants.
    std::map<std::pair<TemplateId, std::size_t>, int> emitted_;
};

struct AppliedPatch {
    std::map<std::string, Bytes> classes;  // binary name -> patched bytes
    std::string frames_status;             // worst across methods
};

// Applies every mutant (grouped per method, chain order) to fresh copies of
// the working classes, refreshes frames, re-encodes, and validates. Throws
// ApplyConflict on overlapping edits, StructuralRegression when the patched
// class fails validate_structure, and propagates frame/stack errors.
AppliedPatch apply_patch(PatchContext& ctx, const Patch& p);

// Lexicographic: fewer locations, then smaller instruction delta, then higher
// peak suspiciousness, then generation order.
std::vector<Patch> rank_patches(std::vector<Patch> plausible);

}  // namespace bcrepair

#endif
