#include "bcrepair/patch.hpp"

#include <algorithm>

namespace bcrepair {

const char* patch_class_name(PatchClass c) {
    switch (c) {
        case PatchClass::Unvalidated: return "UNVALIDATED";
        case PatchClass::Incorrect: return "INCORRECT";
        case PatchClass::PlausibleSubpatch: return "PLAUSIBLE_SUBPATCH";
        case PatchClass::Plausible: return "PLAUSIBLE";
    }
    return "?";
}

void Patch::classify(PatchClass c) {
    if (classification != PatchClass::Unvalidated || c == PatchClass::Unvalidated) {
        throw std::logic_error("invalid classification transition");
    }
    classification = c;
}

PatchContext::PatchContext(const ProgramModel& program, std::vector<SecurePair> secure_pairs,
                           GenerateOptions opts)
    : program_(program), secure_pairs_(std::move(secure_pairs)), opts_(opts) {}

ClassFile& PatchContext::working_class(const std::string& name) {
    auto it = working_.find(name);
    if (it != working_.end()) return *it->second;
    const ClassFile* original = program_.find(name);
    if (!original) throw ApplyConflict("patch touches unloaded class " + name);
    auto copy = std::make_unique<ClassFile>(*original);
    ClassFile& ref = *copy;
    working_.emplace(name, std::move(copy));
    return ref;
}

const DonorPool& PatchContext::donors(const MethodId& method, Label site) {
    auto key = std::make_pair(method, site);
    auto it = donor_cache_.find(key);
    if (it != donor_cache_.end()) return *it->second;
    auto pool = std::make_unique<DonorPool>(
        collect_donors(program_, method, site, secure_pairs_));
    const DonorPool& ref = *pool;
    donor_cache_.emplace(key, std::move(pool));
    return ref;
}

CandidateStream::CandidateStream(PatchContext& ctx, const std::vector<SuspiciousLocation>& sites,
                                 const Patch* parent)
    : ctx_(ctx), sites_(sites), parent_(parent) {}

void CandidateStream::reset() {
    site_ = group_ = match_ = 0;
    matches_.clear();
    pending_.clear();
    pending_pos_ = 0;
    emitted_.clear();
}

void CandidateStream::refill() {
    while (site_ < sites_.size()) {
        const SuspiciousLocation& site = sites_[site_];
        if (group_ >= site.instructions.size()) {
            ++site_;
            group_ = 0;
            match_ = 0;
            matches_.clear();
            continue;
        }
        const SiteInstructions& group = site.instructions[group_];
        MethodId method{site.location.class_name, group.method_name, group.descriptor};
        const CodeBody* body = ctx_.program().body(method);
        if (!body) {
            ++group_;
            match_ = 0;
            matches_.clear();
            continue;
        }
        ClassFile& cf = ctx_.working_class(site.location.class_name);
        if (matches_.empty() && match_ == 0) {
            matches_ = match_templates(*body, group, site.location, method, cf,
                                       ctx_.program().index());
            for (TemplateMatch& m : matches_) m.suspiciousness = site.score;
        }
        while (match_ < matches_.size()) {
            const TemplateMatch& m = matches_[match_];
            auto cap_key = std::make_pair(m.id, site_);
            int& used = emitted_[cap_key];
            if (used >= ctx_.options().max_donors) {
                ++match_;
                continue;
            }
            const DonorPool& donors = ctx_.donors(method, group.labels.front());
            std::vector<Mutant> muts;
            try {
                muts = generate_mutants(m, *body, cf, donors, ctx_.program().index(),
                                        ctx_.options());
            } catch (const NoViableMutation&) {
            }
            ++match_;
            int budget = ctx_.options().max_donors - used;
            if (static_cast<int>(muts.size()) > budget) {
                muts.resize(static_cast<std::size_t>(budget));
            }
            used += static_cast<int>(muts.size());
            if (!muts.empty()) {
                pending_ = std::move(muts);
                pending_pos_ = 0;
                return;
            }
        }
        ++group_;
        match_ = 0;
        matches_.clear();
    }
}

std::optional<Patch> CandidateStream::next() {
    if (pending_pos_ >= pending_.size()) {
        pending_.clear();
        pending_pos_ = 0;
        refill();
        if (pending_.empty()) return std::nullopt;
    }
    Mutant m = pending_[pending_pos_++];
    const SuspiciousLocation& site = sites_[site_];

    Patch p;
    if (parent_) {
        p.mutants = parent_->mutants;
        p.locations_touched = parent_->locations_touched;
        p.templates = parent_->templates;
        p.instruction_delta = parent_->instruction_delta;
        p.max_suspiciousness = parent_->max_suspiciousness;
        p.depth = parent_->depth + 1;
    }
    p.mutants.push_back(std::move(m));
    if (std::find(p.locations_touched.begin(), p.locations_touched.end(), site.location) ==
        p.locations_touched.end()) {
        p.locations_touched.push_back(site.location);
    }
    p.templates.push_back(p.mutants.back().provenance);
    p.instruction_delta += p.mutants.back().instruction_delta;
    p.max_suspiciousness = std::max(p.max_suspiciousness, site.score);
    p.seq = ctx_.next_seq();
    return p;
}

namespace {

// Original-body labels a mutant's replacements cover (insertions excluded).
std::set<Label> replaced_labels(const CodeBody& body, const Mutant& m) {
    std::set<Label> out;
    for (const EditOp& e : m.edits) {
        if (e.kind != EditOp::Kind::ReplaceRange) continue;
        std::size_t from = body.index_of(e.anchor);
        std::size_t to = body.index_of(e.range_end);
        if (from == SIZE_MAX || to == SIZE_MAX) continue;
        for (std::size_t i = from; i <= to; ++i) out.insert(body.instructions[i].label);
    }
    return out;
}

}  // namespace

AppliedPatch apply_patch(PatchContext& ctx, const Patch& p) {
    AppliedPatch out;
    out.frames_status = "preserved";

    // Group mutants per method, keeping chain order inside each group.
    std::map<MethodId, std::vector<const Mutant*>> groups;
    for (const Mutant& m : p.mutants) groups[m.method].push_back(&m);

    std::map<std::string, ClassFile> patched;
    for (const auto& [method, mutants] : groups) {
        const CodeBody* base = ctx.program().body(method);
        if (!base) throw ApplyConflict("patched method has no body: " + method.method_name);

        if (mutants.size() > 1) {
            std::set<Label> seen;
            for (const Mutant* m : mutants) {
                for (Label l : replaced_labels(*base, *m)) {
                    if (!seen.insert(l).second) {
                        throw ApplyConflict("mutants edit overlapping label ranges");
                    }
                }
            }
        }

        CodeBody body = *base;
        try {
            for (const Mutant* m : mutants) body = apply_mutant(body, *m);
        } catch (const EditError& e) {
            throw ApplyConflict(e.what());
        }

        auto it = patched.find(method.class_name);
        if (it == patched.end()) {
            it = patched.emplace(method.class_name, ctx.working_class(method.class_name)).first;
        }
        ClassFile& cf = it->second;

        MemberInfo* member = cf.find_method(method.method_name, method.descriptor);
        if (!member || !member->code) throw ApplyConflict("method vanished from working class");

        bool dynamic_features = false;
        for (const CpEntry& e : cf.pool.slots()) {
            if (e.tag == CpTag::InvokeDynamic || e.tag == CpTag::MethodHandle ||
                e.tag == CpTag::MethodType) {
                dynamic_features = true;
            }
        }
        MethodContext mctx;
        mctx.class_name = method.class_name;
        mctx.method_name = method.method_name;
        mctx.descriptor = method.descriptor;
        mctx.is_static = (member->access_flags & 0x0008) != 0;
        mctx.index = &ctx.program().index();
        mctx.allow_downgrade = !dynamic_features;

        body.max_stack = recompute_max_stack(body, cf.pool);
        FrameRefreshResult refreshed = refresh_frames(body, cf.pool, cf.major_version, mctx);
        if (refreshed.status == FrameStatus::Regenerated &&
            out.frames_status == "preserved") {
            out.frames_status = "regenerated";
        }
        if (refreshed.status == FrameStatus::Downgraded) {
            out.frames_status = "downgraded";
            if (cf.major_version > 50) {
                cf.major_version = 50;
                cf.minor_version = 0;
            }
        }
        *member->code = encode_code(refreshed.body, cf.pool);
        store_code_attribute(*member);
    }

    for (auto& [name, cf] : patched) {
        std::vector<StructuralFault> faults = validate_structure(cf);
        if (!faults.empty()) {
            throw StructuralRegression(name + ": " + faults.front().where + ": " +
                                       faults.front().message);
        }
        out.classes[name] = emit_class(cf);
    }
    return out;
}

std::vector<Patch> rank_patches(std::vector<Patch> plausible) {
    std::stable_sort(plausible.begin(), plausible.end(), [](const Patch& a, const Patch& b) {
        if (a.locations_touched.size() != b.locations_touched.size()) {
            return a.locations_touched.size() < b.locations_touched.size();
        }
        if (a.instruction_delta != b.instruction_delta) {
            return a.instruction_delta < b.instruction_delta;
        }
        if (a.max_suspiciousness != b.max_suspiciousness) {
            return a.max_suspiciousness > b.max_suspiciousness;
        }
        return a.seq < b.seq;
    });
    return plausible;
}

}  // namespace bcrepair
