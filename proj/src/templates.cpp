#include "bcrepair/templates.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <set>
#include <sstream>

#include "bcrepair/descriptor.hpp"

namespace bcrepair {

namespace {

// avr = collected from the vulnerability-repair literature (13 of 33); the
// rest are ports of general program-repair templates.
TemplateId t(u1 cat, u1 var, bool avr = false) { return {cat, var, avr}; }

const std::vector<TemplateId>& catalog() {
    static const std::vector<TemplateId> k = {
        // T1 Mutate Object Instantiation
        t(1, 1, true), t(1, 2, true),
        // T2 Insert Validity Checker (null / non-negative / array / dictionary)
        t(2, 1), t(2, 2, true), t(2, 3, true), t(2, 4, true),
        // T3 Insert Statements (invocation / early return / try-catch)
        t(3, 1), t(3, 2), t(3, 3, true),
        // T4 Insert Cast Checker
        t(4, 0),
        // T5 Mutate Conditional Block (operand substitution / force outcome)
        t(5, 1), t(5, 2),
        // T6 Mutate Data Type (primitive store / reference cast)
        t(6, 1), t(6, 2, true),
        // T7 Mutate Literal Expression (bool inversion / numeric / from context)
        t(7, 1), t(7, 2), t(7, 3),
        // T8 Mutate Variables (compatible local / donor expression)
        t(8, 1), t(8, 2),
        // T9 Mutate Method Invocation (target / argument variable / argument expression)
        t(9, 1), t(9, 2), t(9, 3, true),
        // T10 Mutate Operators (comparison / arithmetic / logical+shift)
        t(10, 1), t(10, 2), t(10, 3),
        // T11 Remove Statements (line / conditional construct)
        t(11, 1), t(11, 2),
        // T12 Mutate Return Statements
        t(12, 0),
        // T13 Mutate Switch Statements (default retarget / case permute / case clone)
        t(13, 1, true), t(13, 2, true), t(13, 3, true),
        // T14 Mutate Fields (compatible field / method call)
        t(14, 1, true), t(14, 2, true),
    };
    return k;
}

Op load_base_for(const std::string& desc) {
    switch (desc[0]) {
        case 'J': return Op::lload;
        case 'F': return Op::fload;
        case 'D': return Op::dload;
        case 'L': case '[': return Op::aload;
        default: return Op::iload;
    }
}
Op store_base_for(const std::string& desc) {
    switch (desc[0]) {
        case 'J': return Op::lstore;
        case 'F': return Op::fstore;
        case 'D': return Op::dstore;
        case 'L': case '[': return Op::astore;
        default: return Op::istore;
    }
}

char load_kind(Op op) {
    int implied;
    switch (normalize_load_store(op, &implied)) {
        case Op::iload: return 'I';
        case Op::lload: return 'J';
        case Op::fload: return 'F';
        case Op::dload: return 'D';
        case Op::aload: return 'L';
        default: return 0;
    }
}

// Descriptor of the local used at `insn`, from the LVT when present, else
// from the load/store kind. For stores the variable's LVT range begins just
// after the instruction (the javac convention), so the lookup position shifts.
std::string local_descriptor(const CodeBody& body, const Instruction& insn) {
    int slot = insn.slot();
    if (slot < 0) return "";
    std::size_t pos = body.index_of(insn.label);
    if (insn.is_store()) ++pos;
    for (const LocalVarInfo& v : body.local_vars) {
        if (v.index != slot) continue;
        std::size_t from = body.index_of(v.from);
        std::size_t to = v.to == kEndLabel ? body.instructions.size() : body.index_of(v.to);
        if (pos >= from && pos < to && is_valid_field_descriptor(v.descriptor)) {
            return v.descriptor;
        }
    }
    int implied;
    switch (normalize_load_store(insn.op, &implied)) {
        case Op::iload: case Op::istore: return "I";
        case Op::lload: case Op::lstore: return "J";
        case Op::fload: case Op::fstore: return "F";
        case Op::dload: case Op::dstore: return "D";
        case Op::aload: case Op::astore: return "Ljava/lang/Object;";
        default: return "";
    }
}

bool is_numeric_const(const Instruction& insn, const ConstantPool& pool) {
    u1 c = static_cast<u1>(insn.op);
    if (c >= 2 && c <= 15) return true;  // iconst_m1..dconst_1
    if (insn.op == Op::bipush || insn.op == Op::sipush) return true;
    if (insn.op == Op::ldc || insn.op == Op::ldc_w) {
        CpTag tag = pool.at(insn.cp_index).tag;
        return tag == CpTag::Integer || tag == CpTag::Float;
    }
    if (insn.op == Op::ldc2_w) return true;
    return false;
}

bool is_comparison_branch(Op op) {
    u1 c = static_cast<u1>(op);
    return (c >= 153 && c <= 166) || op == Op::ifnull || op == Op::ifnonnull;
}

const std::vector<Op>* arith_family(Op op) {
    static const std::vector<Op> i = {Op::iadd, Op::isub, Op::imul, Op::idiv, Op::irem};
    static const std::vector<Op> l = {Op::ladd, Op::lsub, Op::lmul, Op::ldiv_, Op::lrem};
    static const std::vector<Op> f = {Op::fadd, Op::fsub, Op::fmul, Op::fdiv, Op::frem};
    static const std::vector<Op> d = {Op::dadd, Op::dsub, Op::dmul, Op::ddiv, Op::drem};
    for (const auto* fam : {&i, &l, &f, &d}) {
        if (std::find(fam->begin(), fam->end(), op) != fam->end()) return fam;
    }
    return nullptr;
}

const std::vector<Op>* logic_family(Op op) {
    static const std::vector<Op> ib = {Op::iand, Op::ior, Op::ixor};
    static const std::vector<Op> lb = {Op::land, Op::lor, Op::lxor};
    static const std::vector<Op> is = {Op::ishl, Op::ishr, Op::iushr};
    static const std::vector<Op> ls = {Op::lshl, Op::lshr, Op::lushr};
    for (const auto* fam : {&ib, &lb, &is, &ls}) {
        if (std::find(fam->begin(), fam->end(), op) != fam->end()) return fam;
    }
    return nullptr;
}

bool boolean_sink_follows(const CodeBody& body, const ClassFile& cf, const MemberInfo* member,
                          std::size_t pos) {
    if (pos + 1 >= body.instructions.size()) return false;
    const Instruction& next = body.instructions[pos + 1];
    if (next.is_store()) {
        std::string d = local_descriptor(body, next);
        return d == "Z";
    }
    if (next.op == Op::putfield || next.op == Op::putstatic) {
        const CpEntry& e = cf.pool.at(next.cp_index);
        return cf.pool.utf8(cf.pool.at(e.index2).index2) == "Z";
    }
    if (next.op == Op::ireturn && member) {
        return parse_method_descriptor(member->descriptor).ret == "Z";
    }
    return false;
}

struct SiteGeometry {
    std::size_t run_begin = 0, run_end = 0;  // inclusive instruction positions
    Label next_label = kEndLabel;            // first instruction after the run
};

// Maximal contiguous run of site instructions containing the anchor.
std::optional<SiteGeometry> site_run(const CodeBody& body, const std::vector<Label>& site_labels,
                                     Label anchor) {
    std::set<Label> site(site_labels.begin(), site_labels.end());
    std::size_t pos = body.index_of(anchor);
    if (pos == SIZE_MAX || !site.count(anchor)) return std::nullopt;
    SiteGeometry g;
    g.run_begin = pos;
    while (g.run_begin > 0 && site.count(body.instructions[g.run_begin - 1].label)) {
        --g.run_begin;
    }
    g.run_end = pos;
    while (g.run_end + 1 < body.instructions.size() &&
           site.count(body.instructions[g.run_end + 1].label)) {
        ++g.run_end;
    }
    g.next_label = g.run_end + 1 < body.instructions.size()
                       ? body.instructions[g.run_end + 1].label
                       : kEndLabel;
    return g;
}

}  // namespace

std::string template_name(TemplateId id) {
    std::string out = "T" + std::to_string(id.category);
    if (id.variant != 0) out += "." + std::to_string(id.variant);
    return out;
}

const std::vector<TemplateId>& template_catalog() { return catalog(); }

// --- Matching ---------------------------------------------------------------

namespace {

bool matches_at(TemplateId id, const CodeBody& body, const ClassFile& cf, const ClassIndex& index,
                const MemberInfo* member, std::size_t pos) {
    const Instruction& insn = body.instructions[pos];
    switch (id.category * 10 + id.variant) {
        case 11:  // T1.1 secure instantiation
        case 12:  // T1.2 null instantiation
            return insn.op == Op::new_;
        case 21:  // null check: reference local use
            return insn.is_load() && load_kind(insn.op) == 'L';
        case 22:  // non-negative check: primitive numeric local use
            return insn.is_load() && load_kind(insn.op) != 'L' && load_kind(insn.op) != 0;
        case 23: {  // array emptiness check
            if (!insn.is_load() || load_kind(insn.op) != 'L') return false;
            std::string d = local_descriptor(body, insn);
            return !d.empty() && d[0] == '[';
        }
        case 24: {  // dictionary/collection emptiness check
            if (!insn.is_load() || load_kind(insn.op) != 'L') return false;
            return index.is_collection_like(local_descriptor(body, insn));
        }
        case 40:  // T4 cast checker
            return insn.op == Op::checkcast;
        case 51: {  // conditional operand substitution
            if (!opcode_info(insn.op).cond_branch || pos == 0) return false;
            return body.instructions[pos - 1].is_load();
        }
        case 52:  // force conditional outcome
            return opcode_info(insn.op).cond_branch;
        case 61: {  // primitive store retype
            if (!insn.is_store()) return false;
            int implied;
            Op base = normalize_load_store(insn.op, &implied);
            return base == Op::istore || base == Op::lstore || base == Op::fstore ||
                   base == Op::dstore;
        }
        case 62:  // reference cast retype
            return insn.op == Op::checkcast;
        case 71:  // boolean literal inversion
            return (insn.op == Op::iconst_0 || insn.op == Op::iconst_1) &&
                   boolean_sink_follows(body, cf, member, pos);
        case 72:  // numeric literal mutation
            return is_numeric_const(insn, cf.pool);
        case 73: {  // literal from context
            if (insn.op == Op::ldc || insn.op == Op::ldc_w || insn.op == Op::ldc2_w) return true;
            return is_numeric_const(insn, cf.pool);
        }
        case 81:  // variable substitution
        case 82:  // variable -> donor expression
            return insn.is_load();
        case 91:  // invocation target swap
            return insn.op == Op::invokevirtual || insn.op == Op::invokestatic ||
                   insn.op == Op::invokeinterface;
        case 92:    // last-argument variable swap
        case 93: {  // last-argument expression swap
            if (insn.op != Op::invokevirtual && insn.op != Op::invokestatic &&
                insn.op != Op::invokeinterface && insn.op != Op::invokespecial) {
                return false;
            }
            const CpEntry& e = cf.pool.at(insn.cp_index);
            MethodDescriptor md =
                parse_method_descriptor(cf.pool.utf8(cf.pool.at(e.index2).index2));
            if (md.params.empty() || pos == 0) return false;
            const Instruction& prev = body.instructions[pos - 1];
            return prev.is_load() || is_numeric_const(prev, cf.pool);
        }
        case 101:  // comparison operator swap
            return is_comparison_branch(insn.op);
        case 102:  // arithmetic operator swap
            return arith_family(insn.op) != nullptr;
        case 103:  // logical/shift operator swap
            return logic_family(insn.op) != nullptr;
        case 112: {  // remove conditional construct (forward branch)
            if (!opcode_info(insn.op).cond_branch) return false;
            std::size_t target = body.index_of(insn.target);
            return target != SIZE_MAX && target > pos;
        }
        case 120: {  // T12 return expression swap
            if (insn.op != Op::ireturn && insn.op != Op::lreturn && insn.op != Op::freturn &&
                insn.op != Op::dreturn && insn.op != Op::areturn) {
                return false;
            }
            if (pos == 0) return false;
            const Instruction& prev = body.instructions[pos - 1];
            return prev.is_load() || is_numeric_const(prev, cf.pool) ||
                   prev.op == Op::ldc || prev.op == Op::ldc_w;
        }
        case 131: case 132: case 133:  // T13 switch mutations
            return insn.switch_op.has_value();
        case 141:  // field swap
        case 142:  // field -> method call
            return insn.op == Op::getfield || insn.op == Op::getstatic;
        default:
            return false;
    }
}

bool site_level(TemplateId id) {
    // Insertion/removal templates anchor at the start of each contiguous run
    // of the site rather than at a particular instruction.
    return (id.category == 3) || (id.category == 11 && id.variant == 1);
}

}  // namespace

std::vector<TemplateMatch> match_templates(const CodeBody& body, const SiteInstructions& site,
                                           const Location& location, const MethodId& method,
                                           const ClassFile& cf, const ClassIndex& index) {
    std::vector<TemplateMatch> out;
    if (site.labels.empty()) return out;
    const MemberInfo* member = cf.find_method(method.method_name, method.descriptor);

    std::map<Label, std::size_t> positions;
    for (std::size_t i = 0; i < body.instructions.size(); ++i) {
        positions.emplace(body.instructions[i].label, i);
    }

    // Contiguous run starts, for the site-level templates.
    std::vector<Label> run_starts;
    {
        std::set<Label> site_set(site.labels.begin(), site.labels.end());
        bool prev_in_site = false;
        for (const Instruction& insn : body.instructions) {
            bool in_site = site_set.count(insn.label) != 0;
            if (in_site && !prev_in_site) run_starts.push_back(insn.label);
            prev_in_site = in_site;
        }
    }

    for (TemplateId id : catalog()) {
        if (site_level(id)) {
            for (Label start : run_starts) {
                TemplateMatch m;
                m.id = id;
                m.method = method;
                m.location = location;
                m.anchor = start;
                m.site_labels = site.labels;
                out.push_back(std::move(m));
            }
            continue;
        }
        for (Label label : site.labels) {
            auto it = positions.find(label);
            if (it == positions.end()) continue;
            if (!matches_at(id, body, cf, index, member, it->second)) continue;
            TemplateMatch m;
            m.id = id;
            m.method = method;
            m.location = location;
            m.anchor = label;
            m.site_labels = site.labels;
            out.push_back(std::move(m));
        }
    }
    return out;
}

// --- Generation ---------------------------------------------------------------

namespace {

struct Gen {
    const TemplateMatch& match;
    const CodeBody& body;
    ClassFile& cf;
    const DonorPool& donors;
    const ClassIndex& index;
    const GenerateOptions& opts;
    const MemberInfo* member;
    std::optional<std::vector<int>> depths;  // entry stack depth per position

    std::vector<Mutant> out;
    int donor_budget;

    Gen(const TemplateMatch& m, const CodeBody& b, ClassFile& c, const DonorPool& d,
        const ClassIndex& ix, const GenerateOptions& o)
        : match(m), body(b), cf(c), donors(d), index(ix), opts(o),
          member(c.find_method(m.method.method_name, m.method.descriptor)),
          donor_budget(o.max_donors) {
        depths = stack_depths(b, c.pool);
    }

    std::size_t anchor_pos() const { return body.index_of(match.anchor); }
    const Instruction& anchor() const { return body.instructions[anchor_pos()]; }
    bool method_is_static() const { return member && (member->access_flags & 0x0008); }

    int depth_at_pos(std::size_t pos) const {
        if (!depths || pos >= depths->size()) return -1;
        return (*depths)[pos];
    }
    int depth_at_label(Label l) const {
        if (l == kEndLabel) return -1;
        std::size_t pos = body.index_of(l);
        return pos == SIZE_MAX ? -1 : depth_at_pos(pos);
    }

    void emit(std::vector<EditOp> edits, int delta, std::string what,
              std::vector<ExceptionHandler> handlers = {}, u2 new_max_locals = 0) {
        if (donor_budget <= 0) return;
        Mutant m;
        m.method = match.method;
        m.provenance = match.id;
        m.edits = std::move(edits);
        m.added_handlers = std::move(handlers);
        m.new_max_locals = new_max_locals;
        m.instruction_delta = delta;
        m.description = template_name(match.id) + " " + std::move(what) + " @ " +
                        match.method.class_name + "." + match.method.method_name +
                        match.method.descriptor + ":" + std::to_string(match.location.line);
        out.push_back(std::move(m));
        --donor_budget;
    }

    int range_size(Label from, Label to) const {
        std::size_t a = body.index_of(from), b = body.index_of(to);
        return static_cast<int>(b - a + 1);
    }

    // ---- per-category generators ----

    void t1_secure() {
        const Instruction& nw = anchor();
        std::string cls = cf.pool.class_name(nw.cp_index);
        auto secure = infer_secure_class(index, donors.secure_pairs, cls);
        if (!secure) return;
        // The matching constructor call: first invokespecial <init> on the
        // same class after the `new`.
        for (std::size_t i = anchor_pos() + 1; i < body.instructions.size(); ++i) {
            const Instruction& insn = body.instructions[i];
            if (insn.op != Op::invokespecial) continue;
            const CpEntry& e = cf.pool.at(insn.cp_index);
            if (cf.pool.class_name(e.index1) != cls) continue;
            if (cf.pool.utf8(cf.pool.at(e.index2).index1) != "<init>") continue;
            std::string desc = cf.pool.utf8(cf.pool.at(e.index2).index2);
            u2 new_cls = cf.pool.add_class(*secure);
            u2 new_init = cf.pool.add_methodref(*secure, "<init>", desc);
            std::vector<EditOp> edits;
            edits.push_back(replace_at(nw.label, {make_cp_insn(Op::new_, new_cls)}));
            edits.push_back(replace_at(insn.label, {make_cp_insn(Op::invokespecial, new_init)}));
            emit(std::move(edits), 2, cls + "->" + *secure);
            return;
        }
    }

    void t1_null() {
        // new C; dup; invokespecial C.<init>()V; astore x  =>  aconst_null; astore x
        std::size_t p = anchor_pos();
        if (p + 3 >= body.instructions.size()) return;
        const Instruction& nw = body.instructions[p];
        const Instruction& dup = body.instructions[p + 1];
        const Instruction& init = body.instructions[p + 2];
        const Instruction& store = body.instructions[p + 3];
        int implied;
        if (dup.op != Op::dup || init.op != Op::invokespecial || !store.is_store() ||
            normalize_load_store(store.op, &implied) != Op::astore) {
            return;
        }
        const CpEntry& e = cf.pool.at(init.cp_index);
        if (cf.pool.class_name(e.index1) != cf.pool.class_name(nw.cp_index)) return;
        if (cf.pool.utf8(cf.pool.at(e.index2).index1) != "<init>") return;
        if (cf.pool.utf8(cf.pool.at(e.index2).index2) != "()V") return;
        std::vector<Instruction> repl = {make_insn(Op::aconst_null),
                                         make_store(Op::astore, static_cast<u2>(store.slot()))};
        emit({replace_range(nw.label, store.label, std::move(repl))}, 4,
             "instantiation->null of " + cf.pool.class_name(nw.cp_index));
    }

    void t2(int variant) {
        auto geom = site_run(body, match.site_labels, match.anchor);
        if (!geom) return;
        Label line_start = body.instructions[geom->run_begin].label;
        if (depth_at_label(line_start) != 0) return;
        // The skip-guard variants need a continuation and a clean join; the
        // clamp substitutes in place and only needs the line start.
        if (variant != 2 &&
            (geom->next_label == kEndLabel || depth_at_label(geom->next_label) != 0)) {
            return;
        }
        const Instruction& load = anchor();
        u2 slot = static_cast<u2>(load.slot());
        std::string desc = local_descriptor(body, load);
        if (desc.empty()) return;
        std::vector<Instruction> guard;
        std::string what;
        switch (variant) {
            case 1:  // skip the statement when the reference is null
                guard = {make_load(Op::aload, slot),
                         make_branch(Op::ifnull, geom->next_label)};
                what = "null guard on slot " + std::to_string(slot);
                break;
            case 2:  // substitute 0 when the value is negative
                switch (desc[0]) {
                    case 'J':
                        guard = {make_load(Op::lload, slot), make_insn(Op::lconst_0),
                                 make_insn(Op::lcmp), make_branch(Op::ifge, line_start),
                                 make_insn(Op::lconst_0), make_store(Op::lstore, slot)};
                        break;
                    case 'F':
                        guard = {make_load(Op::fload, slot), make_insn(Op::fconst_0),
                                 make_insn(Op::fcmpl), make_branch(Op::ifge, line_start),
                                 make_insn(Op::fconst_0), make_store(Op::fstore, slot)};
                        break;
                    case 'D':
                        guard = {make_load(Op::dload, slot), make_insn(Op::dconst_0),
                                 make_insn(Op::dcmpl), make_branch(Op::ifge, line_start),
                                 make_insn(Op::dconst_0), make_store(Op::dstore, slot)};
                        break;
                    default:
                        guard = {make_load(Op::iload, slot), make_branch(Op::ifge, line_start),
                                 make_insn(Op::iconst_0), make_store(Op::istore, slot)};
                        break;
                }
                what = "non-negative clamp on slot " + std::to_string(slot);
                break;
            case 3:  // skip when the array is null or empty
                guard = {make_load(Op::aload, slot), make_branch(Op::ifnull, geom->next_label),
                         make_load(Op::aload, slot), make_insn(Op::arraylength),
                         make_branch(Op::ifle, geom->next_label)};
                what = "array guard on slot " + std::to_string(slot);
                break;
            case 4: {  // skip when the collection is null or empty
                std::string cls = class_of_descriptor(desc);
                bool iface = index.is_known_interface(cls);
                u2 ref = iface ? cf.pool.add_interface_methodref(cls, "isEmpty", "()Z")
                               : cf.pool.add_methodref(cls, "isEmpty", "()Z");
                Instruction call = make_cp_insn(iface ? Op::invokeinterface : Op::invokevirtual,
                                                ref);
                if (iface) call.imm = 1;  // receiver slot count
                guard = {make_load(Op::aload, slot), make_branch(Op::ifnull, geom->next_label),
                         make_load(Op::aload, slot), call,
                         make_branch(Op::ifne, geom->next_label)};
                what = "emptiness guard on slot " + std::to_string(slot);
                break;
            }
        }
        int delta = static_cast<int>(guard.size());
        emit({insert_before(line_start, std::move(guard))}, delta, what);
    }

    void t3_invoke() {
        Label at = match.anchor;
        if (depth_at_label(at) != 0) return;
        int budget = opts.max_donors;
        for (const MethodDonor& d : donors.methods) {
            if (budget <= 0) break;
            if (d.staticness == Staticness::Unknown) continue;
            MethodDescriptor md;
            try {
                md = parse_method_descriptor(d.descriptor);
            } catch (const InvalidDescriptor&) {
                continue;
            }
            std::vector<Instruction> seq;
            if (d.staticness == Staticness::Instance) {
                if (method_is_static()) continue;
                if (!index.is_subclass_of(match.method.class_name, d.owner)) continue;
                seq.push_back(make_load(Op::aload, 0));
            }
            bool ok = true;
            for (const std::string& p : md.params) {
                const LocalDonor* arg = nullptr;
                for (const LocalDonor& l : donors.locals) {
                    if (descriptor_compatible(l.descriptor, p, index)) {
                        arg = &l;
                        break;
                    }
                }
                if (!arg) {
                    ok = false;
                    break;
                }
                seq.push_back(make_load(load_base_for(arg->descriptor), arg->slot));
            }
            if (!ok) continue;
            u2 ref;
            Instruction call;
            if (d.interface_owner || index.is_known_interface(d.owner)) {
                ref = cf.pool.add_interface_methodref(d.owner, d.name, d.descriptor);
                call = make_cp_insn(Op::invokeinterface, ref);
                call.imm = 1 + arg_slots(d.descriptor);
            } else {
                ref = cf.pool.add_methodref(d.owner, d.name, d.descriptor);
                call = make_cp_insn(d.staticness == Staticness::Static ? Op::invokestatic
                                                                       : Op::invokevirtual,
                                    ref);
            }
            seq.push_back(call);
            int ret_width = slot_width(md.ret);
            if (ret_width == 1) seq.push_back(make_insn(Op::pop));
            if (ret_width == 2) seq.push_back(make_insn(Op::pop2));
            int delta = static_cast<int>(seq.size());
            emit({insert_before(at, std::move(seq))}, delta,
                 "insert call " + d.owner + "." + d.name + d.descriptor);
            --budget;
        }
    }

    void t3_return() {
        Label at = match.anchor;
        if (depth_at_label(at) != 0) return;
        std::string ret = parse_method_descriptor(match.method.descriptor).ret;
        std::vector<Instruction> seq;
        switch (ret[0]) {
            case 'V': seq = {make_insn(Op::return_)}; break;
            case 'J': seq = {make_insn(Op::lconst_0), make_insn(Op::lreturn)}; break;
            case 'F': seq = {make_insn(Op::fconst_0), make_insn(Op::freturn)}; break;
            case 'D': seq = {make_insn(Op::dconst_0), make_insn(Op::dreturn)}; break;
            case 'L': case '[':
                seq = {make_insn(Op::aconst_null), make_insn(Op::areturn)};
                break;
            default: seq = {make_insn(Op::iconst_0), make_insn(Op::ireturn)}; break;
        }
        int delta = static_cast<int>(seq.size());
        emit({insert_before(at, std::move(seq))}, delta, "early default return");
    }

    void t3_trycatch() {
        auto geom = site_run(body, match.site_labels, match.anchor);
        if (!geom || geom->next_label == kEndLabel) return;
        Label line_start = body.instructions[geom->run_begin].label;
        if (depth_at_label(line_start) != 0 || depth_at_label(geom->next_label) != 0) return;
        u2 tmp = body.max_locals;  // fresh slot for the caught throwable
        Label handler_label = body.next_label;
        Instruction store = make_store(Op::astore, tmp);
        store.label = handler_label;
        Instruction jump = make_branch(Op::goto_, geom->next_label);
        jump.label = body.next_label + 1;
        cf.pool.add_class("java/lang/Throwable");
        ExceptionHandler h;
        h.from = line_start;
        h.to = geom->next_label;
        h.handler = handler_label;
        h.catch_type = cf.pool.add_class("java/lang/Throwable");
        emit({insert_before(kEndLabel, {store, jump})}, 2, "wrap line in catch-all", {h},
             static_cast<u2>(tmp + 1));
    }

    void t4() {
        const Instruction& cast = anchor();
        auto geom = site_run(body, match.site_labels, match.anchor);
        if (!geom || geom->next_label == kEndLabel) return;
        int d_cast = depth_at_label(cast.label);
        int d_next = depth_at_label(geom->next_label);
        if (d_cast < 1 || d_cast - 1 != d_next) return;
        std::vector<Instruction> guard = {
            make_insn(Op::dup),
            make_cp_insn(Op::instanceof_, cast.cp_index),
            make_branch(Op::ifne, cast.label),
            make_insn(Op::pop),
            make_branch(Op::goto_, geom->next_label),
        };
        emit({insert_before(cast.label, std::move(guard))}, 5,
             "instanceof guard before cast to " + cf.pool.class_name(cast.cp_index));
    }

    void t5_operand() {
        std::size_t p = anchor_pos();
        const Instruction& load = body.instructions[p - 1];
        std::string cur = local_descriptor(body, load);
        if (cur.empty()) return;
        for (const LocalDonor& d : donors.locals) {
            if (d.slot == load.slot()) continue;
            if (!descriptor_compatible(d.descriptor, cur, index)) continue;
            emit({replace_at(load.label, {make_load(load_base_for(d.descriptor), d.slot)})}, 1,
                 "condition operand slot " + std::to_string(load.slot()) + "->" +
                     std::to_string(d.slot));
        }
    }

    void t5_force() {
        const Instruction& br = anchor();
        int pops = opcode_info(br.op).pops;
        std::vector<Instruction> drop(static_cast<std::size_t>(pops), make_insn(Op::pop));
        emit({replace_at(br.label, drop)}, std::max(1, pops), "force branch not taken");
        std::vector<Instruction> jump = drop;
        jump.push_back(make_branch(Op::goto_, br.target));
        emit({replace_at(br.label, std::move(jump))}, std::max(1, pops) + 1,
             "force branch taken");
    }

    void t6_primitive() {
        const Instruction& store = anchor();
        int implied;
        Op base = normalize_load_store(store.op, &implied);
        char from = base == Op::istore ? 'I' : base == Op::lstore ? 'J'
                    : base == Op::fstore ? 'F' : 'D';
        struct Conv { char from, to; Op op; };
        static const Conv kConvs[] = {
            {'I', 'J', Op::i2l}, {'I', 'F', Op::i2f}, {'I', 'D', Op::i2d},
            {'J', 'I', Op::l2i}, {'J', 'F', Op::l2f}, {'J', 'D', Op::l2d},
            {'F', 'I', Op::f2i}, {'F', 'J', Op::f2l}, {'F', 'D', Op::f2d},
            {'D', 'I', Op::d2i}, {'D', 'J', Op::d2l}, {'D', 'F', Op::d2f},
        };
        for (const LocalDonor& d : donors.locals) {
            if (d.slot == store.slot()) continue;
            if (d.descriptor.size() != 1) continue;
            char to = d.descriptor[0];
            if (to == 'B' || to == 'S' || to == 'C' || to == 'Z') to = 'I';
            for (const Conv& c : kConvs) {
                if (c.from != from || c.to != to) continue;
                std::vector<Instruction> repl = {
                    make_insn(c.op), make_store(store_base_for(d.descriptor), d.slot)};
                emit({replace_at(store.label, std::move(repl))}, 2,
                     std::string("store retype ") + from + "->" + to);
            }
        }
    }

    void t6_cast_type() {
        const Instruction& cast = anchor();
        std::string cur = cf.pool.class_name(cast.cp_index);
        const auto& slots = cf.pool.slots();
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (donor_budget <= 0) break;
            if (slots[i].tag != CpTag::Class) continue;
            std::string cls = cf.pool.class_name(static_cast<u2>(i + 1));
            if (cls == cur || cls.starts_with("[")) continue;
            // Narrowing keeps downstream uses verifiable.
            if (!index.is_subclass_of(cls, cur)) continue;
            emit({replace_at(cast.label, {make_cp_insn(Op::checkcast,
                                                       static_cast<u2>(i + 1))})},
                 1, "cast type " + cur + "->" + cls);
        }
    }

    void t7_bool() {
        const Instruction& c = anchor();
        Op inverted = c.op == Op::iconst_0 ? Op::iconst_1 : Op::iconst_0;
        emit({replace_at(c.label, {make_insn(inverted)})}, 1,
             c.op == Op::iconst_0 ? "false->true" : "true->false");
    }

    struct ConstValue {
        char kind;  // I, J, F, D
        i4 i = 0;
        std::int64_t j = 0;
        float f = 0;
        double d = 0;
    };

    std::optional<ConstValue> const_value(const Instruction& insn) const {
        u1 c = static_cast<u1>(insn.op);
        if (c >= 2 && c <= 8) return ConstValue{'I', static_cast<i4>(c) - 3};
        if (insn.op == Op::lconst_0) return ConstValue{'J', 0, 0};
        if (insn.op == Op::lconst_1) return ConstValue{'J', 0, 1};
        if (c >= 11 && c <= 13) return ConstValue{'F', 0, 0, static_cast<float>(c - 11)};
        if (insn.op == Op::dconst_0) return ConstValue{'D', 0, 0, 0, 0.0};
        if (insn.op == Op::dconst_1) return ConstValue{'D', 0, 0, 0, 1.0};
        if (insn.op == Op::bipush || insn.op == Op::sipush) return ConstValue{'I', insn.imm};
        if (insn.op == Op::ldc || insn.op == Op::ldc_w) {
            const CpEntry& e = cf.pool.at(insn.cp_index);
            if (e.tag == CpTag::Integer) return ConstValue{'I', static_cast<i4>(e.data32)};
            if (e.tag == CpTag::Float) {
                ConstValue v{'F'};
                u4 bits = e.data32;
                static_assert(sizeof(float) == 4);
                std::memcpy(&v.f, &bits, 4);
                return v;
            }
            return std::nullopt;
        }
        if (insn.op == Op::ldc2_w) {
            const CpEntry& e = cf.pool.at(insn.cp_index);
            if (e.tag == CpTag::Long) {
                ConstValue v{'J'};
                v.j = static_cast<std::int64_t>(e.data64);
                return v;
            }
            if (e.tag == CpTag::Double) {
                ConstValue v{'D'};
                u8 bits = e.data64;
                std::memcpy(&v.d, &bits, 8);
                return v;
            }
        }
        return std::nullopt;
    }

    Instruction const_insn(const ConstValue& v) {
        switch (v.kind) {
            case 'I': return make_int_const(v.i, cf.pool);
            case 'J': {
                if (v.j == 0) return make_insn(Op::lconst_0);
                if (v.j == 1) return make_insn(Op::lconst_1);
                return make_cp_insn(Op::ldc2_w, cf.pool.add_long(v.j));
            }
            case 'F': {
                if (v.f == 0.0f) return make_insn(Op::fconst_0);
                if (v.f == 1.0f) return make_insn(Op::fconst_1);
                if (v.f == 2.0f) return make_insn(Op::fconst_2);
                return make_cp_insn(Op::ldc, cf.pool.add_float(v.f));
            }
            default: {
                if (v.d == 0.0) return make_insn(Op::dconst_0);
                if (v.d == 1.0) return make_insn(Op::dconst_1);
                return make_cp_insn(Op::ldc2_w, cf.pool.add_double(v.d));
            }
        }
    }

    void t7_numeric() {
        const Instruction& c = anchor();
        auto v = const_value(c);
        if (!v) return;
        std::vector<ConstValue> variants;
        switch (v->kind) {
            case 'I':
                variants = {{'I', v->i + 1}, {'I', v->i - 1}, {'I', -v->i}};
                break;
            case 'J':
                variants = {{'J', 0, v->j + 1}, {'J', 0, v->j - 1}, {'J', 0, -v->j}};
                break;
            case 'F':
                variants = {{'F', 0, 0, v->f + 1.0f}, {'F', 0, 0, v->f - 1.0f},
                            {'F', 0, 0, -v->f}};
                break;
            default:
                variants = {{'D', 0, 0, 0, v->d + 1.0}, {'D', 0, 0, 0, v->d - 1.0},
                            {'D', 0, 0, 0, -v->d}};
                break;
        }
        std::set<std::string> seen;
        for (const ConstValue& nv : variants) {
            std::ostringstream key;
            key << nv.kind << nv.i << "/" << nv.j << "/" << nv.f << "/" << nv.d;
            if (!seen.insert(key.str()).second) continue;
            bool same = (nv.kind == 'I' && nv.i == v->i) || (nv.kind == 'J' && nv.j == v->j) ||
                        (nv.kind == 'F' && nv.f == v->f) || (nv.kind == 'D' && nv.d == v->d);
            if (same) continue;
            emit({replace_at(c.label, {const_insn(nv)})}, 1, "literal mutation");
        }
    }

    void t7_context() {
        const Instruction& c = anchor();
        CpTag want;
        int width = 1;
        if (c.op == Op::ldc || c.op == Op::ldc_w) {
            want = cf.pool.at(c.cp_index).tag;
        } else if (c.op == Op::ldc2_w) {
            want = cf.pool.at(c.cp_index).tag;
            width = 2;
        } else if (is_numeric_const(c, cf.pool)) {
            u1 code = static_cast<u1>(c.op);
            if (code == 9 || code == 10) {
                want = CpTag::Long;
                width = 2;
            } else if (code >= 11 && code <= 13) {
                want = CpTag::Float;
            } else if (code == 14 || code == 15) {
                want = CpTag::Double;
                width = 2;
            } else {
                want = CpTag::Integer;
            }
        } else {
            return;
        }
        for (const LiteralDonor& d : donors.literals) {
            if (d.tag != want) continue;
            if ((c.op == Op::ldc || c.op == Op::ldc_w || c.op == Op::ldc2_w) &&
                d.cp_index == c.cp_index) {
                continue;
            }
            Instruction repl;
            if (width == 2) {
                repl = make_cp_insn(Op::ldc2_w, d.cp_index);
            } else {
                repl = make_cp_insn(Op::ldc, d.cp_index);
            }
            emit({replace_at(c.label, {repl})}, 1, "literal from context");
        }
    }

    void t8_local() {
        const Instruction& load = anchor();
        std::string cur = local_descriptor(body, load);
        if (cur.empty()) return;
        for (const LocalDonor& d : donors.locals) {
            if (d.slot == load.slot()) continue;
            if (!descriptor_compatible(d.descriptor, cur, index)) continue;
            emit({replace_at(load.label, {make_load(load_base_for(d.descriptor), d.slot)})}, 1,
                 "slot " + std::to_string(load.slot()) + "->" + std::to_string(d.slot));
        }
    }

    // Single-load donor expressions with a value compatible to `want`.
    struct Expr {
        std::vector<Instruction> seq;
        std::string what;
    };
    std::vector<Expr> donor_expressions(const std::string& want) {
        std::vector<Expr> out;
        for (const FieldDonor& f : donors.fields) {
            if (f.staticness == Staticness::Unknown) continue;
            if (!is_valid_field_descriptor(f.descriptor)) continue;
            if (!descriptor_compatible(f.descriptor, want, index)) continue;
            if (f.staticness == Staticness::Static) {
                out.push_back({{make_cp_insn(Op::getstatic,
                                             cf.pool.add_fieldref(f.owner, f.name, f.descriptor))},
                               "field " + f.name});
            } else if (!method_is_static() &&
                       index.is_subclass_of(match.method.class_name, f.owner)) {
                out.push_back({{make_load(Op::aload, 0),
                                make_cp_insn(Op::getfield,
                                             cf.pool.add_fieldref(f.owner, f.name, f.descriptor))},
                               "field " + f.name});
            }
        }
        for (const LiteralDonor& l : donors.literals) {
            std::string d;
            switch (l.tag) {
                case CpTag::Integer: d = "I"; break;
                case CpTag::Float: d = "F"; break;
                case CpTag::Long: d = "J"; break;
                case CpTag::Double: d = "D"; break;
                case CpTag::String: d = "Ljava/lang/String;"; break;
                default: continue;
            }
            if (!descriptor_compatible(d, want, index)) continue;
            if (d == "J" || d == "D") {
                out.push_back({{make_cp_insn(Op::ldc2_w, l.cp_index)}, "pool constant"});
            } else {
                out.push_back({{make_cp_insn(Op::ldc, l.cp_index)}, "pool constant"});
            }
        }
        for (const MethodDonor& m : donors.methods) {
            if (m.staticness == Staticness::Unknown) continue;
            MethodDescriptor md;
            try {
                md = parse_method_descriptor(m.descriptor);
            } catch (const InvalidDescriptor&) {
                continue;
            }
            if (!md.params.empty() || md.ret == "V") continue;
            if (!descriptor_compatible(md.ret, want, index)) continue;
            if (m.staticness == Staticness::Static) {
                out.push_back({{make_cp_insn(Op::invokestatic,
                                             cf.pool.add_methodref(m.owner, m.name,
                                                                   m.descriptor))},
                               "call " + m.name + "()"});
            } else if (!method_is_static() && !m.interface_owner &&
                       index.is_subclass_of(match.method.class_name, m.owner)) {
                out.push_back({{make_load(Op::aload, 0),
                                make_cp_insn(Op::invokevirtual,
                                             cf.pool.add_methodref(m.owner, m.name,
                                                                   m.descriptor))},
                               "call " + m.name + "()"});
            }
        }
        return out;
    }

    void t8_expression() {
        const Instruction& load = anchor();
        std::string cur = local_descriptor(body, load);
        if (cur.empty()) return;
        for (Expr& e : donor_expressions(cur)) {
            int delta = std::max(1, static_cast<int>(e.seq.size()));
            emit({replace_at(load.label, std::move(e.seq))}, delta, "variable->" + e.what);
        }
    }

    void t9_target() {
        const Instruction& call = anchor();
        const CpEntry& e = cf.pool.at(call.cp_index);
        std::string owner = cf.pool.class_name(e.index1);
        std::string name = cf.pool.utf8(cf.pool.at(e.index2).index1);
        std::string desc = cf.pool.utf8(cf.pool.at(e.index2).index2);
        MethodDescriptor cur = parse_method_descriptor(desc);
        bool is_static_call = call.op == Op::invokestatic;
        bool is_iface_call = call.op == Op::invokeinterface;
        for (const MethodDonor& d : donors.methods) {
            if (d.name == name && d.owner == owner && d.descriptor == desc) continue;
            if (d.staticness == Staticness::Unknown) continue;
            if (is_static_call != (d.staticness == Staticness::Static)) continue;
            MethodDescriptor dd;
            try {
                dd = parse_method_descriptor(d.descriptor);
            } catch (const InvalidDescriptor&) {
                continue;
            }
            if (dd.params != cur.params) continue;
            if (cur.ret == "V" || dd.ret == "V") {
                if (cur.ret != dd.ret) continue;
            } else if (!descriptor_compatible(dd.ret, cur.ret, index)) {
                continue;
            }
            if (!is_static_call) {
                // The receiver on the stack is typed by the current owner.
                if (is_iface_call != d.interface_owner) continue;
                if (d.owner != owner && !index.is_subclass_of(owner, d.owner)) continue;
            }
            Instruction repl;
            if (is_iface_call) {
                repl = make_cp_insn(Op::invokeinterface,
                                    cf.pool.add_interface_methodref(d.owner, d.name,
                                                                    d.descriptor));
                repl.imm = 1 + arg_slots(d.descriptor);
            } else if (is_static_call) {
                repl = make_cp_insn(Op::invokestatic,
                                    cf.pool.add_methodref(d.owner, d.name, d.descriptor));
            } else {
                repl = make_cp_insn(Op::invokevirtual,
                                    cf.pool.add_methodref(d.owner, d.name, d.descriptor));
            }
            emit({replace_at(call.label, {repl})}, 1,
                 name + "->" + d.name + " call target");
        }
    }

    void t9_argument(bool expression_donors) {
        std::size_t p = anchor_pos();
        const Instruction& call = body.instructions[p];
        const Instruction& prev = body.instructions[p - 1];
        const CpEntry& e = cf.pool.at(call.cp_index);
        MethodDescriptor md = parse_method_descriptor(cf.pool.utf8(cf.pool.at(e.index2).index2));
        const std::string& last = md.params.back();
        // The instruction directly feeding the last argument slot.
        if (prev.is_load()) {
            std::string got = local_descriptor(body, prev);
            if (got.empty() || !descriptor_compatible(got, last, index)) return;
        } else if (!is_numeric_const(prev, cf.pool)) {
            return;
        }
        if (!expression_donors) {
            for (const LocalDonor& d : donors.locals) {
                if (prev.is_load() && d.slot == prev.slot()) continue;
                if (!descriptor_compatible(d.descriptor, last, index)) continue;
                emit({replace_at(prev.label, {make_load(load_base_for(d.descriptor), d.slot)})},
                     1, "argument slot->" + std::to_string(d.slot));
            }
        } else {
            for (Expr& x : donor_expressions(last)) {
                int delta = std::max(1, static_cast<int>(x.seq.size()));
                emit({replace_at(prev.label, std::move(x.seq))}, delta,
                     "argument->" + x.what);
            }
        }
    }

    void t10_comparison() {
        const Instruction& br = anchor();
        static const Op kInt[] = {Op::ifeq, Op::ifne, Op::iflt, Op::ifge, Op::ifgt, Op::ifle};
        static const Op kCmp[] = {Op::if_icmpeq, Op::if_icmpne, Op::if_icmplt, Op::if_icmpge,
                                  Op::if_icmpgt, Op::if_icmple};
        auto swap_family = [&](const Op* fam, std::size_t n) {
            for (std::size_t i = 0; i < n; ++i) {
                if (fam[i] == br.op) continue;
                emit({replace_at(br.label, {make_branch(fam[i], br.target)})}, 1,
                     std::string(opcode_name(br.op)) + "->" + std::string(opcode_name(fam[i])));
            }
        };
        u1 c = static_cast<u1>(br.op);
        if (c >= 153 && c <= 158) return swap_family(kInt, 6);
        if (c >= 159 && c <= 164) return swap_family(kCmp, 6);
        if (br.op == Op::if_acmpeq || br.op == Op::if_acmpne) {
            Op other = br.op == Op::if_acmpeq ? Op::if_acmpne : Op::if_acmpeq;
            emit({replace_at(br.label, {make_branch(other, br.target)})}, 1, "acmp swap");
            return;
        }
        if (br.op == Op::ifnull || br.op == Op::ifnonnull) {
            Op other = br.op == Op::ifnull ? Op::ifnonnull : Op::ifnull;
            emit({replace_at(br.label, {make_branch(other, br.target)})}, 1, "null test swap");
        }
    }

    void t10_family(const std::vector<Op>* fam) {
        if (!fam) return;
        const Instruction& insn = anchor();
        for (Op op : *fam) {
            if (op == insn.op) continue;
            emit({replace_at(insn.label, {make_insn(op)})}, 1,
                 std::string(opcode_name(insn.op)) + "->" + std::string(opcode_name(op)));
        }
    }

    void t11_line() {
        auto geom = site_run(body, match.site_labels, match.anchor);
        if (!geom || geom->next_label == kEndLabel) return;
        Label from = body.instructions[geom->run_begin].label;
        Label to = body.instructions[geom->run_end].label;
        int d_start = depth_at_label(from);
        int d_next = depth_at_label(geom->next_label);
        if (d_start < 0 || d_next < 0) return;
        int removed = static_cast<int>(geom->run_end - geom->run_begin + 1);
        if (d_start == d_next) {
            emit({delete_range(from, to)}, removed, "remove line");
        } else if (d_next < d_start) {
            // The line consumed values pushed earlier; discard them instead.
            std::vector<Instruction> pops(static_cast<std::size_t>(d_start - d_next),
                                          make_insn(Op::pop));
            emit({replace_range(from, to, std::move(pops))}, removed, "remove line, pop leftovers");
        }
    }

    void t11_conditional() {
        const Instruction& br = anchor();
        std::size_t p = anchor_pos();
        std::size_t target = body.index_of(br.target);
        if (target == SIZE_MAX || target <= p) return;
        int pops = opcode_info(br.op).pops;
        std::vector<Instruction> drop(static_cast<std::size_t>(pops), make_insn(Op::pop));
        Label to = body.instructions[target - 1].label;
        int removed = static_cast<int>(target - p);
        emit({replace_range(br.label, to, std::move(drop))}, removed,
             "remove conditional construct");
    }

    void t12() {
        std::size_t p = anchor_pos();
        const Instruction& prev = body.instructions[p - 1];
        std::string want = parse_method_descriptor(match.method.descriptor).ret;
        if (want == "V") return;
        for (const LocalDonor& d : donors.locals) {
            if (prev.is_load() && d.slot == prev.slot()) continue;
            if (!descriptor_compatible(d.descriptor, want, index)) continue;
            emit({replace_at(prev.label, {make_load(load_base_for(d.descriptor), d.slot)})}, 1,
                 "return slot->" + std::to_string(d.slot));
        }
        for (Expr& x : donor_expressions(want)) {
            int delta = std::max(1, static_cast<int>(x.seq.size()));
            emit({replace_at(prev.label, std::move(x.seq))}, delta, "return->" + x.what);
        }
    }

    void t13(int variant) {
        const Instruction& sw = anchor();
        const SwitchOperand& op = *sw.switch_op;
        auto clone_with = [&](SwitchOperand next) {
            Instruction repl = sw;
            repl.label = kFreshLabel;
            repl.orig_pc = kNoPc;
            repl.switch_op = std::move(next);
            return repl;
        };
        if (variant == 1) {
            std::set<Label> seen;
            for (const SwitchCase& c : op.cases) {
                if (c.target == op.default_target || !seen.insert(c.target).second) continue;
                SwitchOperand next = op;
                next.default_target = c.target;
                emit({replace_at(sw.label, {clone_with(std::move(next))})}, 1,
                     "default arm retarget");
            }
        } else if (variant == 2) {
            for (std::size_t i = 0; i < op.cases.size(); ++i) {
                for (std::size_t j = i + 1; j < op.cases.size(); ++j) {
                    if (op.cases[i].target == op.cases[j].target) continue;
                    SwitchOperand next = op;
                    std::swap(next.cases[i].target, next.cases[j].target);
                    emit({replace_at(sw.label, {clone_with(std::move(next))})}, 1,
                         "case targets " + std::to_string(op.cases[i].key) + "<->" +
                             std::to_string(op.cases[j].key));
                }
            }
        } else {
            if (op.cases.empty()) return;
            std::set<i4> keys;
            for (const SwitchCase& c : op.cases) keys.insert(c.key);
            if (op.table_form) {
                // The key range is contiguous; clone at either end.
                i4 low = op.cases.front().key, high = op.cases.back().key;
                if (low > std::numeric_limits<i4>::min()) {
                    SwitchOperand next = op;
                    next.cases.insert(next.cases.begin(), {low - 1, op.cases.front().target});
                    emit({replace_at(sw.label, {clone_with(std::move(next))})}, 1,
                         "clone first case");
                }
                if (high < std::numeric_limits<i4>::max()) {
                    SwitchOperand next = op;
                    next.cases.push_back({high + 1, op.cases.back().target});
                    emit({replace_at(sw.label, {clone_with(std::move(next))})}, 1,
                         "clone last case");
                }
            } else {
                for (const SwitchCase& c : op.cases) {
                    for (i4 delta : {1, -1}) {
                        if (c.key > std::numeric_limits<i4>::max() - 1 && delta == 1) continue;
                        if (c.key < std::numeric_limits<i4>::min() + 1 && delta == -1) continue;
                        i4 key = c.key + delta;
                        if (keys.count(key)) continue;
                        SwitchOperand next = op;
                        SwitchCase clone{key, c.target};
                        auto at = std::lower_bound(
                            next.cases.begin(), next.cases.end(), clone,
                            [](const SwitchCase& a, const SwitchCase& b) { return a.key < b.key; });
                        next.cases.insert(at, clone);
                        emit({replace_at(sw.label, {clone_with(std::move(next))})}, 1,
                             "clone case " + std::to_string(c.key) + " as " + std::to_string(key));
                    }
                }
            }
        }
    }

    void t14(bool to_method) {
        const Instruction& get = anchor();
        bool is_static = get.op == Op::getstatic;
        const CpEntry& e = cf.pool.at(get.cp_index);
        std::string owner = cf.pool.class_name(e.index1);
        std::string name = cf.pool.utf8(cf.pool.at(e.index2).index1);
        std::string desc = cf.pool.utf8(cf.pool.at(e.index2).index2);
        if (!to_method) {
            for (const FieldDonor& d : donors.fields) {
                if (d.owner == owner && d.name == name && d.descriptor == desc) continue;
                if (d.staticness != (is_static ? Staticness::Static : Staticness::Instance)) {
                    continue;
                }
                if (!is_valid_field_descriptor(d.descriptor)) continue;
                if (!descriptor_compatible(d.descriptor, desc, index)) continue;
                if (!is_static && d.owner != owner && !index.is_subclass_of(owner, d.owner)) {
                    continue;
                }
                emit({replace_at(get.label,
                                 {make_cp_insn(get.op, cf.pool.add_fieldref(d.owner, d.name,
                                                                            d.descriptor))})},
                     1, "field " + name + "->" + d.name);
            }
        } else {
            for (const MethodDonor& d : donors.methods) {
                if (d.staticness != (is_static ? Staticness::Static : Staticness::Instance)) {
                    continue;
                }
                MethodDescriptor dd;
                try {
                    dd = parse_method_descriptor(d.descriptor);
                } catch (const InvalidDescriptor&) {
                    continue;
                }
                if (!dd.params.empty() || dd.ret == "V") continue;
                if (!descriptor_compatible(dd.ret, desc, index)) continue;
                if (!is_static && (d.interface_owner ||
                                   (d.owner != owner && !index.is_subclass_of(owner, d.owner)))) {
                    continue;
                }
                Instruction repl = make_cp_insn(
                    is_static ? Op::invokestatic : Op::invokevirtual,
                    cf.pool.add_methodref(d.owner, d.name, d.descriptor));
                emit({replace_at(get.label, {repl})}, 1,
                     "field " + name + "->call " + d.name + "()");
            }
        }
    }

    void run() {
        switch (match.id.category * 10 + match.id.variant) {
            case 11: t1_secure(); break;
            case 12: t1_null(); break;
            case 21: t2(1); break;
            case 22: t2(2); break;
            case 23: t2(3); break;
            case 24: t2(4); break;
            case 31: t3_invoke(); break;
            case 32: t3_return(); break;
            case 33: t3_trycatch(); break;
            case 40: t4(); break;
            case 51: t5_operand(); break;
            case 52: t5_force(); break;
            case 61: t6_primitive(); break;
            case 62: t6_cast_type(); break;
            case 71: t7_bool(); break;
            case 72: t7_numeric(); break;
            case 73: t7_context(); break;
            case 81: t8_local(); break;
            case 82: t8_expression(); break;
            case 91: t9_target(); break;
            case 92: t9_argument(false); break;
            case 93: t9_argument(true); break;
            case 101: t10_comparison(); break;
            case 102: t10_family(arith_family(anchor().op)); break;
            case 103: t10_family(logic_family(anchor().op)); break;
            case 111: t11_line(); break;
            case 112: t11_conditional(); break;
            case 120: t12(); break;
            case 131: t13(1); break;
            case 132: t13(2); break;
            case 133: t13(3); break;
            case 141: t14(false); break;
            case 142: t14(true); break;
            default: break;
        }
    }
};

}  // namespace

CodeBody apply_mutant(const CodeBody& body, const Mutant& m) {
    CodeBody out = apply_edits(body, m.edits);
    for (const ExceptionHandler& h : m.added_handlers) out.exception_handlers.push_back(h);
    if (m.new_max_locals > out.max_locals) out.max_locals = m.new_max_locals;
    return out;
}

std::vector<Mutant> generate_mutants(const TemplateMatch& match, const CodeBody& body,
                                     ClassFile& cf, const DonorPool& donors,
                                     const ClassIndex& index, const GenerateOptions& opts) {
    if (body.index_of(match.anchor) == SIZE_MAX) {
        throw NoViableMutation("match anchor no longer present in body");
    }
    Gen gen(match, body, cf, donors, index, opts);
    gen.run();
    // Stack-neutrality gate: anything the depth fixpoint rejects stays here.
    std::vector<Mutant> kept;
    for (Mutant& m : gen.out) {
        try {
            CodeBody mutated = apply_mutant(body, m);
            recompute_max_stack(mutated, cf.pool);
            kept.push_back(std::move(m));
        } catch (const EditError&) {
        } catch (const InconsistentStack&) {
        } catch (const UnencodableCode&) {
        }
    }
    return kept;
}

}  // namespace bcrepair
