#include "bcrepair/frames.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>

#include "bcrepair/descriptor.hpp"

namespace bcrepair {

namespace {

constexpr const char* kObject = "java/lang/Object";
constexpr const char* kThrowable = "java/lang/Throwable";

// Internal verification value; Object carries the resolved name so frames
// from different pools compare structurally.
struct VT {
    VKind kind = VKind::Top;
    std::string cls;     // Object: class or array descriptor name
    Label site = 0;      // Uninitialized
    bool operator==(const VT&) const = default;
};

VT vt_top() { return {}; }
VT vt_int() { return {VKind::Int, "", 0}; }
VT vt_float() { return {VKind::Float, "", 0}; }
VT vt_long() { return {VKind::Long, "", 0}; }
VT vt_double() { return {VKind::Double, "", 0}; }
VT vt_null() { return {VKind::Null, "", 0}; }
VT vt_object(std::string cls) { return {VKind::Object, std::move(cls), 0}; }
VT vt_uninit(Label site) { return {VKind::Uninitialized, "", site}; }
VT vt_uninit_this() { return {VKind::UninitializedThis, "", 0}; }

bool cat2(const VT& v) { return v.kind == VKind::Long || v.kind == VKind::Double; }
bool is_ref(const VT& v) {
    return v.kind == VKind::Null || v.kind == VKind::Object ||
           v.kind == VKind::Uninitialized || v.kind == VKind::UninitializedThis;
}

VT vt_of_descriptor(std::string_view d) {
    switch (d[0]) {
        case 'B': case 'C': case 'I': case 'S': case 'Z': return vt_int();
        case 'F': return vt_float();
        case 'J': return vt_long();
        case 'D': return vt_double();
        case '[': return vt_object(std::string(d));
        case 'L': return vt_object(class_of_descriptor(d));
        default: throw FrameRegenerationFailed("bad descriptor in frame computation");
    }
}

using Entries = std::vector<VT>;  // frame-record form: cat2 = one entry

struct State {
    std::vector<VT> locals;  // slot form: cat2 = value slot + Top slot
    Entries stack;
    bool operator==(const State&) const = default;
};

Entries locals_to_entries(const std::vector<VT>& slots) {
    Entries out;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        out.push_back(slots[i]);
        if (cat2(slots[i])) ++i;  // implicit Top slot
    }
    while (!out.empty() && out.back().kind == VKind::Top) out.pop_back();
    return out;
}

class FrameEngine {
public:
    FrameEngine(const CodeBody& body, const ConstantPool& pool, const MethodContext& ctx)
        : body_(body), pool_(pool), ctx_(ctx) {
        for (std::size_t i = 0; i < body.instructions.size(); ++i) {
            index_.emplace(body.instructions[i].label, i);
        }
    }

    // Runs the fixpoint; fills states_ and reached_.
    void run() {
        std::size_t n = body_.instructions.size();
        states_.assign(n, std::nullopt);
        reached_.assign(n, false);
        merge_into(0, initial_state());
        while (!work_.empty()) {
            std::size_t pos = work_.front();
            work_.pop_front();
            step(pos);
        }
    }

    State initial_state() const {
        State s;
        if (!ctx_.is_static) {
            s.locals.push_back(ctx_.method_name == "<init>" ? vt_uninit_this()
                                                            : vt_object(ctx_.class_name));
        }
        for (const std::string& p : parse_method_descriptor(ctx_.descriptor).params) {
            VT v = vt_of_descriptor(p);
            s.locals.push_back(v);
            if (cat2(v)) s.locals.push_back(vt_top());
        }
        if (s.locals.size() > body_.max_locals) {
            throw FrameRegenerationFailed("parameters exceed max_locals");
        }
        return s;
    }

    const std::vector<std::optional<State>>& states() const { return states_; }
    const std::vector<bool>& reached() const { return reached_; }

private:
    [[noreturn]] void fail(const std::string& what) const { throw FrameRegenerationFailed(what); }

    std::size_t pos_of(Label l) const {
        auto it = index_.find(l);
        if (it == index_.end()) fail("unresolved label");
        return it->second;
    }

    VT merge_local(const VT& a, const VT& b) const {
        if (a == b) return a;
        if (a.kind == VKind::Null && b.kind == VKind::Object) return b;
        if (b.kind == VKind::Null && a.kind == VKind::Object) return a;
        if (a.kind == VKind::Object && b.kind == VKind::Object) {
            return vt_object(ctx_.index ? ctx_.index->common_super(a.cls, b.cls) : kObject);
        }
        return vt_top();
    }

    VT merge_stack_entry(const VT& a, const VT& b) const {
        if (a == b) return a;
        if (a.kind == VKind::Null && b.kind == VKind::Object) return b;
        if (b.kind == VKind::Null && a.kind == VKind::Object) return a;
        if (a.kind == VKind::Object && b.kind == VKind::Object) {
            return vt_object(ctx_.index ? ctx_.index->common_super(a.cls, b.cls) : kObject);
        }
        fail("incompatible operand stack merge");
    }

    void merge_into(std::size_t pos, const State& incoming) {
        if (!states_[pos]) {
            states_[pos] = incoming;
            work_.push_back(pos);
            return;
        }
        State& cur = *states_[pos];
        if (cur.stack.size() != incoming.stack.size()) fail("stack height mismatch at merge");
        State merged;
        std::size_t nl = std::max(cur.locals.size(), incoming.locals.size());
        merged.locals.resize(nl, vt_top());
        for (std::size_t i = 0; i < nl; ++i) {
            VT a = i < cur.locals.size() ? cur.locals[i] : vt_top();
            VT b = i < incoming.locals.size() ? incoming.locals[i] : vt_top();
            merged.locals[i] = merge_local(a, b);
        }
        // A category-2 value whose pair slot degraded is itself invalid.
        for (std::size_t i = 0; i < merged.locals.size(); ++i) {
            if (cat2(merged.locals[i]) &&
                (i + 1 >= merged.locals.size() || merged.locals[i + 1].kind != VKind::Top)) {
                merged.locals[i] = vt_top();
            }
        }
        merged.stack.reserve(cur.stack.size());
        for (std::size_t i = 0; i < cur.stack.size(); ++i) {
            merged.stack.push_back(merge_stack_entry(cur.stack[i], incoming.stack[i]));
        }
        if (merged == cur) return;
        cur = std::move(merged);
        work_.push_back(pos);
    }

    // --- transfer helpers ---

    static VT pop(State& s) {
        if (s.stack.empty()) throw FrameRegenerationFailed("operand stack underflow");
        VT v = s.stack.back();
        s.stack.pop_back();
        return v;
    }
    VT pop_kind(State& s, VKind k) const {
        VT v = pop(s);
        if (v.kind != k) fail("operand kind mismatch");
        return v;
    }
    VT pop_ref(State& s) const {
        VT v = pop(s);
        if (!is_ref(v)) fail("reference expected on stack");
        return v;
    }
    static void push(State& s, VT v) { s.stack.push_back(std::move(v)); }

    VT local_at(const State& s, u2 slot) const {
        if (slot >= s.locals.size()) fail("local slot read out of range");
        return s.locals[slot];
    }
    void set_local(State& s, u2 slot, const VT& v) const {
        std::size_t need = slot + (cat2(v) ? 2u : 1u);
        if (need > body_.max_locals) fail("local slot write beyond max_locals");
        if (s.locals.size() < need) s.locals.resize(need, vt_top());
        // Overwriting the second slot of a category-2 value kills the value.
        if (slot > 0 && cat2(s.locals[slot - 1])) s.locals[slot - 1] = vt_top();
        s.locals[slot] = v;
        if (cat2(v)) s.locals[slot + 1] = vt_top();
    }

    bool ref_assignable(const VT& v, const std::string& target_cls) const {
        if (v.kind == VKind::Null) return true;
        if (v.kind != VKind::Object) return false;
        if (target_cls == kObject || v.cls == target_cls) return true;
        if (!ctx_.index) return true;
        if (ctx_.index->is_known_interface(target_cls)) return true;  // deferred to runtime
        if (target_cls.starts_with("[") || v.cls.starts_with("[")) {
            return target_cls == v.cls || target_cls == kObject;
        }
        if (ctx_.index->is_subclass_of(v.cls, target_cls)) return true;
        // Unknown chains: stay lenient, matching the runtime-deferred checks.
        return !ctx_.index->super_of(v.cls).has_value() &&
               ctx_.index->find(target_cls) == nullptr &&
               !ctx_.index->super_of(target_cls).has_value();
    }

    void pop_value_of(State& s, std::string_view desc) const {
        VT v = pop(s);
        VT want = vt_of_descriptor(desc);
        if (want.kind == VKind::Object) {
            if (!is_ref(v)) fail("reference argument expected");
            if (v.kind == VKind::Object || v.kind == VKind::Null) {
                if (!ref_assignable(v, want.cls) && !want.cls.starts_with("[")) {
                    fail("argument not assignable to " + want.cls);
                }
            } else {
                fail("uninitialized value used as argument");
            }
        } else if (v.kind != want.kind) {
            fail("primitive argument kind mismatch");
        }
    }

    std::string member_class(u2 cp) const { return pool_.class_name(pool_.at(cp).index1); }
    std::string member_name(u2 cp) const {
        return pool_.utf8(pool_.at(pool_.at(cp).index2).index1);
    }
    std::string member_desc(u2 cp) const {
        return pool_.utf8(pool_.at(pool_.at(cp).index2).index2);
    }

    void initialize(State& s, const VT& receiver, const std::string& cls) const {
        VT fresh = vt_object(cls);
        for (VT& v : s.locals) {
            if (v == receiver) v = fresh;
        }
        for (VT& v : s.stack) {
            if (v == receiver) v = fresh;
        }
    }

    void step(std::size_t pos) {
        reached_[pos] = true;
        const Instruction& insn = body_.instructions[pos];
        State s = *states_[pos];

        // Exception edges see the state at the start of the instruction.
        for (const ExceptionHandler& h : body_.exception_handlers) {
            std::size_t from = pos_of(h.from);
            std::size_t to = h.to == kEndLabel ? body_.instructions.size() : pos_of(h.to);
            if (pos < from || pos >= to) continue;
            State hs;
            hs.locals = s.locals;
            hs.stack = {vt_object(h.catch_type == 0 ? kThrowable
                                                    : pool_.class_name(h.catch_type))};
            merge_into(pos_of(h.handler), hs);
        }

        transfer(insn, s);

        if (insn.switch_op) {
            merge_into(pos_of(insn.switch_op->default_target), s);
            for (const SwitchCase& c : insn.switch_op->cases) merge_into(pos_of(c.target), s);
            return;
        }
        if (is_branch_op(insn.op)) {
            if (insn.op == Op::jsr || insn.op == Op::jsr_w) fail("jsr is not supported");
            merge_into(pos_of(insn.target), s);
            if (insn.op == Op::goto_ || insn.op == Op::goto_w) return;
        }
        if (opcode_info(insn.op).ends_flow) return;
        if (pos + 1 >= body_.instructions.size()) fail("control falls off the end of the code");
        merge_into(pos + 1, s);
    }

    void transfer(const Instruction& insn, State& s) {
        u1 c = static_cast<u1>(insn.op);
        // Constant pushes.
        if (insn.op == Op::aconst_null) return push(s, vt_null());
        if (c >= 2 && c <= 8) return push(s, vt_int());
        if (insn.op == Op::lconst_0 || insn.op == Op::lconst_1) return push(s, vt_long());
        if (c >= 11 && c <= 13) return push(s, vt_float());
        if (insn.op == Op::dconst_0 || insn.op == Op::dconst_1) return push(s, vt_double());
        if (insn.op == Op::nop) return;
        if (insn.op == Op::bipush || insn.op == Op::sipush) return push(s, vt_int());
        if (insn.op == Op::ldc || insn.op == Op::ldc_w) {
            switch (pool_.at(insn.cp_index).tag) {
                case CpTag::Integer: return push(s, vt_int());
                case CpTag::Float: return push(s, vt_float());
                case CpTag::String: return push(s, vt_object("java/lang/String"));
                case CpTag::Class: return push(s, vt_object("java/lang/Class"));
                case CpTag::MethodHandle:
                    return push(s, vt_object("java/lang/invoke/MethodHandle"));
                case CpTag::MethodType:
                    return push(s, vt_object("java/lang/invoke/MethodType"));
                default: fail("ldc of unloadable constant");
            }
        }
        if (insn.op == Op::ldc2_w) {
            CpTag t = pool_.at(insn.cp_index).tag;
            if (t == CpTag::Long) return push(s, vt_long());
            if (t == CpTag::Double) return push(s, vt_double());
            fail("ldc2_w of non-wide constant");
        }

        // Loads / stores.
        if (insn.is_load()) {
            int slot = insn.slot();
            VT v = local_at(s, static_cast<u2>(slot));
            int implied;
            Op base = normalize_load_store(insn.op, &implied);
            switch (base) {
                case Op::iload: if (v.kind != VKind::Int) fail("iload of non-int"); break;
                case Op::lload: if (v.kind != VKind::Long) fail("lload of non-long"); break;
                case Op::fload: if (v.kind != VKind::Float) fail("fload of non-float"); break;
                case Op::dload: if (v.kind != VKind::Double) fail("dload of non-double"); break;
                case Op::aload: if (!is_ref(v)) fail("aload of non-reference"); break;
                default: break;
            }
            return push(s, v);
        }
        if (insn.is_store()) {
            int slot = insn.slot();
            int implied;
            Op base = normalize_load_store(insn.op, &implied);
            VT v = pop(s);
            switch (base) {
                case Op::istore: if (v.kind != VKind::Int) fail("istore of non-int"); break;
                case Op::lstore: if (v.kind != VKind::Long) fail("lstore of non-long"); break;
                case Op::fstore: if (v.kind != VKind::Float) fail("fstore of non-float"); break;
                case Op::dstore: if (v.kind != VKind::Double) fail("dstore of non-double"); break;
                case Op::astore: if (!is_ref(v)) fail("astore of non-reference"); break;
                default: break;
            }
            return set_local(s, static_cast<u2>(slot), v);
        }

        switch (insn.op) {
            // Array element loads.
            case Op::iaload: case Op::baload: case Op::caload: case Op::saload:
                pop_kind(s, VKind::Int); pop_ref(s); return push(s, vt_int());
            case Op::laload: pop_kind(s, VKind::Int); pop_ref(s); return push(s, vt_long());
            case Op::faload: pop_kind(s, VKind::Int); pop_ref(s); return push(s, vt_float());
            case Op::daload: pop_kind(s, VKind::Int); pop_ref(s); return push(s, vt_double());
            case Op::aaload: {
                pop_kind(s, VKind::Int);
                VT a = pop_ref(s);
                if (a.kind == VKind::Null) return push(s, vt_null());
                if (a.kind != VKind::Object || a.cls.empty() || a.cls[0] != '[') {
                    fail("aaload of non-array");
                }
                std::string elem = a.cls.substr(1);
                if (elem.empty()) fail("bad array descriptor");
                if (elem[0] == 'L') return push(s, vt_object(class_of_descriptor(elem)));
                if (elem[0] == '[') return push(s, vt_object(elem));
                fail("aaload of primitive array");
            }
            // Array element stores.
            case Op::iastore: case Op::bastore: case Op::castore: case Op::sastore:
                pop_kind(s, VKind::Int); pop_kind(s, VKind::Int); pop_ref(s); return;
            case Op::lastore: pop_kind(s, VKind::Long); pop_kind(s, VKind::Int); pop_ref(s); return;
            case Op::fastore: pop_kind(s, VKind::Float); pop_kind(s, VKind::Int); pop_ref(s); return;
            case Op::dastore: pop_kind(s, VKind::Double); pop_kind(s, VKind::Int); pop_ref(s); return;
            case Op::aastore: pop_ref(s); pop_kind(s, VKind::Int); pop_ref(s); return;

            // Generic stack shuffles.
            case Op::pop:
                if (cat2(pop(s))) fail("pop of category-2 value");
                return;
            case Op::pop2: {
                VT v1 = pop(s);
                if (!cat2(v1)) {
                    if (cat2(pop(s))) fail("pop2 split a category-2 value");
                }
                return;
            }
            case Op::dup: {
                VT v1 = pop(s);
                if (cat2(v1)) fail("dup of category-2 value");
                push(s, v1); push(s, v1); return;
            }
            case Op::dup_x1: {
                VT v1 = pop(s), v2 = pop(s);
                if (cat2(v1) || cat2(v2)) fail("dup_x1 on category-2 value");
                push(s, v1); push(s, v2); push(s, v1); return;
            }
            case Op::dup_x2: {
                VT v1 = pop(s);
                if (cat2(v1)) fail("dup_x2 of category-2 value");
                VT v2 = pop(s);
                if (cat2(v2)) { push(s, v1); push(s, v2); push(s, v1); return; }
                VT v3 = pop(s);
                if (cat2(v3)) fail("dup_x2 form mismatch");
                push(s, v1); push(s, v3); push(s, v2); push(s, v1); return;
            }
            case Op::dup2: {
                VT v1 = pop(s);
                if (cat2(v1)) { push(s, v1); push(s, v1); return; }
                VT v2 = pop(s);
                if (cat2(v2)) fail("dup2 form mismatch");
                push(s, v2); push(s, v1); push(s, v2); push(s, v1); return;
            }
            case Op::dup2_x1: {
                VT v1 = pop(s);
                if (cat2(v1)) {
                    VT v2 = pop(s);
                    if (cat2(v2)) fail("dup2_x1 form mismatch");
                    push(s, v1); push(s, v2); push(s, v1); return;
                }
                VT v2 = pop(s), v3 = pop(s);
                if (cat2(v2) || cat2(v3)) fail("dup2_x1 form mismatch");
                push(s, v2); push(s, v1); push(s, v3); push(s, v2); push(s, v1); return;
            }
            case Op::dup2_x2: {
                VT v1 = pop(s);
                if (cat2(v1)) {
                    VT v2 = pop(s);
                    if (cat2(v2)) { push(s, v1); push(s, v2); push(s, v1); return; }
                    VT v3 = pop(s);
                    if (cat2(v3)) fail("dup2_x2 form mismatch");
                    push(s, v1); push(s, v3); push(s, v2); push(s, v1); return;
                }
                VT v2 = pop(s);
                if (cat2(v2)) fail("dup2_x2 form mismatch");
                VT v3 = pop(s);
                if (cat2(v3)) { push(s, v2); push(s, v1); push(s, v3); push(s, v2); push(s, v1); return; }
                VT v4 = pop(s);
                if (cat2(v4)) fail("dup2_x2 form mismatch");
                push(s, v2); push(s, v1); push(s, v4); push(s, v3); push(s, v2); push(s, v1);
                return;
            }
            case Op::swap: {
                VT v1 = pop(s), v2 = pop(s);
                if (cat2(v1) || cat2(v2)) fail("swap on category-2 value");
                push(s, v1); push(s, v2); return;
            }

            // Arithmetic / logic.
            case Op::iadd: case Op::isub: case Op::imul: case Op::idiv: case Op::irem:
            case Op::ishl: case Op::ishr: case Op::iushr: case Op::iand: case Op::ior:
            case Op::ixor:
                pop_kind(s, VKind::Int); pop_kind(s, VKind::Int); return push(s, vt_int());
            case Op::ladd: case Op::lsub: case Op::lmul: case Op::ldiv_: case Op::lrem:
            case Op::land: case Op::lor: case Op::lxor:
                pop_kind(s, VKind::Long); pop_kind(s, VKind::Long); return push(s, vt_long());
            case Op::lshl: case Op::lshr: case Op::lushr:
                pop_kind(s, VKind::Int); pop_kind(s, VKind::Long); return push(s, vt_long());
            case Op::fadd: case Op::fsub: case Op::fmul: case Op::fdiv: case Op::frem:
                pop_kind(s, VKind::Float); pop_kind(s, VKind::Float); return push(s, vt_float());
            case Op::dadd: case Op::dsub: case Op::dmul: case Op::ddiv: case Op::drem:
                pop_kind(s, VKind::Double); pop_kind(s, VKind::Double); return push(s, vt_double());
            case Op::ineg: pop_kind(s, VKind::Int); return push(s, vt_int());
            case Op::lneg: pop_kind(s, VKind::Long); return push(s, vt_long());
            case Op::fneg: pop_kind(s, VKind::Float); return push(s, vt_float());
            case Op::dneg: pop_kind(s, VKind::Double); return push(s, vt_double());
            case Op::iinc:
                if (local_at(s, insn.local).kind != VKind::Int) fail("iinc of non-int local");
                return;

            // Conversions.
            case Op::i2l: pop_kind(s, VKind::Int); return push(s, vt_long());
            case Op::i2f: pop_kind(s, VKind::Int); return push(s, vt_float());
            case Op::i2d: pop_kind(s, VKind::Int); return push(s, vt_double());
            case Op::l2i: pop_kind(s, VKind::Long); return push(s, vt_int());
            case Op::l2f: pop_kind(s, VKind::Long); return push(s, vt_float());
            case Op::l2d: pop_kind(s, VKind::Long); return push(s, vt_double());
            case Op::f2i: pop_kind(s, VKind::Float); return push(s, vt_int());
            case Op::f2l: pop_kind(s, VKind::Float); return push(s, vt_long());
            case Op::f2d: pop_kind(s, VKind::Float); return push(s, vt_double());
            case Op::d2i: pop_kind(s, VKind::Double); return push(s, vt_int());
            case Op::d2l: pop_kind(s, VKind::Double); return push(s, vt_long());
            case Op::d2f: pop_kind(s, VKind::Double); return push(s, vt_float());
            case Op::i2b: case Op::i2c: case Op::i2s:
                pop_kind(s, VKind::Int); return push(s, vt_int());

            // Comparisons.
            case Op::lcmp:
                pop_kind(s, VKind::Long); pop_kind(s, VKind::Long); return push(s, vt_int());
            case Op::fcmpl: case Op::fcmpg:
                pop_kind(s, VKind::Float); pop_kind(s, VKind::Float); return push(s, vt_int());
            case Op::dcmpl: case Op::dcmpg:
                pop_kind(s, VKind::Double); pop_kind(s, VKind::Double); return push(s, vt_int());

            // Branches (operand pops only; edges handled by the caller).
            case Op::ifeq: case Op::ifne: case Op::iflt: case Op::ifge:
            case Op::ifgt: case Op::ifle:
                pop_kind(s, VKind::Int); return;
            case Op::if_icmpeq: case Op::if_icmpne: case Op::if_icmplt:
            case Op::if_icmpge: case Op::if_icmpgt: case Op::if_icmple:
                pop_kind(s, VKind::Int); pop_kind(s, VKind::Int); return;
            case Op::if_acmpeq: case Op::if_acmpne:
                pop_ref(s); pop_ref(s); return;
            case Op::ifnull: case Op::ifnonnull:
                pop_ref(s); return;
            case Op::goto_: case Op::goto_w:
                return;
            case Op::tableswitch: case Op::lookupswitch:
                pop_kind(s, VKind::Int); return;

            // Returns.
            case Op::ireturn: pop_kind(s, VKind::Int); return;
            case Op::lreturn: pop_kind(s, VKind::Long); return;
            case Op::freturn: pop_kind(s, VKind::Float); return;
            case Op::dreturn: pop_kind(s, VKind::Double); return;
            case Op::areturn: pop_ref(s); return;
            case Op::return_: return;

            // Field access.
            case Op::getstatic: return push(s, vt_of_descriptor(member_desc(insn.cp_index)));
            case Op::putstatic: pop_value_of(s, member_desc(insn.cp_index)); return;
            case Op::getfield: {
                std::string d = member_desc(insn.cp_index);
                pop_ref(s);
                return push(s, vt_of_descriptor(d));
            }
            case Op::putfield:
                pop_value_of(s, member_desc(insn.cp_index));
                pop_ref(s);
                return;

            // Invocations.
            case Op::invokevirtual: case Op::invokespecial: case Op::invokestatic:
            case Op::invokeinterface: case Op::invokedynamic: {
                std::string desc = member_desc(insn.cp_index);
                MethodDescriptor md = parse_method_descriptor(desc);
                for (auto it = md.params.rbegin(); it != md.params.rend(); ++it) {
                    pop_value_of(s, *it);
                }
                if (insn.op != Op::invokestatic && insn.op != Op::invokedynamic) {
                    VT recv = pop_ref(s);
                    if (insn.op == Op::invokespecial && member_name(insn.cp_index) == "<init>") {
                        if (recv.kind == VKind::UninitializedThis) {
                            initialize(s, recv, ctx_.class_name);
                        } else if (recv.kind == VKind::Uninitialized) {
                            std::size_t np = pos_of(recv.site);
                            initialize(s, recv, pool_.class_name(body_.instructions[np].cp_index));
                        } else {
                            fail("constructor call on initialized value");
                        }
                    } else if (recv.kind == VKind::Uninitialized ||
                               recv.kind == VKind::UninitializedThis) {
                        fail("method call on uninitialized value");
                    }
                }
                if (md.ret != "V") push(s, vt_of_descriptor(md.ret));
                return;
            }

            // Object / array creation and checks.
            case Op::new_: return push(s, vt_uninit(insn.label));
            case Op::newarray: {
                pop_kind(s, VKind::Int);
                static const char* kAtype[] = {"[Z", "[C", "[F", "[D", "[B", "[S", "[I", "[J"};
                if (insn.imm < 4 || insn.imm > 11) fail("bad newarray type code");
                return push(s, vt_object(kAtype[insn.imm - 4]));
            }
            case Op::anewarray: {
                pop_kind(s, VKind::Int);
                std::string n = pool_.class_name(insn.cp_index);
                return push(s, vt_object(n.starts_with("[") ? "[" + n : "[L" + n + ";"));
            }
            case Op::arraylength: pop_ref(s); return push(s, vt_int());
            case Op::athrow: pop_ref(s); return;
            case Op::checkcast: {
                pop_ref(s);
                return push(s, vt_object(pool_.class_name(insn.cp_index)));
            }
            case Op::instanceof_: pop_ref(s); return push(s, vt_int());
            case Op::monitorenter: case Op::monitorexit: pop_ref(s); return;
            case Op::multianewarray: {
                for (i4 i = 0; i < insn.imm; ++i) pop_kind(s, VKind::Int);
                return push(s, vt_object(pool_.class_name(insn.cp_index)));
            }
            case Op::ret: case Op::jsr: case Op::jsr_w:
                fail("jsr/ret is not supported by frame regeneration");
            default:
                fail(std::string("unhandled opcode ") + std::string(opcode_name(insn.op)));
        }
    }

    const CodeBody& body_;
    const ConstantPool& pool_;
    const MethodContext& ctx_;
    std::unordered_map<Label, std::size_t> index_;
    std::vector<std::optional<State>> states_;
    std::vector<bool> reached_;
    std::deque<std::size_t> work_;
};

// Expanded (absolute) frame for comparisons and record building.
struct ExpandedFrame {
    Label at = 0;
    Entries locals;
    Entries stack;
};

VT vt_from_record(const VerificationType& v, const ConstantPool& pool) {
    VT out;
    out.kind = v.kind;
    if (v.kind == VKind::Object) out.cls = pool.class_name(v.cp_index);
    if (v.kind == VKind::Uninitialized) out.site = v.new_site;
    return out;
}

VerificationType vt_to_record(const VT& v, ConstantPool& pool) {
    VerificationType out;
    out.kind = v.kind;
    if (v.kind == VKind::Object) out.cp_index = pool.add_class(v.cls);
    if (v.kind == VKind::Uninitialized) out.new_site = v.site;
    return out;
}

// Applies record deltas to recover absolute frames.
std::vector<ExpandedFrame> expand_records(const std::vector<FrameRecord>& records,
                                          const Entries& initial_locals,
                                          const ConstantPool& pool) {
    std::vector<ExpandedFrame> out;
    Entries locals = initial_locals;
    for (const FrameRecord& rec : records) {
        ExpandedFrame f;
        f.at = rec.at;
        switch (rec.kind) {
            case FrameRecord::Kind::Same:
            case FrameRecord::Kind::SameExt:
                break;
            case FrameRecord::Kind::SameLocals1:
            case FrameRecord::Kind::SameLocals1Ext:
                f.stack.push_back(vt_from_record(rec.stack[0], pool));
                break;
            case FrameRecord::Kind::Chop:
                for (u1 k = 0; k < rec.chop_count && !locals.empty(); ++k) locals.pop_back();
                break;
            case FrameRecord::Kind::Append:
                for (const VerificationType& v : rec.locals) {
                    locals.push_back(vt_from_record(v, pool));
                }
                break;
            case FrameRecord::Kind::Full: {
                locals.clear();
                for (const VerificationType& v : rec.locals) {
                    locals.push_back(vt_from_record(v, pool));
                }
                for (const VerificationType& v : rec.stack) {
                    f.stack.push_back(vt_from_record(v, pool));
                }
                break;
            }
        }
        f.locals = locals;
        while (!f.locals.empty() && f.locals.back().kind == VKind::Top) f.locals.pop_back();
        out.push_back(std::move(f));
    }
    return out;
}

// Chooses compact record kinds for a sequence of absolute frames.
std::vector<FrameRecord> records_from_frames(const std::vector<ExpandedFrame>& frames,
                                             const Entries& initial_locals, ConstantPool& pool) {
    std::vector<FrameRecord> out;
    Entries prev = initial_locals;
    for (const ExpandedFrame& f : frames) {
        FrameRecord rec;
        rec.at = f.at;
        bool locals_same = f.locals == prev;
        if (locals_same && f.stack.empty()) {
            rec.kind = FrameRecord::Kind::Same;
        } else if (locals_same && f.stack.size() == 1) {
            rec.kind = FrameRecord::Kind::SameLocals1;
            rec.stack.push_back(vt_to_record(f.stack[0], pool));
        } else if (f.stack.empty() && f.locals.size() < prev.size() &&
                   prev.size() - f.locals.size() <= 3 &&
                   std::equal(f.locals.begin(), f.locals.end(), prev.begin())) {
            rec.kind = FrameRecord::Kind::Chop;
            rec.chop_count = static_cast<u1>(prev.size() - f.locals.size());
        } else if (f.stack.empty() && f.locals.size() > prev.size() &&
                   f.locals.size() - prev.size() <= 3 &&
                   std::equal(prev.begin(), prev.end(), f.locals.begin())) {
            rec.kind = FrameRecord::Kind::Append;
            for (std::size_t i = prev.size(); i < f.locals.size(); ++i) {
                rec.locals.push_back(vt_to_record(f.locals[i], pool));
            }
        } else {
            rec.kind = FrameRecord::Kind::Full;
            for (const VT& v : f.locals) rec.locals.push_back(vt_to_record(v, pool));
            for (const VT& v : f.stack) rec.stack.push_back(vt_to_record(v, pool));
        }
        prev = f.locals;
        out.push_back(std::move(rec));
    }
    return out;
}

bool uses_invokedynamic(const CodeBody& body) {
    for (const Instruction& i : body.instructions) {
        if (i.op == Op::invokedynamic) return true;
    }
    return false;
}

}  // namespace

CodeBody regenerate_frames(const CodeBody& body, ConstantPool& pool, const MethodContext& ctx) {
    if (body.instructions.empty()) {
        CodeBody out = body;
        out.frames.reset();
        return out;
    }
    FrameEngine engine(body, pool, ctx);
    engine.run();
    const auto& states = engine.states();
    const auto& reached = engine.reached();

    CodeBody out = body;
    std::size_t n = out.instructions.size();

    // Squash unreachable instructions to nop runs terminated by athrow so the
    // emitted table covers them; drop exception entries whose range died.
    bool any_dead = false;
    std::unordered_map<Label, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index.emplace(out.instructions[i].label, i);
    for (std::size_t i = 0; i < n; ++i) {
        if (reached[i]) continue;
        any_dead = true;
        Instruction& insn = out.instructions[i];
        bool last_of_run = (i + 1 == n) || reached[i + 1];
        insn.op = last_of_run ? Op::athrow : Op::nop;
        insn.wide = false;
        insn.cp_index = 0;
        insn.local = 0;
        insn.imm = 0;
        insn.target = 0;
        insn.switch_op.reset();
    }
    if (any_dead) {
        std::vector<ExceptionHandler> kept;
        for (const ExceptionHandler& h : out.exception_handlers) {
            std::size_t from = index.at(h.from);
            std::size_t to = h.to == kEndLabel ? n : index.at(h.to);
            bool live = false;
            for (std::size_t i = from; i < to && !live; ++i) live = reached[i];
            if (live && reached[index.at(h.handler)]) kept.push_back(h);
        }
        out.exception_handlers = std::move(kept);
    }

    // Emission points: jump/handler targets plus instructions that cannot be
    // fallen into.
    std::vector<bool> needs(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const Instruction& insn = out.instructions[i];
        if (insn.switch_op) {
            needs[index.at(insn.switch_op->default_target)] = true;
            for (const SwitchCase& c : insn.switch_op->cases) needs[index.at(c.target)] = true;
        } else if (is_branch_op(insn.op)) {
            needs[index.at(insn.target)] = true;
        }
        if (i > 0 && opcode_info(out.instructions[i - 1].op).ends_flow) needs[i] = true;
    }
    for (const ExceptionHandler& h : out.exception_handlers) {
        needs[index.at(h.handler)] = true;
    }

    FrameEngine probe(body, pool, ctx);
    Entries initial = locals_to_entries(probe.initial_state().locals);
    std::vector<ExpandedFrame> frames;
    for (std::size_t i = 0; i < n; ++i) {
        if (!needs[i]) continue;
        ExpandedFrame f;
        f.at = out.instructions[i].label;
        if (reached[i]) {
            const State& st = *states[i];
            f.locals = locals_to_entries(st.locals);
            f.stack = st.stack;
        } else {
            f.stack = {vt_object(kThrowable)};
        }
        frames.push_back(std::move(f));
    }
    out.frames = records_from_frames(frames, initial, pool);
    return out;
}

FrameRefreshResult refresh_frames(const CodeBody& body, ConstantPool& pool, u2 major_version,
                                  const MethodContext& ctx) {
    if (body.instructions.empty()) return {body, FrameStatus::Preserved};
    if (major_version < 50) {
        CodeBody out = body;
        out.frames.reset();
        return {out, FrameStatus::Preserved};
    }
    bool had_frames = body.frames.has_value();
    try {
        CodeBody regen = regenerate_frames(body, pool, ctx);
        bool squashed = false;
        for (std::size_t i = 0; i < body.instructions.size(); ++i) {
            if (regen.instructions[i].op != body.instructions[i].op) squashed = true;
        }
        FrameEngine probe(body, pool, ctx);
        Entries initial = locals_to_entries(probe.initial_state().locals);
        if (had_frames && !squashed) {
            auto orig = expand_records(*body.frames, initial, pool);
            auto fresh = expand_records(*regen.frames, initial, pool);
            bool equal = orig.size() == fresh.size();
            for (std::size_t i = 0; equal && i < orig.size(); ++i) {
                equal = orig[i].at == fresh[i].at && orig[i].locals == fresh[i].locals &&
                        orig[i].stack == fresh[i].stack;
            }
            if (equal) return {body, FrameStatus::Preserved};
        }
        if (!had_frames && regen.frames->empty()) return {body, FrameStatus::Preserved};
        if (regen.frames->empty()) regen.frames.reset();
        return {std::move(regen), FrameStatus::Regenerated};
    } catch (const FrameRegenerationFailed&) {
        if (ctx.allow_downgrade && !uses_invokedynamic(body)) {
            CodeBody out = body;
            out.frames.reset();
            return {out, FrameStatus::Downgraded};
        }
        throw;
    }
}

}  // namespace bcrepair
