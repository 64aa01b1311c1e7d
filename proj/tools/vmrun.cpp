// Deterministic test runner for class trees: interprets a bytecode subset,
// checks suite expectations, writes the repair result-file contract
// (`<test_id> <PASS|FAIL|ERROR>`), and can emit instruction-coverage traces.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <variant>

#include "CLI11.hpp"
#include "bcrepair/descriptor.hpp"
#include "bcrepair/io.hpp"
#include "bcrepair/program.hpp"

namespace {

using namespace bcrepair;

struct Obj;
using Ref = std::shared_ptr<Obj>;
using Value = std::variant<std::monostate, i4, std::int64_t, float, double, Ref>;

struct Obj {
    std::string cls;
    std::map<std::string, Value> fields;
    std::string str;           // java/lang/String payload
    std::vector<Value> array;  // array payload
    char array_kind = 0;       // I/J/F/D/L element kind
};

struct VmError {
    std::string what;  // interpreter limitation or broken code: test ERROR
};
struct Thrown {
    Ref exception;
};

struct Machine {
    ProgramModel program;
    std::map<std::pair<std::string, std::string>, Value> statics;
    std::set<std::string> initialized;
    std::set<std::string> coverage;  // "<cls> <method> <desc> <pc>" lines
    bool trace = false;
    long steps = 0;
    static constexpr long kStepLimit = 5'000'000;
    int call_depth = 0;

    Ref make_obj(const std::string& cls) {
        auto o = std::make_shared<Obj>();
        o->cls = cls;
        // Default-initialize declared instance fields along the loaded chain.
        std::string cur = cls;
        while (const ClassFile* cf = program.find(cur)) {
            for (const MemberInfo& f : cf->fields) {
                if (f.access_flags & 0x0008) continue;
                o->fields.emplace(f.name, default_value(f.descriptor));
            }
            if (cf->super_name().empty()) break;
            cur = cf->super_name();
        }
        return o;
    }

    static Value default_value(const std::string& desc) {
        switch (desc[0]) {
            case 'J': return static_cast<std::int64_t>(0);
            case 'F': return 0.0f;
            case 'D': return 0.0;
            case 'L': case '[': return Ref{};
            default: return static_cast<i4>(0);
        }
    }

    Ref make_string(const std::string& s) {
        Ref r = make_obj("java/lang/String");
        r->str = s;
        return r;
    }

    Ref make_exception(const std::string& cls, const std::string& msg) {
        Ref r = make_obj(cls);
        r->fields["message"] = make_string(msg);
        return r;
    }

    void ensure_initialized(const std::string& cls) {
        if (initialized.count(cls)) return;
        initialized.insert(cls);
        const ClassFile* cf = program.find(cls);
        if (!cf) return;
        if (!cf->super_name().empty()) ensure_initialized(cf->super_name());
        if (cf->find_method("<clinit>", "()V")) {
            invoke(cls, "<clinit>", "()V", {});
        }
    }

    // --- method execution ---

    Value invoke(const std::string& cls, const std::string& name, const std::string& desc,
                 std::vector<Value> args);

    Value invoke_virtual(const Ref& receiver, const std::string& name, const std::string& desc,
                         std::vector<Value> args) {
        if (!receiver) throw Thrown{make_exception("java/lang/NullPointerException", name)};
        std::string cur = receiver->cls;
        for (int depth = 0; depth < 64; ++depth) {
            const ClassFile* cf = program.find(cur);
            if (cf && cf->find_method(name, desc)) {
                args.insert(args.begin(), receiver);
                return invoke(cur, name, desc, std::move(args));
            }
            if (Value v; intrinsic(cur, name, desc, receiver, args, v)) return v;
            auto super = program.index().super_of(cur);
            if (!super) break;
            cur = *super;
        }
        if (Value v; intrinsic("java/lang/Object", name, desc, receiver, args, v)) return v;
        throw VmError{"unresolved virtual method " + receiver->cls + "." + name + desc};
    }

    bool intrinsic(const std::string& cls, const std::string& name, const std::string& desc,
                   const Ref& self, std::vector<Value>& args, Value& out);

    Value run_body(const ClassFile& cf, const MemberInfo& member, std::vector<Value> args);
};

i4 as_int(const Value& v) {
    if (const i4* p = std::get_if<i4>(&v)) return *p;
    throw VmError{"int value expected"};
}
std::int64_t as_long(const Value& v) {
    if (const auto* p = std::get_if<std::int64_t>(&v)) return *p;
    throw VmError{"long value expected"};
}
float as_float(const Value& v) {
    if (const float* p = std::get_if<float>(&v)) return *p;
    throw VmError{"float value expected"};
}
double as_double(const Value& v) {
    if (const double* p = std::get_if<double>(&v)) return *p;
    throw VmError{"double value expected"};
}
Ref as_ref(const Value& v) {
    if (const Ref* p = std::get_if<Ref>(&v)) return *p;
    throw VmError{"reference value expected"};
}
bool is_wide(const Value& v) {
    return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v);
}

bool Machine::intrinsic(const std::string& cls, const std::string& name, const std::string& desc,
                        const Ref& self, std::vector<Value>& args, Value& out) {
    out = std::monostate{};
    if (name == "<init>") {
        if (cls == "java/util/Random" && desc == "()V") {
            self->fields["__rng"] = static_cast<i4>(42);
            return true;
        }
        if (cls == "java/security/SecureRandom" && desc == "()V") {
            self->fields["__rng"] = static_cast<i4>(7);
            return true;
        }
        if (cls == "java/util/ArrayList" && desc == "()V") {
            self->array_kind = 'L';
            return true;
        }
        if (cls == "java/lang/Object" && desc == "()V") return true;
        // Throwable-family constructors.
        if (program.index().is_subclass_of(cls, "java/lang/Throwable") ||
            cls == "java/lang/Throwable") {
            if (desc == "()V") return true;
            if (desc == "(Ljava/lang/String;)V") {
                self->fields["message"] = args.empty() ? Value{Ref{}} : args[0];
                return true;
            }
        }
        return false;
    }
    if (cls == "java/util/Random" || cls == "java/security/SecureRandom") {
        if (name == "nextInt" && desc == "()I") {
            out = self->fields.count("__rng") ? self->fields["__rng"] : Value{static_cast<i4>(42)};
            return true;
        }
    }
    if (cls == "java/lang/String") {
        if (name == "length" && desc == "()I") {
            out = static_cast<i4>(self->str.size());
            return true;
        }
        if (name == "isEmpty" && desc == "()Z") {
            out = static_cast<i4>(self->str.empty() ? 1 : 0);
            return true;
        }
        if (name == "equals" && desc == "(Ljava/lang/Object;)Z") {
            Ref other = std::get_if<Ref>(&args[0]) ? std::get<Ref>(args[0]) : Ref{};
            out = static_cast<i4>(other && other->cls == "java/lang/String" &&
                                          other->str == self->str
                                      ? 1
                                      : 0);
            return true;
        }
        if (name == "charAt" && desc == "(I)C") {
            i4 at = as_int(args[0]);
            if (at < 0 || at >= static_cast<i4>(self->str.size())) {
                throw Thrown{make_exception("java/lang/IndexOutOfBoundsException", "charAt")};
            }
            out = static_cast<i4>(static_cast<unsigned char>(self->str[at]));
            return true;
        }
    }
    if (cls == "java/util/ArrayList" || cls == "java/util/List" ||
        cls == "java/util/Collection") {
        if (name == "add" && desc == "(Ljava/lang/Object;)Z") {
            self->array.push_back(args[0]);
            out = static_cast<i4>(1);
            return true;
        }
        if (name == "isEmpty" && desc == "()Z") {
            out = static_cast<i4>(self->array.empty() ? 1 : 0);
            return true;
        }
        if (name == "size" && desc == "()I") {
            out = static_cast<i4>(self->array.size());
            return true;
        }
        if (name == "get" && desc == "(I)Ljava/lang/Object;") {
            i4 at = as_int(args[0]);
            if (at < 0 || at >= static_cast<i4>(self->array.size())) {
                throw Thrown{make_exception("java/lang/IndexOutOfBoundsException", "get")};
            }
            out = self->array[at];
            return true;
        }
    }
    if (cls == "java/lang/Integer") {
        if (name == "intValue" && desc == "()I") {
            out = self->fields["value"];
            return true;
        }
    }
    if ((cls == "java/lang/Throwable" ||
         program.index().is_subclass_of(cls, "java/lang/Throwable")) &&
        name == "getMessage" && desc == "()Ljava/lang/String;") {
        out = self->fields.count("message") ? self->fields["message"] : Value{Ref{}};
        return true;
    }
    return false;
}

Value Machine::invoke(const std::string& cls, const std::string& name, const std::string& desc,
                      std::vector<Value> args) {
    if (++call_depth > 200) {
        --call_depth;
        throw VmError{"call depth limit"};
    }
    const ClassFile* cf = program.find(cls);
    if (!cf) {
        --call_depth;
        // Static intrinsics.
        if (cls == "java/lang/Integer" && name == "valueOf" &&
            desc == "(I)Ljava/lang/Integer;") {
            Ref r = make_obj("java/lang/Integer");
            r->fields["value"] = args[0];
            return r;
        }
        throw VmError{"unresolved class " + cls};
    }
    const MemberInfo* member = cf->find_method(name, desc);
    if (!member) {
        --call_depth;
        throw VmError{"unresolved method " + cls + "." + name + desc};
    }
    try {
        Value v = run_body(*cf, *member, std::move(args));
        --call_depth;
        return v;
    } catch (...) {
        --call_depth;
        throw;
    }
}

Value Machine::run_body(const ClassFile& cf, const MemberInfo& member, std::vector<Value> args) {
    if (!member.code) throw VmError{"abstract or native method " + member.name};
    const CodeBody* body = program.body({cf.name(), member.name, member.descriptor});
    if (!body) throw VmError{"undecodable body"};

    std::vector<Value> locals(member.code->max_locals);
    std::size_t slot = 0;
    for (Value& a : args) {
        bool wide = is_wide(a);
        if (slot >= locals.size()) throw VmError{"argument slots exceed max_locals"};
        locals[slot] = std::move(a);
        slot += wide ? 2 : 1;
    }
    std::vector<Value> stack;
    stack.reserve(member.code->max_stack + 2);

    std::map<Label, std::size_t> index;
    for (std::size_t i = 0; i < body->instructions.size(); ++i) {
        index[body->instructions[i].label] = i;
    }
    auto jump = [&](Label l) -> std::size_t {
        auto it = index.find(l);
        if (it == index.end()) throw VmError{"dangling branch target"};
        return it->second;
    };

    auto pop = [&]() -> Value {
        if (stack.empty()) throw VmError{"operand stack underflow"};
        Value v = std::move(stack.back());
        stack.pop_back();
        return v;
    };
    auto push = [&](Value v) { stack.push_back(std::move(v)); };

    const ConstantPool& pool = cf.pool;
    auto member_parts = [&](u2 cp) {
        const CpEntry& e = pool.at(cp);
        const CpEntry& nat = pool.at(e.index2);
        return std::tuple<std::string, std::string, std::string>(
            pool.class_name(e.index1), pool.utf8(nat.index1), pool.utf8(nat.index2));
    };

    std::size_t pos = 0;
    for (;;) {
        if (pos >= body->instructions.size()) throw VmError{"fell off the end of the code"};
        if (++steps > kStepLimit) throw VmError{"step limit exceeded"};
        const Instruction& insn = body->instructions[pos];
        if (trace && insn.orig_pc != kNoPc) {
            coverage.insert(cf.name() + " " + member.name + " " + member.descriptor + " " +
                            std::to_string(insn.orig_pc));
        }

        try {
            u1 c = static_cast<u1>(insn.op);
            // Loads/stores first (covers the _n shortcut forms).
            if (insn.is_load()) {
                int s = insn.slot();
                if (s < 0 || static_cast<std::size_t>(s) >= locals.size()) {
                    throw VmError{"local out of range"};
                }
                push(locals[s]);
                ++pos;
                continue;
            }
            if (insn.is_store()) {
                int s = insn.slot();
                if (s < 0 || static_cast<std::size_t>(s) >= locals.size()) {
                    throw VmError{"local out of range"};
                }
                locals[s] = pop();
                ++pos;
                continue;
            }

            switch (insn.op) {
                case Op::nop: break;
                case Op::aconst_null: push(Ref{}); break;
                case Op::iconst_m1: case Op::iconst_0: case Op::iconst_1: case Op::iconst_2:
                case Op::iconst_3: case Op::iconst_4: case Op::iconst_5:
                    push(static_cast<i4>(c) - 3);
                    break;
                case Op::lconst_0: push(static_cast<std::int64_t>(0)); break;
                case Op::lconst_1: push(static_cast<std::int64_t>(1)); break;
                case Op::fconst_0: push(0.0f); break;
                case Op::fconst_1: push(1.0f); break;
                case Op::fconst_2: push(2.0f); break;
                case Op::dconst_0: push(0.0); break;
                case Op::dconst_1: push(1.0); break;
                case Op::bipush: case Op::sipush: push(static_cast<i4>(insn.imm)); break;
                case Op::ldc: case Op::ldc_w: {
                    const CpEntry& e = pool.at(insn.cp_index);
                    if (e.tag == CpTag::Integer) {
                        push(static_cast<i4>(e.data32));
                    } else if (e.tag == CpTag::Float) {
                        float f;
                        u4 bits = e.data32;
                        std::memcpy(&f, &bits, 4);
                        push(f);
                    } else if (e.tag == CpTag::String) {
                        push(make_string(pool.utf8(e.index1)));
                    } else {
                        throw VmError{"ldc of unsupported constant"};
                    }
                    break;
                }
                case Op::ldc2_w: {
                    const CpEntry& e = pool.at(insn.cp_index);
                    if (e.tag == CpTag::Long) {
                        push(static_cast<std::int64_t>(e.data64));
                    } else {
                        double d;
                        u8 bits = e.data64;
                        std::memcpy(&d, &bits, 8);
                        push(d);
                    }
                    break;
                }

                case Op::iaload: case Op::baload: case Op::caload: case Op::saload:
                case Op::laload: case Op::faload: case Op::daload: case Op::aaload: {
                    i4 at = as_int(pop());
                    Ref arr = as_ref(pop());
                    if (!arr) throw Thrown{make_exception("java/lang/NullPointerException",
                                                          "array load")};
                    if (at < 0 || at >= static_cast<i4>(arr->array.size())) {
                        throw Thrown{make_exception(
                            "java/lang/ArrayIndexOutOfBoundsException", std::to_string(at))};
                    }
                    push(arr->array[at]);
                    break;
                }
                case Op::iastore: case Op::bastore: case Op::castore: case Op::sastore:
                case Op::lastore: case Op::fastore: case Op::dastore: case Op::aastore: {
                    Value v = pop();
                    i4 at = as_int(pop());
                    Ref arr = as_ref(pop());
                    if (!arr) throw Thrown{make_exception("java/lang/NullPointerException",
                                                          "array store")};
                    if (at < 0 || at >= static_cast<i4>(arr->array.size())) {
                        throw Thrown{make_exception(
                            "java/lang/ArrayIndexOutOfBoundsException", std::to_string(at))};
                    }
                    arr->array[at] = std::move(v);
                    break;
                }

                case Op::pop: pop(); break;
                case Op::pop2: {
                    Value v = pop();
                    if (!is_wide(v)) pop();
                    break;
                }
                case Op::dup: {
                    Value v = pop();
                    push(v);
                    push(v);
                    break;
                }
                case Op::dup_x1: {
                    Value v1 = pop(), v2 = pop();
                    push(v1);
                    push(v2);
                    push(v1);
                    break;
                }
                case Op::dup2: {
                    Value v1 = pop();
                    if (is_wide(v1)) {
                        push(v1);
                        push(v1);
                    } else {
                        Value v2 = pop();
                        push(v2);
                        push(v1);
                        push(v2);
                        push(v1);
                    }
                    break;
                }
                case Op::swap: {
                    Value v1 = pop(), v2 = pop();
                    push(v1);
                    push(v2);
                    break;
                }

#define BIN_INT(opname, expr)                                           \
    case Op::opname: {                                                  \
        i4 b = as_int(pop()), a = as_int(pop());                        \
        (void)a; (void)b;                                               \
        push(static_cast<i4>(expr));                                    \
        break;                                                          \
    }
                BIN_INT(iadd, a + b)
                BIN_INT(isub, a - b)
                BIN_INT(imul, a * b)
                BIN_INT(iand, a & b)
                BIN_INT(ior, a | b)
                BIN_INT(ixor, a ^ b)
                BIN_INT(ishl, a << (b & 31))
                BIN_INT(ishr, a >> (b & 31))
                BIN_INT(iushr, static_cast<i4>(static_cast<u4>(a) >> (b & 31)))
#undef BIN_INT
                case Op::idiv: case Op::irem: {
                    i4 b = as_int(pop()), a = as_int(pop());
                    if (b == 0) {
                        throw Thrown{make_exception("java/lang/ArithmeticException",
                                                    "/ by zero")};
                    }
                    push(insn.op == Op::idiv ? a / b : a % b);
                    break;
                }
                case Op::ineg: push(-as_int(pop())); break;

#define BIN_LONG(opname, expr)                                          \
    case Op::opname: {                                                  \
        std::int64_t b = as_long(pop()), a = as_long(pop());            \
        (void)a; (void)b;                                               \
        push(static_cast<std::int64_t>(expr));                          \
        break;                                                          \
    }
                BIN_LONG(ladd, a + b)
                BIN_LONG(lsub, a - b)
                BIN_LONG(lmul, a * b)
                BIN_LONG(land, a & b)
                BIN_LONG(lor, a | b)
                BIN_LONG(lxor, a ^ b)
#undef BIN_LONG
                case Op::ldiv_: case Op::lrem: {
                    std::int64_t b = as_long(pop()), a = as_long(pop());
                    if (b == 0) {
                        throw Thrown{make_exception("java/lang/ArithmeticException",
                                                    "/ by zero")};
                    }
                    push(insn.op == Op::ldiv_ ? a / b : a % b);
                    break;
                }
                case Op::lneg: push(-as_long(pop())); break;
                case Op::lshl: {
                    i4 b = as_int(pop());
                    push(as_long(pop()) << (b & 63));
                    break;
                }
                case Op::lshr: {
                    i4 b = as_int(pop());
                    push(as_long(pop()) >> (b & 63));
                    break;
                }
                case Op::lushr: {
                    i4 b = as_int(pop());
                    push(static_cast<std::int64_t>(static_cast<u8>(as_long(pop())) >> (b & 63)));
                    break;
                }

                case Op::fadd: { float b = as_float(pop()); push(as_float(pop()) + b); break; }
                case Op::fsub: { float b = as_float(pop()); push(as_float(pop()) - b); break; }
                case Op::fmul: { float b = as_float(pop()); push(as_float(pop()) * b); break; }
                case Op::fdiv: { float b = as_float(pop()); push(as_float(pop()) / b); break; }
                case Op::frem: {
                    float b = as_float(pop());
                    push(std::fmod(as_float(pop()), b));
                    break;
                }
                case Op::fneg: push(-as_float(pop())); break;
                case Op::dadd: { double b = as_double(pop()); push(as_double(pop()) + b); break; }
                case Op::dsub: { double b = as_double(pop()); push(as_double(pop()) - b); break; }
                case Op::dmul: { double b = as_double(pop()); push(as_double(pop()) * b); break; }
                case Op::ddiv: { double b = as_double(pop()); push(as_double(pop()) / b); break; }
                case Op::drem: {
                    double b = as_double(pop());
                    push(std::fmod(as_double(pop()), b));
                    break;
                }
                case Op::dneg: push(-as_double(pop())); break;

                case Op::iinc:
                    locals[insn.local] = as_int(locals[insn.local]) + insn.imm;
                    break;

                case Op::i2l: push(static_cast<std::int64_t>(as_int(pop()))); break;
                case Op::i2f: push(static_cast<float>(as_int(pop()))); break;
                case Op::i2d: push(static_cast<double>(as_int(pop()))); break;
                case Op::l2i: push(static_cast<i4>(as_long(pop()))); break;
                case Op::l2f: push(static_cast<float>(as_long(pop()))); break;
                case Op::l2d: push(static_cast<double>(as_long(pop()))); break;
                case Op::f2i: push(static_cast<i4>(as_float(pop()))); break;
                case Op::f2l: push(static_cast<std::int64_t>(as_float(pop()))); break;
                case Op::f2d: push(static_cast<double>(as_float(pop()))); break;
                case Op::d2i: push(static_cast<i4>(as_double(pop()))); break;
                case Op::d2l: push(static_cast<std::int64_t>(as_double(pop()))); break;
                case Op::d2f: push(static_cast<float>(as_double(pop()))); break;
                case Op::i2b: push(static_cast<i4>(static_cast<i1>(as_int(pop())))); break;
                case Op::i2c: push(static_cast<i4>(static_cast<u2>(as_int(pop())))); break;
                case Op::i2s: push(static_cast<i4>(static_cast<i2>(as_int(pop())))); break;

                case Op::lcmp: {
                    std::int64_t b = as_long(pop()), a = as_long(pop());
                    push(static_cast<i4>(a < b ? -1 : a > b ? 1 : 0));
                    break;
                }
                case Op::fcmpl: case Op::fcmpg: {
                    float b = as_float(pop()), a = as_float(pop());
                    if (std::isnan(a) || std::isnan(b)) {
                        push(static_cast<i4>(insn.op == Op::fcmpg ? 1 : -1));
                    } else {
                        push(static_cast<i4>(a < b ? -1 : a > b ? 1 : 0));
                    }
                    break;
                }
                case Op::dcmpl: case Op::dcmpg: {
                    double b = as_double(pop()), a = as_double(pop());
                    if (std::isnan(a) || std::isnan(b)) {
                        push(static_cast<i4>(insn.op == Op::dcmpg ? 1 : -1));
                    } else {
                        push(static_cast<i4>(a < b ? -1 : a > b ? 1 : 0));
                    }
                    break;
                }

                case Op::ifeq: case Op::ifne: case Op::iflt: case Op::ifge:
                case Op::ifgt: case Op::ifle: {
                    i4 v = as_int(pop());
                    bool take = insn.op == Op::ifeq   ? v == 0
                                : insn.op == Op::ifne ? v != 0
                                : insn.op == Op::iflt ? v < 0
                                : insn.op == Op::ifge ? v >= 0
                                : insn.op == Op::ifgt ? v > 0
                                                      : v <= 0;
                    if (take) {
                        pos = jump(insn.target);
                        continue;
                    }
                    break;
                }
                case Op::if_icmpeq: case Op::if_icmpne: case Op::if_icmplt:
                case Op::if_icmpge: case Op::if_icmpgt: case Op::if_icmple: {
                    i4 b = as_int(pop()), a = as_int(pop());
                    bool take = insn.op == Op::if_icmpeq   ? a == b
                                : insn.op == Op::if_icmpne ? a != b
                                : insn.op == Op::if_icmplt ? a < b
                                : insn.op == Op::if_icmpge ? a >= b
                                : insn.op == Op::if_icmpgt ? a > b
                                                           : a <= b;
                    if (take) {
                        pos = jump(insn.target);
                        continue;
                    }
                    break;
                }
                case Op::if_acmpeq: case Op::if_acmpne: {
                    Ref b = as_ref(pop()), a = as_ref(pop());
                    bool eq = a.get() == b.get();
                    if ((insn.op == Op::if_acmpeq) == eq) {
                        pos = jump(insn.target);
                        continue;
                    }
                    break;
                }
                case Op::ifnull: case Op::ifnonnull: {
                    Ref v = as_ref(pop());
                    if ((insn.op == Op::ifnull) == (v == nullptr)) {
                        pos = jump(insn.target);
                        continue;
                    }
                    break;
                }
                case Op::goto_: case Op::goto_w:
                    pos = jump(insn.target);
                    continue;

                case Op::tableswitch: case Op::lookupswitch: {
                    i4 key = as_int(pop());
                    Label target = insn.switch_op->default_target;
                    for (const SwitchCase& sc : insn.switch_op->cases) {
                        if (sc.key == key) {
                            target = sc.target;
                            break;
                        }
                    }
                    pos = jump(target);
                    continue;
                }

                case Op::ireturn: case Op::lreturn: case Op::freturn: case Op::dreturn:
                case Op::areturn:
                    return pop();
                case Op::return_:
                    return std::monostate{};

                case Op::getstatic: {
                    auto [owner, fname, fdesc] = member_parts(insn.cp_index);
                    ensure_initialized(owner);
                    auto key = std::make_pair(owner, fname);
                    if (!statics.count(key)) statics[key] = default_value(fdesc);
                    push(statics[key]);
                    break;
                }
                case Op::putstatic: {
                    auto [owner, fname, fdesc] = member_parts(insn.cp_index);
                    ensure_initialized(owner);
                    statics[{owner, fname}] = pop();
                    break;
                }
                case Op::getfield: {
                    auto [owner, fname, fdesc] = member_parts(insn.cp_index);
                    Ref obj = as_ref(pop());
                    if (!obj) throw Thrown{make_exception("java/lang/NullPointerException",
                                                          fname)};
                    if (!obj->fields.count(fname)) obj->fields[fname] = default_value(fdesc);
                    push(obj->fields[fname]);
                    break;
                }
                case Op::putfield: {
                    auto [owner, fname, fdesc] = member_parts(insn.cp_index);
                    Value v = pop();
                    Ref obj = as_ref(pop());
                    if (!obj) throw Thrown{make_exception("java/lang/NullPointerException",
                                                          fname)};
                    obj->fields[fname] = std::move(v);
                    break;
                }

                case Op::invokevirtual: case Op::invokeinterface: {
                    auto [owner, mname, mdesc] = member_parts(insn.cp_index);
                    MethodDescriptor md = parse_method_descriptor(mdesc);
                    std::vector<Value> args(md.params.size());
                    for (std::size_t i = md.params.size(); i-- > 0;) args[i] = pop();
                    Ref recv = as_ref(pop());
                    Value v = invoke_virtual(recv, mname, mdesc, std::move(args));
                    if (md.ret != "V") push(std::move(v));
                    break;
                }
                case Op::invokespecial: {
                    auto [owner, mname, mdesc] = member_parts(insn.cp_index);
                    MethodDescriptor md = parse_method_descriptor(mdesc);
                    std::vector<Value> args(md.params.size());
                    for (std::size_t i = md.params.size(); i-- > 0;) args[i] = pop();
                    Ref recv = as_ref(pop());
                    if (!recv) throw Thrown{make_exception("java/lang/NullPointerException",
                                                           mname)};
                    Value v;
                    const ClassFile* owner_cf = program.find(owner);
                    if (owner_cf && owner_cf->find_method(mname, mdesc)) {
                        args.insert(args.begin(), recv);
                        v = invoke(owner, mname, mdesc, std::move(args));
                    } else if (!intrinsic(owner, mname, mdesc, recv, args, v)) {
                        throw VmError{"unresolved special method " + owner + "." + mname + mdesc};
                    }
                    if (md.ret != "V") push(std::move(v));
                    break;
                }
                case Op::invokestatic: {
                    auto [owner, mname, mdesc] = member_parts(insn.cp_index);
                    ensure_initialized(owner);
                    MethodDescriptor md = parse_method_descriptor(mdesc);
                    std::vector<Value> args(md.params.size());
                    for (std::size_t i = md.params.size(); i-- > 0;) args[i] = pop();
                    Value v = invoke(owner, mname, mdesc, std::move(args));
                    if (md.ret != "V") push(std::move(v));
                    break;
                }

                case Op::new_: {
                    std::string cls = pool.class_name(insn.cp_index);
                    ensure_initialized(cls);
                    push(make_obj(cls));
                    break;
                }
                case Op::newarray: {
                    i4 n = as_int(pop());
                    if (n < 0) {
                        throw Thrown{make_exception("java/lang/NegativeArraySizeException",
                                                    std::to_string(n))};
                    }
                    static const char* kAtype[] = {"[Z", "[C", "[F", "[D", "[B", "[S", "[I",
                                                   "[J"};
                    Ref arr = make_obj(kAtype[insn.imm - 4]);
                    char kind = insn.imm == 6 ? 'F' : insn.imm == 7 ? 'D'
                                : insn.imm == 11 ? 'J' : 'I';
                    arr->array_kind = kind;
                    Value def = kind == 'F' ? Value{0.0f} : kind == 'D' ? Value{0.0}
                                : kind == 'J' ? Value{static_cast<std::int64_t>(0)}
                                              : Value{static_cast<i4>(0)};
                    arr->array.assign(static_cast<std::size_t>(n), def);
                    push(arr);
                    break;
                }
                case Op::anewarray: {
                    i4 n = as_int(pop());
                    if (n < 0) {
                        throw Thrown{make_exception("java/lang/NegativeArraySizeException",
                                                    std::to_string(n))};
                    }
                    std::string elem = pool.class_name(insn.cp_index);
                    Ref arr = make_obj(elem.starts_with("[") ? "[" + elem : "[L" + elem + ";");
                    arr->array_kind = 'L';
                    arr->array.assign(static_cast<std::size_t>(n), Value{Ref{}});
                    push(arr);
                    break;
                }
                case Op::arraylength: {
                    Ref arr = as_ref(pop());
                    if (!arr) throw Thrown{make_exception("java/lang/NullPointerException",
                                                          "arraylength")};
                    push(static_cast<i4>(arr->array.size()));
                    break;
                }
                case Op::athrow: {
                    Ref ex = as_ref(pop());
                    if (!ex) throw Thrown{make_exception("java/lang/NullPointerException",
                                                         "athrow")};
                    throw Thrown{ex};
                }
                case Op::checkcast: {
                    Ref v = as_ref(stack.empty() ? Value{} : stack.back());
                    std::string target = pool.class_name(insn.cp_index);
                    if (v && v->cls != target &&
                        !program.index().is_subclass_of(v->cls, target) &&
                        !program.index().is_known_interface(target)) {
                        throw Thrown{make_exception("java/lang/ClassCastException",
                                                    v->cls + " -> " + target)};
                    }
                    break;
                }
                case Op::instanceof_: {
                    Ref v = as_ref(pop());
                    std::string target = pool.class_name(insn.cp_index);
                    bool is = v && (v->cls == target ||
                                    program.index().is_subclass_of(v->cls, target));
                    push(static_cast<i4>(is ? 1 : 0));
                    break;
                }
                case Op::monitorenter: case Op::monitorexit:
                    pop();
                    break;

                default:
                    throw VmError{"unsupported opcode " + std::string(opcode_name(insn.op))};
            }
            ++pos;
        } catch (Thrown& thrown) {
            // Walk the exception table of this frame.
            bool handled = false;
            for (const ExceptionHandler& h : body->exception_handlers) {
                std::size_t from = jump(h.from);
                std::size_t to = h.to == kEndLabel ? body->instructions.size() : jump(h.to);
                if (pos < from || pos >= to) continue;
                std::string want = h.catch_type == 0 ? "java/lang/Throwable"
                                                     : pool.class_name(h.catch_type);
                const std::string& have = thrown.exception->cls;
                if (want != "java/lang/Throwable" && have != want &&
                    !program.index().is_subclass_of(have, want)) {
                    continue;
                }
                stack.clear();
                stack.push_back(thrown.exception);
                pos = jump(h.handler);
                handled = true;
                break;
            }
            if (!handled) throw;
        }
    }
}

// --- suite driver ---

struct SuiteTest {
    std::string id, cls, method, desc;
    std::vector<std::string> args;  // typed tokens
    std::string expect;
};

std::vector<SuiteTest> parse_suite(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open suite file " + path);
    std::vector<SuiteTest> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream s(line);
        std::string kw;
        s >> kw;
        if (kw != "test") throw IoError("bad suite line: " + line);
        SuiteTest t;
        s >> t.id >> t.cls >> t.method >> t.desc;
        std::string tok;
        bool saw_expect = false;
        while (s >> tok) {
            if (tok == "expect") {
                saw_expect = true;
                s >> t.expect;
                break;
            }
            t.args.push_back(tok);
        }
        if (!saw_expect || t.id.empty() || t.desc.empty()) {
            throw IoError("bad suite line (missing expect): " + line);
        }
        out.push_back(std::move(t));
    }
    return out;
}

Value parse_arg(Machine& vm, const std::string& tok) {
    if (tok == "null") return Ref{};
    if (tok.starts_with("i:")) return static_cast<i4>(std::stol(tok.substr(2)));
    if (tok.starts_with("l:")) return static_cast<std::int64_t>(std::stoll(tok.substr(2)));
    if (tok.starts_with("f:")) return std::stof(tok.substr(2));
    if (tok.starts_with("d:")) return std::stod(tok.substr(2));
    if (tok.starts_with("s:")) return vm.make_string(tok.substr(2));
    if (tok.starts_with("obj:")) return vm.make_obj(tok.substr(4));
    if (tok.starts_with("ia:")) {
        Ref arr = vm.make_obj("[I");
        arr->array_kind = 'I';
        std::istringstream s(tok.substr(3));
        std::string item;
        while (std::getline(s, item, ',')) {
            if (!item.empty()) arr->array.push_back(static_cast<i4>(std::stol(item)));
        }
        return arr;
    }
    throw IoError("bad argument token: " + tok);
}

// PASS / FAIL / ERROR per the runner contract.
std::string run_one(Machine& vm, const SuiteTest& t) {
    try {
        std::vector<Value> args;
        for (const std::string& tok : t.args) args.push_back(parse_arg(vm, tok));

        const ClassFile* cf = vm.program.find(t.cls);
        if (!cf) return "ERROR";
        const MemberInfo* m = cf->find_method(t.method, t.desc);
        if (!m) return "ERROR";
        vm.ensure_initialized(t.cls);

        Value result;
        std::string thrown_cls;
        try {
            if (m->access_flags & 0x0008) {
                result = vm.invoke(t.cls, t.method, t.desc, std::move(args));
            } else {
                Ref self = vm.make_obj(t.cls);
                if (cf->find_method("<init>", "()V")) {
                    vm.invoke(t.cls, "<init>", "()V", {self});
                }
                result = vm.invoke_virtual(self, t.method, t.desc, std::move(args));
            }
        } catch (const Thrown& th) {
            thrown_cls = th.exception->cls;
        }

        const std::string& e = t.expect;
        if (e.starts_with("throws:")) {
            std::string want = e.substr(7);
            bool ok = !thrown_cls.empty() &&
                      (thrown_cls == want ||
                       vm.program.index().is_subclass_of(thrown_cls, want));
            return ok ? "PASS" : "FAIL";
        }
        if (!thrown_cls.empty()) return "FAIL";
        if (e == "void") return "PASS";
        if (e.starts_with("i:")) {
            const i4* p = std::get_if<i4>(&result);
            return p && *p == std::stol(e.substr(2)) ? "PASS" : "FAIL";
        }
        if (e.starts_with("noti:")) {
            const i4* p = std::get_if<i4>(&result);
            return p && *p != std::stol(e.substr(5)) ? "PASS" : "FAIL";
        }
        if (e.starts_with("l:")) {
            const auto* p = std::get_if<std::int64_t>(&result);
            return p && *p == std::stoll(e.substr(2)) ? "PASS" : "FAIL";
        }
        if (e.starts_with("f:")) {
            const float* p = std::get_if<float>(&result);
            return p && *p == std::stof(e.substr(2)) ? "PASS" : "FAIL";
        }
        if (e.starts_with("d:")) {
            const double* p = std::get_if<double>(&result);
            return p && *p == std::stod(e.substr(2)) ? "PASS" : "FAIL";
        }
        if (e.starts_with("s:")) {
            const Ref* p = std::get_if<Ref>(&result);
            return p && *p && (*p)->cls == "java/lang/String" && (*p)->str == e.substr(2)
                       ? "PASS"
                       : "FAIL";
        }
        return "ERROR";
    } catch (const VmError&) {
        return "ERROR";
    } catch (const Thrown&) {
        return "ERROR";  // escaped during setup (e.g. <clinit>)
    } catch (const std::exception&) {
        return "ERROR";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic suite runner for class trees"};
    std::string suite, classes, result, trace_dir;
    app.add_option("--suite", suite, "suite definition file")->required();
    app.add_option("--classes", classes, "class tree (default $REPAIR_CLASSPATH_DIR)");
    app.add_option("--result", result, "result file (default $REPAIR_RESULT_FILE)");
    app.add_option("--trace-dir", trace_dir, "write per-test coverage traces here");
    CLI11_PARSE(app, argc, argv);

    if (classes.empty()) {
        const char* env = getenv("REPAIR_CLASSPATH_DIR");
        if (env) classes = env;
    }
    if (result.empty()) {
        const char* env = getenv("REPAIR_RESULT_FILE");
        if (env) result = env;
    }
    if (classes.empty() || result.empty()) {
        std::fprintf(stderr, "vmrun: class dir and result file required\n");
        return 2;
    }

    try {
        std::vector<SuiteTest> tests = parse_suite(suite);
        std::ostringstream results;
        for (const SuiteTest& t : tests) {
            // Fresh machine per test: deterministic, no cross-test state.
            Machine vm;
            vm.program.load_dir(classes);
            vm.trace = !trace_dir.empty();
            std::string verdict = run_one(vm, t);
            results << t.id << " " << verdict << "\n";
            if (!trace_dir.empty()) {
                std::filesystem::create_directories(trace_dir);
                std::ostringstream body;
                body << "test " << t.id << " " << (verdict == "PASS" ? "PASS" : "FAIL") << "\n";
                for (const std::string& line : vm.coverage) body << line << "\n";
                write_text_file(trace_dir + "/" + t.id + ".trace", body.str());
            }
        }
        write_text_file(result, results.str());
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "vmrun: %s\n", e.what());
        return 2;
    }
}
