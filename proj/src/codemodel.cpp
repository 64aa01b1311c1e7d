#include "bcrepair/codemodel.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "bcrepair/descriptor.hpp"

namespace bcrepair {

namespace {

constexpr const char* kLineNumberTable = "LineNumberTable";
constexpr const char* kLocalVariableTable = "LocalVariableTable";
constexpr const char* kStackMapTable = "StackMapTable";

struct RawInsn {
    u4 pc = 0;
    Op op = Op::nop;
    bool wide = false;
    u2 cp_index = 0;
    u2 local = 0;
    i4 imm = 0;
    i4 branch_pc = -1;  // absolute target pc
    std::optional<SwitchOperand> switch_raw;  // targets hold absolute pcs in `target`
};

class CodeScanner {
public:
    CodeScanner(const Bytes& code) : code_(code) {}

    std::vector<RawInsn> scan() {
        std::vector<RawInsn> out;
        u4 pc = 0;
        while (pc < code_.size()) {
            out.push_back(decode_one(pc, &pc));
        }
        return out;
    }

private:
    u1 byte_at(u4 pc) {
        if (pc >= code_.size()) throw MalformedCode(pc, "truncated operand");
        return code_[pc];
    }
    u2 u2_at(u4 pc) { return static_cast<u2>((byte_at(pc) << 8) | byte_at(pc + 1)); }
    u4 u4_at(u4 pc) {
        return (static_cast<u4>(byte_at(pc)) << 24) | (static_cast<u4>(byte_at(pc + 1)) << 16) |
               (static_cast<u4>(byte_at(pc + 2)) << 8) | byte_at(pc + 3);
    }
    i4 i4_at(u4 pc) { return static_cast<i4>(u4_at(pc)); }

    RawInsn decode_one(u4 pc, u4* next) {
        RawInsn r;
        r.pc = pc;
        u1 code = byte_at(pc);
        if (code == kWidePrefix) {
            r.wide = true;
            u1 sub = byte_at(pc + 1);
            r.op = static_cast<Op>(sub);
            const OpcodeInfo& info = opcode_info(sub);
            if (info.operands == OperandKind::LocalU1) {
                r.local = u2_at(pc + 2);
                *next = pc + 4;
            } else if (info.operands == OperandKind::Iinc) {
                r.local = u2_at(pc + 2);
                r.imm = static_cast<i2>(u2_at(pc + 4));
                *next = pc + 6;
            } else {
                throw MalformedCode(pc, "wide prefix on non-widenable opcode");
            }
            return r;
        }
        const OpcodeInfo& info = opcode_info(code);
        if (!info.defined) throw MalformedCode(pc, "unknown opcode " + std::to_string(code));
        r.op = static_cast<Op>(code);
        switch (info.operands) {
            case OperandKind::None:
                *next = pc + 1;
                break;
            case OperandKind::LocalU1:
                r.local = byte_at(pc + 1);
                *next = pc + 2;
                break;
            case OperandKind::Iinc:
                r.local = byte_at(pc + 1);
                r.imm = static_cast<i1>(byte_at(pc + 2));
                *next = pc + 3;
                break;
            case OperandKind::Imm1:
                r.imm = static_cast<i1>(byte_at(pc + 1));
                *next = pc + 2;
                break;
            case OperandKind::Imm2:
                r.imm = static_cast<i2>(u2_at(pc + 1));
                *next = pc + 3;
                break;
            case OperandKind::CpU1:
                r.cp_index = byte_at(pc + 1);
                *next = pc + 2;
                break;
            case OperandKind::CpU2:
                r.cp_index = u2_at(pc + 1);
                *next = pc + 3;
                break;
            case OperandKind::Branch2:
                r.branch_pc = static_cast<i4>(pc) + static_cast<i2>(u2_at(pc + 1));
                *next = pc + 3;
                break;
            case OperandKind::Branch4:
                r.branch_pc = static_cast<i4>(pc) + i4_at(pc + 1);
                *next = pc + 5;
                break;
            case OperandKind::NewArrayType:
                r.imm = byte_at(pc + 1);
                *next = pc + 2;
                break;
            case OperandKind::MultiANewArray:
                r.cp_index = u2_at(pc + 1);
                r.imm = byte_at(pc + 3);
                *next = pc + 4;
                break;
            case OperandKind::InvokeInterface:
                r.cp_index = u2_at(pc + 1);
                r.imm = byte_at(pc + 3);
                *next = pc + 5;
                break;
            case OperandKind::InvokeDynamic:
                r.cp_index = u2_at(pc + 1);
                *next = pc + 5;
                break;
            case OperandKind::TableSwitch: {
                u4 p = pc + 1 + ((4 - ((pc + 1) & 3)) & 3);
                i4 def = i4_at(p);
                i4 low = i4_at(p + 4);
                i4 high = i4_at(p + 8);
                if (low > high) throw MalformedCode(pc, "tableswitch low > high");
                std::int64_t count = static_cast<std::int64_t>(high) - low + 1;
                if (count > static_cast<std::int64_t>(code_.size())) {
                    throw MalformedCode(pc, "tableswitch entry count exceeds code size");
                }
                SwitchOperand sw;
                sw.table_form = true;
                sw.default_target = static_cast<Label>(static_cast<i4>(pc) + def);
                for (std::int64_t i = 0; i < count; ++i) {
                    i4 off = i4_at(p + 12 + static_cast<u4>(i) * 4);
                    sw.cases.push_back({static_cast<i4>(low + i),
                                        static_cast<Label>(static_cast<i4>(pc) + off)});
                }
                r.switch_raw = std::move(sw);
                *next = p + 12 + static_cast<u4>(count) * 4;
                break;
            }
            case OperandKind::LookupSwitch: {
                u4 p = pc + 1 + ((4 - ((pc + 1) & 3)) & 3);
                i4 def = i4_at(p);
                i4 npairs = i4_at(p + 4);
                if (npairs < 0 || static_cast<u4>(npairs) > code_.size()) {
                    throw MalformedCode(pc, "lookupswitch pair count out of range");
                }
                SwitchOperand sw;
                sw.table_form = false;
                sw.default_target = static_cast<Label>(static_cast<i4>(pc) + def);
                for (i4 i = 0; i < npairs; ++i) {
                    i4 key = i4_at(p + 8 + static_cast<u4>(i) * 8);
                    i4 off = i4_at(p + 12 + static_cast<u4>(i) * 8);
                    sw.cases.push_back({key, static_cast<Label>(static_cast<i4>(pc) + off)});
                }
                r.switch_raw = std::move(sw);
                *next = p + 8 + static_cast<u4>(npairs) * 8;
                break;
            }
        }
        return r;
    }

    const Bytes& code_;
};

// Reads one verification_type_info; Uninitialized offsets stay raw pcs here.
VerificationType read_vtype(ByteReader& r) {
    VerificationType v;
    u1 tag = r.read_u1();
    if (tag > 8) throw MalformedCode(0, "unknown verification type tag " + std::to_string(tag));
    v.kind = static_cast<VKind>(tag);
    if (v.kind == VKind::Object) v.cp_index = r.read_u2();
    if (v.kind == VKind::Uninitialized) v.new_site = r.read_u2();  // pc, mapped later
    return v;
}

void write_vtype(ByteWriter& w, const VerificationType& v,
                 const std::unordered_map<Label, u4>& label_pc) {
    w.write_u1(static_cast<u1>(v.kind));
    if (v.kind == VKind::Object) w.write_u2(v.cp_index);
    if (v.kind == VKind::Uninitialized) {
        auto it = label_pc.find(v.new_site);
        if (it == label_pc.end()) throw UnencodableCode("unresolved uninitialized-type label");
        w.write_u2(static_cast<u2>(it->second));
    }
}

}  // namespace

std::size_t CodeBody::index_of(Label label) const {
    for (std::size_t i = 0; i < instructions.size(); ++i) {
        if (instructions[i].label == label) return i;
    }
    return SIZE_MAX;
}

const Instruction* CodeBody::find(Label label) const {
    std::size_t i = index_of(label);
    return i == SIZE_MAX ? nullptr : &instructions[i];
}

Instruction make_insn(Op op) {
    Instruction i;
    i.op = op;
    return i;
}
Instruction make_load(Op base, u2 slot) {
    Instruction i;
    i.op = shortcut_load_store(base, slot);
    if (i.op == base) i.local = slot;
    return i;
}
Instruction make_store(Op base, u2 slot) { return make_load(base, slot); }
Instruction make_cp_insn(Op op, u2 cp_index) {
    Instruction i;
    i.op = op;
    i.cp_index = cp_index;
    return i;
}
Instruction make_branch(Op op, Label target) {
    Instruction i;
    i.op = op;
    i.target = target;
    return i;
}
Instruction make_int_const(i4 value, ConstantPool& pool) {
    Instruction i;
    if (value >= -1 && value <= 5) {
        i.op = static_cast<Op>(static_cast<int>(Op::iconst_0) + value);
    } else if (value >= -128 && value <= 127) {
        i.op = Op::bipush;
        i.imm = value;
    } else if (value >= -32768 && value <= 32767) {
        i.op = Op::sipush;
        i.imm = value;
    } else {
        i.op = Op::ldc;
        i.cp_index = pool.add_integer(value);
    }
    return i;
}

CodeBody decode_code(const CodeAttribute& attr, const ConstantPool& pool) {
    (void)pool;
    CodeBody body;
    body.max_stack = attr.max_stack;
    body.max_locals = attr.max_locals;

    std::vector<RawInsn> raw = CodeScanner(attr.code).scan();
    std::unordered_map<u4, Label> pc_to_label;
    pc_to_label.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) pc_to_label.emplace(raw[i].pc, static_cast<Label>(i));
    u4 code_len = static_cast<u4>(attr.code.size());

    auto label_at = [&](u4 pc, const char* what) -> Label {
        auto it = pc_to_label.find(pc);
        if (it == pc_to_label.end()) {
            throw MalformedCode(pc, std::string(what) + " not on an instruction boundary");
        }
        return it->second;
    };
    auto label_or_end = [&](u4 pc, const char* what) -> Label {
        if (pc == code_len) return kEndLabel;
        return label_at(pc, what);
    };

    body.instructions.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const RawInsn& r = raw[i];
        Instruction insn;
        insn.label = static_cast<Label>(i);
        insn.orig_pc = r.pc;
        insn.op = r.op;
        insn.wide = r.wide;
        insn.cp_index = r.cp_index;
        insn.local = r.local;
        insn.imm = r.imm;
        if (r.branch_pc >= 0) {
            if (r.branch_pc > static_cast<i4>(code_len)) {
                throw MalformedCode(r.pc, "branch target out of range");
            }
            insn.target = label_at(static_cast<u4>(r.branch_pc), "branch target");
        }
        if (r.switch_raw) {
            SwitchOperand sw;
            sw.table_form = r.switch_raw->table_form;
            sw.default_target = label_at(r.switch_raw->default_target, "switch default target");
            for (const SwitchCase& c : r.switch_raw->cases) {
                sw.cases.push_back({c.key, label_at(c.target, "switch case target")});
            }
            insn.switch_op = std::move(sw);
        }
        body.instructions.push_back(std::move(insn));
    }
    body.next_label = static_cast<Label>(raw.size());

    for (const ExceptionTableEntry& e : attr.exception_table) {
        ExceptionHandler h;
        h.from = label_at(e.start_pc, "exception range start");
        h.to = label_or_end(e.end_pc, "exception range end");
        h.handler = label_at(e.handler_pc, "exception handler");
        h.catch_type = e.catch_type;
        body.exception_handlers.push_back(h);
    }

    if (attr.line_numbers) {
        body.has_line_table = true;
        for (const LineNumberEntry& e : *attr.line_numbers) {
            if (e.start_pc == code_len) continue;  // entry beyond the last instruction
            body.line_table.push_back({label_at(e.start_pc, "line table entry"), e.line});
        }
    }
    if (attr.local_vars) {
        body.has_lvt = true;
        for (const LocalVariableEntry& e : *attr.local_vars) {
            LocalVarInfo v;
            v.from = label_at(e.start_pc, "local variable range start");
            v.to = label_or_end(static_cast<u4>(e.start_pc) + e.length, "local variable range end");
            v.name_index = e.name_index;
            v.descriptor_index = e.descriptor_index;
            v.index = e.index;
            if (pool.is(e.name_index, CpTag::Utf8)) v.name = pool.utf8(e.name_index);
            if (pool.is(e.descriptor_index, CpTag::Utf8)) v.descriptor = pool.utf8(e.descriptor_index);
            body.local_vars.push_back(std::move(v));
        }
    }

    bool seen_lnt = false, seen_lvt = false, seen_smt = false;
    for (const AttributeInfo& a : attr.attributes) {
        if (a.name == kLineNumberTable) {
            if (seen_lnt) throw MalformedCode(0, "duplicate LineNumberTable");
            seen_lnt = true;
            body.attr_order.push_back({SubAttrSlot::Kind::LineNumbers});
        } else if (a.name == kLocalVariableTable) {
            if (seen_lvt) throw MalformedCode(0, "duplicate LocalVariableTable");
            seen_lvt = true;
            body.attr_order.push_back({SubAttrSlot::Kind::LocalVars});
        } else if (a.name == kStackMapTable) {
            if (seen_smt) throw MalformedCode(0, "duplicate StackMapTable");
            seen_smt = true;
            body.attr_order.push_back({SubAttrSlot::Kind::StackMap});
            // Decode the frame records.
            ByteReader r{std::span<const u1>(a.bytes.data(), a.bytes.size())};
            try {
                u2 n = r.read_u2();
                std::vector<FrameRecord> records;
                records.reserve(n);
                std::int64_t offset = -1;
                for (u2 i = 0; i < n; ++i) {
                    FrameRecord rec;
                    u1 type = r.read_u1();
                    u4 delta;
                    if (type <= 63) {
                        rec.kind = FrameRecord::Kind::Same;
                        delta = type;
                    } else if (type <= 127) {
                        rec.kind = FrameRecord::Kind::SameLocals1;
                        delta = type - 64;
                        rec.stack.push_back(read_vtype(r));
                    } else if (type == 247) {
                        rec.kind = FrameRecord::Kind::SameLocals1Ext;
                        delta = r.read_u2();
                        rec.stack.push_back(read_vtype(r));
                    } else if (type >= 248 && type <= 250) {
                        rec.kind = FrameRecord::Kind::Chop;
                        rec.chop_count = static_cast<u1>(251 - type);
                        delta = r.read_u2();
                    } else if (type == 251) {
                        rec.kind = FrameRecord::Kind::SameExt;
                        delta = r.read_u2();
                    } else if (type >= 252 && type <= 254) {
                        rec.kind = FrameRecord::Kind::Append;
                        delta = r.read_u2();
                        for (int k = 0; k < type - 251; ++k) rec.locals.push_back(read_vtype(r));
                    } else if (type == 255) {
                        rec.kind = FrameRecord::Kind::Full;
                        delta = r.read_u2();
                        u2 nl = r.read_u2();
                        for (u2 k = 0; k < nl; ++k) rec.locals.push_back(read_vtype(r));
                        u2 ns = r.read_u2();
                        for (u2 k = 0; k < ns; ++k) rec.stack.push_back(read_vtype(r));
                    } else {
                        throw MalformedCode(0, "reserved stack map frame type " +
                                                   std::to_string(type));
                    }
                    offset = offset < 0 ? delta : offset + delta + 1;
                    rec.at = label_at(static_cast<u4>(offset), "stack map frame offset");
                    // Map raw Uninitialized pcs to labels.
                    for (auto* list : {&rec.locals, &rec.stack}) {
                        for (VerificationType& v : *list) {
                            if (v.kind == VKind::Uninitialized) {
                                v.new_site = label_at(v.new_site, "uninitialized-type offset");
                            }
                        }
                    }
                    records.push_back(std::move(rec));
                }
                body.frames = std::move(records);
            } catch (const ByteUnderflow&) {
                throw MalformedCode(0, "truncated StackMapTable");
            }
        } else {
            body.attr_order.push_back(
                {SubAttrSlot::Kind::Other, body.extra_attributes.size()});
            body.extra_attributes.push_back(a);
        }
    }
    return body;
}

std::optional<u2> line_of(const CodeBody& body, Label label) {
    if (!body.has_line_table || body.line_table.empty()) return std::nullopt;
    std::size_t pos = body.index_of(label);
    if (pos == SIZE_MAX) return std::nullopt;
    std::optional<u2> line;
    for (const LineEntry& e : body.line_table) {
        std::size_t epos = body.index_of(e.at);
        if (epos != SIZE_MAX && epos <= pos) line = e.line;
    }
    return line;
}

std::vector<Label> offsets_for_line(const CodeBody& body, u2 line) {
    std::vector<Label> out;
    if (!body.has_line_table || body.line_table.empty()) return out;
    // One pass: each instruction's line is the last table entry at or before it.
    std::unordered_map<Label, u2> entry_line;
    for (const LineEntry& e : body.line_table) entry_line[e.at] = e.line;
    std::optional<u2> current;
    for (const Instruction& insn : body.instructions) {
        auto it = entry_line.find(insn.label);
        if (it != entry_line.end()) current = it->second;
        if (current && *current == line) out.push_back(insn.label);
    }
    return out;
}

StackEffect stack_effect(const Instruction& insn, const ConstantPool& pool) {
    const OpcodeInfo& info = opcode_info(insn.op);
    if (info.pops != kPoly) return {info.pops, info.pushes};
    auto member_desc = [&](u2 cp) -> std::string {
        const CpEntry& e = pool.at(cp);
        return pool.utf8(pool.at(e.index2).index2);
    };
    switch (insn.op) {
        case Op::getstatic:
            return {0, slot_width(member_desc(insn.cp_index))};
        case Op::putstatic:
            return {slot_width(member_desc(insn.cp_index)), 0};
        case Op::getfield:
            return {1, slot_width(member_desc(insn.cp_index))};
        case Op::putfield:
            return {1 + slot_width(member_desc(insn.cp_index)), 0};
        case Op::invokevirtual:
        case Op::invokespecial:
        case Op::invokeinterface: {
            MethodDescriptor md = parse_method_descriptor(member_desc(insn.cp_index));
            return {1 + arg_slots(member_desc(insn.cp_index)), slot_width(md.ret)};
        }
        case Op::invokestatic:
        case Op::invokedynamic: {
            MethodDescriptor md = parse_method_descriptor(member_desc(insn.cp_index));
            return {arg_slots(member_desc(insn.cp_index)), slot_width(md.ret)};
        }
        case Op::multianewarray:
            return {insn.imm, 1};
        default:
            return {0, 0};
    }
}

namespace {
u2 depth_fixpoint(const CodeBody& body, const ConstantPool& pool, std::vector<int>* out_depths);
}

u2 recompute_max_stack(const CodeBody& body, const ConstantPool& pool) {
    return depth_fixpoint(body, pool, nullptr);
}

std::optional<std::vector<int>> stack_depths(const CodeBody& body, const ConstantPool& pool) {
    std::vector<int> depths;
    try {
        depth_fixpoint(body, pool, &depths);
    } catch (const InconsistentStack&) {
        return std::nullopt;
    } catch (const UnencodableCode&) {
        return std::nullopt;
    }
    return depths;
}

namespace {
u2 depth_fixpoint(const CodeBody& body, const ConstantPool& pool, std::vector<int>* out_depths) {
    if (out_depths) out_depths->assign(body.instructions.size(), -1);
    if (body.instructions.empty()) return 0;
    std::unordered_map<Label, std::size_t> index;
    index.reserve(body.instructions.size());
    for (std::size_t i = 0; i < body.instructions.size(); ++i) {
        index.emplace(body.instructions[i].label, i);
    }
    std::vector<int> depth_at(body.instructions.size(), -1);
    std::vector<std::pair<std::size_t, int>> work;
    work.emplace_back(0, 0);
    for (const ExceptionHandler& h : body.exception_handlers) {
        auto it = index.find(h.handler);
        if (it == index.end()) throw UnencodableCode("unresolved handler label");
        work.emplace_back(it->second, 1);
    }
    int max_depth = 0;
    auto push_succ = [&](Label label, int depth) {
        auto it = index.find(label);
        if (it == index.end()) throw UnencodableCode("unresolved branch label");
        work.emplace_back(it->second, depth);
    };
    while (!work.empty()) {
        auto [pos, depth] = work.back();
        work.pop_back();
        if (depth_at[pos] >= 0) {
            if (depth_at[pos] != depth) {
                throw InconsistentStack(body.instructions[pos].label, depth_at[pos], depth);
            }
            continue;
        }
        depth_at[pos] = depth;
        max_depth = std::max(max_depth, depth);
        const Instruction& insn = body.instructions[pos];
        StackEffect eff = stack_effect(insn, pool);
        if (depth - eff.pops < 0) {
            throw InconsistentStack(insn.label, depth, eff.pops);
        }
        int after = depth - eff.pops + eff.pushes;
        max_depth = std::max(max_depth, after);
        const OpcodeInfo& info = opcode_info(insn.op);
        if (insn.switch_op) {
            push_succ(insn.switch_op->default_target, after);
            for (const SwitchCase& c : insn.switch_op->cases) push_succ(c.target, after);
            continue;
        }
        if (is_branch_op(insn.op)) {
            push_succ(insn.target, after);
            if (insn.op == Op::jsr || insn.op == Op::jsr_w) {
                // The return address is consumed inside the subroutine; the
                // instruction after the jsr resumes at the pre-push depth.
                if (pos + 1 < body.instructions.size()) work.emplace_back(pos + 1, after - 1);
                continue;
            }
        }
        if (!info.ends_flow && pos + 1 < body.instructions.size()) {
            work.emplace_back(pos + 1, after);
        } else if (!info.ends_flow && pos + 1 == body.instructions.size()) {
            throw InconsistentStack(insn.label, after, -1);  // falls off the end
        }
    }
    if (max_depth > 65535) throw UnencodableCode("operand stack exceeds 65535 slots");
    if (out_depths) *out_depths = depth_at;
    return static_cast<u2>(max_depth);
}
}  // namespace

namespace {

Op invert_condition(Op op) {
    switch (op) {
        case Op::ifeq: return Op::ifne;
        case Op::ifne: return Op::ifeq;
        case Op::iflt: return Op::ifge;
        case Op::ifge: return Op::iflt;
        case Op::ifgt: return Op::ifle;
        case Op::ifle: return Op::ifgt;
        case Op::if_icmpeq: return Op::if_icmpne;
        case Op::if_icmpne: return Op::if_icmpeq;
        case Op::if_icmplt: return Op::if_icmpge;
        case Op::if_icmpge: return Op::if_icmplt;
        case Op::if_icmpgt: return Op::if_icmple;
        case Op::if_icmple: return Op::if_icmpgt;
        case Op::if_acmpeq: return Op::if_acmpne;
        case Op::if_acmpne: return Op::if_acmpeq;
        case Op::ifnull: return Op::ifnonnull;
        case Op::ifnonnull: return Op::ifnull;
        default: throw UnencodableCode("cannot invert non-conditional branch");
    }
}

struct Phys {
    const Instruction* src;
    Op op;
    bool wide;
    bool trampoline = false;  // inverted-cond + goto_w pair
    u4 pc = 0;
    u4 size = 0;
};

u4 phys_size(const Phys& p, u4 pc) {
    if (p.trampoline) return 8;
    const OpcodeInfo& info = opcode_info(p.op);
    switch (info.operands) {
        case OperandKind::None: return 1;
        case OperandKind::LocalU1: return p.wide ? 4u : 2u;
        case OperandKind::Iinc: return p.wide ? 6u : 3u;
        case OperandKind::Imm1: return 2;
        case OperandKind::Imm2: return 3;
        case OperandKind::CpU1: return 2;
        case OperandKind::CpU2: return 3;
        case OperandKind::Branch2: return p.op == Op::goto_w || p.op == Op::jsr_w ? 5u : 3u;
        case OperandKind::Branch4: return 5;
        case OperandKind::NewArrayType: return 2;
        case OperandKind::MultiANewArray: return 4;
        case OperandKind::InvokeInterface: return 5;
        case OperandKind::InvokeDynamic: return 5;
        case OperandKind::TableSwitch: {
            u4 pad = (4 - ((pc + 1) & 3)) & 3;
            return 1 + pad + 12 + 4 * static_cast<u4>(p.src->switch_op->cases.size());
        }
        case OperandKind::LookupSwitch: {
            u4 pad = (4 - ((pc + 1) & 3)) & 3;
            return 1 + pad + 8 + 8 * static_cast<u4>(p.src->switch_op->cases.size());
        }
    }
    return 1;
}

}  // namespace

CodeAttribute encode_code(const CodeBody& body, ConstantPool& pool) {
    // Physical plan: one entry per instruction; forms may widen.
    std::vector<Phys> plan;
    plan.reserve(body.instructions.size());
    for (const Instruction& insn : body.instructions) {
        Phys p{&insn, insn.op, insn.wide};
        const OpcodeInfo& info = opcode_info(insn.op);
        if (info.operands == OperandKind::LocalU1 && !p.wide && insn.local > 255) p.wide = true;
        if (info.operands == OperandKind::Iinc && !p.wide &&
            (insn.local > 255 || insn.imm < -128 || insn.imm > 127)) {
            p.wide = true;
        }
        if (insn.op == Op::ldc && insn.cp_index > 255) p.op = Op::ldc_w;
        plan.push_back(p);
    }

    std::unordered_map<Label, u4> label_pc;
    bool changed = true;
    while (changed) {
        changed = false;
        u4 pc = 0;
        label_pc.clear();
        for (Phys& p : plan) {
            p.pc = pc;
            p.size = phys_size(p, pc);
            label_pc[p.src->label] = pc;
            pc += p.size;
        }
        auto target_pc = [&](Label l) -> u4 {
            auto it = label_pc.find(l);
            if (it == label_pc.end()) throw UnencodableCode("unresolved label");
            return it->second;
        };
        for (Phys& p : plan) {
            if (p.trampoline || opcode_info(p.op).operands != OperandKind::Branch2) continue;
            std::int64_t disp =
                static_cast<std::int64_t>(target_pc(p.src->target)) - p.pc;
            if (disp >= -32768 && disp <= 32767) continue;
            if (p.op == Op::goto_) {
                p.op = Op::goto_w;
            } else if (p.op == Op::jsr) {
                p.op = Op::jsr_w;
            } else {
                p.trampoline = true;
            }
            changed = true;
        }
    }

    u4 code_len = plan.empty() ? 0 : plan.back().pc + plan.back().size;
    if (code_len > 65535) throw UnencodableCode("code length exceeds 65535 bytes");

    auto target_pc = [&](Label l) -> u4 {
        auto it = label_pc.find(l);
        if (it == label_pc.end()) throw UnencodableCode("unresolved label");
        return it->second;
    };
    auto end_or_pc = [&](Label l) -> u4 { return l == kEndLabel ? code_len : target_pc(l); };

    ByteWriter cw;
    for (const Phys& p : plan) {
        const Instruction& insn = *p.src;
        if (p.trampoline) {
            cw.write_u1(static_cast<u1>(invert_condition(p.op)));
            cw.write_i2(8);  // over the goto_w
            cw.write_u1(static_cast<u1>(Op::goto_w));
            cw.write_i4(static_cast<i4>(target_pc(insn.target)) - static_cast<i4>(p.pc + 3));
            continue;
        }
        if (p.wide) cw.write_u1(kWidePrefix);
        cw.write_u1(static_cast<u1>(p.op));
        const OpcodeInfo& info = opcode_info(p.op);
        switch (info.operands) {
            case OperandKind::None:
                break;
            case OperandKind::LocalU1:
                if (p.wide) cw.write_u2(insn.local);
                else cw.write_u1(static_cast<u1>(insn.local));
                break;
            case OperandKind::Iinc:
                if (p.wide) {
                    cw.write_u2(insn.local);
                    cw.write_i2(static_cast<i2>(insn.imm));
                } else {
                    cw.write_u1(static_cast<u1>(insn.local));
                    cw.write_i1(static_cast<i1>(insn.imm));
                }
                break;
            case OperandKind::Imm1:
                cw.write_i1(static_cast<i1>(insn.imm));
                break;
            case OperandKind::Imm2:
                cw.write_i2(static_cast<i2>(insn.imm));
                break;
            case OperandKind::CpU1:
                cw.write_u1(static_cast<u1>(insn.cp_index));
                break;
            case OperandKind::CpU2:
                cw.write_u2(insn.cp_index);
                break;
            case OperandKind::Branch2:
                if (p.op == Op::goto_w || p.op == Op::jsr_w) {
                    cw.write_i4(static_cast<i4>(target_pc(insn.target)) - static_cast<i4>(p.pc));
                } else {
                    cw.write_i2(static_cast<i2>(static_cast<i4>(target_pc(insn.target)) -
                                                static_cast<i4>(p.pc)));
                }
                break;
            case OperandKind::Branch4:
                cw.write_i4(static_cast<i4>(target_pc(insn.target)) - static_cast<i4>(p.pc));
                break;
            case OperandKind::NewArrayType:
                cw.write_u1(static_cast<u1>(insn.imm));
                break;
            case OperandKind::MultiANewArray:
                cw.write_u2(insn.cp_index);
                cw.write_u1(static_cast<u1>(insn.imm));
                break;
            case OperandKind::InvokeInterface:
                cw.write_u2(insn.cp_index);
                cw.write_u1(static_cast<u1>(insn.imm));
                cw.write_u1(0);
                break;
            case OperandKind::InvokeDynamic:
                cw.write_u2(insn.cp_index);
                cw.write_u2(0);
                break;
            case OperandKind::TableSwitch: {
                u4 pad = (4 - ((p.pc + 1) & 3)) & 3;
                for (u4 k = 0; k < pad; ++k) cw.write_u1(0);
                const SwitchOperand& sw = *insn.switch_op;
                cw.write_i4(static_cast<i4>(target_pc(sw.default_target)) -
                            static_cast<i4>(p.pc));
                i4 low = sw.cases.empty() ? 0 : sw.cases.front().key;
                i4 high = sw.cases.empty() ? -1 : sw.cases.back().key;
                cw.write_i4(low);
                cw.write_i4(high);
                for (const SwitchCase& c : sw.cases) {
                    cw.write_i4(static_cast<i4>(target_pc(c.target)) - static_cast<i4>(p.pc));
                }
                break;
            }
            case OperandKind::LookupSwitch: {
                u4 pad = (4 - ((p.pc + 1) & 3)) & 3;
                for (u4 k = 0; k < pad; ++k) cw.write_u1(0);
                const SwitchOperand& sw = *insn.switch_op;
                cw.write_i4(static_cast<i4>(target_pc(sw.default_target)) -
                            static_cast<i4>(p.pc));
                cw.write_i4(static_cast<i4>(sw.cases.size()));
                for (const SwitchCase& c : sw.cases) {
                    cw.write_i4(c.key);
                    cw.write_i4(static_cast<i4>(target_pc(c.target)) - static_cast<i4>(p.pc));
                }
                break;
            }
        }
    }

    CodeAttribute out;
    out.code = cw.take();
    out.max_locals = body.max_locals;
    out.max_stack = recompute_max_stack(body, pool);

    for (const ExceptionHandler& h : body.exception_handlers) {
        ExceptionTableEntry e;
        e.start_pc = static_cast<u2>(target_pc(h.from));
        e.end_pc = static_cast<u2>(end_or_pc(h.to));
        e.handler_pc = static_cast<u2>(target_pc(h.handler));
        e.catch_type = h.catch_type;
        out.exception_table.push_back(e);
    }

    // Sub-attributes, in the original order; tables rebuilt from the body.
    auto build_lnt = [&]() -> AttributeInfo {
        AttributeInfo a;
        a.name = kLineNumberTable;
        a.name_index = pool.add_utf8(kLineNumberTable);
        ByteWriter w;
        w.write_u2(static_cast<u2>(body.line_table.size()));
        std::vector<LineNumberEntry> view;
        for (const LineEntry& e : body.line_table) {
            view.push_back({static_cast<u2>(target_pc(e.at)), e.line});
        }
        for (const LineNumberEntry& e : view) {
            w.write_u2(e.start_pc);
            w.write_u2(e.line);
        }
        a.bytes = w.take();
        out.line_numbers = std::move(view);
        return a;
    };
    auto build_lvt = [&]() -> AttributeInfo {
        AttributeInfo a;
        a.name = kLocalVariableTable;
        a.name_index = pool.add_utf8(kLocalVariableTable);
        ByteWriter w;
        w.write_u2(static_cast<u2>(body.local_vars.size()));
        std::vector<LocalVariableEntry> view;
        for (const LocalVarInfo& v : body.local_vars) {
            u4 start = target_pc(v.from);
            u4 end = end_or_pc(v.to);
            view.push_back({static_cast<u2>(start), static_cast<u2>(end - start), v.name_index,
                            v.descriptor_index, v.index});
        }
        for (const LocalVariableEntry& e : view) {
            w.write_u2(e.start_pc);
            w.write_u2(e.length);
            w.write_u2(e.name_index);
            w.write_u2(e.descriptor_index);
            w.write_u2(e.index);
        }
        a.bytes = w.take();
        out.local_vars = std::move(view);
        return a;
    };
    auto build_smt = [&]() -> AttributeInfo {
        AttributeInfo a;
        a.name = kStackMapTable;
        a.name_index = pool.add_utf8(kStackMapTable);
        std::vector<FrameRecord> records = *body.frames;
        std::stable_sort(records.begin(), records.end(),
                         [&](const FrameRecord& x, const FrameRecord& y) {
                             return target_pc(x.at) < target_pc(y.at);
                         });
        ByteWriter w;
        w.write_u2(static_cast<u2>(records.size()));
        std::int64_t prev = -1;
        for (const FrameRecord& rec : records) {
            u4 at = target_pc(rec.at);
            std::int64_t delta64 = prev < 0 ? at : static_cast<std::int64_t>(at) - prev - 1;
            if (delta64 < 0) throw UnencodableCode("stack map frames not strictly ascending");
            u2 delta = static_cast<u2>(delta64);
            prev = at;
            switch (rec.kind) {
                case FrameRecord::Kind::Same:
                    if (delta <= 63) {
                        w.write_u1(static_cast<u1>(delta));
                    } else {
                        w.write_u1(251);
                        w.write_u2(delta);
                    }
                    break;
                case FrameRecord::Kind::SameLocals1:
                    if (delta <= 63) {
                        w.write_u1(static_cast<u1>(64 + delta));
                    } else {
                        w.write_u1(247);
                        w.write_u2(delta);
                    }
                    write_vtype(w, rec.stack[0], label_pc);
                    break;
                case FrameRecord::Kind::SameLocals1Ext:
                    w.write_u1(247);
                    w.write_u2(delta);
                    write_vtype(w, rec.stack[0], label_pc);
                    break;
                case FrameRecord::Kind::Chop:
                    w.write_u1(static_cast<u1>(251 - rec.chop_count));
                    w.write_u2(delta);
                    break;
                case FrameRecord::Kind::SameExt:
                    w.write_u1(251);
                    w.write_u2(delta);
                    break;
                case FrameRecord::Kind::Append:
                    w.write_u1(static_cast<u1>(251 + rec.locals.size()));
                    w.write_u2(delta);
                    for (const VerificationType& v : rec.locals) write_vtype(w, v, label_pc);
                    break;
                case FrameRecord::Kind::Full:
                    w.write_u1(255);
                    w.write_u2(delta);
                    w.write_u2(static_cast<u2>(rec.locals.size()));
                    for (const VerificationType& v : rec.locals) write_vtype(w, v, label_pc);
                    w.write_u2(static_cast<u2>(rec.stack.size()));
                    for (const VerificationType& v : rec.stack) write_vtype(w, v, label_pc);
                    break;
            }
        }
        a.bytes = w.take();
        return a;
    };

    bool emitted_smt = false;
    for (const SubAttrSlot& slot : body.attr_order) {
        switch (slot.kind) {
            case SubAttrSlot::Kind::LineNumbers:
                if (body.has_line_table) out.attributes.push_back(build_lnt());
                break;
            case SubAttrSlot::Kind::LocalVars:
                if (body.has_lvt) out.attributes.push_back(build_lvt());
                break;
            case SubAttrSlot::Kind::StackMap:
                if (body.frames && !body.frames->empty()) {
                    out.attributes.push_back(build_smt());
                    emitted_smt = true;
                }
                break;
            case SubAttrSlot::Kind::Other:
                out.attributes.push_back(body.extra_attributes[slot.extra_index]);
                break;
        }
    }
    if (!emitted_smt && body.frames && !body.frames->empty()) {
        out.attributes.push_back(build_smt());
    }
    return out;
}

EditOp insert_before(Label at, std::vector<Instruction> insns) {
    EditOp e;
    e.kind = EditOp::Kind::InsertBefore;
    e.anchor = at;
    e.replacement = std::move(insns);
    return e;
}
EditOp replace_at(Label at, std::vector<Instruction> insns) {
    return replace_range(at, at, std::move(insns));
}
EditOp replace_range(Label from, Label to, std::vector<Instruction> insns) {
    EditOp e;
    e.kind = EditOp::Kind::ReplaceRange;
    e.anchor = from;
    e.range_end = to;
    e.replacement = std::move(insns);
    return e;
}
EditOp delete_range(Label from, Label to) { return replace_range(from, to, {}); }

CodeBody apply_edits(const CodeBody& body, std::span<const EditOp> edits) {
    std::unordered_map<Label, std::size_t> index;
    for (std::size_t i = 0; i < body.instructions.size(); ++i) {
        index.emplace(body.instructions[i].label, i);
    }
    auto pos_of = [&](Label l) -> std::size_t {
        auto it = index.find(l);
        if (it == index.end()) throw EditError("edit references unknown label");
        return it->second;
    };

    struct Planned {
        const EditOp* op;
        std::size_t from, to;  // instruction positions; InsertBefore: from == to
    };
    std::vector<Planned> planned;
    std::size_t append_count = 0;
    std::vector<const EditOp*> appends;
    for (const EditOp& e : edits) {
        if (e.kind == EditOp::Kind::InsertBefore && e.anchor == kEndLabel) {
            appends.push_back(&e);
            ++append_count;
            continue;
        }
        std::size_t from = pos_of(e.anchor);
        std::size_t to = e.kind == EditOp::Kind::ReplaceRange ? pos_of(e.range_end) : from;
        if (to < from) throw EditError("edit range end precedes start");
        planned.push_back({&e, from, to});
    }
    // Overlap check: replacement ranges must be disjoint, and insertion points
    // must not land inside (or at the start of) a replaced range.
    for (std::size_t i = 0; i < planned.size(); ++i) {
        for (std::size_t j = i + 1; j < planned.size(); ++j) {
            const Planned& a = planned[i];
            const Planned& b = planned[j];
            bool a_range = a.op->kind == EditOp::Kind::ReplaceRange;
            bool b_range = b.op->kind == EditOp::Kind::ReplaceRange;
            if (a_range && b_range) {
                if (a.from <= b.to && b.from <= a.to) throw EditError("overlapping edit ranges");
            } else if (a_range != b_range) {
                const Planned& range = a_range ? a : b;
                const Planned& ins = a_range ? b : a;
                if (ins.from >= range.from && ins.from <= range.to) {
                    throw EditError("insertion inside a replaced range");
                }
            }
        }
    }
    std::stable_sort(planned.begin(), planned.end(),
                     [](const Planned& a, const Planned& b) { return a.from < b.from; });

    CodeBody out;
    out.exception_handlers = body.exception_handlers;
    out.line_table = body.line_table;
    out.has_line_table = body.has_line_table;
    out.local_vars = body.local_vars;
    out.has_lvt = body.has_lvt;
    out.frames = body.frames;
    out.extra_attributes = body.extra_attributes;
    out.attr_order = body.attr_order;
    out.max_stack = body.max_stack;
    out.max_locals = body.max_locals;
    out.next_label = body.next_label;

    // removed label -> position just after its range (for retargeting).
    std::unordered_map<Label, std::size_t> removed;
    std::size_t cursor = 0, pi = 0;
    auto emit_replacement = [&](const EditOp& e, Label inherited) {
        bool first = true;
        for (const Instruction& tmpl : e.replacement) {
            Instruction insn = tmpl;
            insn.orig_pc = kNoPc;
            if (insn.label == kFreshLabel) {
                if (first && inherited != kEndLabel) {
                    insn.label = inherited;
                } else {
                    insn.label = out.next_label++;
                }
            } else {
                // Pre-assigned label (e.g. a handler entry that an added
                // exception-table row must reference).
                out.next_label = std::max(out.next_label, insn.label + 1);
            }
            first = false;
            out.instructions.push_back(std::move(insn));
        }
    };
    while (cursor < body.instructions.size()) {
        // All inserts anchored here, in script order.
        while (pi < planned.size() && planned[pi].from == cursor &&
               planned[pi].op->kind == EditOp::Kind::InsertBefore) {
            emit_replacement(*planned[pi].op, kEndLabel);
            ++pi;
        }
        if (pi < planned.size() && planned[pi].from == cursor) {
            const Planned& p = planned[pi];
            Label inherited = kEndLabel;
            if (!p.op->replacement.empty() && p.op->replacement.front().label == kFreshLabel) {
                inherited = body.instructions[p.from].label;
            }
            emit_replacement(*p.op, inherited);
            for (std::size_t k = p.from; k <= p.to; ++k) {
                Label l = body.instructions[k].label;
                if (!(k == p.from && inherited == l)) removed.emplace(l, p.to + 1);
            }
            cursor = p.to + 1;
            ++pi;
            continue;
        }
        out.instructions.push_back(body.instructions[cursor]);
        ++cursor;
    }
    for (const EditOp* e : appends) emit_replacement(*e, kEndLabel);
    (void)append_count;

    // Retarget references to removed instructions.
    auto survivor_after = [&](std::size_t pos) -> Label {
        for (std::size_t k = pos; k < body.instructions.size(); ++k) {
            Label l = body.instructions[k].label;
            if (!removed.count(l)) return l;
        }
        return kEndLabel;
    };
    auto remap = [&](Label l, bool allow_end) -> Label {
        auto it = removed.find(l);
        if (it == removed.end()) return l;
        Label next = survivor_after(it->second);
        if (next == kEndLabel && !allow_end) {
            throw EditError("removed range has no surviving successor for a branch target");
        }
        return next;
    };
    for (Instruction& insn : out.instructions) {
        if (is_branch_op(insn.op)) insn.target = remap(insn.target, false);
        if (insn.switch_op) {
            insn.switch_op->default_target = remap(insn.switch_op->default_target, false);
            for (SwitchCase& c : insn.switch_op->cases) c.target = remap(c.target, false);
        }
    }
    std::vector<ExceptionHandler> handlers;
    for (ExceptionHandler h : out.exception_handlers) {
        if (removed.count(h.handler)) continue;  // handler body removed
        h.from = remap(h.from, true);
        if (h.to != kEndLabel) h.to = remap(h.to, true);
        if (h.from == h.to || h.from == kEndLabel) continue;
        handlers.push_back(h);
    }
    out.exception_handlers = std::move(handlers);
    std::vector<LineEntry> lines;
    for (const LineEntry& e : out.line_table) {
        if (!removed.count(e.at)) lines.push_back(e);
    }
    out.line_table = std::move(lines);
    std::vector<LocalVarInfo> lvs;
    for (LocalVarInfo v : out.local_vars) {
        v.from = remap(v.from, true);
        if (v.to != kEndLabel) v.to = remap(v.to, true);
        if (v.from == v.to || v.from == kEndLabel) continue;
        lvs.push_back(std::move(v));
    }
    out.local_vars = std::move(lvs);
    if (out.frames) {
        std::vector<FrameRecord> kept;
        for (const FrameRecord& rec : *out.frames) {
            bool drop = removed.count(rec.at) != 0;
            for (const auto* list : {&rec.locals, &rec.stack}) {
                for (const VerificationType& v : *list) {
                    if (v.kind == VKind::Uninitialized && removed.count(v.new_site)) drop = true;
                }
            }
            if (!drop) kept.push_back(rec);
        }
        out.frames = std::move(kept);
    }
    return out;
}

}  // namespace bcrepair
