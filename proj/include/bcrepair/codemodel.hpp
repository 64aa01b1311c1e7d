#ifndef BCREPAIR_CODEMODEL_HPP
#define BCREPAIR_CODEMODEL_HPP

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcrepair/classfile.hpp"
#include "bcrepair/opcodes.hpp"

namespace bcrepair {

struct MalformedCode : std::runtime_error {
    MalformedCode(u4 at, const std::string& what)
        : std::runtime_error("malformed code at pc " + std::to_string(at) + ": " + what), pc(at) {}
    u4 pc;
};

struct UnencodableCode : std::runtime_error {
    explicit UnencodableCode(const std::string& what)
        : std::runtime_error("unencodable code: " + what) {}
};

struct InconsistentStack : std::runtime_error {
    InconsistentStack(u4 label, int a, int b)
        : std::runtime_error("inconsistent stack depth at label " + std::to_string(label) + ": " +
                             std::to_string(a) + " vs " + std::to_string(b)) {}
};

// Symbolic position in a method body. Labels stick to their instruction
// across edits and relocation; raw pcs exist only at the byte boundary.
using Label = u4;
constexpr Label kEndLabel = 0xFFFFFFFFu;    // exclusive end of the code region
constexpr Label kFreshLabel = 0xFFFFFFFEu;  // replacement instruction: assign on apply
constexpr u4 kNoPc = 0xFFFFFFFFu;           // synthesized instruction, no original pc

struct SwitchCase {
    i4 key;
    Label target;
};
struct SwitchOperand {
    bool table_form = false;  // tableswitch (contiguous keys) vs lookupswitch
    Label default_target = 0;
    std::vector<SwitchCase> cases;  // ascending keys
};

// One decoded instruction. The exact opcode byte is preserved (iload_2 stays
// iload_2) so an untouched body re-encodes bit-identically; accessors see
// through the shortcut forms.
struct Instruction {
    Label label = kFreshLabel;
    u4 orig_pc = kNoPc;
    Op op = Op::nop;
    bool wide = false;

    u2 cp_index = 0;  // CpU1/CpU2/InvokeInterface/InvokeDynamic/MultiANewArray
    u2 local = 0;     // LocalU1/Iinc (explicit forms only; see slot())
    i4 imm = 0;       // Imm1/Imm2, iinc const, newarray atype,
                      // invokeinterface count, multianewarray dims
    Label target = 0;
    std::optional<SwitchOperand> switch_op;

    // Local-variable slot for any load/store form, -1 otherwise.
    int slot() const {
        int implied;
        Op base = normalize_load_store(op, &implied);
        if (implied >= 0) return implied;
        if (opcode_info(base).operands == OperandKind::LocalU1 && base != Op::ret) return local;
        return -1;
    }
    bool is_load() const {
        int i;
        u1 c = static_cast<u1>(normalize_load_store(op, &i));
        return c >= 21 && c <= 25;
    }
    bool is_store() const {
        int i;
        u1 c = static_cast<u1>(normalize_load_store(op, &i));
        return c >= 54 && c <= 58;
    }
};

// Builders for synthesized instructions (labels are assigned on edit
// application; the shortest form is chosen where one exists).
Instruction make_insn(Op op);
Instruction make_load(Op base, u2 slot);   // base in {iload..aload}
Instruction make_store(Op base, u2 slot);  // base in {istore..astore}
Instruction make_cp_insn(Op op, u2 cp_index);
Instruction make_branch(Op op, Label target);
Instruction make_int_const(i4 value, ConstantPool& pool);  // iconst/bipush/sipush/ldc

// Stack-map frame record, kept at the record level (same/append/chop/full)
// so unmodified tables re-encode bit-exactly and offsets relocate cheaply.
enum class VKind : u1 {
    Top = 0, Int = 1, Float = 2, Double = 3, Long = 4, Null = 5,
    UninitializedThis = 6, Object = 7, Uninitialized = 8,
};
struct VerificationType {
    VKind kind = VKind::Top;
    u2 cp_index = 0;           // Object: Class entry
    Label new_site = 0;        // Uninitialized: label of the `new`
    bool operator==(const VerificationType&) const = default;
};
struct FrameRecord {
    enum class Kind : u1 { Same, SameLocals1, SameLocals1Ext, Chop, SameExt, Append, Full };
    Kind kind = Kind::Same;
    Label at = 0;
    u1 chop_count = 0;                         // Chop
    std::vector<VerificationType> locals;      // Append (1..3) / Full (all)
    std::vector<VerificationType> stack;       // SameLocals1* (1) / Full (all)
};

struct ExceptionHandler {
    Label from = 0, to = kEndLabel, handler = 0;  // to is exclusive
    u2 catch_type = 0;
};
struct LineEntry {
    Label at = 0;
    u2 line = 0;
};
struct LocalVarInfo {
    Label from = 0, to = kEndLabel;  // to is exclusive
    u2 name_index = 0, descriptor_index = 0, index = 0;
    std::string name, descriptor;
};

// Where each Code sub-attribute sits in the original order, for re-emission.
struct SubAttrSlot {
    enum class Kind : u1 { LineNumbers, LocalVars, StackMap, Other };
    Kind kind;
    std::size_t extra_index = 0;  // into CodeBody::extra_attributes for Other
};

struct CodeBody {
    std::vector<Instruction> instructions;
    std::vector<ExceptionHandler> exception_handlers;
    std::vector<LineEntry> line_table;  // ascending by instruction position
    bool has_line_table = false;
    std::vector<LocalVarInfo> local_vars;
    bool has_lvt = false;
    std::optional<std::vector<FrameRecord>> frames;
    std::vector<AttributeInfo> extra_attributes;  // pass-through sub-attributes
    std::vector<SubAttrSlot> attr_order;
    u2 max_stack = 0, max_locals = 0;
    Label next_label = 0;

    Label fresh_label() { return next_label++; }
    // Index of the instruction carrying `label`, or npos.
    std::size_t index_of(Label label) const;
    const Instruction* find(Label label) const;
};

CodeBody decode_code(const CodeAttribute& attr, const ConstantPool& pool);
// Re-encodes with full relocation; recomputes max_stack. Appends pool
// entries only for sub-attribute names that are missing.
CodeAttribute encode_code(const CodeBody& body, ConstantPool& pool);

// Source line of the instruction at `label` per the line-table interval
// rule; nullopt (UNMAPPED) before the first entry or without a table.
std::optional<u2> line_of(const CodeBody& body, Label label);
// Labels of exactly the instructions whose line_of equals `line`, in order.
std::vector<Label> offsets_for_line(const CodeBody& body, u2 line);

// Worklist fixpoint over per-opcode stack effects; entry depth 0, handler
// entry depth 1. Throws InconsistentStack on a depth-mismatched join.
u2 recompute_max_stack(const CodeBody& body, const ConstantPool& pool);

// Entry stack depth per instruction index (-1 for unreachable ones);
// nullopt when the depths are inconsistent.
std::optional<std::vector<int>> stack_depths(const CodeBody& body, const ConstantPool& pool);

// Stack effect of one instruction in slots, resolving descriptor-driven
// opcodes through the pool.
struct StackEffect {
    int pops = 0, pushes = 0;
};
StackEffect stack_effect(const Instruction& insn, const ConstantPool& pool);

// --- Edit scripts -----------------------------------------------------------

struct EditError : std::runtime_error {
    explicit EditError(const std::string& what) : std::runtime_error(what) {}
};

struct EditOp {
    enum class Kind : u1 { InsertBefore, ReplaceRange };
    Kind kind = Kind::InsertBefore;
    Label anchor = 0;          // InsertBefore: insertion point (kEndLabel = append)
    Label range_end = 0;       // ReplaceRange: inclusive end (== anchor for single)
    std::vector<Instruction> replacement;
};

EditOp insert_before(Label at, std::vector<Instruction> insns);
EditOp replace_at(Label at, std::vector<Instruction> insns);
EditOp replace_range(Label from, Label to, std::vector<Instruction> insns);
EditOp delete_range(Label from, Label to);

// Applies an edit script. New instructions receive fresh labels except that
// a non-empty replacement inherits the replaced range's first label (so
// branches keep landing at the site). Branches/handlers/line entries that
// referenced a removed instruction retarget to the first surviving one after
// the range; line entries inside a removed range are dropped, handler ranges
// are clipped (dropped when empty). Throws EditError on overlapping ranges,
// unknown anchors, or a removed range with no surviving successor target.
CodeBody apply_edits(const CodeBody& body, std::span<const EditOp> edits);

}  // namespace bcrepair

#endif
