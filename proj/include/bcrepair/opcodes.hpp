#ifndef BCREPAIR_OPCODES_HPP
#define BCREPAIR_OPCODES_HPP

#include <array>
#include <cstdint>
#include <string_view>

#include "bcrepair/bytes.hpp"

namespace bcrepair {

// The 202 defined opcodes (0x00..0xc9). `wide` (0xc4) is a prefix folded
// into the decoded instruction, never a standalone one.
enum class Op : u1 {
    nop = 0, aconst_null = 1, iconst_m1 = 2, iconst_0 = 3, iconst_1 = 4,
    iconst_2 = 5, iconst_3 = 6, iconst_4 = 7, iconst_5 = 8, lconst_0 = 9,
    lconst_1 = 10, fconst_0 = 11, fconst_1 = 12, fconst_2 = 13, dconst_0 = 14,
    dconst_1 = 15, bipush = 16, sipush = 17, ldc = 18, ldc_w = 19, ldc2_w = 20,
    iload = 21, lload = 22, fload = 23, dload = 24, aload = 25,
    iload_0 = 26, iload_1 = 27, iload_2 = 28, iload_3 = 29,
    lload_0 = 30, lload_1 = 31, lload_2 = 32, lload_3 = 33,
    fload_0 = 34, fload_1 = 35, fload_2 = 36, fload_3 = 37,
    dload_0 = 38, dload_1 = 39, dload_2 = 40, dload_3 = 41,
    aload_0 = 42, aload_1 = 43, aload_2 = 44, aload_3 = 45,
    iaload = 46, laload = 47, faload = 48, daload = 49, aaload = 50,
    baload = 51, caload = 52, saload = 53,
    istore = 54, lstore = 55, fstore = 56, dstore = 57, astore = 58,
    istore_0 = 59, istore_1 = 60, istore_2 = 61, istore_3 = 62,
    lstore_0 = 63, lstore_1 = 64, lstore_2 = 65, lstore_3 = 66,
    fstore_0 = 67, fstore_1 = 68, fstore_2 = 69, fstore_3 = 70,
    dstore_0 = 71, dstore_1 = 72, dstore_2 = 73, dstore_3 = 74,
    astore_0 = 75, astore_1 = 76, astore_2 = 77, astore_3 = 78,
    iastore = 79, lastore = 80, fastore = 81, dastore = 82, aastore = 83,
    bastore = 84, castore = 85, sastore = 86,
    pop = 87, pop2 = 88, dup = 89, dup_x1 = 90, dup_x2 = 91, dup2 = 92,
    dup2_x1 = 93, dup2_x2 = 94, swap = 95,
    iadd = 96, ladd = 97, fadd = 98, dadd = 99, isub = 100, lsub = 101,
    fsub = 102, dsub = 103, imul = 104, lmul = 105, fmul = 106, dmul = 107,
    idiv = 108, ldiv_ = 109, fdiv = 110, ddiv = 111, irem = 112, lrem = 113,
    frem = 114, drem = 115, ineg = 116, lneg = 117, fneg = 118, dneg = 119,
    ishl = 120, lshl = 121, ishr = 122, lshr = 123, iushr = 124, lushr = 125,
    iand = 126, land = 127, ior = 128, lor = 129, ixor = 130, lxor = 131,
    iinc = 132,
    i2l = 133, i2f = 134, i2d = 135, l2i = 136, l2f = 137, l2d = 138,
    f2i = 139, f2l = 140, f2d = 141, d2i = 142, d2l = 143, d2f = 144,
    i2b = 145, i2c = 146, i2s = 147,
    lcmp = 148, fcmpl = 149, fcmpg = 150, dcmpl = 151, dcmpg = 152,
    ifeq = 153, ifne = 154, iflt = 155, ifge = 156, ifgt = 157, ifle = 158,
    if_icmpeq = 159, if_icmpne = 160, if_icmplt = 161, if_icmpge = 162,
    if_icmpgt = 163, if_icmple = 164, if_acmpeq = 165, if_acmpne = 166,
    goto_ = 167, jsr = 168, ret = 169, tableswitch = 170, lookupswitch = 171,
    ireturn = 172, lreturn = 173, freturn = 174, dreturn = 175, areturn = 176,
    return_ = 177,
    getstatic = 178, putstatic = 179, getfield = 180, putfield = 181,
    invokevirtual = 182, invokespecial = 183, invokestatic = 184,
    invokeinterface = 185, invokedynamic = 186,
    new_ = 187, newarray = 188, anewarray = 189, arraylength = 190,
    athrow = 191, checkcast = 192, instanceof_ = 193,
    monitorenter = 194, monitorexit = 195,
    // 196 = wide prefix
    multianewarray = 197, ifnull = 198, ifnonnull = 199, goto_w = 200,
    jsr_w = 201,
};

constexpr u1 kWidePrefix = 196;
constexpr u1 kLastOpcode = 201;

enum class OperandKind : u1 {
    None,          // no operand bytes
    LocalU1,       // u1 local index (u2 when wide)
    Iinc,          // u1 local + i1 const (u2 + i2 when wide)
    Imm1,          // i1 immediate (bipush)
    Imm2,          // i2 immediate (sipush)
    CpU1,          // u1 constant pool index (ldc)
    CpU2,          // u2 constant pool index
    Branch2,       // i2 pc-relative branch
    Branch4,       // i4 pc-relative branch
    NewArrayType,  // u1 primitive array type code
    MultiANewArray,   // u2 cp + u1 dims
    InvokeInterface,  // u2 cp + u1 count + u1 zero
    InvokeDynamic,    // u2 cp + u2 zero
    TableSwitch,
    LookupSwitch,
};

// Stack effect in operand-stack slots. kPoly marks opcodes whose effect
// depends on a referenced descriptor (field access, invokes, multianewarray).
constexpr std::int8_t kPoly = -1;

struct OpcodeInfo {
    std::string_view name;
    OperandKind operands = OperandKind::None;
    std::int8_t pops = 0, pushes = 0;
    bool defined = false;
    bool ends_flow = false;      // goto/returns/athrow/switch/ret: no fall-through
    bool cond_branch = false;    // the 16 two-way branches
};

const OpcodeInfo& opcode_info(u1 opcode);
inline const OpcodeInfo& opcode_info(Op op) { return opcode_info(static_cast<u1>(op)); }
inline std::string_view opcode_name(Op op) { return opcode_info(op).name; }

inline bool is_branch_op(Op op) {
    OperandKind k = opcode_info(op).operands;
    return k == OperandKind::Branch2 || k == OperandKind::Branch4;
}
inline bool is_switch_op(Op op) {
    return op == Op::tableswitch || op == Op::lookupswitch;
}

// iload/fload/.../astore families: canonical opcode for the _n shortcuts
// (iload_2 -> iload) and the slot encoded in the shortcut. Returns the
// opcode itself / -1 for everything else.
Op normalize_load_store(Op op, int* implied_slot);

// Shortest encodable form for a load/store of `slot` with base opcode
// (iload/istore/...): the _n shortcut when slot <= 3.
Op shortcut_load_store(Op base, u2 slot);

}  // namespace bcrepair

#endif
