#include "bcrepair/opcodes.hpp"

namespace bcrepair {
namespace {

using K = OperandKind;

struct Row {
    u1 code;
    std::string_view name;
    K operands;
    std::int8_t pops, pushes;
    bool ends_flow = false;
    bool cond = false;
};

// Transcribed from the instruction-set chapter of the JVM specification;
// pops/pushes are in stack slots (long/double = 2).
constexpr Row kRows[] = {
    {0, "nop", K::None, 0, 0},
    {1, "aconst_null", K::None, 0, 1},
    {2, "iconst_m1", K::None, 0, 1},
    {3, "iconst_0", K::None, 0, 1},
    {4, "iconst_1", K::None, 0, 1},
    {5, "iconst_2", K::None, 0, 1},
    {6, "iconst_3", K::None, 0, 1},
    {7, "iconst_4", K::None, 0, 1},
    {8, "iconst_5", K::None, 0, 1},
    {9, "lconst_0", K::None, 0, 2},
    {10, "lconst_1", K::None, 0, 2},
    {11, "fconst_0", K::None, 0, 1},
    {12, "fconst_1", K::None, 0, 1},
    {13, "fconst_2", K::None, 0, 1},
    {14, "dconst_0", K::None, 0, 2},
    {15, "dconst_1", K::None, 0, 2},
    {16, "bipush", K::Imm1, 0, 1},
    {17, "sipush", K::Imm2, 0, 1},
    {18, "ldc", K::CpU1, 0, 1},
    {19, "ldc_w", K::CpU2, 0, 1},
    {20, "ldc2_w", K::CpU2, 0, 2},
    {21, "iload", K::LocalU1, 0, 1},
    {22, "lload", K::LocalU1, 0, 2},
    {23, "fload", K::LocalU1, 0, 1},
    {24, "dload", K::LocalU1, 0, 2},
    {25, "aload", K::LocalU1, 0, 1},
    {26, "iload_0", K::None, 0, 1},
    {27, "iload_1", K::None, 0, 1},
    {28, "iload_2", K::None, 0, 1},
    {29, "iload_3", K::None, 0, 1},
    {30, "lload_0", K::None, 0, 2},
    {31, "lload_1", K::None, 0, 2},
    {32, "lload_2", K::None, 0, 2},
    {33, "lload_3", K::None, 0, 2},
    {34, "fload_0", K::None, 0, 1},
    {35, "fload_1", K::None, 0, 1},
    {36, "fload_2", K::None, 0, 1},
    {37, "fload_3", K::None, 0, 1},
    {38, "dload_0", K::None, 0, 2},
    {39, "dload_1", K::None, 0, 2},
    {40, "dload_2", K::None, 0, 2},
    {41, "dload_3", K::None, 0, 2},
    {42, "aload_0", K::None, 0, 1},
    {43, "aload_1", K::None, 0, 1},
    {44, "aload_2", K::None, 0, 1},
    {45, "aload_3", K::None, 0, 1},
    {46, "iaload", K::None, 2, 1},
    {47, "laload", K::None, 2, 2},
    {48, "faload", K::None, 2, 1},
    {49, "daload", K::None, 2, 2},
    {50, "aaload", K::None, 2, 1},
    {51, "baload", K::None, 2, 1},
    {52, "caload", K::None, 2, 1},
    {53, "saload", K::None, 2, 1},
    {54, "istore", K::LocalU1, 1, 0},
    {55, "lstore", K::LocalU1, 2, 0},
    {56, "fstore", K::LocalU1, 1, 0},
    {57, "dstore", K::LocalU1, 2, 0},
    {58, "astore", K::LocalU1, 1, 0},
    {59, "istore_0", K::None, 1, 0},
    {60, "istore_1", K::None, 1, 0},
    {61, "istore_2", K::None, 1, 0},
    {62, "istore_3", K::None, 1, 0},
    {63, "lstore_0", K::None, 2, 0},
    {64, "lstore_1", K::None, 2, 0},
    {65, "lstore_2", K::None, 2, 0},
    {66, "lstore_3", K::None, 2, 0},
    {67, "fstore_0", K::None, 1, 0},
    {68, "fstore_1", K::None, 1, 0},
    {69, "fstore_2", K::None, 1, 0},
    {70, "fstore_3", K::None, 1, 0},
    {71, "dstore_0", K::None, 2, 0},
    {72, "dstore_1", K::None, 2, 0},
    {73, "dstore_2", K::None, 2, 0},
    {74, "dstore_3", K::None, 2, 0},
    {75, "astore_0", K::None, 1, 0},
    {76, "astore_1", K::None, 1, 0},
    {77, "astore_2", K::None, 1, 0},
    {78, "astore_3", K::None, 1, 0},
    {79, "iastore", K::None, 3, 0},
    {80, "lastore", K::None, 4, 0},
    {81, "fastore", K::None, 3, 0},
    {82, "dastore", K::None, 4, 0},
    {83, "aastore", K::None, 3, 0},
    {84, "bastore", K::None, 3, 0},
    {85, "castore", K::None, 3, 0},
    {86, "sastore", K::None, 3, 0},
    {87, "pop", K::None, 1, 0},
    {88, "pop2", K::None, 2, 0},
    {89, "dup", K::None, 1, 2},
    {90, "dup_x1", K::None, 2, 3},
    {91, "dup_x2", K::None, 3, 4},
    {92, "dup2", K::None, 2, 4},
    {93, "dup2_x1", K::None, 3, 5},
    {94, "dup2_x2", K::None, 4, 6},
    {95, "swap", K::None, 2, 2},
    {96, "iadd", K::None, 2, 1},
    {97, "ladd", K::None, 4, 2},
    {98, "fadd", K::None, 2, 1},
    {99, "dadd", K::None, 4, 2},
    {100, "isub", K::None, 2, 1},
    {101, "lsub", K::None, 4, 2},
    {102, "fsub", K::None, 2, 1},
    {103, "dsub", K::None, 4, 2},
    {104, "imul", K::None, 2, 1},
    {105, "lmul", K::None, 4, 2},
    {106, "fmul", K::None, 2, 1},
    {107, "dmul", K::None, 4, 2},
    {108, "idiv", K::None, 2, 1},
    {109, "ldiv", K::None, 4, 2},
    {110, "fdiv", K::None, 2, 1},
    {111, "ddiv", K::None, 4, 2},
    {112, "irem", K::None, 2, 1},
    {113, "lrem", K::None, 4, 2},
    {114, "frem", K::None, 2, 1},
    {115, "drem", K::None, 4, 2},
    {116, "ineg", K::None, 1, 1},
    {117, "lneg", K::None, 2, 2},
    {118, "fneg", K::None, 1, 1},
    {119, "dneg", K::None, 2, 2},
    {120, "ishl", K::None, 2, 1},
    {121, "lshl", K::None, 3, 2},
    {122, "ishr", K::None, 2, 1},
    {123, "lshr", K::None, 3, 2},
    {124, "iushr", K::None, 2, 1},
    {125, "lushr", K::None, 3, 2},
    {126, "iand", K::None, 2, 1},
    {127, "land", K::None, 4, 2},
    {128, "ior", K::None, 2, 1},
    {129, "lor", K::None, 4, 2},
    {130, "ixor", K::None, 2, 1},
    {131, "lxor", K::None, 4, 2},
    {132, "iinc", K::Iinc, 0, 0},
    {133, "i2l", K::None, 1, 2},
    {134, "i2f", K::None, 1, 1},
    {135, "i2d", K::None, 1, 2},
    {136, "l2i", K::None, 2, 1},
    {137, "l2f", K::None, 2, 1},
    {138, "l2d", K::None, 2, 2},
    {139, "f2i", K::None, 1, 1},
    {140, "f2l", K::None, 1, 2},
    {141, "f2d", K::None, 1, 2},
    {142, "d2i", K::None, 2, 1},
    {143, "d2l", K::None, 2, 2},
    {144, "d2f", K::None, 2, 1},
    {145, "i2b", K::None, 1, 1},
    {146, "i2c", K::None, 1, 1},
    {147, "i2s", K::None, 1, 1},
    {148, "lcmp", K::None, 4, 1},
    {149, "fcmpl", K::None, 2, 1},
    {150, "fcmpg", K::None, 2, 1},
    {151, "dcmpl", K::None, 4, 1},
    {152, "dcmpg", K::None, 4, 1},
    {153, "ifeq", K::Branch2, 1, 0, false, true},
    {154, "ifne", K::Branch2, 1, 0, false, true},
    {155, "iflt", K::Branch2, 1, 0, false, true},
    {156, "ifge", K::Branch2, 1, 0, false, true},
    {157, "ifgt", K::Branch2, 1, 0, false, true},
    {158, "ifle", K::Branch2, 1, 0, false, true},
    {159, "if_icmpeq", K::Branch2, 2, 0, false, true},
    {160, "if_icmpne", K::Branch2, 2, 0, false, true},
    {161, "if_icmplt", K::Branch2, 2, 0, false, true},
    {162, "if_icmpge", K::Branch2, 2, 0, false, true},
    {163, "if_icmpgt", K::Branch2, 2, 0, false, true},
    {164, "if_icmple", K::Branch2, 2, 0, false, true},
    {165, "if_acmpeq", K::Branch2, 2, 0, false, true},
    {166, "if_acmpne", K::Branch2, 2, 0, false, true},
    {167, "goto", K::Branch2, 0, 0, true},
    {168, "jsr", K::Branch2, 0, 1},
    {169, "ret", K::LocalU1, 0, 0, true},
    {170, "tableswitch", K::TableSwitch, 1, 0, true},
    {171, "lookupswitch", K::LookupSwitch, 1, 0, true},
    {172, "ireturn", K::None, 1, 0, true},
    {173, "lreturn", K::None, 2, 0, true},
    {174, "freturn", K::None, 1, 0, true},
    {175, "dreturn", K::None, 2, 0, true},
    {176, "areturn", K::None, 1, 0, true},
    {177, "return", K::None, 0, 0, true},
    {178, "getstatic", K::CpU2, kPoly, kPoly},
    {179, "putstatic", K::CpU2, kPoly, kPoly},
    {180, "getfield", K::CpU2, kPoly, kPoly},
    {181, "putfield", K::CpU2, kPoly, kPoly},
    {182, "invokevirtual", K::CpU2, kPoly, kPoly},
    {183, "invokespecial", K::CpU2, kPoly, kPoly},
    {184, "invokestatic", K::CpU2, kPoly, kPoly},
    {185, "invokeinterface", K::InvokeInterface, kPoly, kPoly},
    {186, "invokedynamic", K::InvokeDynamic, kPoly, kPoly},
    {187, "new", K::CpU2, 0, 1},
    {188, "newarray", K::NewArrayType, 1, 1},
    {189, "anewarray", K::CpU2, 1, 1},
    {190, "arraylength", K::None, 1, 1},
    {191, "athrow", K::None, 1, 0, true},
    {192, "checkcast", K::CpU2, 1, 1},
    {193, "instanceof", K::CpU2, 1, 1},
    {194, "monitorenter", K::None, 1, 0},
    {195, "monitorexit", K::None, 1, 0},
    {197, "multianewarray", K::MultiANewArray, kPoly, kPoly},
    {198, "ifnull", K::Branch2, 1, 0, false, true},
    {199, "ifnonnull", K::Branch2, 1, 0, false, true},
    {200, "goto_w", K::Branch4, 0, 0, true},
    {201, "jsr_w", K::Branch4, 0, 1},
};

std::array<OpcodeInfo, 256> build_table() {
    std::array<OpcodeInfo, 256> t{};
    for (auto& e : t) e = OpcodeInfo{"(undefined)", K::None, 0, 0, false, false, false};
    for (const Row& r : kRows) {
        t[r.code] = OpcodeInfo{r.name, r.operands, r.pops, r.pushes, true, r.ends_flow, r.cond};
    }
    return t;
}

const std::array<OpcodeInfo, 256> kTable = build_table();

}  // namespace

const OpcodeInfo& opcode_info(u1 opcode) { return kTable[opcode]; }

Op normalize_load_store(Op op, int* implied_slot) {
    u1 c = static_cast<u1>(op);
    if (c >= 26 && c <= 45) {  // xload_n
        *implied_slot = (c - 26) % 4;
        return static_cast<Op>(21 + (c - 26) / 4);
    }
    if (c >= 59 && c <= 78) {  // xstore_n
        *implied_slot = (c - 59) % 4;
        return static_cast<Op>(54 + (c - 59) / 4);
    }
    *implied_slot = -1;
    return op;
}

Op shortcut_load_store(Op base, u2 slot) {
    u1 c = static_cast<u1>(base);
    if (slot > 3) return base;
    if (c >= 21 && c <= 25) return static_cast<Op>(26 + (c - 21) * 4 + slot);
    if (c >= 54 && c <= 58) return static_cast<Op>(59 + (c - 54) * 4 + slot);
    return base;
}

}  // namespace bcrepair
