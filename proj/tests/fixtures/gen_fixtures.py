#!/usr/bin/env python3
"""Class-file fixture assembler.

Builds the test corpus byte-by-byte, independently of the C++ codec: a
constant-pool builder, a tiny two-pass instruction assembler with symbolic
labels, hand-authored stack map frames, and explicit fixture definitions.

Usage: gen_fixtures.py <outdir>

Layout written:
  <outdir>/corpus/*.class          round-trip / structural-sweep corpus
  <outdir>/weird/*.class           intentionally odd but well-formed files
  <outdir>/e2e/<name>/classes/...  seeded-vulnerability class trees
"""

import os
import struct
import sys

# ---------------------------------------------------------------- constant pool

CONSTANT_Utf8 = 1
CONSTANT_Integer = 3
CONSTANT_Float = 4
CONSTANT_Long = 5
CONSTANT_Double = 6
CONSTANT_Class = 7
CONSTANT_String = 8
CONSTANT_Fieldref = 9
CONSTANT_Methodref = 10
CONSTANT_InterfaceMethodref = 11
CONSTANT_NameAndType = 12


class Pool:
    def __init__(self):
        self.entries = []  # list of (tag, payload bytes) or None for phantom
        self.lookup = {}

    def _add(self, key, tag, payload, wide=False):
        if key in self.lookup:
            return self.lookup[key]
        self.entries.append((tag, payload))
        idx = len(self.entries)
        if wide:
            self.entries.append(None)
        self.lookup[key] = idx
        return idx

    def utf8(self, s):
        b = s.encode("utf-8")
        return self._add(("u", s), CONSTANT_Utf8, struct.pack(">H", len(b)) + b)

    def integer(self, v):
        return self._add(("i", v), CONSTANT_Integer, struct.pack(">i", v))

    def float_(self, v):
        bits = struct.unpack(">I", struct.pack(">f", v))[0]
        return self._add(("f", bits), CONSTANT_Float, struct.pack(">I", bits))

    def long_(self, v):
        return self._add(("j", v), CONSTANT_Long, struct.pack(">q", v), wide=True)

    def double_(self, v):
        bits = struct.unpack(">Q", struct.pack(">d", v))[0]
        return self._add(("d", bits), CONSTANT_Double, struct.pack(">Q", bits), wide=True)

    def cls(self, name):
        return self._add(("c", name), CONSTANT_Class, struct.pack(">H", self.utf8(name)))

    def string(self, s):
        return self._add(("s", s), CONSTANT_String, struct.pack(">H", self.utf8(s)))

    def nat(self, name, desc):
        return self._add(("n", name, desc), CONSTANT_NameAndType,
                         struct.pack(">HH", self.utf8(name), self.utf8(desc)))

    def member(self, tag, owner, name, desc):
        return self._add((tag, owner, name, desc), tag,
                         struct.pack(">HH", self.cls(owner), self.nat(name, desc)))

    def fieldref(self, owner, name, desc):
        return self.member(CONSTANT_Fieldref, owner, name, desc)

    def methodref(self, owner, name, desc):
        return self.member(CONSTANT_Methodref, owner, name, desc)

    def imethodref(self, owner, name, desc):
        return self.member(CONSTANT_InterfaceMethodref, owner, name, desc)

    def emit(self):
        out = struct.pack(">H", len(self.entries) + 1)
        for e in self.entries:
            if e is None:
                continue
            tag, payload = e
            out += struct.pack(">B", tag) + payload
        return out


# ---------------------------------------------------------------- descriptors


def arg_slots(desc):
    assert desc[0] == "("
    i, n = 1, 0
    while desc[i] != ")":
        c = desc[i]
        if c in "JD":
            n += 2
            i += 1
        elif c == "L":
            n += 1
            i = desc.index(";", i) + 1
        elif c == "[":
            i += 1
            continue
        else:
            n += 1
            i += 1
        # array element already consumed above for primitives/classes
    return n


def ret_width(desc):
    r = desc[desc.index(")") + 1:]
    if r == "V":
        return 0
    if r in ("J", "D"):
        return 2
    return 1


# ---------------------------------------------------------------- assembler

# mnemonic -> (opcode, operand kind)
# kinds: '' none | 'L1' u1 local | 'I1' i1 | 'I2' i2 | 'C1' cp u1 | 'C2' cp u2
#        'B2' branch16 | 'B4' branch32 | 'AT' newarray type | 'II' invokeinterface
#        'TS'/'LS' switches | 'IINC'
OPS = {
    "nop": (0, ""), "aconst_null": (1, ""),
    "iconst_m1": (2, ""), "iconst_0": (3, ""), "iconst_1": (4, ""),
    "iconst_2": (5, ""), "iconst_3": (6, ""), "iconst_4": (7, ""), "iconst_5": (8, ""),
    "lconst_0": (9, ""), "lconst_1": (10, ""),
    "fconst_0": (11, ""), "fconst_1": (12, ""), "fconst_2": (13, ""),
    "dconst_0": (14, ""), "dconst_1": (15, ""),
    "bipush": (16, "I1"), "sipush": (17, "I2"),
    "ldc": (18, "C1"), "ldc_w": (19, "C2"), "ldc2_w": (20, "C2"),
    "iload": (21, "L1"), "lload": (22, "L1"), "fload": (23, "L1"),
    "dload": (24, "L1"), "aload": (25, "L1"),
    "istore": (54, "L1"), "lstore": (55, "L1"), "fstore": (56, "L1"),
    "dstore": (57, "L1"), "astore": (58, "L1"),
    "iaload": (46, ""), "laload": (47, ""), "faload": (48, ""), "daload": (49, ""),
    "aaload": (50, ""), "baload": (51, ""), "caload": (52, ""), "saload": (53, ""),
    "iastore": (79, ""), "lastore": (80, ""), "fastore": (81, ""), "dastore": (82, ""),
    "aastore": (83, ""), "bastore": (84, ""), "castore": (85, ""), "sastore": (86, ""),
    "pop": (87, ""), "pop2": (88, ""), "dup": (89, ""), "dup_x1": (90, ""),
    "dup_x2": (91, ""), "dup2": (92, ""), "dup2_x1": (93, ""), "dup2_x2": (94, ""),
    "swap": (95, ""),
    "iadd": (96, ""), "ladd": (97, ""), "fadd": (98, ""), "dadd": (99, ""),
    "isub": (100, ""), "lsub": (101, ""), "fsub": (102, ""), "dsub": (103, ""),
    "imul": (104, ""), "lmul": (105, ""), "fmul": (106, ""), "dmul": (107, ""),
    "idiv": (108, ""), "ldiv": (109, ""), "fdiv": (110, ""), "ddiv": (111, ""),
    "irem": (112, ""), "lrem": (113, ""), "frem": (114, ""), "drem": (115, ""),
    "ineg": (116, ""), "lneg": (117, ""), "fneg": (118, ""), "dneg": (119, ""),
    "ishl": (120, ""), "lshl": (121, ""), "ishr": (122, ""), "lshr": (123, ""),
    "iushr": (124, ""), "lushr": (125, ""),
    "iand": (126, ""), "land": (127, ""), "ior": (128, ""), "lor": (129, ""),
    "ixor": (130, ""), "lxor": (131, ""),
    "iinc": (132, "IINC"),
    "i2l": (133, ""), "i2f": (134, ""), "i2d": (135, ""), "l2i": (136, ""),
    "l2f": (137, ""), "l2d": (138, ""), "f2i": (139, ""), "f2l": (140, ""),
    "f2d": (141, ""), "d2i": (142, ""), "d2l": (143, ""), "d2f": (144, ""),
    "i2b": (145, ""), "i2c": (146, ""), "i2s": (147, ""),
    "lcmp": (148, ""), "fcmpl": (149, ""), "fcmpg": (150, ""),
    "dcmpl": (151, ""), "dcmpg": (152, ""),
    "ifeq": (153, "B2"), "ifne": (154, "B2"), "iflt": (155, "B2"), "ifge": (156, "B2"),
    "ifgt": (157, "B2"), "ifle": (158, "B2"),
    "if_icmpeq": (159, "B2"), "if_icmpne": (160, "B2"), "if_icmplt": (161, "B2"),
    "if_icmpge": (162, "B2"), "if_icmpgt": (163, "B2"), "if_icmple": (164, "B2"),
    "if_acmpeq": (165, "B2"), "if_acmpne": (166, "B2"),
    "goto": (167, "B2"), "jsr": (168, "B2"), "ret": (169, "L1"),
    "tableswitch": (170, "TS"), "lookupswitch": (171, "LS"),
    "ireturn": (172, ""), "lreturn": (173, ""), "freturn": (174, ""),
    "dreturn": (175, ""), "areturn": (176, ""), "return": (177, ""),
    "getstatic": (178, "C2"), "putstatic": (179, "C2"),
    "getfield": (180, "C2"), "putfield": (181, "C2"),
    "invokevirtual": (182, "C2"), "invokespecial": (183, "C2"),
    "invokestatic": (184, "C2"), "invokeinterface": (185, "II"),
    "new": (187, "C2"), "newarray": (188, "AT"), "anewarray": (189, "C2"),
    "arraylength": (190, ""), "athrow": (191, ""),
    "checkcast": (192, "C2"), "instanceof": (193, "C2"),
    "monitorenter": (194, ""), "monitorexit": (195, ""),
    "multianewarray": (197, "MA"),
    "ifnull": (198, "B2"), "ifnonnull": (199, "B2"),
    "goto_w": (200, "B4"), "jsr_w": (201, "B4"),
}

# _n shortcut forms
for base, code in (("iload", 26), ("lload", 30), ("fload", 34), ("dload", 38),
                   ("aload", 42), ("istore", 59), ("lstore", 63), ("fstore", 67),
                   ("dstore", 71), ("astore", 75)):
    for n in range(4):
        OPS[f"{base}_{n}"] = (code + n, "")

# stack effect in slots (pops, pushes); None = descriptor-driven
EFFECTS = {
    "nop": (0, 0), "aconst_null": (0, 1), "bipush": (0, 1), "sipush": (0, 1),
    "ldc": (0, 1), "ldc_w": (0, 1), "ldc2_w": (0, 2),
    "iaload": (2, 1), "laload": (2, 2), "faload": (2, 1), "daload": (2, 2),
    "aaload": (2, 1), "baload": (2, 1), "caload": (2, 1), "saload": (2, 1),
    "iastore": (3, 0), "lastore": (4, 0), "fastore": (3, 0), "dastore": (4, 0),
    "aastore": (3, 0), "bastore": (3, 0), "castore": (3, 0), "sastore": (3, 0),
    "pop": (1, 0), "pop2": (2, 0), "dup": (1, 2), "dup_x1": (2, 3), "dup_x2": (3, 4),
    "dup2": (2, 4), "dup2_x1": (3, 5), "dup2_x2": (4, 6), "swap": (2, 2),
    "iinc": (0, 0),
    "lcmp": (4, 1), "fcmpl": (2, 1), "fcmpg": (2, 1), "dcmpl": (4, 1), "dcmpg": (4, 1),
    "ifeq": (1, 0), "ifne": (1, 0), "iflt": (1, 0), "ifge": (1, 0), "ifgt": (1, 0),
    "ifle": (1, 0),
    "if_icmpeq": (2, 0), "if_icmpne": (2, 0), "if_icmplt": (2, 0), "if_icmpge": (2, 0),
    "if_icmpgt": (2, 0), "if_icmple": (2, 0), "if_acmpeq": (2, 0), "if_acmpne": (2, 0),
    "goto": (0, 0), "jsr": (0, 1), "ret": (0, 0), "goto_w": (0, 0), "jsr_w": (0, 1),
    "tableswitch": (1, 0), "lookupswitch": (1, 0),
    "ireturn": (1, 0), "lreturn": (2, 0), "freturn": (1, 0), "dreturn": (2, 0),
    "areturn": (1, 0), "return": (0, 0),
    "new": (0, 1), "newarray": (1, 1), "anewarray": (1, 1), "arraylength": (1, 1),
    "athrow": (1, 0), "checkcast": (1, 1), "instanceof": (1, 1),
    "monitorenter": (1, 0), "monitorexit": (1, 0),
    "ifnull": (1, 0), "ifnonnull": (1, 0),
}
for name in ("iload", "fload", "aload"):
    EFFECTS[name] = (0, 1)
for name in ("lload", "dload"):
    EFFECTS[name] = (0, 2)
for name in ("istore", "fstore", "astore"):
    EFFECTS[name] = (1, 0)
for name in ("lstore", "dstore"):
    EFFECTS[name] = (2, 0)
for n in range(4):
    for name, eff in (("iload", (0, 1)), ("fload", (0, 1)), ("aload", (0, 1)),
                      ("lload", (0, 2)), ("dload", (0, 2)),
                      ("istore", (1, 0)), ("fstore", (1, 0)), ("astore", (1, 0)),
                      ("lstore", (2, 0)), ("dstore", (2, 0))):
        EFFECTS[f"{name}_{n}"] = eff
for group, eff in ((("iconst_m1", "iconst_0", "iconst_1", "iconst_2", "iconst_3",
                     "iconst_4", "iconst_5", "fconst_0", "fconst_1", "fconst_2"), (0, 1)),
                   (("lconst_0", "lconst_1", "dconst_0", "dconst_1"), (0, 2))):
    for name in group:
        EFFECTS[name] = eff
for name in ("iadd", "isub", "imul", "idiv", "irem", "ishl", "ishr", "iushr",
             "iand", "ior", "ixor", "fadd", "fsub", "fmul", "fdiv", "frem"):
    EFFECTS[name] = (2, 1)
for name in ("ladd", "lsub", "lmul", "ldiv", "lrem", "land", "lor", "lxor",
             "dadd", "dsub", "dmul", "ddiv", "drem"):
    EFFECTS[name] = (4, 2)
for name in ("lshl", "lshr", "lushr"):
    EFFECTS[name] = (3, 2)
for name in ("ineg", "fneg", "i2f", "f2i", "i2b", "i2c", "i2s"):
    EFFECTS[name] = (1, 1)
for name in ("lneg", "dneg", "l2d", "d2l"):
    EFFECTS[name] = (2, 2)
for name in ("i2l", "i2d", "f2l", "f2d"):
    EFFECTS[name] = (1, 2)
for name in ("l2i", "l2f", "d2i", "d2f"):
    EFFECTS[name] = (2, 1)

TERMINAL = {"goto", "goto_w", "ret", "tableswitch", "lookupswitch", "ireturn",
            "lreturn", "freturn", "dreturn", "areturn", "return", "athrow"}
BRANCHES = {name for name, (_, kind) in OPS.items() if kind in ("B2", "B4")}


class Code:
    """Symbolic method body: a list of instruction tuples and pseudo-ops.

    Pseudo-ops: ('label', name) and ('line', number).
    CP-referencing ops take symbolic operands resolved through the pool:
      ('ldc', ('int', 5) | ('float', 1.5) | ('str', 'x')), ('ldc2_w', ('long', v)|('double', v)),
      ('getfield', owner, name, desc), ('invokevirtual', owner, name, desc),
      ('new', cls), ('checkcast', cls), ('invokeinterface', owner, name, desc),
      ('tableswitch', default_label, low, [labels]),
      ('lookupswitch', default_label, [(key, label), ...]),
      ('multianewarray', cls, dims)
    """

    def __init__(self, items):
        self.items = items


def resolve_cp(pool, op, operands):
    if op in ("ldc", "ldc_w", "ldc2_w"):
        kind, val = operands[0]
        if kind == "int":
            return pool.integer(val)
        if kind == "float":
            return pool.float_(val)
        if kind == "str":
            return pool.string(val)
        if kind == "long":
            return pool.long_(val)
        if kind == "double":
            return pool.double_(val)
        raise ValueError(kind)
    if op in ("getstatic", "putstatic", "getfield", "putfield"):
        return pool.fieldref(*operands)
    if op in ("invokevirtual", "invokespecial", "invokestatic"):
        return pool.methodref(*operands)
    if op == "invokeinterface":
        return pool.imethodref(*operands)
    if op in ("new", "checkcast", "instanceof", "anewarray", "multianewarray"):
        return pool.cls(operands[0])
    raise ValueError(op)


def assemble_code(pool, items):
    """Two passes: layout (labels -> pcs), then emission.

    Returns (bytes, labels dict, lines list[(pc, line)], member_descs dict used
    for stack effects).
    """
    # Pass 1: sizes. Switch padding depends on pc, so iterate to fixpoint.
    sizes = {}

    def insn_size(i, op, operands, pc):
        _, kind = OPS[op]
        if kind == "":
            return 1
        if kind in ("L1", "I1", "C1", "AT"):
            return 2
        if kind in ("I2", "C2", "B2"):
            return 3
        if kind == "B4":
            return 5
        if kind == "IINC":
            return 3
        if kind == "II":
            return 5
        if kind == "MA":
            return 4
        if kind == "TS":
            pad = (4 - ((pc + 1) % 4)) % 4
            return 1 + pad + 12 + 4 * len(operands[2])
        if kind == "LS":
            pad = (4 - ((pc + 1) % 4)) % 4
            return 1 + pad + 8 + 8 * len(operands[1])
        raise ValueError(kind)

    labels = {}
    while True:
        pc = 0
        new_labels = {}
        for idx, item in enumerate(items):
            if item[0] == "label":
                new_labels[item[1]] = pc
                continue
            if item[0] == "line":
                continue
            op, operands = item[0], item[1:]
            sizes[idx] = insn_size(idx, op, operands, pc)
            pc += sizes[idx]
        if new_labels == labels:
            break
        labels = new_labels

    # Pass 2: emit.
    out = bytearray()
    lines = []
    pc = 0
    for idx, item in enumerate(items):
        if item[0] == "label":
            continue
        if item[0] == "line":
            lines.append((pc, item[1]))
            continue
        op, operands = item[0], item[1:]
        code, kind = OPS[op]
        start = pc
        out.append(code)
        if kind == "":
            pass
        elif kind == "L1":
            out.append(operands[0])
        elif kind == "I1":
            out += struct.pack(">b", operands[0])
        elif kind == "I2":
            out += struct.pack(">h", operands[0])
        elif kind == "C1":
            cp = resolve_cp(pool, op, operands)
            assert cp <= 255, f"{op} pool index {cp} needs ldc_w"
            out.append(cp)
        elif kind == "C2":
            out += struct.pack(">H", resolve_cp(pool, op, operands))
        elif kind == "B2":
            out += struct.pack(">h", labels[operands[0]] - start)
        elif kind == "B4":
            out += struct.pack(">i", labels[operands[0]] - start)
        elif kind == "AT":
            out.append(operands[0])
        elif kind == "IINC":
            out.append(operands[0])
            out += struct.pack(">b", operands[1])
        elif kind == "II":
            cp = resolve_cp(pool, op, operands)
            count = 1 + arg_slots(operands[2])
            out += struct.pack(">HBB", cp, count, 0)
        elif kind == "MA":
            cp = pool.cls(operands[0])
            out += struct.pack(">HB", cp, operands[1])
        elif kind == "TS":
            default, low, targets = operands
            pad = (4 - ((start + 1) % 4)) % 4
            out += b"\x00" * pad
            out += struct.pack(">iii", labels[default] - start, low,
                               low + len(targets) - 1)
            for t in targets:
                out += struct.pack(">i", labels[t] - start)
        elif kind == "LS":
            default, pairs = operands
            pad = (4 - ((start + 1) % 4)) % 4
            out += b"\x00" * pad
            out += struct.pack(">ii", labels[default] - start, len(pairs))
            for key, t in sorted(pairs):
                out += struct.pack(">ii", key, labels[t] - start)
        pc = start + sizes[idx]
    return bytes(out), labels, lines


def compute_max_stack(items, labels, handlers, member_descs):
    """Worklist depth fixpoint mirroring the engine: entry 0, handlers 1."""
    insns = [it for it in items if it[0] not in ("label", "line")]
    # map: instruction index in insns -> label names attached right before it
    label_at = {}
    k = 0
    for it in items:
        if it[0] == "label":
            label_at.setdefault(k, []).append(it[1])
        elif it[0] != "line":
            k += 1
    name_to_index = {}
    for idx, names in label_at.items():
        for n in names:
            name_to_index[n] = idx

    def effect(item):
        op = item[0]
        if op in EFFECTS:
            return EFFECTS[op]
        if op in ("getstatic", "putstatic", "getfield", "putfield"):
            w = 2 if item[3] in ("J", "D") else 1
            if op == "getstatic":
                return (0, w)
            if op == "putstatic":
                return (w, 0)
            if op == "getfield":
                return (1, w)
            return (1 + w, 0)
        if op in ("invokevirtual", "invokespecial", "invokeinterface"):
            return (1 + arg_slots(item[3]), ret_width(item[3]))
        if op == "invokestatic":
            return (arg_slots(item[3]), ret_width(item[3]))
        if op == "multianewarray":
            return (item[2], 1)
        raise ValueError(op)

    depth = {}
    work = [(0, 0)] if insns else []
    for h in handlers:
        work.append((name_to_index[h[2]], 1))
    best = 0
    while work:
        pos, d = work.pop()
        if pos in depth:
            assert depth[pos] == d, f"inconsistent depth at {pos}"
            continue
        depth[pos] = d
        best = max(best, d)
        item = insns[pos]
        op = item[0]
        pops, pushes = effect(item)
        nd = d - pops + pushes
        assert d - pops >= 0, f"underflow at {pos} ({op})"
        best = max(best, nd)
        if op == "tableswitch":
            work.append((name_to_index[item[1]], nd))
            for t in item[3]:
                work.append((name_to_index[t], nd))
            continue
        if op == "lookupswitch":
            work.append((name_to_index[item[1]], nd))
            for _, t in item[2]:
                work.append((name_to_index[t], nd))
            continue
        if op in BRANCHES:
            work.append((name_to_index[item[1]], nd))
            if op in ("jsr", "jsr_w"):
                if pos + 1 < len(insns):
                    work.append((pos + 1, nd - 1))
                continue
        if op not in TERMINAL and pos + 1 < len(insns):
            work.append((pos + 1, nd))
    return best


# Verification type tokens for hand-authored stack map frames.
def encode_vtype(pool, labels, v):
    if v == "top":
        return b"\x00"
    if v == "int":
        return b"\x01"
    if v == "float":
        return b"\x02"
    if v == "double":
        return b"\x03"
    if v == "long":
        return b"\x04"
    if v == "null":
        return b"\x05"
    if v == "uninit_this":
        return b"\x06"
    if isinstance(v, tuple) and v[0] == "obj":
        return struct.pack(">BH", 7, pool.cls(v[1]))
    if isinstance(v, tuple) and v[0] == "uninit":
        return struct.pack(">BH", 8, labels[v[1]])
    raise ValueError(v)


def encode_smt(pool, labels, frames):
    """frames: list of (kind, at_label, ...), canonical encodings."""
    out = struct.pack(">H", len(frames))
    prev = -1
    for f in frames:
        kind, at = f[0], labels[f[1]]
        delta = at if prev < 0 else at - prev - 1
        assert delta >= 0
        prev = at
        if kind == "same":
            if delta <= 63:
                out += struct.pack(">B", delta)
            else:
                out += struct.pack(">BH", 251, delta)
        elif kind == "same1":
            if delta <= 63:
                out += struct.pack(">B", 64 + delta)
            else:
                out += struct.pack(">BH", 247, delta)
            out += encode_vtype(pool, labels, f[2])
        elif kind == "chop":
            out += struct.pack(">BH", 251 - f[2], delta)
        elif kind == "append":
            out += struct.pack(">BH", 251 + len(f[2]), delta)
            for v in f[2]:
                out += encode_vtype(pool, labels, v)
        elif kind == "full":
            out += struct.pack(">BH", 255, delta)
            out += struct.pack(">H", len(f[2]))
            for v in f[2]:
                out += encode_vtype(pool, labels, v)
            out += struct.pack(">H", len(f[3]))
            for v in f[3]:
                out += encode_vtype(pool, labels, v)
        else:
            raise ValueError(kind)
    return out


class Method:
    def __init__(self, name, desc, items, max_locals, flags=0x0008, handlers=(),
                 lvt=(), smt=None, max_stack=None, extra_code_attrs=()):
        self.name = name
        self.desc = desc
        self.items = items
        self.max_locals = max_locals
        self.flags = flags          # default: static
        self.handlers = handlers    # (from_label, to_label|None, handler_label, cls|None)
        self.lvt = lvt              # (from_label, to_label|None, name, desc, slot)
        self.smt = smt              # list of frame tuples, or None
        self.max_stack = max_stack  # override; None = computed
        self.extra_code_attrs = extra_code_attrs  # (name, payload bytes)


class Clazz:
    def __init__(self, name, methods, super_name="java/lang/Object", version=(0, 52),
                 fields=(), flags=0x0021, interfaces=(), source_file=None,
                 class_attrs=(), no_lines=False):
        self.name = name
        self.super_name = super_name
        self.version = version  # (minor, major)
        self.methods = methods
        self.fields = fields    # (name, desc, flags) or (name, desc, flags, ('const', v))
        self.flags = flags
        self.interfaces = interfaces
        self.source_file = source_file
        self.class_attrs = class_attrs  # (name, payload)
        self.no_lines = no_lines


def attr(pool, name, payload):
    return struct.pack(">HI", pool.utf8(name), len(payload)) + payload


def assemble(clazz):
    pool = Pool()
    this_idx = pool.cls(clazz.name)
    super_idx = pool.cls(clazz.super_name) if clazz.super_name else 0
    iface_idx = [pool.cls(i) for i in clazz.interfaces]

    field_blobs = []
    for f in clazz.fields:
        name, desc, flags = f[0], f[1], f[2]
        attrs = b""
        count = 0
        if len(f) > 3 and f[3][0] == "const":
            v = f[3][1]
            cv = pool.integer(v) if isinstance(v, int) else pool.string(v)
            attrs += attr(pool, "ConstantValue", struct.pack(">H", cv))
            count += 1
        field_blobs.append(
            struct.pack(">HHHH", flags, pool.utf8(name), pool.utf8(desc), count) + attrs)

    method_blobs = []
    for m in clazz.methods:
        code_bytes, labels, lines = assemble_code(pool, m.items)
        max_stack = m.max_stack
        if max_stack is None:
            max_stack = compute_max_stack(m.items, labels, m.handlers, {})
        body = struct.pack(">HHI", max_stack, m.max_locals, len(code_bytes)) + code_bytes
        body += struct.pack(">H", len(m.handlers))
        for h in m.handlers:
            from_pc = labels[h[0]]
            to_pc = len(code_bytes) if h[1] is None else labels[h[1]]
            catch = pool.cls(h[3]) if h[3] else 0
            body += struct.pack(">HHHH", from_pc, to_pc, labels[h[2]], catch)
        sub = []
        if lines and not clazz.no_lines:
            payload = struct.pack(">H", len(lines))
            for pc, line in lines:
                payload += struct.pack(">HH", pc, line)
            sub.append(attr(pool, "LineNumberTable", payload))
        if m.lvt:
            payload = struct.pack(">H", len(m.lvt))
            for from_l, to_l, vname, vdesc, slot in m.lvt:
                start = labels[from_l]
                end = len(code_bytes) if to_l is None else labels[to_l]
                payload += struct.pack(">HHHHH", start, end - start, pool.utf8(vname),
                                       pool.utf8(vdesc), slot)
            sub.append(attr(pool, "LocalVariableTable", payload))
        if m.smt is not None:
            sub.append(attr(pool, "StackMapTable", encode_smt(pool, labels, m.smt)))
        for name, payload in m.extra_code_attrs:
            sub.append(attr(pool, name, payload))
        body += struct.pack(">H", len(sub)) + b"".join(sub)
        method_blobs.append(
            struct.pack(">HHHH", m.flags, pool.utf8(m.name), pool.utf8(m.desc), 1)
            + attr(pool, "Code", body))

    class_attrs = []
    if clazz.source_file:
        class_attrs.append(attr(pool, "SourceFile",
                                struct.pack(">H", pool.utf8(clazz.source_file))))
    for name, payload in clazz.class_attrs:
        class_attrs.append(attr(pool, name, payload))

    out = struct.pack(">IHH", 0xCAFEBABE, clazz.version[0], clazz.version[1])
    out += pool.emit()
    out += struct.pack(">HHH", clazz.flags, this_idx, super_idx)
    out += struct.pack(">H", len(iface_idx))
    for i in iface_idx:
        out += struct.pack(">H", i)
    out += struct.pack(">H", len(field_blobs)) + b"".join(field_blobs)
    out += struct.pack(">H", len(method_blobs)) + b"".join(method_blobs)
    out += struct.pack(">H", len(class_attrs)) + b"".join(class_attrs)
    return out


def default_init(owner_super="java/lang/Object"):
    return Method("<init>", "()V", [
        ("line", 1),
        ("aload_0",),
        ("invokespecial", owner_super, "<init>", "()V"),
        ("return",),
    ], max_locals=1, flags=0x0001)


def write(path, data):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "wb") as f:
        f.write(data)

# ---------------------------------------------------------------- corpus fixtures


def fx_empty(version):
    return [Clazz("corpus/Empty", [default_init()], version=(0, version),
                  source_file="Empty.java")]


def fx_arith(version):
    m = Method("calc", "(II)I", [
        ("line", 10), ("iload_0",), ("iload_1",), ("iadd",), ("istore_2",),
        ("line", 11), ("iload_2",), ("iload_0",), ("imul",), ("istore_2",),
        ("line", 12), ("iload_2",), ("iload_1",), ("isub",), ("istore_2",),
        ("line", 13), ("iinc", 2, 1),
        ("line", 14), ("iload_2",), ("bipush", 7), ("irem",), ("ireturn",),
    ], max_locals=3, lvt=[("start", None, "a", "I", 0), ("start", None, "b", "I", 1),
                          ("start", None, "r", "I", 2)])
    m.items.insert(0, ("label", "start"))
    return [Clazz("corpus/Arith", [default_init(), m], version=(0, version))]


def fx_longarith(version):
    m = Method("mix", "(JJ)J", [
        ("line", 20), ("lload_0",), ("lload", 2), ("ladd",), ("lstore", 4),
        ("line", 21), ("lload", 4), ("ldc2_w", ("long", 86400000)), ("lmul",),
        ("lstore", 4),
        ("line", 22), ("lload", 4), ("lload_0",), ("lxor",), ("lreturn",),
    ], max_locals=6)
    return [Clazz("corpus/LongArith", [default_init(), m], version=(0, version))]


def fx_floats(version):
    m = Method("blend", "(FD)D", [
        ("line", 30), ("fload_0",), ("f2d",), ("dload_1",), ("dmul",), ("dstore", 3),
        ("line", 31), ("dload", 3), ("ldc2_w", ("double", 0.5)), ("dadd",), ("dstore", 3),
        ("line", 32), ("dload", 3), ("dneg",), ("dneg",), ("dreturn",),
    ], max_locals=5)
    return [Clazz("corpus/Floats", [default_init(), m], version=(0, version))]


def fx_branches(version):
    m = Method("clamp", "(I)I", [
        ("line", 40), ("iload_0",), ("ifge", "pos"),
        ("line", 41), ("iconst_0",), ("ireturn",),
        ("label", "pos"),
        ("line", 42), ("iload_0",), ("bipush", 100), ("if_icmple", "ok"),
        ("line", 43), ("bipush", 100), ("ireturn",),
        ("label", "ok"),
        ("line", 44), ("iload_0",), ("ireturn",),
    ], max_locals=1,
        smt=[("same", "pos"), ("same", "ok")] if version >= 50 else None)
    return [Clazz("corpus/Branches", [default_init(), m], version=(0, version))]


def fx_loops(version):
    # Loop-header line 51 compiles to two disjoint pc regions (init + test),
    # the classic javac for-loop shape.
    m = Method("sum", "(I)I", [
        ("line", 50), ("iconst_0",), ("istore_1",),
        ("line", 51), ("iconst_0",), ("istore_2",), ("goto", "test"),
        ("label", "body"),
        ("line", 52), ("iload_1",), ("iload_2",), ("iadd",), ("istore_1",),
        ("line", 51), ("iinc", 2, 1),
        ("label", "test"), ("iload_2",), ("iload_0",), ("if_icmplt", "body"),
        ("line", 53), ("iload_1",), ("ireturn",),
    ], max_locals=3,
        smt=[("append", "body", ["int", "int"]), ("same", "test")] if version >= 50 else None,
        lvt=[("L0", None, "n", "I", 0)])
    m.items.insert(0, ("label", "L0"))
    return [Clazz("corpus/Loops", [default_init(), m], version=(0, version))]


def fx_switches(version):
    table = Method("pick", "(I)I", [
        ("line", 60), ("iload_0",),
        ("tableswitch", "dflt", 1, ["one", "two", "three"]),
        ("label", "one"), ("line", 61), ("bipush", 10), ("ireturn",),
        ("label", "two"), ("line", 62), ("bipush", 20), ("ireturn",),
        ("label", "three"), ("line", 63), ("bipush", 30), ("ireturn",),
        ("label", "dflt"), ("line", 64), ("iconst_m1",), ("ireturn",),
    ], max_locals=1,
        smt=[("same", "one"), ("same", "two"), ("same", "three"),
             ("same", "dflt")] if version >= 50 else None)
    lookup = Method("lookup", "(I)I", [
        ("line", 70), ("iload_0",),
        ("lookupswitch", "miss", [(-100, "neg"), (0, "zero"), (1000, "big")]),
        ("label", "neg"), ("line", 71), ("iconst_m1",), ("ireturn",),
        ("label", "zero"), ("line", 72), ("iconst_0",), ("ireturn",),
        ("label", "big"), ("line", 73), ("sipush", 999), ("ireturn",),
        ("label", "miss"), ("line", 74), ("bipush", 42), ("ireturn",),
    ], max_locals=1,
        smt=[("same", "neg"), ("same", "zero"), ("same", "big"),
             ("same", "miss")] if version >= 50 else None)
    return [Clazz("corpus/Switches", [default_init(), table, lookup], version=(0, version))]


def fx_trycatch(version):
    m = Method("safeDiv", "(II)I", [
        ("label", "tryStart"),
        ("line", 80), ("bipush", 10), ("pop",), ("iload_0",), ("iload_1",),
        ("idiv",), ("istore_2",),
        ("label", "tryEnd"),
        ("line", 81), ("iload_2",), ("ireturn",),
        ("label", "handler"),
        ("line", 82), ("astore_2",),
        ("line", 83), ("iconst_m1",), ("ireturn",),
    ], max_locals=3,
        handlers=[("tryStart", "tryEnd", "handler", "java/lang/ArithmeticException")],
        smt=[("full", "handler", ["int", "int"],
              [("obj", "java/lang/ArithmeticException")])] if version >= 50 else None)
    return [Clazz("corpus/TryCatch", [default_init(), m], version=(0, version))]


def fx_casts(version):
    # Erasure-style code: Object in, checkcast out.
    m = Method("first", "(Ljava/lang/Object;)Ljava/lang/String;", [
        ("line", 90), ("aload_0",), ("checkcast", "java/lang/String"), ("astore_1",),
        ("line", 91), ("aload_1",), ("areturn",),
    ], max_locals=2,
        lvt=[("L0", None, "o", "Ljava/lang/Object;", 0),
             ("mid", None, "s", "Ljava/lang/String;", 1)])
    m.items.insert(0, ("label", "L0"))
    m.items.insert(5, ("label", "mid"))
    probe = Method("probe", "(Ljava/lang/Object;)Z", [
        ("line", 95), ("aload_0",), ("instanceof", "java/lang/String"), ("ireturn",),
    ], max_locals=1)
    return [Clazz("corpus/Casts", [default_init(), m, probe], version=(0, version))]


def fx_fields(version):
    clinit = Method("<clinit>", "()V", [
        ("line", 5), ("bipush", 17), ("putstatic", "corpus/Fields", "SEED", "I"),
        ("return",),
    ], max_locals=0, flags=0x0008)
    m = Method("bump", "(I)I", [
        ("line", 100), ("aload_0",), ("iload_1",),
        ("putfield", "corpus/Fields", "count", "I"),
        ("line", 101), ("aload_0",), ("getfield", "corpus/Fields", "count", "I"),
        ("getstatic", "corpus/Fields", "SEED", "I"), ("iadd",), ("ireturn",),
    ], max_locals=2, flags=0x0001)
    return [Clazz("corpus/Fields", [default_init(), clinit, m],
                  fields=[("count", "I", 0x0002), ("SEED", "I", 0x000A),
                          ("LIMIT", "I", 0x0019, ("const", 512))],
                  version=(0, version))]


def fx_invokes(version):
    iface = Clazz("corpus/Sink", [], flags=0x0601, version=(0, version))
    # interfaces carry no <init>; add one abstract method entry-free body?
    # An interface method must be abstract here; simplest: no methods at all.
    impl = Clazz("corpus/Pipe", [
        default_init(),
        Method("push", "(I)I", [
            ("line", 110), ("iload_1",), ("iconst_2",), ("imul",), ("ireturn",),
        ], max_locals=2, flags=0x0001),
        Method("relay", "(Lcorpus/Sink;I)I", [
            ("line", 115), ("aload_0",), ("iload_2",),
            ("invokevirtual", "corpus/Pipe", "push", "(I)I"),
            ("istore_3",),
            ("line", 116), ("aload_1",), ("iload_3",),
            ("invokeinterface", "corpus/Sink", "accept", "(I)I"),
            ("ireturn",),
        ], max_locals=4, flags=0x0001),
        Method("twice", "(I)I", [
            ("line", 120), ("iload_0",),
            ("invokestatic", "corpus/Pipe", "helper", "(I)I"),
            ("invokestatic", "corpus/Pipe", "helper", "(I)I"), ("ireturn",),
        ], max_locals=1),
        Method("helper", "(I)I", [
            ("line", 125), ("iload_0",), ("iconst_1",), ("iadd",), ("ireturn",),
        ], max_locals=1),
    ], interfaces=("corpus/Sink",), version=(0, version))
    return [iface, impl]


def fx_arrays(version):
    m = Method("fill", "(I)I", [
        ("line", 130), ("iload_0",), ("newarray", 10), ("astore_1",),
        ("line", 131), ("aload_1",), ("iconst_0",), ("bipush", 9), ("iastore",),
        ("line", 132), ("aload_1",), ("iconst_0",), ("iaload",),
        ("aload_1",), ("arraylength",), ("iadd",), ("ireturn",),
    ], max_locals=2)
    objs = Method("names", "()Ljava/lang/String;", [
        ("line", 140), ("iconst_2",), ("anewarray", "java/lang/String"), ("astore_0",),
        ("line", 141), ("aload_0",), ("iconst_0",), ("ldc", ("str", "admin")),
        ("aastore",),
        ("line", 142), ("aload_0",), ("iconst_0",), ("aaload",), ("areturn",),
    ], max_locals=1)
    grid = Method("grid", "()I", [
        ("line", 145), ("iconst_2",), ("iconst_3",),
        ("multianewarray", "[[I", 2), ("arraylength",), ("ireturn",),
    ], max_locals=0)
    return [Clazz("corpus/Arrays", [default_init(), m, objs, grid], version=(0, version))]


def fx_subtypes(version):
    parent = Clazz("corpus/Parser", [
        default_init(),
        Method("parse", "(I)I", [
            ("line", 150), ("iload_1",), ("ireturn",),
        ], max_locals=2, flags=0x0001),
    ], version=(0, version))
    secure = Clazz("corpus/SecureParser", [
        default_init("corpus/Parser"),
        Method("parse", "(I)I", [
            ("line", 160), ("iload_1",), ("ifge", "ok"),
            ("iconst_0",), ("ireturn",),
            ("label", "ok"), ("iload_1",), ("ireturn",),
        ], max_locals=2, flags=0x0001,
            smt=[("same", "ok")] if version >= 50 else None),
    ], super_name="corpus/Parser", version=(0, version))
    user = Clazz("corpus/ParserUser", [
        default_init(),
        Method("run", "(I)I", [
            ("line", 170), ("new", "corpus/Parser"), ("dup",),
            ("invokespecial", "corpus/Parser", "<init>", "()V"), ("astore_1",),
            ("line", 171), ("aload_1",), ("iload_0",),
            ("invokevirtual", "corpus/Parser", "parse", "(I)I"), ("ireturn",),
        ], max_locals=2),
    ], version=(0, version))
    return [parent, secure, user]


def fx_stackjuggle(version):
    m = Method("juggle", "(II)I", [
        ("line", 180), ("iload_0",), ("iload_1",), ("swap",), ("isub",), ("istore_2",),
        ("line", 181), ("iload_2",), ("dup",), ("imul",), ("istore_2",),
        ("line", 182), ("iload_0",), ("iload_1",), ("dup_x1",), ("iadd",), ("iadd",),
        ("istore_3",),
        ("line", 183), ("lconst_1",), ("dup2",), ("ladd",), ("l2i",), ("istore", 4),
        ("line", 184), ("iload_2",), ("iload_3",), ("iadd",), ("iload", 4), ("iadd",),
        ("ireturn",),
        ], max_locals=5)
    return [Clazz("corpus/StackJuggle", [default_init(), m], version=(0, version))]


def fx_conversions(version):
    m = Method("chain", "(I)D", [
        ("line", 190), ("iload_0",), ("i2b",), ("i2c",), ("i2s",), ("i2l",),
        ("l2f",), ("f2d",), ("d2i",), ("i2f",), ("f2l",), ("l2d",), ("dreturn",),
    ], max_locals=1)
    return [Clazz("corpus/Conversions", [default_init(), m], version=(0, version))]


def fx_monitors(version):
    m = Method("guarded", "(Ljava/lang/Object;I)I", [
        ("line", 200), ("aload_0",), ("monitorenter",),
        ("line", 201), ("aload_0",), ("monitorexit",),
        ("line", 202), ("iload_1",), ("ireturn",),
    ], max_locals=2)
    return [Clazz("corpus/Monitors", [default_init(), m], version=(0, version))]


def fx_wide(version):
    # Explicit wide forms come out of the assembler only via big slot numbers,
    # which this assembler encodes with the wide prefix by hand.
    items = [
        ("line", 210), ("iload_0",), ("istore_1",),
        ("line", 211), ("iload_1",), ("ireturn",),
    ]
    m = Method("narrow", "(I)I", items, max_locals=2)
    # A second method exercising explicit non-shortcut encodings.
    explicit = Method("explicit", "(I)I", [
        ("line", 215), ("iload", 0), ("istore", 1),
        ("line", 216), ("iload", 1), ("ireturn",),
    ], max_locals=2)
    return [Clazz("corpus/Slots", [default_init(), m, explicit], version=(0, version))]


def fx_ldczoo(version):
    # Enough string constants to push later ldc operands past index 255.
    methods = [default_init()]
    pad_items = [("line", 220)]
    for i in range(90):
        pad_items += [("ldc", ("str", f"pad-{i:03d}")), ("pop",)]
    pad_items += [("return",)]
    methods.append(Method("pad", "()V", pad_items, max_locals=0))
    tail = Method("tail", "()Ljava/lang/String;", [
        ("line", 221), ("ldc_w", ("str", "needs-wide-index")), ("areturn",),
    ], max_locals=0)
    nums = Method("nums", "()D", [
        ("line", 222), ("ldc", ("int", 123456)), ("pop",),
        ("ldc", ("float", 2.75)), ("pop",),
        ("ldc2_w", ("long", 981234567890)), ("pop2",),
        ("ldc2_w", ("double", 3.25)), ("dreturn",),
    ], max_locals=0)
    methods += [tail, nums]
    return [Clazz("corpus/LdcZoo", [methods[0], methods[3], methods[1], methods[2]],
                  version=(0, version))]


def fx_longmethod(version):
    # Big straight-line body with a goto_w across it: branch relocation and
    # 32-bit displacement handling.
    items = [("line", 230), ("goto_w", "tail")]
    for i in range(9000):
        items += [("iconst_1",), ("pop",)]
    items += [("label", "mid"), ("iconst_2",), ("pop",), ("goto_w", "out"),
              ("label", "tail"), ("line", 231), ("goto_w", "mid"),
              ("label", "out"), ("line", 232), ("iconst_0",), ("ireturn",)]
    m = Method("marathon", "()I", items, max_locals=0,
               smt=[("same", "mid"), ("same", "tail"), ("same", "out")]
               if version >= 50 else None)
    return [Clazz("corpus/LongMethod", [default_init(), m], version=(0, version))]


def fx_jsr():
    # Legacy subroutine, pre-frame class version only.
    m = Method("legacy", "(I)I", [
        ("line", 240), ("jsr", "sub"),
        ("line", 241), ("iload_0",), ("ireturn",),
        ("label", "sub"), ("astore_1",), ("iinc", 0, 1), ("ret", 1),
    ], max_locals=2, max_stack=1)
    return [Clazz("corpus/Legacy", [default_init(), m], version=(3, 45))]


def fx_attrs(version):
    m = Method("id", "(I)I", [
        ("line", 250), ("iload_0",), ("ireturn",),
    ], max_locals=1, extra_code_attrs=[("X-CodeNote", b"\x01\x02\x03")])
    return [Clazz("corpus/Opaque", [default_init(), m],
                  fields=[("MODE", "I", 0x0019, ("const", 3))],
                  source_file="Opaque.java",
                  class_attrs=[("X-Custom", b"\xDE\xAD\xBE\xEF\x00"),
                               ("Deprecated", b"")],
                  version=(0, version))]


def fx_bools(version):
    m = Method("toggle", "()I", [
        ("label", "L0"),
        ("line", 260), ("iconst_0",), ("istore_0",),
        ("label", "L1"),
        ("line", 261), ("iload_0",), ("ireturn",),
    ], max_locals=1,
        lvt=[("L1", None, "flag", "Z", 0)])
    return [Clazz("corpus/Bools", [default_init(), m], version=(0, version))]


def fx_nolines(version):
    m = Method("quiet", "(II)I", [
        ("iload_0",), ("iload_1",), ("iand",), ("ireturn",),
    ], max_locals=2)
    return [Clazz("corpus/NoLines", [default_init(), m], version=(0, version),
                  no_lines=True)]


def weird_unsorted_lnt():
    # LineNumberTable entries deliberately out of order: legal, canonicalized
    # on decode, raw bytes still round-trip bit-exactly.
    m = Method("f", "(I)I", [
        ("line", 300), ("iload_0",), ("iconst_1",), ("iadd",), ("istore_0",),
        ("line", 299), ("iload_0",), ("ireturn",),
    ], max_locals=1)
    cls = Clazz("weird/UnsortedLnt", [default_init(), m], version=(0, 49))
    data = assemble(cls)
    # Swap the two LNT entries in the raw bytes: find the table and reverse it.
    # The LNT payload is  u2 count, then (u2 pc, u2 line)*: count==2 here.
    marker = struct.pack(">HHHHH", 2, 0, 300, 4, 299)
    swapped = struct.pack(">HHHHH", 2, 4, 299, 0, 300)
    assert marker in data
    return data.replace(marker, swapped)


# ---------------------------------------------------------------- e2e fixtures


def e2e_t1():
    roll = Method("roll", "()I", [
        ("line", 10), ("new", "java/util/Random"), ("dup",),
        ("invokespecial", "java/util/Random", "<init>", "()V"), ("astore_0",),
        ("line", 11), ("aload_0",),
        ("invokevirtual", "java/util/Random", "nextInt", "()I"), ("ireturn",),
    ], max_locals=1)
    ok = Method("ok", "()I", [("line", 20), ("iconst_3",), ("ireturn",)], max_locals=0)
    return [Clazz("fix/T1Rng", [default_init(), roll, ok])], [
        "test pov fix/T1Rng roll ()I expect noti:42",
        "test t1 fix/T1Rng ok ()I expect i:3",
    ], ["fix/T1Rng:10"], ["pov"]


def e2e_t2():
    f = Method("f", "(I)I", [
        ("label", "L0"),
        ("line", 10), ("iload_0",), ("istore_1",),
        ("label", "L1"),
        ("line", 11), ("bipush", 100), ("iload_1",), ("iconst_1",), ("iadd",),
        ("idiv",), ("ireturn",),
    ], max_locals=2,
        lvt=[("L0", None, "x", "I", 0), ("L1", None, "d", "I", 1)])
    return [Clazz("fix/T2Clamp", [default_init(), f])], [
        "test pov fix/T2Clamp f (I)I i:-1 expect i:100",
        "test t1 fix/T2Clamp f (I)I i:4 expect i:20",
    ], ["fix/T2Clamp:11"], ["pov"]


def e2e_t3():
    init = Method("<init>", "()V", [
        ("line", 1), ("aload_0",),
        ("invokespecial", "java/lang/Object", "<init>", "()V"),
        ("line", 2), ("aload_0",), ("iconst_0",),
        ("putfield", "fix/T3Guard", "state", "I"),
        ("return",),
    ], max_locals=1, flags=0x0001)
    guard = Method("guard", "()V", [
        ("line", 20), ("aload_0",), ("iconst_1",),
        ("putfield", "fix/T3Guard", "state", "I"),
        ("return",),
    ], max_locals=1, flags=0x0001)
    run = Method("run", "(I)I", [
        ("line", 30), ("bipush", 10), ("aload_0",),
        ("getfield", "fix/T3Guard", "state", "I"), ("idiv",), ("ireturn",),
    ], max_locals=2, flags=0x0001)
    safe = Method("safe", "()I", [
        ("line", 40), ("iconst_5",), ("ireturn",),
    ], max_locals=1, flags=0x0001)
    return [Clazz("fix/T3Guard", [init, guard, run, safe],
                  fields=[("state", "I", 0x0002)])], [
        "test pov fix/T3Guard run (I)I i:1 expect i:10",
        "test t1 fix/T3Guard safe ()I expect i:5",
    ], ["fix/T3Guard:30"], ["pov"]


def e2e_t4():
    f = Method("len", "(Ljava/lang/Object;)I", [
        ("line", 10), ("iconst_0",), ("istore_1",),
        ("line", 11), ("aload_0",), ("checkcast", "java/lang/String"),
        ("invokevirtual", "java/lang/String", "length", "()I"), ("istore_1",),
        ("line", 12), ("iload_1",), ("ireturn",),
    ], max_locals=2)
    return [Clazz("fix/T4Cast", [default_init(), f])], [
        "test pov fix/T4Cast len (Ljava/lang/Object;)I obj:java/lang/Integer expect i:0",
        "test t1 fix/T4Cast len (Ljava/lang/Object;)I s:abc expect i:3",
    ], ["fix/T4Cast:11"], ["pov"]


def e2e_t5():
    f = Method("f", "(II)I", [
        ("label", "L0"),
        ("line", 10), ("iload_0",), ("ifeq", "Lelse"),
        ("line", 11), ("iconst_1",), ("ireturn",),
        ("label", "Lelse"),
        ("line", 12), ("iconst_0",), ("ireturn",),
    ], max_locals=2,
        lvt=[("L0", None, "a", "I", 0), ("L0", None, "b", "I", 1)])
    return [Clazz("fix/T5Cond", [default_init(), f], version=(0, 49))], [
        "test pov fix/T5Cond f (II)I i:0 i:5 expect i:1",
        "test t1 fix/T5Cond f (II)I i:0 i:0 expect i:0",
        "test t2 fix/T5Cond f (II)I i:7 i:7 expect i:1",
    ], ["fix/T5Cond:10"], ["pov"]


def e2e_t6():
    f = Method("f", "(I)I", [
        ("label", "L0"),
        ("line", 10), ("ldc", ("float", 2.5)), ("fstore_1",),
        ("label", "L1"),
        ("line", 11), ("iload_0",), ("istore_2",),
        ("label", "L2"),
        ("line", 12), ("fload_1",), ("fconst_2",), ("fmul",), ("f2i",), ("ireturn",),
    ], max_locals=3,
        lvt=[("L0", None, "x", "I", 0), ("L1", None, "fl", "F", 1),
             ("L2", None, "i", "I", 2)])
    h = Method("h", "()I", [("line", 20), ("iconst_1",), ("ireturn",)], max_locals=0)
    return [Clazz("fix/T6Type", [default_init(), f, h])], [
        "test pov fix/T6Type f (I)I i:3 expect i:6",
        "test t1 fix/T6Type h ()I expect i:1",
    ], ["fix/T6Type:11"], ["pov"]


def e2e_t7():
    f = Method("f", "()I", [
        ("line", 10), ("iconst_4",), ("ireturn",),
    ], max_locals=0)
    return [Clazz("fix/T7Limit", [default_init(), f])], [
        "test pov fix/T7Limit f ()I expect i:5",
    ], ["fix/T7Limit:10"], ["pov"]


def e2e_t8():
    f = Method("f", "(II)I", [
        ("label", "L0"),
        ("line", 10), ("iload_0",), ("ireturn",),
    ], max_locals=2,
        lvt=[("L0", None, "a", "I", 0), ("L0", None, "b", "I", 1)])
    return [Clazz("fix/T8Swap", [default_init(), f])], [
        "test pov fix/T8Swap f (II)I i:2 i:9 expect i:9",
        "test t1 fix/T8Swap f (II)I i:3 i:3 expect i:3",
    ], ["fix/T8Swap:10"], ["pov"]


def e2e_t9():
    f = Method("f", "()I", [
        ("line", 10), ("aload_0",),
        ("invokevirtual", "fix/T9Call", "insecure", "()I"), ("ireturn",),
    ], max_locals=1, flags=0x0001)
    insecure = Method("insecure", "()I", [
        ("line", 20), ("bipush", 13), ("ireturn",),
    ], max_locals=1, flags=0x0001)
    secure = Method("secure", "()I", [
        ("line", 30), ("bipush", 42), ("ireturn",),
    ], max_locals=1, flags=0x0001)
    return [Clazz("fix/T9Call", [default_init(), f, insecure, secure])], [
        "test pov fix/T9Call f ()I expect i:42",
    ], ["fix/T9Call:10"], ["pov"]


def e2e_t10():
    f = Method("f", "(II)I", [
        ("line", 10), ("iload_0",), ("iload_1",), ("if_icmpeq", "Lret1"),
        ("line", 11), ("iconst_0",), ("ireturn",),
        ("label", "Lret1"),
        ("line", 12), ("iconst_1",), ("ireturn",),
    ], max_locals=2)
    g = Method("g", "()I", [("line", 20), ("bipush", 7), ("ireturn",)], max_locals=0)
    return [Clazz("fix/T10Cmp", [default_init(), f, g], version=(0, 49))], [
        "test pov fix/T10Cmp f (II)I i:1 i:2 expect i:1",
        "test t1 fix/T10Cmp g ()I expect i:7",
        "test t2 fix/T10Cmp f (II)I i:3 i:3 expect i:0",
    ], ["fix/T10Cmp:10"], ["pov"]


def e2e_t11():
    f = Method("f", "(I)I", [
        ("line", 10), ("iload_0",), ("istore_1",),
        ("line", 11), ("iconst_0",), ("istore_1",),
        ("line", 12), ("iload_1",), ("ireturn",),
    ], max_locals=2)
    h = Method("h", "()I", [("line", 20), ("iconst_2",), ("ireturn",)], max_locals=0)
    return [Clazz("fix/T11Extra", [default_init(), f, h])], [
        "test pov fix/T11Extra f (I)I i:5 expect i:5",
        "test t1 fix/T11Extra h ()I expect i:2",
    ], ["fix/T11Extra:11"], ["pov"]


def e2e_t12():
    clinit = Method("<clinit>", "()V", [
        ("line", 5), ("bipush", 9), ("putstatic", "fix/T12Ret", "GOOD", "I"),
        ("return",),
    ], max_locals=0)
    f = Method("f", "()I", [
        ("line", 10), ("iconst_0",), ("ireturn",),
    ], max_locals=0)
    return [Clazz("fix/T12Ret", [default_init(), clinit, f],
                  fields=[("GOOD", "I", 0x0009)])], [
        "test pov fix/T12Ret f ()I expect i:9",
    ], ["fix/T12Ret:10"], ["pov"]


def e2e_twopov():
    f = Method("f", "()I", [("line", 10), ("iconst_4",), ("ireturn",)], max_locals=0)
    g = Method("g", "()I", [("line", 20), ("bipush", 8), ("ireturn",)], max_locals=0)
    h = Method("h", "()I", [("line", 30), ("iconst_1",), ("ireturn",)], max_locals=0)
    return [Clazz("fix/TwoPov", [default_init(), f, g, h])], [
        "test pov1 fix/TwoPov f ()I expect i:5",
        "test pov2 fix/TwoPov g ()I expect i:9",
        "test t1 fix/TwoPov h ()I expect i:1",
    ], ["fix/TwoPov:10", "fix/TwoPov:20"], ["pov1", "pov2"]


# ---------------------------------------------------------------- main


def main():
    if len(sys.argv) != 2:
        print("usage: gen_fixtures.py <outdir>", file=sys.stderr)
        return 1
    out = sys.argv[1]
    count = 0

    corpus_fixtures = [
        fx_empty, fx_arith, fx_longarith, fx_floats, fx_branches, fx_loops,
        fx_switches, fx_trycatch, fx_casts, fx_fields, fx_invokes, fx_arrays,
        fx_subtypes, fx_stackjuggle, fx_conversions, fx_monitors, fx_wide,
        fx_ldczoo, fx_attrs, fx_bools, fx_nolines,
    ]
    for fx in corpus_fixtures:
        for version in (49, 52, 61):
            for cls in fx(version):
                name = cls.name.split("/")[-1]
                write(os.path.join(out, "corpus", f"{name}_v{version}.class"),
                      assemble(cls))
                count += 1
    # Extra version spread across the accepted window.
    for fx in (fx_empty, fx_arith, fx_branches, fx_fields, fx_casts, fx_arrays):
        for version in (45, 50, 55):
            for cls in fx(version):
                name = cls.name.split("/")[-1]
                write(os.path.join(out, "corpus", f"{name}_v{version}.class"),
                      assemble(cls))
                count += 1
    for cls in fx_longmethod(49) + fx_longmethod(52):
        name = cls.name.split("/")[-1]
        write(os.path.join(out, "corpus", f"{name}_v{cls.version[1]}.class"),
              assemble(cls))
        count += 1
    for cls in fx_jsr():
        write(os.path.join(out, "corpus", "Legacy_v45.class"), assemble(cls))
        count += 1

    write(os.path.join(out, "weird", "UnsortedLnt.class"), weird_unsorted_lnt())

    e2e = {
        "t1": e2e_t1, "t2": e2e_t2, "t3": e2e_t3, "t4": e2e_t4, "t5": e2e_t5,
        "t6": e2e_t6, "t7": e2e_t7, "t8": e2e_t8, "t9": e2e_t9, "t10": e2e_t10,
        "t11": e2e_t11, "t12": e2e_t12, "twopov": e2e_twopov,
    }
    for key, fx in e2e.items():
        classes, suite, locations, povs = fx()
        base = os.path.join(out, "e2e", key)
        for cls in classes:
            rel = cls.name + ".class"
            data = assemble(cls)
            write(os.path.join(base, "classes", rel), data)
            # The seeded programs are themselves corpus members.
            write(os.path.join(out, "corpus", cls.name.split("/")[-1] + "_e2e.class"),
                  data)
            count += 1
        with open(os.path.join(base, "suite.txt"), "w") as f:
            f.write("\n".join(suite) + "\n")
        with open(os.path.join(base, "locations.txt"), "w") as f:
            f.write("\n".join(locations) + "\n")
        with open(os.path.join(base, "povs.txt"), "w") as f:
            f.write(",".join(povs) + "\n")

    assert count >= 100, f"corpus too small: {count}"
    print(f"assembled {count} class files under {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
