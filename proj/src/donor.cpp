#include "bcrepair/donor.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "bcrepair/descriptor.hpp"
#include "bcrepair/io.hpp"

namespace bcrepair {

namespace {

// Coarse slot typing from store instructions, used when the LVT is absent.
std::map<u2, std::string> slot_types_from_stores(const CodeBody& body,
                                                 const std::string& method_descriptor,
                                                 bool is_static) {
    std::map<u2, std::string> types;
    u2 slot = 0;
    if (!is_static) types[slot++] = "Ljava/lang/Object;";  // receiver, exact type unknown here
    for (const std::string& p : parse_method_descriptor(method_descriptor).params) {
        types[slot] = p;
        slot += static_cast<u2>(slot_width(p));
    }
    for (const Instruction& insn : body.instructions) {
        if (!insn.is_store()) continue;
        int implied;
        Op base = normalize_load_store(insn.op, &implied);
        const char* d = nullptr;
        switch (base) {
            case Op::istore: d = "I"; break;
            case Op::lstore: d = "J"; break;
            case Op::fstore: d = "F"; break;
            case Op::dstore: d = "D"; break;
            case Op::astore: d = "Ljava/lang/Object;"; break;
            default: break;
        }
        if (!d) continue;
        u2 s = static_cast<u2>(insn.slot());
        auto it = types.find(s);
        if (it == types.end()) {
            types[s] = d;
        } else if (it->second != d) {
            it->second.clear();  // conflicting kinds: slot unusable as a donor
        }
    }
    return types;
}

bool write_covers(const Instruction& insn, std::vector<bool>& written) {
    int slot = -1;
    if (insn.is_store()) slot = insn.slot();
    if (insn.op == Op::iinc) slot = insn.local;
    if (slot < 0) return false;
    std::size_t s = static_cast<std::size_t>(slot);
    if (s >= written.size()) written.resize(s + 1, false);
    bool changed = !written[s];
    written[s] = true;
    return changed;
}

}  // namespace

std::vector<bool> written_before(const CodeBody& body, const std::string& method_descriptor,
                                 bool is_static, Label site) {
    std::size_t n = body.instructions.size();
    std::map<Label, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index[body.instructions[i].label] = i;

    std::vector<bool> params;
    u2 slot = 0;
    if (!is_static) params.resize(++slot, true);
    for (const std::string& p : parse_method_descriptor(method_descriptor).params) {
        slot += static_cast<u2>(slot_width(p));
        params.resize(slot, true);
    }

    // May-analysis: in[i] = union over predecessors of (in[pred] | writes(pred)).
    std::vector<std::vector<bool>> in(n);
    std::vector<bool> queued(n, false);
    std::vector<std::size_t> work;
    auto merge_into = [&](std::size_t pos, const std::vector<bool>& incoming) {
        std::vector<bool>& cur = in[pos];
        bool changed = false;
        if (cur.size() < incoming.size()) cur.resize(incoming.size(), false);
        for (std::size_t i = 0; i < incoming.size(); ++i) {
            if (incoming[i] && !cur[i]) {
                cur[i] = true;
                changed = true;
            }
        }
        if ((changed || cur.empty()) && !queued[pos]) {
            queued[pos] = true;
            work.push_back(pos);
        }
    };
    if (n == 0) return params;
    in[0] = params;
    queued[0] = true;
    work.push_back(0);
    while (!work.empty()) {
        std::size_t pos = work.back();
        work.pop_back();
        queued[pos] = false;
        std::vector<bool> out = in[pos];
        write_covers(body.instructions[pos], out);
        const Instruction& insn = body.instructions[pos];
        if (insn.switch_op) {
            merge_into(index.at(insn.switch_op->default_target), out);
            for (const SwitchCase& c : insn.switch_op->cases) merge_into(index.at(c.target), out);
        } else if (is_branch_op(insn.op)) {
            merge_into(index.at(insn.target), out);
        }
        if (!opcode_info(insn.op).ends_flow && pos + 1 < n) merge_into(pos + 1, out);
        for (const ExceptionHandler& h : body.exception_handlers) {
            std::size_t from = index.at(h.from);
            std::size_t to = h.to == kEndLabel ? n : index.at(h.to);
            if (pos >= from && pos < to) merge_into(index.at(h.handler), out);
        }
    }
    auto it = index.find(site);
    if (it == index.end()) return params;
    return in[it->second];
}

DonorPool collect_donors(const ProgramModel& program, const MethodId& method, Label site,
                         const std::vector<SecurePair>& extra_pairs) {
    DonorPool pool;
    const ClassFile* cf = program.find(method.class_name);
    const CodeBody* body = program.body(method);
    if (!cf || !body) return pool;
    const MemberInfo* member = cf->find_method(method.method_name, method.descriptor);
    bool is_static = member && (member->access_flags & 0x0008) != 0;

    std::vector<bool> written = written_before(*body, method.descriptor, is_static, site);
    std::size_t site_pos = body->index_of(site);

    if (body->has_lvt && !body->local_vars.empty()) {
        // LVT entries live at the site, in slot order.
        std::vector<LocalDonor> found;
        for (const LocalVarInfo& v : body->local_vars) {
            std::size_t from = body->index_of(v.from);
            std::size_t to = v.to == kEndLabel ? body->instructions.size() : body->index_of(v.to);
            if (site_pos < from || site_pos >= to) continue;
            if (v.index >= written.size() || !written[v.index]) continue;
            if (!is_valid_field_descriptor(v.descriptor)) continue;
            found.push_back({v.index, v.descriptor, v.name});
        }
        std::stable_sort(found.begin(), found.end(),
                         [](const LocalDonor& a, const LocalDonor& b) { return a.slot < b.slot; });
        pool.locals = std::move(found);
    } else {
        for (const auto& [slot, desc] : slot_types_from_stores(*body, method.descriptor,
                                                               is_static)) {
            if (desc.empty()) continue;
            if (slot >= written.size() || !written[slot]) continue;
            pool.locals.push_back({slot, desc, ""});
        }
    }

    // Declared members first, then pool-visible references to this class or
    // its superclasses (inherited names).
    for (const MemberInfo& f : cf->fields) {
        Staticness s = (f.access_flags & 0x0008) ? Staticness::Static : Staticness::Instance;
        pool.fields.push_back({cf->name(), f.name, f.descriptor, s});
    }
    for (const MemberInfo& m : cf->methods) {
        if (m.name == "<init>" || m.name == "<clinit>") continue;
        Staticness s = (m.access_flags & 0x0008) ? Staticness::Static : Staticness::Instance;
        pool.methods.push_back({cf->name(), m.name, m.descriptor, s, false});
    }
    // Static-ness of pool-discovered members comes from how this class's code
    // accesses them.
    std::map<u2, Staticness> access_kind;
    std::map<u2, bool> iface_call;
    for (const MethodId& id : program.methods_of(method.class_name)) {
        const CodeBody* b = program.body(id);
        if (!b) continue;
        for (const Instruction& insn : b->instructions) {
            switch (insn.op) {
                case Op::getstatic: case Op::putstatic:
                    access_kind[insn.cp_index] = Staticness::Static;
                    break;
                case Op::getfield: case Op::putfield:
                    access_kind[insn.cp_index] = Staticness::Instance;
                    break;
                case Op::invokestatic:
                    access_kind[insn.cp_index] = Staticness::Static;
                    break;
                case Op::invokevirtual: case Op::invokespecial:
                    access_kind[insn.cp_index] = Staticness::Instance;
                    break;
                case Op::invokeinterface:
                    access_kind[insn.cp_index] = Staticness::Instance;
                    iface_call[insn.cp_index] = true;
                    break;
                default:
                    break;
            }
        }
    }
    const auto& slots = cf->pool.slots();
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const CpEntry& e = slots[i];
        if (e.tag != CpTag::Fieldref && e.tag != CpTag::Methodref &&
            e.tag != CpTag::InterfaceMethodref) {
            continue;
        }
        std::string owner = cf->pool.class_name(e.index1);
        if (owner == cf->name()) continue;  // declared members already listed
        if (!program.index().is_subclass_of(cf->name(), owner)) continue;
        const CpEntry& nat = cf->pool.at(e.index2);
        std::string name = cf->pool.utf8(nat.index1);
        std::string desc = cf->pool.utf8(nat.index2);
        u2 idx = static_cast<u2>(i + 1);
        Staticness s =
            access_kind.count(idx) ? access_kind[idx] : Staticness::Unknown;
        if (e.tag == CpTag::Fieldref) {
            pool.fields.push_back({owner, name, desc, s});
        } else if (name != "<init>" && name != "<clinit>") {
            pool.methods.push_back({owner, name, desc, s, iface_call.count(idx) != 0});
        }
    }

    for (std::size_t i = 0; i < slots.size(); ++i) {
        switch (slots[i].tag) {
            case CpTag::Integer:
            case CpTag::Float:
            case CpTag::Long:
            case CpTag::Double:
            case CpTag::String:
                pool.literals.push_back({slots[i].tag, static_cast<u2>(i + 1)});
                break;
            default:
                break;
        }
    }

    pool.secure_pairs = builtin_secure_pairs();
    pool.secure_pairs.insert(pool.secure_pairs.end(), extra_pairs.begin(), extra_pairs.end());
    return pool;
}

bool descriptor_compatible(const std::string& a, const std::string& b, const ClassIndex& index) {
    if (!is_valid_field_descriptor(a) || !is_valid_field_descriptor(b)) {
        throw InvalidDescriptor(a + " / " + b);
    }
    if (a == b) return true;
    if (is_primitive_descriptor(a) && is_primitive_descriptor(b)) {
        // int-family widenings only
        char from = a[0], to = b[0];
        if (to == 'I') return from == 'B' || from == 'S' || from == 'C';
        if (to == 'S') return from == 'B';
        return false;
    }
    if (a[0] == 'L' && b[0] == 'L') {
        return index.is_subclass_of(class_of_descriptor(a), class_of_descriptor(b));
    }
    return false;  // arrays and mixed kinds: identity only
}

std::optional<std::string> infer_secure_class(const ClassIndex& index,
                                              const std::vector<SecurePair>& pairs,
                                              const std::string& cls) {
    std::size_t slash = cls.rfind('/');
    std::string candidate = slash == std::string::npos
                                ? "Secure" + cls
                                : cls.substr(0, slash + 1) + "Secure" + cls.substr(slash + 1);
    if (index.find(candidate) && index.is_subclass_of(candidate, cls)) return candidate;
    for (const SecurePair& p : pairs) {
        if (p.cls == cls) return p.secure;
    }
    return std::nullopt;
}

std::vector<SecurePair> builtin_secure_pairs() {
    return {
        {"java/util/Random", "java/security/SecureRandom"},
    };
}

std::vector<SecurePair> load_secure_pairs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open secure-pair table " + path);
    std::vector<SecurePair> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream s(line);
        SecurePair p;
        if (s >> p.cls >> p.secure) out.push_back(std::move(p));
    }
    return out;
}

}  // namespace bcrepair
