#include "bcrepair/codemodel.hpp"
#include "bcrepair/descriptor.hpp"

namespace bcrepair {

namespace {

void check_pool(const ClassFile& cf, std::vector<StructuralFault>& out) {
    const auto& slots = cf.pool.slots();
    auto need = [&](std::size_t slot, u2 idx, CpTag tag) {
        if (!cf.pool.is(idx, tag)) {
            out.push_back({"pool#" + std::to_string(slot + 1),
                           "cross-reference " + std::to_string(idx) + " unresolvable"});
        }
    };
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const CpEntry& e = slots[i];
        switch (e.tag) {
            case CpTag::Class:
            case CpTag::String:
            case CpTag::MethodType:
                need(i, e.index1, CpTag::Utf8);
                break;
            case CpTag::NameAndType:
                need(i, e.index1, CpTag::Utf8);
                need(i, e.index2, CpTag::Utf8);
                break;
            case CpTag::Fieldref:
            case CpTag::Methodref:
            case CpTag::InterfaceMethodref: {
                need(i, e.index1, CpTag::Class);
                need(i, e.index2, CpTag::NameAndType);
                if (cf.pool.is(e.index2, CpTag::NameAndType)) {
                    const CpEntry& nat = cf.pool.at(e.index2);
                    if (cf.pool.is(nat.index2, CpTag::Utf8)) {
                        const std::string& desc = cf.pool.utf8(nat.index2);
                        bool ok = e.tag == CpTag::Fieldref ? is_valid_field_descriptor(desc)
                                                           : is_valid_method_descriptor(desc);
                        if (!ok) {
                            out.push_back({"pool#" + std::to_string(i + 1),
                                           "member reference has invalid descriptor '" + desc +
                                               "'"});
                        }
                    }
                }
                break;
            }
            default:
                break;
        }
    }
}

void check_member(const ClassFile& cf, const MemberInfo& m, bool is_method,
                  std::vector<StructuralFault>& out) {
    std::string where = std::string(is_method ? "method " : "field ") + cf.name() + "." + m.name +
                        (is_method ? m.descriptor : ":" + m.descriptor);
    if (!cf.pool.is(m.name_index, CpTag::Utf8) || !cf.pool.is(m.descriptor_index, CpTag::Utf8)) {
        out.push_back({where, "name or descriptor index unresolvable"});
        return;
    }
    bool ok = is_method ? is_valid_method_descriptor(m.descriptor)
                        : is_valid_field_descriptor(m.descriptor);
    if (!ok) out.push_back({where, "invalid descriptor '" + m.descriptor + "'"});
    if (!is_method || !m.code) return;

    // Branch targets, exception-table pcs, table offsets, and frame offsets
    // must all land on instruction boundaries; the decoder enforces exactly
    // that and reports the faulting pc.
    try {
        CodeBody body = decode_code(*m.code, cf.pool);
        (void)body;
    } catch (const MalformedCode& e) {
        out.push_back({where, e.what()});
    }
    u4 code_len = static_cast<u4>(m.code->code.size());
    for (const ExceptionTableEntry& e : m.code->exception_table) {
        if (e.start_pc >= e.end_pc || e.end_pc > code_len || e.handler_pc >= code_len) {
            out.push_back({where, "exception table pcs out of range (handler_pc " +
                                      std::to_string(e.handler_pc) + ")"});
        }
    }
    if (m.code->line_numbers) {
        for (const LineNumberEntry& e : *m.code->line_numbers) {
            if (e.start_pc > code_len) {
                out.push_back({where, "line table pc " + std::to_string(e.start_pc) +
                                          " out of range"});
            }
        }
    }
}

}  // namespace

std::vector<StructuralFault> validate_structure(const ClassFile& cf) {
    std::vector<StructuralFault> out;
    if (cf.magic != 0xCAFEBABE) out.push_back({"class", "bad magic"});
    if (!cf.pool.is(cf.this_class, CpTag::Class)) {
        out.push_back({"class", "this_class does not resolve to a Class entry"});
    }
    if (cf.super_class != 0 && !cf.pool.is(cf.super_class, CpTag::Class)) {
        out.push_back({"class", "super_class does not resolve to a Class entry"});
    }
    for (u2 idx : cf.interfaces) {
        if (!cf.pool.is(idx, CpTag::Class)) {
            out.push_back({"class", "interface index " + std::to_string(idx) + " unresolvable"});
        }
    }
    check_pool(cf, out);
    for (const MemberInfo& f : cf.fields) check_member(cf, f, false, out);
    for (const MemberInfo& m : cf.methods) check_member(cf, m, true, out);
    return out;
}

}  // namespace bcrepair
