#include "bcrepair/classfile.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <initializer_list>

#include "bcrepair/descriptor.hpp"
#include "bcrepair/io.hpp"

namespace bcrepair {

namespace {

constexpr u4 kMagic = 0xCAFEBABE;

bool two_slot(CpTag t) { return t == CpTag::Long || t == CpTag::Double; }

bool entry_equal(const CpEntry& a, const CpEntry& b) {
    return a.tag == b.tag && a.utf8 == b.utf8 && a.data32 == b.data32 && a.data64 == b.data64 &&
           a.index1 == b.index1 && a.index2 == b.index2;
}

}  // namespace

u2 ConstantPool::append(CpEntry e) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entry_equal(entries_[i], e)) return static_cast<u2>(i + 1);
    }
    std::size_t width = two_slot(e.tag) ? 2 : 1;
    if (entries_.size() + width + 1 > 65535) {
        throw UnencodableClass("constant pool exceeds 65535 slots");
    }
    entries_.push_back(std::move(e));
    u2 idx = static_cast<u2>(entries_.size());
    if (width == 2) entries_.push_back(CpEntry{});  // phantom
    return idx;
}

u2 ConstantPool::add_utf8(const std::string& s) {
    CpEntry e;
    e.tag = CpTag::Utf8;
    e.utf8 = s;
    return append(std::move(e));
}
u2 ConstantPool::add_integer(i4 v) {
    CpEntry e;
    e.tag = CpTag::Integer;
    e.data32 = static_cast<u4>(v);
    return append(std::move(e));
}
u2 ConstantPool::add_float(float v) {
    CpEntry e;
    e.tag = CpTag::Float;
    e.data32 = std::bit_cast<u4>(v);
    return append(std::move(e));
}
u2 ConstantPool::add_long(std::int64_t v) {
    CpEntry e;
    e.tag = CpTag::Long;
    e.data64 = static_cast<u8>(v);
    return append(std::move(e));
}
u2 ConstantPool::add_double(double v) {
    CpEntry e;
    e.tag = CpTag::Double;
    e.data64 = std::bit_cast<u8>(v);
    return append(std::move(e));
}
u2 ConstantPool::add_class(const std::string& name) {
    CpEntry e;
    e.tag = CpTag::Class;
    e.index1 = add_utf8(name);
    return append(std::move(e));
}
u2 ConstantPool::add_string(const std::string& s) {
    CpEntry e;
    e.tag = CpTag::String;
    e.index1 = add_utf8(s);
    return append(std::move(e));
}
u2 ConstantPool::add_name_and_type(const std::string& name, const std::string& desc) {
    CpEntry e;
    e.tag = CpTag::NameAndType;
    e.index1 = add_utf8(name);
    e.index2 = add_utf8(desc);
    return append(std::move(e));
}
u2 ConstantPool::add_fieldref(const std::string& owner, const std::string& name,
                              const std::string& desc) {
    CpEntry e;
    e.tag = CpTag::Fieldref;
    e.index1 = add_class(owner);
    e.index2 = add_name_and_type(name, desc);
    return append(std::move(e));
}
u2 ConstantPool::add_methodref(const std::string& owner, const std::string& name,
                               const std::string& desc) {
    CpEntry e;
    e.tag = CpTag::Methodref;
    e.index1 = add_class(owner);
    e.index2 = add_name_and_type(name, desc);
    return append(std::move(e));
}
u2 ConstantPool::add_interface_methodref(const std::string& owner, const std::string& name,
                                         const std::string& desc) {
    CpEntry e;
    e.tag = CpTag::InterfaceMethodref;
    e.index1 = add_class(owner);
    e.index2 = add_name_and_type(name, desc);
    return append(std::move(e));
}

const MemberInfo* ClassFile::find_method(const std::string& name, const std::string& desc) const {
    for (const auto& m : methods) {
        if (m.name == name && m.descriptor == desc) return &m;
    }
    return nullptr;
}
MemberInfo* ClassFile::find_method(const std::string& name, const std::string& desc) {
    for (auto& m : methods) {
        if (m.name == name && m.descriptor == desc) return &m;
    }
    return nullptr;
}

namespace {

class ClassParser {
public:
    explicit ClassParser(std::span<const u1> bytes) : r_(bytes) {}

    ClassFile run() {
        ClassFile cf;
        cf.magic = r_.read_u4();
        if (cf.magic != kMagic) throw MalformedClass(0, "bad magic");
        cf.minor_version = r_.read_u2();
        cf.major_version = r_.read_u2();
        if (cf.major_version < kMinMajorVersion || cf.major_version > kMaxMajorVersion ||
            (cf.major_version == kMaxMajorVersion && cf.minor_version != 0)) {
            throw MalformedClass(4, "unsupported class file version " +
                                        std::to_string(cf.major_version) + "." +
                                        std::to_string(cf.minor_version));
        }
        read_pool(cf);
        cf.access_flags = r_.read_u2();
        cf.this_class = r_.read_u2();
        cf.super_class = r_.read_u2();
        require_tag(cf.pool, cf.this_class, CpTag::Class, "this_class");
        if (cf.super_class != 0) require_tag(cf.pool, cf.super_class, CpTag::Class, "super_class");
        u2 n_ifaces = r_.read_u2();
        cf.interfaces.reserve(n_ifaces);
        for (u2 i = 0; i < n_ifaces; ++i) {
            u2 idx = r_.read_u2();
            require_tag(cf.pool, idx, CpTag::Class, "interface");
            cf.interfaces.push_back(idx);
        }
        read_members(cf, cf.fields, /*methods=*/false);
        read_members(cf, cf.methods, /*methods=*/true);
        cf.attributes = read_attributes(cf.pool);
        if (!r_.at_end()) throw MalformedClass(r_.offset(), "trailing bytes after class structure");
        return cf;
    }

private:
    [[noreturn]] void fail(const std::string& what) { throw MalformedClass(r_.offset(), what); }

    void require_tag(const ConstantPool& pool, u2 idx, CpTag tag, const char* what) {
        if (!pool.is(idx, tag)) {
            fail(std::string(what) + " index " + std::to_string(idx) +
                 " does not resolve to the required constant kind");
        }
    }

    void read_pool(ClassFile& cf) {
        u2 count = r_.read_u2();
        if (count == 0) fail("constant pool count 0");
        std::vector<std::size_t> entry_offsets;
        while (cf.pool.slot_count() < static_cast<std::size_t>(count - 1)) {
            entry_offsets.push_back(r_.offset());
            CpEntry e;
            u1 tag = r_.read_u1();
            e.tag = static_cast<CpTag>(tag);
            switch (e.tag) {
                case CpTag::Utf8: {
                    u2 len = r_.read_u2();
                    e.utf8 = r_.read_string(len);
                    break;
                }
                case CpTag::Integer:
                case CpTag::Float:
                    e.data32 = r_.read_u4();
                    break;
                case CpTag::Long:
                case CpTag::Double:
                    e.data64 = r_.read_u8();
                    break;
                case CpTag::Class:
                case CpTag::String:
                case CpTag::MethodType:
                    e.index1 = r_.read_u2();
                    break;
                case CpTag::Fieldref:
                case CpTag::Methodref:
                case CpTag::InterfaceMethodref:
                case CpTag::NameAndType:
                case CpTag::InvokeDynamic:
                    e.index1 = r_.read_u2();
                    e.index2 = r_.read_u2();
                    break;
                case CpTag::MethodHandle:
                    e.data32 = r_.read_u1();
                    e.index1 = r_.read_u2();
                    break;
                default:
                    throw MalformedClass(entry_offsets.back(),
                                         "unknown constant tag " + std::to_string(tag));
            }
            bool wide = two_slot(e.tag);
            if (wide && cf.pool.slot_count() + 2 > static_cast<std::size_t>(count) - 1) {
                throw MalformedClass(entry_offsets.back(),
                                     "two-slot constant does not fit the declared pool count");
            }
            cf.pool.push_entry(std::move(e));
            if (wide) {
                cf.pool.push_entry(CpEntry{});
                entry_offsets.push_back(entry_offsets.back());
            }
        }
        check_pool_refs(cf.pool, entry_offsets);
    }

    void check_pool_refs(const ConstantPool& pool, const std::vector<std::size_t>& offsets) {
        auto need = [&](std::size_t slot, u2 idx, std::initializer_list<CpTag> tags) {
            for (CpTag t : tags) {
                if (pool.is(idx, t)) return;
            }
            throw MalformedClass(offsets[slot],
                                 "constant cross-reference " + std::to_string(idx) +
                                     " is out of range or of the wrong kind");
        };
        const auto& slots = pool.slots();
        for (std::size_t i = 0; i < slots.size(); ++i) {
            const CpEntry& e = slots[i];
            switch (e.tag) {
                case CpTag::Class:
                case CpTag::String:
                case CpTag::MethodType:
                    need(i, e.index1, {CpTag::Utf8});
                    break;
                case CpTag::Fieldref:
                case CpTag::Methodref:
                case CpTag::InterfaceMethodref:
                    need(i, e.index1, {CpTag::Class});
                    need(i, e.index2, {CpTag::NameAndType});
                    break;
                case CpTag::NameAndType:
                    need(i, e.index1, {CpTag::Utf8});
                    need(i, e.index2, {CpTag::Utf8});
                    break;
                case CpTag::MethodHandle: {
                    u4 kind = e.data32;
                    if (kind < 1 || kind > 9) {
                        throw MalformedClass(offsets[i], "method handle kind out of range");
                    }
                    if (kind <= 4) {
                        need(i, e.index1, {CpTag::Fieldref});
                    } else if (kind == 9) {
                        need(i, e.index1, {CpTag::InterfaceMethodref});
                    } else {
                        need(i, e.index1, {CpTag::Methodref, CpTag::InterfaceMethodref});
                    }
                    break;
                }
                case CpTag::InvokeDynamic:
                    // index1 is a BootstrapMethods attribute slot; that attribute
                    // is carried opaquely, so only the NameAndType side is checked.
                    need(i, e.index2, {CpTag::NameAndType});
                    break;
                default:
                    break;
            }
        }
    }

    void read_members(ClassFile& cf, std::vector<MemberInfo>& out, bool methods) {
        u2 n = r_.read_u2();
        out.reserve(n);
        for (u2 i = 0; i < n; ++i) {
            MemberInfo m;
            m.access_flags = r_.read_u2();
            m.name_index = r_.read_u2();
            m.descriptor_index = r_.read_u2();
            require_tag(cf.pool, m.name_index, CpTag::Utf8, "member name");
            require_tag(cf.pool, m.descriptor_index, CpTag::Utf8, "member descriptor");
            m.name = cf.pool.utf8(m.name_index);
            m.descriptor = cf.pool.utf8(m.descriptor_index);
            m.attributes = read_attributes(cf.pool);
            if (methods) {
                for (std::size_t a = 0; a < m.attributes.size(); ++a) {
                    if (m.attributes[a].name != "Code") continue;
                    if (m.code) fail("method has more than one Code attribute");
                    m.code = decode_code_payload(cf.pool, m.attributes[a].bytes);
                    m.code_attr_pos = a;
                }
            }
            out.push_back(std::move(m));
        }
    }

    std::vector<AttributeInfo> read_attributes(const ConstantPool& pool) {
        u2 n = r_.read_u2();
        std::vector<AttributeInfo> out;
        out.reserve(n);
        for (u2 i = 0; i < n; ++i) {
            AttributeInfo a;
            a.name_index = r_.read_u2();
            require_tag(pool, a.name_index, CpTag::Utf8, "attribute name");
            a.name = pool.utf8(a.name_index);
            u4 len = r_.read_u4();
            auto span = r_.read_bytes(len);
            a.bytes.assign(span.begin(), span.end());
            out.push_back(std::move(a));
        }
        return out;
    }

    CodeAttribute decode_code_payload(const ConstantPool& pool, const Bytes& payload) {
        std::size_t base = r_.offset() - payload.size();
        ByteReader cr{std::span<const u1>(payload.data(), payload.size())};
        auto fail_at = [&](const std::string& what) -> MalformedClass {
            return MalformedClass(base + cr.offset(), what);
        };
        try {
            CodeAttribute code;
            code.max_stack = cr.read_u2();
            code.max_locals = cr.read_u2();
            u4 code_len = cr.read_u4();
            auto body = cr.read_bytes(code_len);
            code.code.assign(body.begin(), body.end());
            u2 n_handlers = cr.read_u2();
            for (u2 i = 0; i < n_handlers; ++i) {
                ExceptionTableEntry e;
                e.start_pc = cr.read_u2();
                e.end_pc = cr.read_u2();
                e.handler_pc = cr.read_u2();
                e.catch_type = cr.read_u2();
                if (e.start_pc >= e.end_pc || e.end_pc > code_len || e.handler_pc >= code_len) {
                    throw fail_at("exception table pcs out of range");
                }
                if (e.catch_type != 0 && !pool.is(e.catch_type, CpTag::Class)) {
                    throw fail_at("exception catch type does not resolve to a class");
                }
                code.exception_table.push_back(e);
            }
            u2 n_attrs = cr.read_u2();
            for (u2 i = 0; i < n_attrs; ++i) {
                AttributeInfo a;
                a.name_index = cr.read_u2();
                if (!pool.is(a.name_index, CpTag::Utf8)) {
                    throw fail_at("code sub-attribute name unresolvable");
                }
                a.name = pool.utf8(a.name_index);
                u4 len = cr.read_u4();
                auto span = cr.read_bytes(len);
                a.bytes.assign(span.begin(), span.end());
                if (a.name == "LineNumberTable") {
                    decode_line_numbers(code, a.bytes, code_len, base);
                } else if (a.name == "LocalVariableTable") {
                    decode_local_vars(code, a.bytes, code_len, base);
                }
                code.attributes.push_back(std::move(a));
            }
            if (!cr.at_end()) throw fail_at("trailing bytes in Code attribute");
            return code;
        } catch (const ByteUnderflow& u) {
            throw MalformedClass(base + u.offset, "truncated Code attribute");
        }
    }

    void decode_line_numbers(CodeAttribute& code, const Bytes& raw, u4 code_len,
                             std::size_t base) {
        ByteReader lr{std::span<const u1>(raw.data(), raw.size())};
        try {
            u2 n = lr.read_u2();
            // Multiple LineNumberTable attributes are legal; the decoded view
            // merges them (raw bytes stay untouched for re-emission).
            std::vector<LineNumberEntry> entries =
                code.line_numbers ? std::move(*code.line_numbers) : std::vector<LineNumberEntry>{};
            entries.reserve(entries.size() + n);
            for (u2 i = 0; i < n; ++i) {
                LineNumberEntry e;
                e.start_pc = lr.read_u2();
                e.line = lr.read_u2();
                if (e.start_pc > code_len) {
                    throw MalformedClass(base, "line number entry pc out of range");
                }
                entries.push_back(e);
            }
            // Usable unsorted in the file, canonicalized ascending here.
            std::stable_sort(entries.begin(), entries.end(),
                             [](const LineNumberEntry& a, const LineNumberEntry& b) {
                                 return a.start_pc < b.start_pc;
                             });
            code.line_numbers = std::move(entries);
        } catch (const ByteUnderflow&) {
            throw MalformedClass(base, "truncated LineNumberTable");
        }
    }

    void decode_local_vars(CodeAttribute& code, const Bytes& raw, u4 code_len, std::size_t base) {
        ByteReader lr{std::span<const u1>(raw.data(), raw.size())};
        try {
            u2 n = lr.read_u2();
            std::vector<LocalVariableEntry> entries =
                code.local_vars ? std::move(*code.local_vars) : std::vector<LocalVariableEntry>{};
            entries.reserve(entries.size() + n);
            for (u2 i = 0; i < n; ++i) {
                LocalVariableEntry e;
                e.start_pc = lr.read_u2();
                e.length = lr.read_u2();
                e.name_index = lr.read_u2();
                e.descriptor_index = lr.read_u2();
                e.index = lr.read_u2();
                if (static_cast<u4>(e.start_pc) + e.length > code_len) {
                    throw MalformedClass(base, "local variable range out of bounds");
                }
                entries.push_back(e);
            }
            code.local_vars = std::move(entries);
        } catch (const ByteUnderflow&) {
            throw MalformedClass(base, "truncated LocalVariableTable");
        }
    }

    ByteReader r_;
};

void write_attributes(ByteWriter& w, const std::vector<AttributeInfo>& attrs) {
    if (attrs.size() > 65535) throw UnencodableClass("attribute count exceeds 65535");
    w.write_u2(static_cast<u2>(attrs.size()));
    for (const auto& a : attrs) {
        w.write_u2(a.name_index);
        w.write_u4(static_cast<u4>(a.bytes.size()));
        w.write_bytes(std::span<const u1>(a.bytes.data(), a.bytes.size()));
    }
}

void write_member(ByteWriter& w, const MemberInfo& m) {
    w.write_u2(m.access_flags);
    w.write_u2(m.name_index);
    w.write_u2(m.descriptor_index);
    write_attributes(w, m.attributes);
}

}  // namespace

ClassFile parse_class(std::span<const u1> bytes) {
    try {
        return ClassParser(bytes).run();
    } catch (const ByteUnderflow& u) {
        throw MalformedClass(u.offset, "truncated stream");
    }
}

Bytes emit_class(const ClassFile& cf) {
    std::size_t slots = cf.pool.slot_count();
    if (slots + 1 > 65535) throw UnencodableClass("constant pool exceeds 65535 slots");
    ByteWriter w;
    w.write_u4(cf.magic);
    w.write_u2(cf.minor_version);
    w.write_u2(cf.major_version);
    w.write_u2(static_cast<u2>(slots + 1));
    const auto& pool_slots = cf.pool.slots();
    for (const auto& e : pool_slots) {
        if (e.tag == CpTag::Phantom) continue;
        w.write_u1(static_cast<u1>(e.tag));
        switch (e.tag) {
            case CpTag::Utf8:
                if (e.utf8.size() > 65535) throw UnencodableClass("Utf8 constant too long");
                w.write_u2(static_cast<u2>(e.utf8.size()));
                w.write_string(e.utf8);
                break;
            case CpTag::Integer:
            case CpTag::Float:
                w.write_u4(e.data32);
                break;
            case CpTag::Long:
            case CpTag::Double:
                w.write_u8(e.data64);
                break;
            case CpTag::Class:
            case CpTag::String:
            case CpTag::MethodType:
                w.write_u2(e.index1);
                break;
            case CpTag::Fieldref:
            case CpTag::Methodref:
            case CpTag::InterfaceMethodref:
            case CpTag::NameAndType:
            case CpTag::InvokeDynamic:
                w.write_u2(e.index1);
                w.write_u2(e.index2);
                break;
            case CpTag::MethodHandle:
                w.write_u1(static_cast<u1>(e.data32));
                w.write_u2(e.index1);
                break;
            case CpTag::Phantom:
                break;
        }
    }
    w.write_u2(cf.access_flags);
    w.write_u2(cf.this_class);
    w.write_u2(cf.super_class);
    if (cf.interfaces.size() > 65535) throw UnencodableClass("interface count exceeds 65535");
    w.write_u2(static_cast<u2>(cf.interfaces.size()));
    for (u2 idx : cf.interfaces) w.write_u2(idx);
    if (cf.fields.size() > 65535 || cf.methods.size() > 65535) {
        throw UnencodableClass("member count exceeds 65535");
    }
    w.write_u2(static_cast<u2>(cf.fields.size()));
    for (const auto& f : cf.fields) write_member(w, f);
    w.write_u2(static_cast<u2>(cf.methods.size()));
    for (const auto& m : cf.methods) write_member(w, m);
    write_attributes(w, cf.attributes);
    return w.take();
}

Bytes serialize_code_attribute(const CodeAttribute& code) {
    if (code.code.size() > 65535) throw UnencodableClass("code region exceeds 65535 bytes");
    ByteWriter w;
    w.write_u2(code.max_stack);
    w.write_u2(code.max_locals);
    w.write_u4(static_cast<u4>(code.code.size()));
    w.write_bytes(std::span<const u1>(code.code.data(), code.code.size()));
    w.write_u2(static_cast<u2>(code.exception_table.size()));
    for (const auto& e : code.exception_table) {
        w.write_u2(e.start_pc);
        w.write_u2(e.end_pc);
        w.write_u2(e.handler_pc);
        w.write_u2(e.catch_type);
    }
    write_attributes(w, code.attributes);
    return w.take();
}

void store_code_attribute(MemberInfo& m) {
    if (!m.code || m.code_attr_pos == SIZE_MAX) return;
    m.attributes[m.code_attr_pos].bytes = serialize_code_attribute(*m.code);
}

ClassFile load_class_file(const std::string& path) {
    Bytes bytes = read_file(path);
    return parse_class(bytes);
}

void save_class_file(const std::string& path, const ClassFile& cf) {
    Bytes bytes = emit_class(cf);
    write_file(path, std::span<const u1>(bytes.data(), bytes.size()));
}

}  // namespace bcrepair
