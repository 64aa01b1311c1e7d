#ifndef BCREPAIR_CLASSFILE_HPP
#define BCREPAIR_CLASSFILE_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcrepair/bytes.hpp"

namespace bcrepair {

// See table 4.4-A of the class file format.
enum class CpTag : u1 {
    Phantom = 0,  // slot after a Long/Double entry; never encoded
    Utf8 = 1,
    Integer = 3,
    Float = 4,
    Long = 5,
    Double = 6,
    Class = 7,
    String = 8,
    Fieldref = 9,
    Methodref = 10,
    InterfaceMethodref = 11,
    NameAndType = 12,
    MethodHandle = 15,
    MethodType = 16,
    InvokeDynamic = 18,
};

struct MalformedClass : std::runtime_error {
    MalformedClass(std::size_t at, const std::string& what)
        : std::runtime_error("malformed class at offset " + std::to_string(at) + ": " + what),
          offset(at) {}
    std::size_t offset;
};

struct UnencodableClass : std::runtime_error {
    explicit UnencodableClass(const std::string& what)
        : std::runtime_error("unencodable class: " + what) {}
};

struct CpEntry {
    CpTag tag = CpTag::Phantom;
    std::string utf8;   // Utf8
    u4 data32 = 0;      // Integer/Float raw bits; MethodHandle reference_kind
    u8 data64 = 0;      // Long/Double raw bits
    u2 index1 = 0;      // Class.name / String.string / *ref.class / NAT.name / MethodType.desc
                        // MethodHandle.reference / InvokeDynamic.bootstrap_method_attr
    u2 index2 = 0;      // *ref.name_and_type / NAT.descriptor / InvokeDynamic.name_and_type
};

// 1-based indexed pool; Long/Double occupy two slots (the second is Phantom).
// Existing entries are never renumbered: all mutation is append-only and
// appends dedupe against existing entries.
class ConstantPool {
public:
    // Number of *slots* in use (indices 1..slot_count() are addressable).
    std::size_t slot_count() const { return entries_.size(); }

    bool valid_index(u2 idx) const {
        return idx >= 1 && idx <= entries_.size() && entries_[idx - 1].tag != CpTag::Phantom;
    }
    const CpEntry& at(u2 idx) const { return entries_[idx - 1]; }
    bool is(u2 idx, CpTag tag) const { return valid_index(idx) && at(idx).tag == tag; }

    const std::string& utf8(u2 idx) const { return at(idx).utf8; }
    // Name of a Class entry ("java/lang/Object" form).
    const std::string& class_name(u2 idx) const { return utf8(at(idx).index1); }

    // Append helpers; each returns the index of an existing equal entry when
    // one is present, otherwise appends. Throws UnencodableClass when the
    // pool would no longer fit the 16-bit count field.
    u2 add_utf8(const std::string& s);
    u2 add_integer(i4 v);
    u2 add_float(float v);
    u2 add_long(std::int64_t v);
    u2 add_double(double v);
    u2 add_class(const std::string& name);
    u2 add_string(const std::string& s);
    u2 add_name_and_type(const std::string& name, const std::string& desc);
    u2 add_fieldref(const std::string& owner, const std::string& name, const std::string& desc);
    u2 add_methodref(const std::string& owner, const std::string& name, const std::string& desc);
    u2 add_interface_methodref(const std::string& owner, const std::string& name,
                               const std::string& desc);

    // Raw append used by the parser (no dedupe, no limit check beyond u2).
    void push_entry(CpEntry e) { entries_.push_back(std::move(e)); }

    // Iteration over slots (1-based index, entry); phantoms included.
    const std::vector<CpEntry>& slots() const { return entries_; }

private:
    u2 append(CpEntry e);
    std::vector<CpEntry> entries_;
};

struct AttributeInfo {
    u2 name_index = 0;
    std::string name;  // resolved copy of the Utf8 at name_index
    Bytes bytes;       // payload, excluding the 6-byte header
};

struct ExceptionTableEntry {
    u2 start_pc, end_pc, handler_pc, catch_type;
};
struct LineNumberEntry {
    u2 start_pc, line;
};
struct LocalVariableEntry {
    u2 start_pc, length, name_index, descriptor_index, index;
};

// Decoded view of a Code attribute. The instruction stream stays raw here;
// module codemodel decodes it on demand. Sub-attributes keep their raw bytes
// (in `attributes`) so an unmodified method re-emits bit-exactly; the decoded
// line/local tables are convenience views.
struct CodeAttribute {
    u2 max_stack = 0, max_locals = 0;
    Bytes code;
    std::vector<ExceptionTableEntry> exception_table;
    std::vector<AttributeInfo> attributes;  // sub-attributes, original order
    std::optional<std::vector<LineNumberEntry>> line_numbers;  // ascending start_pc
    std::optional<std::vector<LocalVariableEntry>> local_vars;
};

struct MemberInfo {
    u2 access_flags = 0, name_index = 0, descriptor_index = 0;
    std::vector<AttributeInfo> attributes;
    std::string name, descriptor;  // resolved copies

    // Methods only: decoded view of the Code attribute, plus its position in
    // `attributes` so a re-encoded body can replace the raw bytes in place.
    std::optional<CodeAttribute> code;
    std::size_t code_attr_pos = SIZE_MAX;
};

struct ClassFile {
    u4 magic = 0xCAFEBABE;
    u2 minor_version = 0, major_version = 52;
    ConstantPool pool;
    u2 access_flags = 0, this_class = 0, super_class = 0;
    std::vector<u2> interfaces;
    std::vector<MemberInfo> fields;
    std::vector<MemberInfo> methods;
    std::vector<AttributeInfo> attributes;

    const std::string& name() const { return pool.class_name(this_class); }
    std::string super_name() const {
        return super_class == 0 ? std::string() : pool.class_name(super_class);
    }
    const MemberInfo* find_method(const std::string& name, const std::string& desc) const;
    MemberInfo* find_method(const std::string& name, const std::string& desc);
};

// Accepted major version window.
constexpr u2 kMinMajorVersion = 45;
constexpr u2 kMaxMajorVersion = 61;

ClassFile parse_class(std::span<const u1> bytes);
inline ClassFile parse_class(const Bytes& bytes) {
    return parse_class(std::span<const u1>(bytes.data(), bytes.size()));
}
Bytes emit_class(const ClassFile& cf);

struct StructuralFault {
    std::string where;    // "class", "pool#7", "method com/A.f(I)I", ...
    std::string message;  // includes the pc for code-level faults
};
std::vector<StructuralFault> validate_structure(const ClassFile& cf);

// Serializes a CodeAttribute back to raw attribute payload bytes
// (everything after the 6-byte attribute header).
Bytes serialize_code_attribute(const CodeAttribute& code);

// Replaces the raw Code attribute bytes of `m` with the serialization of
// `m.code` (after a body edit). Requires the "Code" name to be in the pool.
void store_code_attribute(MemberInfo& m);

ClassFile load_class_file(const std::string& path);
void save_class_file(const std::string& path, const ClassFile& cf);

}  // namespace bcrepair

#endif
