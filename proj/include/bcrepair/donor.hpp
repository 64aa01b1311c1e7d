#ifndef BCREPAIR_DONOR_HPP
#define BCREPAIR_DONOR_HPP

#include <optional>
#include <string>
#include <vector>

#include "bcrepair/program.hpp"

namespace bcrepair {

enum class Staticness : u1 { Static, Instance, Unknown };

struct LocalDonor {
    u2 slot = 0;
    std::string descriptor;
    std::string name;  // empty when the LVT is absent
};
struct FieldDonor {
    std::string owner, name, descriptor;
    Staticness staticness = Staticness::Unknown;
};
struct MethodDonor {
    std::string owner, name, descriptor;
    Staticness staticness = Staticness::Unknown;
    bool interface_owner = false;
};
struct LiteralDonor {
    CpTag tag = CpTag::Integer;
    u2 cp_index = 0;
};
struct SecurePair {
    std::string cls, secure;
};

// Fix ingredients reachable from one mutation site: method locals live at the
// site, enclosing-class members (declared and pool-visible inherited ones),
// pool literals, and the secure-class pair table. Ordering is deterministic:
// slot order, declaration order then pool index, pool index.
struct DonorPool {
    std::vector<LocalDonor> locals;
    std::vector<FieldDonor> fields;
    std::vector<MethodDonor> methods;
    std::vector<LiteralDonor> literals;
    std::vector<SecurePair> secure_pairs;
};

DonorPool collect_donors(const ProgramModel& program, const MethodId& method, Label site,
                         const std::vector<SecurePair>& extra_pairs);

// True when a value of descriptor `a` is usable where `b` is expected:
// identical types, an int-family primitive widening (byte->short->int,
// char->int), or a reference whose recorded super chain reaches `b`.
bool descriptor_compatible(const std::string& a, const std::string& b, const ClassIndex& index);

// `<pkg>/Secure<Simple>` subclass among loaded classes, else the pair table.
std::optional<std::string> infer_secure_class(const ClassIndex& index,
                                              const std::vector<SecurePair>& pairs,
                                              const std::string& cls);

std::vector<SecurePair> builtin_secure_pairs();
// One `class secure_class` pair per line; '#' comments and blanks ignored.
std::vector<SecurePair> load_secure_pairs(const std::string& path);

// Slots possibly written on some path from entry to (but not through) the
// instruction at `site`; parameters count as written at entry.
std::vector<bool> written_before(const CodeBody& body, const std::string& method_descriptor,
                                 bool is_static, Label site);

}  // namespace bcrepair

#endif
