#ifndef BCREPAIR_CLASSINDEX_HPP
#define BCREPAIR_CLASSINDEX_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bcrepair/classfile.hpp"

namespace bcrepair {

// Name-keyed view over the loaded class set plus a small built-in table of
// platform superclass facts. Everything ultimately descends from
// java/lang/Object; chains through unknown classes terminate there.
class ClassIndex {
public:
    ClassIndex();

    void add(const ClassFile* cf);
    const ClassFile* find(const std::string& name) const;
    std::vector<const ClassFile*> all() const;

    // Direct superclass, from the loaded set or the built-in table.
    std::optional<std::string> super_of(const std::string& name) const;
    // True when `name` names a class whose super chain reaches `ancestor`
    // (name == ancestor counts). Unknown links stop the walk.
    bool is_subclass_of(const std::string& name, const std::string& ancestor) const;
    // Nearest common ancestor; falls back to java/lang/Object.
    std::string common_super(const std::string& a, const std::string& b) const;

    bool is_known_interface(const std::string& name) const;
    // Known collection/map interfaces and classes implementing them (for the
    // emptiness-check rule).
    bool is_collection_like(const std::string& descriptor) const;

private:
    std::map<std::string, const ClassFile*> classes_;
    std::map<std::string, std::string> builtin_supers_;
    std::vector<std::string> builtin_interfaces_;
};

}  // namespace bcrepair

#endif
