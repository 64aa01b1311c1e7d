#ifndef BCREPAIR_PROGRAM_HPP
#define BCREPAIR_PROGRAM_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "bcrepair/classindex.hpp"
#include "bcrepair/codemodel.hpp"

namespace bcrepair {

// Identifies a method across the loaded class set.
struct MethodId {
    std::string class_name, method_name, descriptor;
    auto operator<=>(const MethodId&) const = default;
};

// Owns the parsed classes under repair plus a decode cache for their method
// bodies. Classes are immutable here; patch application works on copies.
class ProgramModel {
public:
    // Loads every .class file under `dir` (recursively, sorted paths).
    void load_dir(const std::string& dir);
    void add_class(ClassFile cf, std::string rel_path);

    const ClassIndex& index() const { return index_; }
    const ClassFile* find(const std::string& name) const { return index_.find(name); }
    // Original path of the class relative to the loaded root.
    const std::string& rel_path(const std::string& name) const;
    std::vector<std::string> class_names() const;

    // Decoded body cache; null when the method has no Code attribute or the
    // pair does not exist.
    const CodeBody* body(const MethodId& id) const;
    std::vector<MethodId> methods_of(const std::string& class_name) const;

private:
    std::vector<std::unique_ptr<ClassFile>> owned_;
    std::map<std::string, std::string> rel_paths_;
    ClassIndex index_;
    mutable std::map<MethodId, std::unique_ptr<CodeBody>> bodies_;
};

}  // namespace bcrepair

#endif
