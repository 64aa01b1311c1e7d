#include "bcrepair/program.hpp"

#include <algorithm>
#include <filesystem>

#include "bcrepair/io.hpp"

namespace bcrepair {

namespace fs = std::filesystem;

void ProgramModel::load_dir(const std::string& dir) {
    if (!fs::is_directory(dir)) throw IoError("class directory does not exist: " + dir);
    std::vector<fs::path> paths;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".class") {
            paths.push_back(entry.path());
        }
    }
    std::sort(paths.begin(), paths.end());
    for (const fs::path& p : paths) {
        ClassFile cf = load_class_file(p.string());
        add_class(std::move(cf), fs::relative(p, dir).generic_string());
    }
}

void ProgramModel::add_class(ClassFile cf, std::string rel_path) {
    auto owned = std::make_unique<ClassFile>(std::move(cf));
    rel_paths_[owned->name()] = std::move(rel_path);
    index_.add(owned.get());
    owned_.push_back(std::move(owned));
}

const std::string& ProgramModel::rel_path(const std::string& name) const {
    static const std::string kEmpty;
    auto it = rel_paths_.find(name);
    return it == rel_paths_.end() ? kEmpty : it->second;
}

std::vector<std::string> ProgramModel::class_names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : rel_paths_) out.push_back(name);
    return out;
}

const CodeBody* ProgramModel::body(const MethodId& id) const {
    auto it = bodies_.find(id);
    if (it != bodies_.end()) return it->second.get();
    const ClassFile* cf = index_.find(id.class_name);
    if (!cf) return nullptr;
    const MemberInfo* m = cf->find_method(id.method_name, id.descriptor);
    if (!m || !m->code) return nullptr;
    auto body = std::make_unique<CodeBody>(decode_code(*m->code, cf->pool));
    const CodeBody* raw = body.get();
    bodies_.emplace(id, std::move(body));
    return raw;
}

std::vector<MethodId> ProgramModel::methods_of(const std::string& class_name) const {
    std::vector<MethodId> out;
    const ClassFile* cf = index_.find(class_name);
    if (!cf) return out;
    for (const MemberInfo& m : cf->methods) {
        out.push_back({class_name, m.name, m.descriptor});
    }
    return out;
}

}  // namespace bcrepair
