#include "bcrepair/classindex.hpp"

#include <algorithm>

#include "bcrepair/descriptor.hpp"

namespace bcrepair {

namespace {
constexpr const char* kObject = "java/lang/Object";
}

ClassIndex::ClassIndex() {
    builtin_supers_ = {
        {"java/lang/String", kObject},
        {"java/lang/StringBuilder", kObject},
        {"java/lang/Number", kObject},
        {"java/lang/Integer", "java/lang/Number"},
        {"java/lang/Long", "java/lang/Number"},
        {"java/lang/Float", "java/lang/Number"},
        {"java/lang/Double", "java/lang/Number"},
        {"java/lang/Boolean", kObject},
        {"java/lang/Character", kObject},
        {"java/lang/Class", kObject},
        {"java/lang/Throwable", kObject},
        {"java/lang/Exception", "java/lang/Throwable"},
        {"java/lang/Error", "java/lang/Throwable"},
        {"java/lang/RuntimeException", "java/lang/Exception"},
        {"java/lang/NullPointerException", "java/lang/RuntimeException"},
        {"java/lang/ClassCastException", "java/lang/RuntimeException"},
        {"java/lang/ArithmeticException", "java/lang/RuntimeException"},
        {"java/lang/IllegalArgumentException", "java/lang/RuntimeException"},
        {"java/lang/IllegalStateException", "java/lang/RuntimeException"},
        {"java/lang/IndexOutOfBoundsException", "java/lang/RuntimeException"},
        {"java/lang/ArrayIndexOutOfBoundsException", "java/lang/IndexOutOfBoundsException"},
        {"java/lang/UnsupportedOperationException", "java/lang/RuntimeException"},
        {"java/io/IOException", "java/lang/Exception"},
        {"java/util/Random", kObject},
        {"java/security/SecureRandom", "java/util/Random"},
        {"java/util/AbstractCollection", kObject},
        {"java/util/AbstractList", "java/util/AbstractCollection"},
        {"java/util/ArrayList", "java/util/AbstractList"},
        {"java/util/AbstractMap", kObject},
        {"java/util/HashMap", "java/util/AbstractMap"},
    };
    builtin_interfaces_ = {
        "java/util/Collection", "java/util/List", "java/util/Set",
        "java/util/Map",        "java/util/Queue", "java/util/Deque",
        "java/lang/Iterable",   "java/lang/Comparable", "java/lang/Runnable",
        "java/io/Serializable", "java/lang/CharSequence",
    };
}

void ClassIndex::add(const ClassFile* cf) { classes_[cf->name()] = cf; }

const ClassFile* ClassIndex::find(const std::string& name) const {
    auto it = classes_.find(name);
    return it == classes_.end() ? nullptr : it->second;
}

std::vector<const ClassFile*> ClassIndex::all() const {
    std::vector<const ClassFile*> out;
    out.reserve(classes_.size());
    for (const auto& [_, cf] : classes_) out.push_back(cf);
    return out;
}

std::optional<std::string> ClassIndex::super_of(const std::string& name) const {
    if (const ClassFile* cf = find(name)) {
        std::string s = cf->super_name();
        if (s.empty()) return std::nullopt;
        return s;
    }
    auto it = builtin_supers_.find(name);
    if (it != builtin_supers_.end()) return it->second;
    return std::nullopt;
}

bool ClassIndex::is_subclass_of(const std::string& name, const std::string& ancestor) const {
    if (ancestor == kObject) return true;
    std::string cur = name;
    for (int depth = 0; depth < 64; ++depth) {
        if (cur == ancestor) return true;
        auto s = super_of(cur);
        if (!s) return false;
        cur = *s;
    }
    return false;
}

std::string ClassIndex::common_super(const std::string& a, const std::string& b) const {
    std::vector<std::string> chain;
    std::string cur = a;
    chain.push_back(cur);
    for (int depth = 0; depth < 64; ++depth) {
        auto s = super_of(cur);
        if (!s) break;
        cur = *s;
        chain.push_back(cur);
    }
    chain.push_back(kObject);
    cur = b;
    for (int depth = 0; depth < 66; ++depth) {
        if (std::find(chain.begin(), chain.end(), cur) != chain.end()) return cur;
        auto s = super_of(cur);
        if (!s) break;
        cur = *s;
    }
    return kObject;
}

bool ClassIndex::is_known_interface(const std::string& name) const {
    if (const ClassFile* cf = find(name)) return (cf->access_flags & 0x0200) != 0;
    return std::find(builtin_interfaces_.begin(), builtin_interfaces_.end(), name) !=
           builtin_interfaces_.end();
}

bool ClassIndex::is_collection_like(const std::string& descriptor) const {
    std::string cls = class_of_descriptor(descriptor);
    if (cls.empty()) return false;
    static const char* kNames[] = {
        "java/util/Collection", "java/util/List", "java/util/Set",   "java/util/Map",
        "java/util/Queue",      "java/util/Deque", "java/util/ArrayList",
        "java/util/HashMap",    "java/util/HashSet",
    };
    for (const char* n : kNames) {
        if (cls == n) return true;
    }
    return false;
}

}  // namespace bcrepair
