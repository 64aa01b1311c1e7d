#ifndef BCREPAIR_TESTS_FIXTURES_HPP
#define BCREPAIR_TESTS_FIXTURES_HPP

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "bcrepair/classfile.hpp"
#include "bcrepair/io.hpp"

namespace testsupport {

inline std::string fixtures_dir() { return FIXTURES_DIR; }
inline std::string corpus_dir() { return std::string(FIXTURES_DIR) + "/corpus"; }
inline std::string e2e_dir(const std::string& name) {
    return std::string(FIXTURES_DIR) + "/e2e/" + name;
}
inline std::string repair_bin() { return REPAIR_BIN; }
inline std::string vmrun_bin() { return VMRUN_BIN; }

inline std::vector<std::string> corpus_files() {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(corpus_dir())) {
        if (e.path().extension() == ".class") out.push_back(e.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::string corpus_file(const std::string& name) {
    return corpus_dir() + "/" + name;
}

inline bcrepair::ClassFile load_corpus(const std::string& name) {
    return bcrepair::load_class_file(corpus_file(name));
}

// Scratch directory unique to the calling test, wiped on creation.
inline std::string scratch_dir(const std::string& tag) {
    std::string dir = std::filesystem::temp_directory_path().string() + "/bcrepair-test-" + tag;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testsupport

#endif
