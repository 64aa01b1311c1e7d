#ifndef BCREPAIR_FRAMES_HPP
#define BCREPAIR_FRAMES_HPP

#include <stdexcept>
#include <string>

#include "bcrepair/classindex.hpp"
#include "bcrepair/codemodel.hpp"

namespace bcrepair {

struct FrameRegenerationFailed : std::runtime_error {
    explicit FrameRegenerationFailed(const std::string& what)
        : std::runtime_error("stack map regeneration failed: " + what) {}
};

struct MethodContext {
    std::string class_name;   // enclosing class, binary form
    std::string method_name;
    std::string descriptor;
    bool is_static = false;
    const ClassIndex* index = nullptr;  // superclass facts for reference merges
    bool allow_downgrade = true;        // false when the class uses >=51 features
};

enum class FrameStatus : u1 {
    Preserved,    // original records kept (offsets may shift on encode)
    Regenerated,  // table rebuilt by dataflow
    Downgraded,   // table dropped; class must be emitted as major 50
};

struct FrameRefreshResult {
    CodeBody body;
    FrameStatus status = FrameStatus::Preserved;
};

// Three-tier refresh after body edits: keep the original records when the
// recomputed type states still match them, otherwise regenerate the table by
// forward dataflow over verification types, otherwise drop frames for a
// version-50 emission. Throws FrameRegenerationFailed when every tier fails.
FrameRefreshResult refresh_frames(const CodeBody& body, ConstantPool& pool, u2 major_version,
                                  const MethodContext& ctx);

// Regeneration entry point used by refresh_frames and tests: returns the body
// (dead code squashed to nop/athrow when frames are required) with
// `frames` set to the regenerated records, or throws FrameRegenerationFailed.
CodeBody regenerate_frames(const CodeBody& body, ConstantPool& pool, const MethodContext& ctx);

}  // namespace bcrepair

#endif
