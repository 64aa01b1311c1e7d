#ifndef BCREPAIR_DESCRIPTOR_HPP
#define BCREPAIR_DESCRIPTOR_HPP

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bcrepair {

struct InvalidDescriptor : std::runtime_error {
    explicit InvalidDescriptor(const std::string& d)
        : std::runtime_error("invalid descriptor: " + d) {}
};

bool is_valid_field_descriptor(std::string_view d);
bool is_valid_method_descriptor(std::string_view d);

// Splits "(II[Ljava/lang/String;)V" into {"I","I","[Ljava/lang/String;"} / "V".
// Throws InvalidDescriptor on malformed input.
struct MethodDescriptor {
    std::vector<std::string> params;
    std::string ret;  // "V" for void
};
MethodDescriptor parse_method_descriptor(std::string_view d);

// Operand-stack slots a value of this type occupies (J/D = 2, V = 0, else 1).
int slot_width(std::string_view field_desc);

// Total argument slots of a method descriptor (receiver not included).
int arg_slots(std::string_view method_desc);

inline bool is_primitive_descriptor(std::string_view d) {
    return d.size() == 1 && std::string_view("BCDFIJSZ").find(d[0]) != std::string_view::npos;
}
inline bool is_reference_descriptor(std::string_view d) {
    return !d.empty() && (d[0] == 'L' || d[0] == '[');
}

// "Ljava/lang/String;" -> "java/lang/String"; arrays and primitives -> "".
std::string class_of_descriptor(std::string_view d);

}  // namespace bcrepair

#endif
