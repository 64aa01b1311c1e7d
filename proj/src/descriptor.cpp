#include "bcrepair/descriptor.hpp"

namespace bcrepair {
namespace {

// Consumes one field descriptor starting at pos; returns length or 0 on error.
std::size_t scan_field(std::string_view d, std::size_t pos) {
    std::size_t start = pos;
    while (pos < d.size() && d[pos] == '[') ++pos;
    if (pos - start > 255 || pos >= d.size()) return 0;
    switch (d[pos]) {
        case 'B': case 'C': case 'D': case 'F':
        case 'I': case 'J': case 'S': case 'Z':
            return pos + 1 - start;
        case 'L': {
            std::size_t semi = d.find(';', pos + 1);
            if (semi == std::string_view::npos || semi == pos + 1) return 0;
            return semi + 1 - start;
        }
        default:
            return 0;
    }
}

}  // namespace

bool is_valid_field_descriptor(std::string_view d) {
    return !d.empty() && scan_field(d, 0) == d.size();
}

bool is_valid_method_descriptor(std::string_view d) {
    if (d.size() < 3 || d[0] != '(') return false;
    std::size_t pos = 1;
    while (pos < d.size() && d[pos] != ')') {
        std::size_t n = scan_field(d, pos);
        if (n == 0) return false;
        pos += n;
    }
    if (pos >= d.size()) return false;
    ++pos;  // ')'
    if (pos == d.size()) return false;
    if (d.substr(pos) == "V") return true;
    return scan_field(d, pos) == d.size() - pos;
}

MethodDescriptor parse_method_descriptor(std::string_view d) {
    if (!is_valid_method_descriptor(d)) throw InvalidDescriptor(std::string(d));
    MethodDescriptor out;
    std::size_t pos = 1;
    while (d[pos] != ')') {
        std::size_t n = scan_field(d, pos);
        out.params.emplace_back(d.substr(pos, n));
        pos += n;
    }
    out.ret = std::string(d.substr(pos + 1));
    return out;
}

int slot_width(std::string_view field_desc) {
    if (field_desc == "V") return 0;
    if (field_desc == "J" || field_desc == "D") return 2;
    return 1;
}

int arg_slots(std::string_view method_desc) {
    MethodDescriptor md = parse_method_descriptor(method_desc);
    int n = 0;
    for (const auto& p : md.params) n += slot_width(p);
    return n;
}

std::string class_of_descriptor(std::string_view d) {
    if (d.size() >= 2 && d.front() == 'L' && d.back() == ';')
        return std::string(d.substr(1, d.size() - 2));
    return "";
}

}  // namespace bcrepair
