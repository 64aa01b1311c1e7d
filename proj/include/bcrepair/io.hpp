#ifndef BCREPAIR_IO_HPP
#define BCREPAIR_IO_HPP

#include <stdexcept>
#include <string>

#include "bcrepair/bytes.hpp"

namespace bcrepair {

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

Bytes read_file(const std::string& path);
void write_file(const std::string& path, std::span<const u1> bytes);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace bcrepair

#endif
