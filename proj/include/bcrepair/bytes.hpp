#ifndef BCREPAIR_BYTES_HPP
#define BCREPAIR_BYTES_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bcrepair {

using u1 = std::uint8_t;
using u2 = std::uint16_t;
using u4 = std::uint32_t;
using u8 = std::uint64_t;
using i1 = std::int8_t;
using i2 = std::int16_t;
using i4 = std::int32_t;

using Bytes = std::vector<u1>;

// Signalled by ByteReader on overrun; every consumer maps it to its own
// error type carrying the fault offset.
struct ByteUnderflow {
    std::size_t offset;
};

// Big-endian cursor over an immutable byte region (class files are
// big-endian throughout).
class ByteReader {
public:
    explicit ByteReader(std::span<const u1> data) : data_(data) {}

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }
    bool at_end() const { return pos_ == data_.size(); }

    u1 read_u1() {
        need(1);
        return data_[pos_++];
    }
    u2 read_u2() {
        need(2);
        u2 v = static_cast<u2>((data_[pos_] << 8) | data_[pos_ + 1]);
        pos_ += 2;
        return v;
    }
    u4 read_u4() {
        need(4);
        u4 v = (static_cast<u4>(data_[pos_]) << 24) | (static_cast<u4>(data_[pos_ + 1]) << 16) |
               (static_cast<u4>(data_[pos_ + 2]) << 8) | static_cast<u4>(data_[pos_ + 3]);
        pos_ += 4;
        return v;
    }
    u8 read_u8() {
        u8 hi = read_u4();
        return (hi << 32) | read_u4();
    }
    i1 read_i1() { return static_cast<i1>(read_u1()); }
    i2 read_i2() { return static_cast<i2>(read_u2()); }
    i4 read_i4() { return static_cast<i4>(read_u4()); }

    std::span<const u1> read_bytes(std::size_t n) {
        need(n);
        auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }
    std::string read_string(std::size_t n) {
        auto b = read_bytes(n);
        return std::string(reinterpret_cast<const char*>(b.data()), b.size());
    }
    void skip(std::size_t n) { need(n), pos_ += n; }

private:
    void need(std::size_t n) {
        if (data_.size() - pos_ < n) throw ByteUnderflow{pos_};
    }

    std::span<const u1> data_;
    std::size_t pos_ = 0;
};

// Big-endian append-only buffer with back-patching for length fields.
class ByteWriter {
public:
    std::size_t size() const { return out_.size(); }

    void write_u1(u1 v) { out_.push_back(v); }
    void write_u2(u2 v) {
        out_.push_back(static_cast<u1>(v >> 8));
        out_.push_back(static_cast<u1>(v));
    }
    void write_u4(u4 v) {
        out_.push_back(static_cast<u1>(v >> 24));
        out_.push_back(static_cast<u1>(v >> 16));
        out_.push_back(static_cast<u1>(v >> 8));
        out_.push_back(static_cast<u1>(v));
    }
    void write_u8(u8 v) {
        write_u4(static_cast<u4>(v >> 32));
        write_u4(static_cast<u4>(v));
    }
    void write_i1(i1 v) { write_u1(static_cast<u1>(v)); }
    void write_i2(i2 v) { write_u2(static_cast<u2>(v)); }
    void write_i4(i4 v) { write_u4(static_cast<u4>(v)); }
    void write_bytes(std::span<const u1> b) { out_.insert(out_.end(), b.begin(), b.end()); }
    void write_string(const std::string& s) {
        out_.insert(out_.end(), s.begin(), s.end());
    }

    void patch_u4(std::size_t at, u4 v) {
        out_[at] = static_cast<u1>(v >> 24);
        out_[at + 1] = static_cast<u1>(v >> 16);
        out_[at + 2] = static_cast<u1>(v >> 8);
        out_[at + 3] = static_cast<u1>(v);
    }

    Bytes take() { return std::move(out_); }
    const Bytes& data() const { return out_; }

private:
    Bytes out_;
};

}  // namespace bcrepair

#endif
