#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dw {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Base class for every error raised by this project.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a binary container is truncated or structurally invalid.
class DecodeError : public Error {
public:
    using Error::Error;
};

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }
inline std::string to_string(ByteView b) { return std::string(b.begin(), b.end()); }
inline ByteView as_view(std::string_view s)
{
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// Big-endian writer for the length-prefixed container formats.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void raw(ByteView data) { buf_.insert(buf_.end(), data.begin(), data.end()); }
    void raw(std::string_view s) { raw(as_view(s)); }
    /// u64 length prefix followed by the bytes.
    void blob(ByteView data);
    /// u32 length prefix followed by the characters.
    void str(std::string_view s);

    std::size_t size() const { return buf_.size(); }
    const Bytes& bytes() const { return buf_; }
    Bytes take() { return std::move(buf_); }

private:
    Bytes buf_;
};

class ByteReader {
public:
    explicit ByteReader(ByteView data) : data_(data) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    ByteView raw(std::size_t n);
    Bytes blob();
    std::string str();

    std::size_t remaining() const { return data_.size() - pos_; }
    std::size_t position() const { return pos_; }
    bool done() const { return pos_ == data_.size(); }
    void expect_done() const;

private:
    ByteView data_;
    std::size_t pos_ = 0;
};

} // namespace dw
