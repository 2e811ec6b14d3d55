#include "dw/common/bytes.hpp"

#include <array>

namespace dw {

std::string to_hex(ByteView data)
{
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0x0f]);
    }
    return out;
}

namespace {

int hex_value(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

Bytes from_hex(std::string_view hex)
{
    if (hex.size() % 2 != 0) {
        throw DecodeError("hex string has odd length");
    }
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = hex_value(hex[2 * i]);
        int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) {
            throw DecodeError("invalid hex digit");
        }
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

void ByteWriter::u16(std::uint16_t v)
{
    u8(static_cast<std::uint8_t>(v >> 8));
    u8(static_cast<std::uint8_t>(v));
}

void ByteWriter::u32(std::uint32_t v)
{
    for (int shift = 24; shift >= 0; shift -= 8) {
        u8(static_cast<std::uint8_t>(v >> shift));
    }
}

void ByteWriter::u64(std::uint64_t v)
{
    for (int shift = 56; shift >= 0; shift -= 8) {
        u8(static_cast<std::uint8_t>(v >> shift));
    }
}

void ByteWriter::blob(ByteView data)
{
    u64(data.size());
    raw(data);
}

void ByteWriter::str(std::string_view s)
{
    if (s.size() > UINT32_MAX) {
        throw Error("string too long for container");
    }
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s);
}

ByteView ByteReader::raw(std::size_t n)
{
    if (n > remaining()) {
        throw DecodeError("truncated input: need " + std::to_string(n) + " bytes at offset " +
                          std::to_string(pos_) + ", have " + std::to_string(remaining()));
    }
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
}

std::uint8_t ByteReader::u8() { return raw(1)[0]; }

std::uint16_t ByteReader::u16()
{
    auto b = raw(2);
    return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
}

std::uint32_t ByteReader::u32()
{
    auto b = raw(4);
    std::uint32_t v = 0;
    for (auto x : b) v = (v << 8) | x;
    return v;
}

std::uint64_t ByteReader::u64()
{
    auto b = raw(8);
    std::uint64_t v = 0;
    for (auto x : b) v = (v << 8) | x;
    return v;
}

Bytes ByteReader::blob()
{
    auto n = u64();
    if (n > remaining()) {
        throw DecodeError("blob length exceeds input");
    }
    auto v = raw(static_cast<std::size_t>(n));
    return Bytes(v.begin(), v.end());
}

std::string ByteReader::str()
{
    auto n = u32();
    auto v = raw(n);
    return std::string(v.begin(), v.end());
}

void ByteReader::expect_done() const
{
    if (!done()) {
        throw DecodeError("trailing bytes after container (" + std::to_string(remaining()) + ")");
    }
}

} // namespace dw
