#pragma once

#include <array>
#include <cstdint>

// GF(2^8) modulo x^8 + x^4 + x^3 + x + 1.
namespace dw::gf256 {

std::uint8_t mul(std::uint8_t a, std::uint8_t b);
/// Multiplicative inverse; inv(0) is undefined and returns 0.
std::uint8_t inv(std::uint8_t a);
inline std::uint8_t add(std::uint8_t a, std::uint8_t b) { return a ^ b; }
inline std::uint8_t div(std::uint8_t a, std::uint8_t b) { return mul(a, inv(b)); }

/// Row of the multiplication table for a fixed factor.
std::array<std::uint8_t, 256> mul_row(std::uint8_t factor);

} // namespace dw::gf256
