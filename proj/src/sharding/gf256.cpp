#include "dw/sharding/gf256.hpp"

namespace dw::gf256 {

namespace {

struct Tables {
    std::array<std::uint8_t, 512> exp{};
    std::array<std::uint8_t, 256> log{};

    Tables()
    {
        // 3 generates the multiplicative group for this modulus.
        std::uint8_t x = 1;
        for (int i = 0; i < 255; ++i) {
            exp[i] = x;
            log[x] = static_cast<std::uint8_t>(i);
            std::uint8_t hi = x & 0x80;
            std::uint8_t x2 = static_cast<std::uint8_t>(x << 1);
            if (hi) x2 ^= 0x1b;
            x = x2 ^ x;
        }
        for (int i = 255; i < 512; ++i) exp[i] = exp[i - 255];
    }
};

const Tables& tables()
{
    static const Tables t;
    return t;
}

} // namespace

std::uint8_t mul(std::uint8_t a, std::uint8_t b)
{
    if (a == 0 || b == 0) return 0;
    const auto& t = tables();
    return t.exp[t.log[a] + t.log[b]];
}

std::uint8_t inv(std::uint8_t a)
{
    if (a == 0) return 0;
    const auto& t = tables();
    return t.exp[255 - t.log[a]];
}

std::array<std::uint8_t, 256> mul_row(std::uint8_t factor)
{
    std::array<std::uint8_t, 256> row{};
    for (int i = 0; i < 256; ++i) row[i] = mul(factor, static_cast<std::uint8_t>(i));
    return row;
}

} // namespace dw::gf256
