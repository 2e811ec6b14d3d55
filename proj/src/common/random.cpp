#include "dw/common/random.hpp"

#include <sodium.h>

#include <cstring>

#include "dw/common/crypto.hpp"

namespace dw {

Bytes RandomSource::bytes(std::size_t n)
{
    Bytes out(n);
    fill(out);
    return out;
}

std::uint64_t RandomSource::next_u64()
{
    std::array<std::uint8_t, 8> b{};
    fill(b);
    std::uint64_t v = 0;
    for (auto x : b) v = (v << 8) | x;
    return v;
}

std::uint64_t RandomSource::uniform(std::uint64_t bound)
{
    if (bound == 0) {
        throw Error("uniform: bound must be nonzero");
    }
    // rejection sampling keeps the distribution exact
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    for (;;) {
        auto v = next_u64();
        if (v < limit) return v % bound;
    }
}

void SystemRandom::fill(std::span<std::uint8_t> out)
{
    crypto::ensure_sodium();
    randombytes_buf(out.data(), out.size());
}

SeededRandom::SeededRandom(std::uint64_t seed)
{
    ByteWriter w;
    w.raw(std::string_view("dw.seeded-random.v1"));
    w.u64(seed);
    key_ = crypto::sha256(w.bytes());
}

SeededRandom::SeededRandom(const std::array<std::uint8_t, 32>& key) : key_(key) {}

void SeededRandom::refill()
{
    crypto::ensure_sodium();
    std::array<std::uint8_t, crypto_stream_chacha20_ietf_NONCEBYTES> nonce{};
    for (int i = 0; i < 8; ++i) {
        nonce[i] = static_cast<std::uint8_t>(block_ >> (8 * i));
    }
    ++block_;
    crypto_stream_chacha20_ietf(buf_.data(), buf_.size(), nonce.data(), key_.data());
    pos_ = 0;
}

void SeededRandom::fill(std::span<std::uint8_t> out)
{
    std::size_t done = 0;
    while (done < out.size()) {
        if (pos_ == buf_.size()) refill();
        std::size_t n = std::min(out.size() - done, buf_.size() - pos_);
        std::memcpy(out.data() + done, buf_.data() + pos_, n);
        pos_ += n;
        done += n;
    }
}

RandomSource& system_random()
{
    static SystemRandom rng;
    return rng;
}

} // namespace dw
