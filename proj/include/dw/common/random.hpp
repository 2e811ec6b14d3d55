#pragma once

#include <array>
#include <cstdint>
#include <mutex>
#include <span>

#include "dw/common/bytes.hpp"

namespace dw {

/// Source of cryptographic randomness. Every randomized operation in the
/// library takes one of these so tests can inject a reproducible stream.
class RandomSource {
public:
    virtual ~RandomSource() = default;
    virtual void fill(std::span<std::uint8_t> out) = 0;

    Bytes bytes(std::size_t n);
    std::uint64_t next_u64();
    /// Uniform integer in [0, bound); bound must be nonzero.
    std::uint64_t uniform(std::uint64_t bound);
};

/// Operating-system entropy (libsodium randombytes).
class SystemRandom final : public RandomSource {
public:
    void fill(std::span<std::uint8_t> out) override;
};

/// Deterministic ChaCha20 keystream. Same seed, same bytes.
class SeededRandom final : public RandomSource {
public:
    explicit SeededRandom(std::uint64_t seed);
    explicit SeededRandom(const std::array<std::uint8_t, 32>& key);

    void fill(std::span<std::uint8_t> out) override;

private:
    void refill();

    std::array<std::uint8_t, 32> key_{};
    std::uint64_t block_ = 0;
    std::array<std::uint8_t, 1024> buf_{};
    std::size_t pos_ = buf_.size();
};

/// Serializes access to another source so several threads can share it.
class LockedRandom final : public RandomSource {
public:
    explicit LockedRandom(RandomSource& inner) : inner_(inner) {}

    void fill(std::span<std::uint8_t> out) override
    {
        std::lock_guard lock(mu_);
        inner_.fill(out);
    }

private:
    RandomSource& inner_;
    std::mutex mu_;
};

/// Process-wide system entropy source.
RandomSource& system_random();

} // namespace dw
