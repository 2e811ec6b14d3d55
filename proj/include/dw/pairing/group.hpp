#pragma once

// BLS12-381 type-III pairing group, backed by blst.

#include <blst.h>

#include <cstdint>
#include <string_view>

#include "dw/common/bytes.hpp"
#include "dw/common/random.hpp"

namespace dw::pairing {

constexpr std::uint16_t kCurveBls12_381 = 1;
constexpr unsigned kSecurityBits = 128;

constexpr std::size_t kScalarSize = 32;
constexpr std::size_t kG1Size = 48;
constexpr std::size_t kG2Size = 96;
constexpr std::size_t kGtSize = 576;

/// Element of Z_r.
class Scalar {
public:
    Scalar();

    static Scalar zero() { return Scalar(); }
    static Scalar one();
    static Scalar from_u64(std::uint64_t v);
    static Scalar random(RandomSource& rng);
    static Scalar random_nonzero(RandomSource& rng);
    /// 32-byte big-endian canonical encoding; rejects values >= r.
    static Scalar from_bytes(ByteView b);

    Bytes to_bytes() const;
    bool is_zero() const;
    Scalar inverse() const;

    Scalar operator+(const Scalar& o) const;
    Scalar operator-(const Scalar& o) const;
    Scalar operator*(const Scalar& o) const;
    Scalar operator-() const;
    friend bool operator==(const Scalar& a, const Scalar& b);

    /// Little-endian bytes as blst's multiplication routines expect.
    blst_scalar raw_scalar() const;

private:
    blst_fr v_;
};

class G1 {
public:
    G1();

    static G1 identity() { return G1(); }
    static G1 generator();
    /// Hash to curve (SSWU, random oracle variant) under a fixed tag.
    static G1 hash(std::string_view msg);
    static G1 from_bytes(ByteView b);

    Bytes to_bytes() const;
    bool is_identity() const;
    G1 operator*(const Scalar& k) const;
    G1 operator+(const G1& o) const;
    friend bool operator==(const G1& a, const G1& b);

    blst_p1_affine affine() const;

private:
    blst_p1 p_;
};

class G2 {
public:
    G2();

    static G2 identity() { return G2(); }
    static G2 generator();
    static G2 from_bytes(ByteView b);

    Bytes to_bytes() const;
    bool is_identity() const;
    G2 operator*(const Scalar& k) const;
    G2 operator+(const G2& o) const;
    friend bool operator==(const G2& a, const G2& b);

    blst_p2_affine affine() const;

private:
    blst_p2 p_;
};

class GT {
public:
    GT();

    static GT one() { return GT(); }
    static GT from_bytes(ByteView b);

    Bytes to_bytes() const;
    bool is_one() const;
    GT inverse() const;
    GT pow(const Scalar& k) const;
    GT operator*(const GT& o) const;
    GT operator/(const GT& o) const { return *this * o.inverse(); }
    friend bool operator==(const GT& a, const GT& b);

private:
    explicit GT(const blst_fp12& v) : v_(v) {}
    friend GT pair(const G1& a, const G2& b);

    blst_fp12 v_;
};

/// e(a, b). Every call bumps the per-thread pairing counter.
GT pair(const G1& a, const G2& b);

std::uint64_t pairing_count();
void reset_pairing_count();

} // namespace dw::pairing
