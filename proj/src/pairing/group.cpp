#include "dw/pairing/group.hpp"

#include <array>
#include <cstring>

namespace dw::pairing {

namespace {

constexpr std::string_view kHashTag = "DWILL-V01-CS01-with-BLS12381G1_XMD:SHA-256_SSWU_RO_";

thread_local std::uint64_t t_pairings = 0;

} // namespace

// ---- Scalar ----

Scalar::Scalar()
{
    std::memset(&v_, 0, sizeof v_);
}

Scalar Scalar::one()
{
    return from_u64(1);
}

Scalar Scalar::from_u64(std::uint64_t v)
{
    const std::uint64_t limbs[4] = {v, 0, 0, 0};
    Scalar s;
    blst_fr_from_uint64(&s.v_, limbs);
    return s;
}

Scalar Scalar::random(RandomSource& rng)
{
    auto wide = rng.bytes(64);
    blst_scalar sc;
    blst_scalar_from_be_bytes(&sc, wide.data(), wide.size());
    Scalar s;
    blst_fr_from_scalar(&s.v_, &sc);
    return s;
}

Scalar Scalar::random_nonzero(RandomSource& rng)
{
    for (;;) {
        Scalar s = random(rng);
        if (!s.is_zero()) return s;
    }
}

Scalar Scalar::from_bytes(ByteView b)
{
    if (b.size() != kScalarSize) throw DecodeError("scalar must be 32 bytes");
    blst_scalar sc;
    blst_scalar_from_bendian(&sc, b.data());
    if (!blst_scalar_fr_check(&sc)) throw DecodeError("scalar out of range");
    Scalar s;
    blst_fr_from_scalar(&s.v_, &sc);
    return s;
}

Bytes Scalar::to_bytes() const
{
    blst_scalar sc;
    blst_scalar_from_fr(&sc, &v_);
    Bytes out(kScalarSize);
    blst_bendian_from_scalar(out.data(), &sc);
    return out;
}

bool Scalar::is_zero() const
{
    return *this == Scalar();
}

Scalar Scalar::inverse() const
{
    if (is_zero()) throw Error("inverse of zero scalar");
    Scalar s;
    blst_fr_inverse(&s.v_, &v_);
    return s;
}

Scalar Scalar::operator+(const Scalar& o) const
{
    Scalar s;
    blst_fr_add(&s.v_, &v_, &o.v_);
    return s;
}

Scalar Scalar::operator-(const Scalar& o) const
{
    Scalar s;
    blst_fr_sub(&s.v_, &v_, &o.v_);
    return s;
}

Scalar Scalar::operator*(const Scalar& o) const
{
    Scalar s;
    blst_fr_mul(&s.v_, &v_, &o.v_);
    return s;
}

Scalar Scalar::operator-() const
{
    Scalar s;
    blst_fr_cneg(&s.v_, &v_, true);
    return s;
}

bool operator==(const Scalar& a, const Scalar& b)
{
    return std::memcmp(&a.v_, &b.v_, sizeof a.v_) == 0;
}

blst_scalar Scalar::raw_scalar() const
{
    blst_scalar sc;
    blst_scalar_from_fr(&sc, &v_);
    return sc;
}

// ---- G1 ----

G1::G1()
{
    std::memset(&p_, 0, sizeof p_);
}

G1 G1::generator()
{
    G1 g;
    g.p_ = *blst_p1_generator();
    return g;
}

G1 G1::hash(std::string_view msg)
{
    G1 g;
    blst_hash_to_g1(&g.p_, reinterpret_cast<const byte*>(msg.data()), msg.size(),
                    reinterpret_cast<const byte*>(kHashTag.data()), kHashTag.size(), nullptr, 0);
    return g;
}

G1 G1::from_bytes(ByteView b)
{
    if (b.size() != kG1Size) throw DecodeError("G1 element must be 48 bytes");
    blst_p1_affine a;
    if (blst_p1_uncompress(&a, b.data()) != BLST_SUCCESS) throw DecodeError("bad G1 encoding");
    if (!blst_p1_affine_in_g1(&a)) throw DecodeError("point not in G1");
    G1 g;
    blst_p1_from_affine(&g.p_, &a);
    return g;
}

Bytes G1::to_bytes() const
{
    Bytes out(kG1Size);
    blst_p1_compress(out.data(), &p_);
    return out;
}

bool G1::is_identity() const
{
    return blst_p1_is_inf(&p_);
}

G1 G1::operator*(const Scalar& k) const
{
    auto sc = k.raw_scalar();
    G1 r;
    blst_p1_mult(&r.p_, &p_, sc.b, 255);
    return r;
}

G1 G1::operator+(const G1& o) const
{
    G1 r;
    blst_p1_add_or_double(&r.p_, &p_, &o.p_);
    return r;
}

bool operator==(const G1& a, const G1& b)
{
    return blst_p1_is_equal(&a.p_, &b.p_);
}

blst_p1_affine G1::affine() const
{
    blst_p1_affine a;
    blst_p1_to_affine(&a, &p_);
    return a;
}

// ---- G2 ----

G2::G2()
{
    std::memset(&p_, 0, sizeof p_);
}

G2 G2::generator()
{
    G2 g;
    g.p_ = *blst_p2_generator();
    return g;
}

G2 G2::from_bytes(ByteView b)
{
    if (b.size() != kG2Size) throw DecodeError("G2 element must be 96 bytes");
    blst_p2_affine a;
    if (blst_p2_uncompress(&a, b.data()) != BLST_SUCCESS) throw DecodeError("bad G2 encoding");
    if (!blst_p2_affine_in_g2(&a)) throw DecodeError("point not in G2");
    G2 g;
    blst_p2_from_affine(&g.p_, &a);
    return g;
}

Bytes G2::to_bytes() const
{
    Bytes out(kG2Size);
    blst_p2_compress(out.data(), &p_);
    return out;
}

bool G2::is_identity() const
{
    return blst_p2_is_inf(&p_);
}

G2 G2::operator*(const Scalar& k) const
{
    auto sc = k.raw_scalar();
    G2 r;
    blst_p2_mult(&r.p_, &p_, sc.b, 255);
    return r;
}

G2 G2::operator+(const G2& o) const
{
    G2 r;
    blst_p2_add_or_double(&r.p_, &p_, &o.p_);
    return r;
}

bool operator==(const G2& a, const G2& b)
{
    return blst_p2_is_equal(&a.p_, &b.p_);
}

blst_p2_affine G2::affine() const
{
    blst_p2_affine a;
    blst_p2_to_affine(&a, &p_);
    return a;
}

// ---- GT ----

GT::GT() : v_(*blst_fp12_one()) {}

GT GT::from_bytes(ByteView b)
{
    if (b.size() != kGtSize) throw DecodeError("GT element must be 576 bytes");
    blst_fp12 v;
    const byte* p = b.data();
    for (auto& f6 : v.fp6) {
        for (auto& f2 : f6.fp2) {
            for (auto& f : f2.fp) {
                blst_fp_from_bendian(&f, p);
                p += 48;
            }
        }
    }
    GT g(v);
    // Round-trip rejects non-canonical field encodings.
    if (g.to_bytes() != Bytes(b.begin(), b.end())) throw DecodeError("non-canonical GT encoding");
    if (!blst_fp12_in_group(&v)) throw DecodeError("element not in GT");
    return g;
}

Bytes GT::to_bytes() const
{
    Bytes out(kGtSize);
    byte* p = out.data();
    for (const auto& f6 : v_.fp6) {
        for (const auto& f2 : f6.fp2) {
            for (const auto& f : f2.fp) {
                blst_bendian_from_fp(p, &f);
                p += 48;
            }
        }
    }
    return out;
}

bool GT::is_one() const
{
    return blst_fp12_is_one(&v_);
}

GT GT::inverse() const
{
    // Unitary elements invert by conjugation.
    blst_fp12 r = v_;
    blst_fp12_conjugate(&r);
    return GT(r);
}

GT GT::pow(const Scalar& k) const
{
    auto sc = k.raw_scalar();
    // 4-bit fixed window, most significant nibble first.
    std::array<blst_fp12, 16> table;
    table[0] = *blst_fp12_one();
    table[1] = v_;
    for (std::size_t i = 2; i < table.size(); ++i) blst_fp12_mul(&table[i], &table[i - 1], &v_);

    blst_fp12 acc = *blst_fp12_one();
    bool started = false;
    for (int i = 63; i >= 0; --i) {
        const unsigned nib = (sc.b[i / 2] >> ((i % 2) * 4)) & 0xF;
        if (started) {
            for (int s = 0; s < 4; ++s) blst_fp12_cyclotomic_sqr(&acc, &acc);
        }
        if (nib) {
            blst_fp12_mul(&acc, &acc, &table[nib]);
            started = true;
        }
    }
    return GT(acc);
}

GT GT::operator*(const GT& o) const
{
    blst_fp12 r;
    blst_fp12_mul(&r, &v_, &o.v_);
    return GT(r);
}

bool operator==(const GT& a, const GT& b)
{
    return blst_fp12_is_equal(&a.v_, &b.v_);
}

GT pair(const G1& a, const G2& b)
{
    ++t_pairings;
    if (a.is_identity() || b.is_identity()) return GT::one();
    auto pa = a.affine();
    auto pb = b.affine();
    blst_fp12 ml;
    blst_miller_loop(&ml, &pb, &pa);
    blst_fp12 r;
    blst_final_exp(&r, &ml);
    return GT(r);
}

std::uint64_t pairing_count()
{
    return t_pairings;
}

void reset_pairing_count()
{
    t_pairings = 0;
}

} // namespace dw::pairing
