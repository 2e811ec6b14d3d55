#include "dw/bsw07/bsw07.hpp"

#include <cstring>

namespace dw::bsw07 {

namespace {

constexpr std::string_view kMagic = "BSW07---";
constexpr std::uint16_t kVersion = 1;

crypto::AeadKey message_key(const GT& k)
{
    crypto::Sha256 h;
    h.update(std::string_view("dw.bsw07.payload-key.v1"));
    h.update(k.to_bytes());
    return h.finish();
}

// Child x-coordinates are 1 and 2, as in the original construction.
void share(const PublicParams& pp, const policy::PolicyExpr& node, const Scalar& v, RandomSource& rng,
           std::vector<LeafPair>& out)
{
    if (node.is_attr()) {
        out.push_back({pp.g2 * v, G1::hash(node.attribute()) * v});
        return;
    }
    if (node.kind() == policy::PolicyExpr::Kind::Or) {
        share(pp, node.left(), v, rng, out);
        share(pp, node.right(), v, rng, out);
        return;
    }
    const Scalar a = Scalar::random(rng);
    share(pp, node.left(), v + a, rng, out);
    share(pp, node.right(), v + a * Scalar::from_u64(2), rng, out);
}

class Decryptor {
public:
    Decryptor(const SecretKey& key, const Ciphertext& ct) : key_(key), ct_(ct) {}

    std::optional<GT> node(const policy::PolicyExpr& n)
    {
        if (n.is_attr()) {
            const LeafPair& leaf = ct_.leaves.at(next_++);
            auto it = key_.components.find(n.attribute());
            if (it == key_.components.end()) return std::nullopt;
            return pairing::pair(it->second.dj, leaf.c_y) / pairing::pair(leaf.c_y_prime, it->second.dj_prime);
        }
        if (n.kind() == policy::PolicyExpr::Kind::Or) {
            if (policy::evaluate(n.left(), key_.attrs)) {
                auto v = node(n.left());
                skip(n.right());
                return v;
            }
            skip(n.left());
            return node(n.right());
        }
        if (!policy::evaluate(n, key_.attrs)) {
            skip(n);
            return std::nullopt;
        }
        auto l = node(n.left());
        auto r = node(n.right());
        // Lagrange at 0 over x = 1, 2: 2 * y1 - y2.
        return l->pow(Scalar::from_u64(2)) / *r;
    }

private:
    void skip(const policy::PolicyExpr& n) { next_ += n.leaf_count(); }

    const SecretKey& key_;
    const Ciphertext& ct_;
    std::size_t next_ = 0;
};

} // namespace

std::pair<PublicParams, MasterKey> setup(RandomSource& rng)
{
    const Scalar alpha = Scalar::random_nonzero(rng);
    MasterKey mk;
    mk.beta = Scalar::random_nonzero(rng);
    PublicParams pp;
    pp.g1 = G1::generator();
    pp.g2 = G2::generator();
    mk.g_alpha = pp.g2 * alpha;
    pp.h = pp.g1 * mk.beta;
    pp.f = pp.g2 * mk.beta.inverse();
    pp.egg_alpha = pairing::pair(pp.g1, mk.g_alpha);
    return {pp, mk};
}

SecretKey keygen(const PublicParams& pp, const MasterKey& mk, const policy::AttributeSet& attrs, RandomSource& rng)
{
    if (attrs.empty()) throw Error("attribute set is empty");
    const Scalar r = Scalar::random_nonzero(rng);
    SecretKey key;
    key.attrs = attrs;
    key.d = (mk.g_alpha + pp.g2 * r) * mk.beta.inverse();
    const G1 g1r = pp.g1 * r;
    for (const auto& a : attrs) {
        const Scalar rj = Scalar::random_nonzero(rng);
        key.components.emplace(a, SecretKey::Component{g1r + G1::hash(a) * rj, pp.g2 * rj});
    }
    return key;
}

Ciphertext encrypt(const PublicParams& pp, ByteView message, const policy::PolicyExpr& policy, RandomSource& rng)
{
    const Scalar s = Scalar::random(rng);
    const GT k = pp.egg_alpha.pow(Scalar::random(rng));
    Ciphertext ct{policy, k * pp.egg_alpha.pow(s), pp.h * s, {}, {}, {}};
    ct.leaves.reserve(policy.leaf_count());
    share(pp, policy, s, rng, ct.leaves);
    rng.fill(ct.nonce);
    ct.sealed = crypto::aead_seal(message_key(k), ct.nonce, message);
    return ct;
}

std::optional<Bytes> decrypt(const PublicParams&, const SecretKey& key, const Ciphertext& ct)
{
    if (ct.leaves.size() != ct.policy.leaf_count()) throw DecodeError("leaf count mismatch");
    if (!policy::evaluate(ct.policy, key.attrs)) return std::nullopt;
    auto a = Decryptor(key, ct).node(ct.policy);
    if (!a) return std::nullopt;
    const GT k = ct.c_tilde * *a / pairing::pair(ct.c, key.d);
    return crypto::aead_open(message_key(k), ct.nonce, ct.sealed);
}

Bytes serialize(const Ciphertext& ct)
{
    ByteWriter w;
    w.raw(kMagic);
    w.u16(kVersion);
    w.u16(pairing::kCurveBls12_381);
    w.str(ct.policy.to_string());
    w.raw(ct.c_tilde.to_bytes());
    w.raw(ct.c.to_bytes());
    w.u32(static_cast<std::uint32_t>(ct.leaves.size()));
    for (const auto& l : ct.leaves) {
        w.raw(l.c_y.to_bytes());
        w.raw(l.c_y_prime.to_bytes());
    }
    w.raw(ct.nonce);
    w.blob(ct.sealed);
    return w.take();
}

Ciphertext deserialize_ciphertext(ByteView data)
{
    ByteReader r(data);
    auto magic = r.raw(kMagic.size());
    if (std::memcmp(magic.data(), kMagic.data(), kMagic.size()) != 0) throw DecodeError("bad magic");
    if (r.u16() != kVersion) throw DecodeError("unsupported version");
    if (r.u16() != pairing::kCurveBls12_381) throw DecodeError("unsupported curve");
    Ciphertext ct{policy::parse_policy(r.str()), {}, {}, {}, {}, {}};
    ct.c_tilde = GT::from_bytes(r.raw(pairing::kGtSize));
    ct.c = G1::from_bytes(r.raw(pairing::kG1Size));
    ct.leaves.resize(r.u32());
    if (ct.leaves.size() != ct.policy.leaf_count()) throw DecodeError("leaf count mismatch");
    for (auto& l : ct.leaves) {
        l.c_y = G2::from_bytes(r.raw(pairing::kG2Size));
        l.c_y_prime = G1::from_bytes(r.raw(pairing::kG1Size));
    }
    auto n = r.raw(ct.nonce.size());
    std::memcpy(ct.nonce.data(), n.data(), n.size());
    ct.sealed = r.blob();
    r.expect_done();
    return ct;
}

} // namespace dw::bsw07
