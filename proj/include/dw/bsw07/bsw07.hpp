#pragma once

// Bethencourt-Sahai-Waters CP-ABE, one message per ciphertext. Shares the
// pairing group and attribute hash with the PD-CP-ABE implementation.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dw/common/crypto.hpp"
#include "dw/pairing/group.hpp"
#include "dw/policy/policy.hpp"

namespace dw::bsw07 {

using pairing::G1;
using pairing::G2;
using pairing::GT;
using pairing::Scalar;

struct PublicParams {
    G1 g1;
    G2 g2;
    G1 h;  // g1^beta
    G2 f;  // g2^(1/beta)
    GT egg_alpha;
};

struct MasterKey {
    Scalar beta;
    G2 g_alpha;
};

struct SecretKey {
    policy::AttributeSet attrs;
    G2 d; // g2^((alpha + r) / beta)
    struct Component {
        G1 dj;       // g1^r * H(j)^rj
        G2 dj_prime; // g2^rj
    };
    std::map<std::string, Component> components;
};

struct LeafPair {
    G2 c_y;       // g2^q_y(0)
    G1 c_y_prime; // H(att)^q_y(0)
};

struct Ciphertext {
    policy::PolicyExpr policy;
    GT c_tilde; // key * e(g,g)^(alpha s)
    G1 c;       // h^s
    std::vector<LeafPair> leaves; // left-to-right leaf order
    crypto::AeadNonce nonce{};
    Bytes sealed;
};

std::pair<PublicParams, MasterKey> setup(RandomSource& rng = system_random());
SecretKey keygen(const PublicParams& pp, const MasterKey& mk, const policy::AttributeSet& attrs,
                 RandomSource& rng = system_random());
Ciphertext encrypt(const PublicParams& pp, ByteView message, const policy::PolicyExpr& policy,
                   RandomSource& rng = system_random());
/// nullopt when the key does not satisfy the policy or the payload fails
/// authentication.
std::optional<Bytes> decrypt(const PublicParams& pp, const SecretKey& key, const Ciphertext& ct);

/// "BSW07---", u16 version, u16 curve id, then the fields.
Bytes serialize(const Ciphertext& ct);
Ciphertext deserialize_ciphertext(ByteView data);

} // namespace dw::bsw07
