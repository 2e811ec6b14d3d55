#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dw/common/bytes.hpp"
#include "dw/common/crypto.hpp"
#include "dw/common/random.hpp"
#include "dw/pairing/group.hpp"
#include "dw/policy/dag.hpp"

namespace dw::pdcpabe {

using pairing::G1;
using pairing::G2;
using pairing::GT;
using pairing::Scalar;
using policy::AttributeSet;
using policy::NodeId;

class UnsupportedSecurityLevel : public Error {
public:
    explicit UnsupportedSecurityLevel(unsigned bits);
};

class EmptyAttributeSet : public Error {
public:
    EmptyAttributeSet() : Error("attribute set is empty") {}
};

class EmptyInput : public Error {
public:
    EmptyInput() : Error("nothing to encrypt") {}
};

class MalformedCiphertext : public Error {
public:
    using Error::Error;
};

// Group placement: f_k, C1..C3, Dj and Chat' live in G1; D1, D3, Dj',
// Chat and g^alpha live in G2.

struct PublicParams {
    G1 g1;
    G2 g2;
    G1 f1, f2, f3;
    GT egg_alpha;
};

struct MasterKey {
    G2 g_alpha;
    Scalar beta1, beta2, beta3;
};

struct AttributeKey {
    G1 d;       // g1^r * H1(j)^rj
    G2 d_prime; // g2^rj
};

struct UserKey {
    AttributeSet attrs;
    G2 d1; // g2^((alpha + r) / beta1)
    G2 d3; // g2^(r / beta3)
    std::map<std::string, AttributeKey> components;

    std::size_t element_count() const { return 2 + 2 * components.size(); }
};

/// One propagation of a secret value through a DAG node. A node reached
/// along several independent paths carries several instances.
struct NodeInstance {
    NodeId node = 0;
    std::vector<std::uint32_t> children; // instance ids, in node child order
};

struct AttributePair {
    std::uint32_t tag = 0; // id of the attribute instance that produced it
    G2 c_hat;              // g2^q
    G1 c_hat_prime;        // H1(att)^q
};

struct DataNodeCiphertext {
    std::string file_group_id;
    std::uint32_t root_instance = 0;
    GT c;  // ck * e(g,g)^(alpha (s + eps))
    G1 c1; // f1^(s + eps)
    G1 c2; // f2^(s + eps), carried but unused
    G1 c3; // f3^eps
};

struct PayloadCiphertext {
    std::string payload_id;
    std::string file_group_id;
    crypto::AeadNonce nonce{};
    Bytes sealed;
};

struct Ciphertext {
    policy::IntegratedAccessDAG dag;
    std::vector<Scalar> indices; // per DAG node, zero for data nodes
    std::vector<DataNodeCiphertext> data_nodes;
    std::vector<NodeInstance> instances;
    std::map<NodeId, std::vector<AttributePair>> attr_cts;
    std::vector<PayloadCiphertext> payloads;

    std::size_t attribute_pair_count() const;
};

struct PlainItem {
    std::string payload_id;
    Bytes data;
    policy::PolicyExpr policy;
};

/// Secrets observed during encryption, for white-box tests only.
struct EncryptTrace {
    struct Group {
        std::string file_group_id;
        Scalar s, eps;
        GT ck;
    };
    std::vector<Group> groups;
    std::vector<Scalar> instance_values; // indexed by instance id
    std::vector<Scalar> coefficients;    // every polynomial coefficient drawn
};

struct EncryptOptions {
    bool reuse_shared_nodes = true;
    EncryptTrace* trace = nullptr;
};

enum class DenialReason { PolicyNotSatisfied, AuthenticationFailed };

const char* to_string(DenialReason r);

struct Denial {
    std::string payload_id;
    std::string file_group_id;
    DenialReason reason;
};

struct DecryptionReport {
    std::map<std::string, Bytes> recovered;
    std::vector<Denial> denied;
};

struct DecryptOptions {
    /// Memoize recovered instance values within the call.
    bool cache_shared = true;
};

std::pair<PublicParams, MasterKey> setup(unsigned security_level, RandomSource& rng = system_random());

UserKey keygen(const MasterKey& mk, const PublicParams& pp, const AttributeSet& attrs,
               RandomSource& rng = system_random());

Ciphertext encrypt(const PublicParams& pp, const std::vector<PlainItem>& items,
                   RandomSource& rng = system_random(), const EncryptOptions& opts = {});

DecryptionReport decrypt(const PublicParams& pp, const UserKey& key, const Ciphertext& ct,
                         const DecryptOptions& opts = {});

/// Throws MalformedCiphertext on dangling references or missing components.
void validate(const Ciphertext& ct);

/// Symmetric key for a recovered GT element.
crypto::AeadKey derive_payload_key(const GT& ck);

// Containers: "PDCPABE1", u16 version, u16 curve id, u8 object kind, then
// length-prefixed sections.
Bytes serialize(const Ciphertext& ct);
Ciphertext deserialize_ciphertext(ByteView data);
Bytes serialize(const PublicParams& pp);
PublicParams deserialize_public_params(ByteView data);
Bytes serialize(const MasterKey& mk);
MasterKey deserialize_master_key(ByteView data);
Bytes serialize(const UserKey& key);
UserKey deserialize_user_key(ByteView data);

} // namespace dw::pdcpabe
