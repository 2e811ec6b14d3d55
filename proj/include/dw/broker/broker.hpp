#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dw/broker/adapters.hpp"
#include "dw/broker/lifecycle.hpp"
#include "dw/broker/storage.hpp"
#include "dw/common/clock.hpp"
#include "dw/common/random.hpp"
#include "dw/keyvault/keyvault.hpp"
#include "dw/ledger/chain.hpp"
#include "dw/ledger/inspector.hpp"
#include "dw/pdcpabe/scheme.hpp"
#include "dw/sharding/shamir.hpp"
#include "dw/willfile/will.hpp"

namespace dw::broker {

class UnknownWill : public BrokerError {
public:
    using BrokerError::BrokerError;
};

class ValidationError : public BrokerError {
public:
    using BrokerError::BrokerError;
};

class AuthError : public BrokerError {
public:
    using BrokerError::BrokerError;
};

class BadAttestation : public BrokerError {
public:
    using BrokerError::BrokerError;
};

using AuthorityPublicKey = std::array<std::uint8_t, 32>;
using AuthoritySecretKey = std::array<std::uint8_t, 64>;

/// Ed25519 keypair for the override authority, derived from a 32-byte seed.
std::pair<AuthorityPublicKey, AuthoritySecretKey> authority_keypair(ByteView seed);
/// Signature over will_id || "OVERRIDE".
Bytes make_attestation(const AuthoritySecretKey& sk, std::string_view will_id);

struct BrokerConfig {
    unsigned security_level = 128;
    std::optional<AuthorityPublicKey> authority_key;
    /// Provider answers slower than this count as failed requests.
    TimestampMs request_timeout_ms = 2000;
    std::string actor = "broker";
};

struct WillRecord {
    willfile::DigitalWill will;
    WillStateMachine machine;

    WillState state() const { return machine.state(); }
    unsigned version() const { return machine.version(); }
};

struct StateChange {
    std::string will_id;
    WillState from;
    WillState to;

    friend bool operator==(const StateChange&, const StateChange&) = default;
};

/// One per platform: the ciphertext covering all of that platform's assets.
struct PlatformFile {
    std::string platform_id;
    std::string file_id;
    std::vector<std::string> payload_ids;
    std::size_t ciphertext_bytes = 0;
    std::size_t attribute_pairs = 0;
    unsigned shares_placed = 0;
};

struct ExecutionReport {
    std::string will_id;
    std::vector<std::string> platforms_pulled;
    std::vector<std::string> platforms_failed;
    std::size_t assets_pulled = 0;
    std::vector<std::string> assets_without_policy;
    std::vector<PlatformFile> files;
    std::size_t envelopes = 0;
    std::vector<std::string> warnings;
    std::vector<sharding::ManifestEntry> manifest;
    std::map<std::string, double> step_seconds;

    std::size_t ciphertexts() const { return files.size(); }
    std::size_t shares() const { return manifest.size(); }
    std::string to_json() const;
};

struct FileRetrieval {
    std::string platform_id;
    std::string file_id;
    unsigned requests = 0;
    std::vector<std::string> failed_locations;
    pdcpabe::DecryptionReport report;
};

struct RetrievalReport {
    std::string will_id;
    std::string heir_id;
    std::vector<FileRetrieval> files;

    unsigned total_requests() const;
    /// payload id -> bytes over every platform.
    std::map<std::string, Bytes> recovered() const;
    std::vector<std::string> denied() const;
};

/// Everything a successor broker needs. Custody of the master key after
/// export is not addressed.
struct ExportBundle {
    Bytes public_params;
    Bytes master_key;
    std::string manifest_json;
    std::string ledger_text;
    std::map<std::string, std::string> wills; // will id -> XML
};

/// Orchestrates will lifecycles. Every public operation appends at least one
/// ledger entry; rejected operations append a Warn entry and rethrow.
/// Operations on one will are serialized; different wills run independently.
class Broker {
public:
    Broker(BrokerConfig config, const Clock& clock, RandomSource& rng = system_random());
    ~Broker();

    void add_adapter(std::shared_ptr<PlatformAdapter> adapter);
    void add_provider(std::shared_ptr<StorageProvider> provider);
    std::shared_ptr<StorageProvider> provider(const std::string& location_id) const;

    std::string deploy(const willfile::DigitalWill& will);
    unsigned update_will(const std::string& will_id, const willfile::DigitalWill& will);
    WillState delete_will(const std::string& will_id, const std::string& creator_id);
    WillState request_trigger(const std::string& will_id, const std::string& heir_id);
    WillState vote(const std::string& will_id, const std::string& heir_id);
    WillState veto(const std::string& will_id, const std::string& creator_id);
    WillState authority_override(const std::string& will_id, ByteView attestation);
    std::vector<StateChange> tick();
    ExecutionReport execute(const std::string& will_id);
    RetrievalReport retrieve(const std::string& will_id, const std::string& heir_id, const keyvault::Scalar& heir_sk);

    WillState state(const std::string& will_id) const;
    WillRecord record(const std::string& will_id) const;
    std::vector<std::string> will_ids() const;
    /// Serialized envelope holding the heir's PD-CP-ABE key, once executed.
    Bytes envelope_for(const std::string& will_id, const std::string& heir_id) const;

    const ledger::HashChain& ledger() const { return chain_; }
    ledger::ParamsMap inspector_params() const;
    sharding::ShareManifest manifest() const;
    const pdcpabe::PublicParams& public_params() const { return pp_; }
    ExportBundle export_state() const;

private:
    struct Slot;

    Slot& slot(const std::string& will_id) const;
    void log(const std::string& actor, ledger::Action action, const std::string& subject, std::string_view payload);
    template <class F>
    auto guarded(const std::string& will_id, const char* op, F&& f);

    BrokerConfig config_;
    const Clock& clock_;
    LockedRandom rng_;
    pdcpabe::PublicParams pp_;
    pdcpabe::MasterKey mk_;
    ledger::HashChain chain_;

    mutable std::mutex registry_mu_;
    std::map<std::string, std::unique_ptr<Slot>> wills_;
    std::map<std::string, std::shared_ptr<PlatformAdapter>> adapters_;
    std::map<std::string, std::shared_ptr<StorageProvider>> providers_;
    sharding::ShareManifest manifest_;
    std::map<std::pair<std::string, std::string>, Bytes> envelopes_;
};

} // namespace dw::broker
