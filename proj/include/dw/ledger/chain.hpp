#pragma once

// Append-only hash chain. Entry hashes are SHA-256 over
//   u64 seq | u64 timestamp | u32 len, actor | u8 action | u32 len, subject |
//   payload digest (32) | prev hash (32)
// with integers big-endian. The genesis entry links to 32 zero bytes.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dw/common/bytes.hpp"
#include "dw/common/clock.hpp"
#include "dw/common/crypto.hpp"

namespace dw::ledger {

using Hash = crypto::Digest;

inline constexpr std::string_view kChainMagic = "DWCHAIN1";

enum class Action : std::uint8_t {
    DeployWill = 1,
    UpdateWill,
    DeleteWill,
    TriggerRequest,
    VoteCast,
    FreezeStart,
    Veto,
    AuthorityOverride,
    Activate,
    PullData,
    EncryptData,
    SplitUpload,
    KeyDistribute,
    RetrieveShares,
    Warn, // operational warning, e.g. a storage provider that failed a health check
};

std::string_view to_string(Action a);
std::optional<Action> action_from_string(std::string_view s);

struct LogEntry {
    std::uint64_t seq = 0;
    TimestampMs timestamp = 0;
    std::string actor;
    Action action = Action::DeployWill;
    std::string subject;
    Hash payload_digest{};
    Hash prev_hash{};
    Hash entry_hash{};

    Hash compute_hash() const;

    friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

class ChainCorrupt : public Error {
public:
    explicit ChainCorrupt(std::uint64_t seq);
    std::uint64_t seq() const { return seq_; }

private:
    std::uint64_t seq_;
};

struct Verdict {
    std::optional<std::uint64_t> first_bad; // empty when the chain is intact

    bool ok() const { return !first_bad; }
};

Verdict verify_chain(std::span<const LogEntry> entries);

/// Single-writer chain. append() is serialized internally; snapshot() gives
/// readers an immutable copy.
class HashChain {
public:
    HashChain() = default;
    explicit HashChain(std::vector<LogEntry> entries) : entries_(std::move(entries)) {}
    HashChain(const HashChain& other);
    HashChain& operator=(const HashChain& other);

    /// Verifies the existing chain first; throws ChainCorrupt at the first bad seq.
    const LogEntry& append(std::string actor, Action action, std::string subject, ByteView payload,
                           TimestampMs timestamp);

    const std::vector<LogEntry>& entries() const { return entries_; }
    std::vector<LogEntry> snapshot() const;
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    Hash tip_hash() const;
    Verdict verify() const { return verify_chain(entries_); }

    /// Direct access for tamper tests and tooling.
    std::vector<LogEntry>& mutable_entries() { return entries_; }

    std::string to_text() const;
    static HashChain from_text(std::string_view text);
    void save(const std::string& path) const;
    static HashChain load(const std::string& path);

private:
    mutable std::mutex mu_;
    std::vector<LogEntry> entries_;
};

} // namespace dw::ledger
