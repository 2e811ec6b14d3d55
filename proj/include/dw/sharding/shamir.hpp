#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dw/common/bytes.hpp"
#include "dw/common/crypto.hpp"
#include "dw/common/random.hpp"

namespace dw::sharding {

class ShardingError : public Error {
public:
    using Error::Error;
};

class TooFewLocations : public ShardingError {
public:
    using ShardingError::ShardingError;
};

class InvalidThreshold : public ShardingError {
public:
    using ShardingError::ShardingError;
};

class ThresholdNotMet : public ShardingError {
public:
    using ShardingError::ShardingError;
};

class InconsistentShares : public ShardingError {
public:
    using ShardingError::ShardingError;
};

constexpr unsigned kMaxShares = 255;

struct Share {
    std::string file_id;
    std::uint16_t share_id = 0; // also the evaluation point
    std::uint16_t total = 0;
    std::uint16_t threshold = 0;
    Bytes payload;

    std::uint8_t x() const { return static_cast<std::uint8_t>(share_id); }
    friend bool operator==(const Share&, const Share&) = default;
};

/// ceil(n / 2), at least 2.
unsigned default_threshold(std::size_t n);

/// Byte-wise Shamir over GF(2^8): every byte is the constant term of its own
/// random polynomial of degree t - 1; share i holds the values at x = i.
std::vector<Share> split(const std::string& file_id, ByteView data, unsigned n, unsigned t,
                         RandomSource& rng = system_random());

/// Interpolates at 0 from the first `threshold` distinct shares.
Bytes combine(const std::vector<Share>& shares);

/// "DWSHARE1", u16 file id length, file id, u16 share id, u16 total,
/// u16 threshold, u64 payload length, payload.
Bytes encode_share(const Share& s);
Share decode_share(ByteView data);

struct ManifestEntry {
    std::string file_id;
    std::uint16_t share_id = 0;
    std::string location_id;
    crypto::Digest digest{}; // SHA-256 of the encoded share, checked on retrieval

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Append-only record of where each share went.
class ShareManifest {
public:
    void record(ManifestEntry e);
    const std::vector<ManifestEntry>& entries() const { return entries_; }
    /// Entries of one file, ordered by share id.
    std::vector<ManifestEntry> placements(const std::string& file_id) const;
    std::vector<std::string> files() const;

private:
    std::vector<ManifestEntry> entries_;
};

} // namespace dw::sharding
