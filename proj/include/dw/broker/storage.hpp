#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "dw/broker/lifecycle.hpp"
#include "dw/common/bytes.hpp"

namespace dw::broker {

class StorageFailure : public BrokerError {
public:
    using BrokerError::BrokerError;
};

/// Fault switches. A slow provider still answers but reports `latency_ms`;
/// the broker treats answers slower than its timeout as failures.
struct Faults {
    bool unavailable = false;
    TimestampMs latency_ms = 0;
    bool corrupting = false; // get() flips one byte of the stored blob
};

struct ProviderStats {
    std::uint64_t puts = 0;
    std::uint64_t gets = 0;
    std::uint64_t failures = 0;
};

class StorageProvider {
public:
    explicit StorageProvider(std::string location_id) : location_(std::move(location_id)) {}
    virtual ~StorageProvider() = default;

    const std::string& location_id() const { return location_; }

    /// Throws StorageFailure when unavailable.
    void put(const std::string& file_id, std::uint16_t share_id, ByteView blob);
    Bytes get(const std::string& file_id, std::uint16_t share_id);
    std::vector<std::pair<std::string, std::uint16_t>> list();

    void set_faults(const Faults& f);
    Faults faults() const;
    ProviderStats stats() const;
    void reset_stats();
    /// Latency of the most recent request.
    TimestampMs last_latency_ms() const;

protected:
    virtual void store(const std::string& file_id, std::uint16_t share_id, ByteView blob) = 0;
    virtual Bytes load(const std::string& file_id, std::uint16_t share_id) = 0;
    virtual std::vector<std::pair<std::string, std::uint16_t>> keys() = 0;

private:
    void check_available();

    std::string location_;
    mutable std::mutex mu_;
    Faults faults_;
    ProviderStats stats_;
    TimestampMs last_latency_ = 0;
};

class MemoryProvider final : public StorageProvider {
public:
    using StorageProvider::StorageProvider;

protected:
    void store(const std::string& file_id, std::uint16_t share_id, ByteView blob) override;
    Bytes load(const std::string& file_id, std::uint16_t share_id) override;
    std::vector<std::pair<std::string, std::uint16_t>> keys() override;

private:
    std::mutex mu_;
    std::map<std::pair<std::string, std::uint16_t>, Bytes> blobs_;
};

/// Files live at <root>/<location_id>/<file_id>.<share_id>.share. Characters
/// outside [A-Za-z0-9_-] in file ids are written as %XX.
class DirectoryProvider final : public StorageProvider {
public:
    DirectoryProvider(std::filesystem::path root, std::string location_id);

    std::filesystem::path path_for(const std::string& file_id, std::uint16_t share_id) const;

protected:
    void store(const std::string& file_id, std::uint16_t share_id, ByteView blob) override;
    Bytes load(const std::string& file_id, std::uint16_t share_id) override;
    std::vector<std::pair<std::string, std::uint16_t>> keys() override;

private:
    std::filesystem::path dir_;
};

} // namespace dw::broker
