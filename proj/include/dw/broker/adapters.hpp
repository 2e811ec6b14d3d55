#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dw/broker/lifecycle.hpp"
#include "dw/common/bytes.hpp"

namespace dw::broker {

class AdapterFailure : public BrokerError {
public:
    using BrokerError::BrokerError;
};

struct Asset {
    std::string id; // "<platform_id>/<path>"
    Bytes document; // JSON text

    friend bool operator==(const Asset&, const Asset&) = default;
};

class PlatformAdapter {
public:
    virtual ~PlatformAdapter() = default;
    virtual const std::string& platform_id() const = 0;
    /// Throws AdapterFailure.
    virtual std::vector<Asset> fetch(const std::string& access_token) = 0;
};

/// Serves assets from a synthetic JSON fixture:
///   {"platform": "social", "token": "PLACEHOLDER-...",
///    "assets": [{"path": "photos/1.jpg", "document": {...}}],
///    "generate": {"seed": 7, "count": 4, "prefix": "posts/"}}
/// "token" and "generate" are optional. Generated documents come from a
/// seeded stream, so a fixture always yields the same bytes.
class FixtureAdapter final : public PlatformAdapter {
public:
    static std::unique_ptr<FixtureAdapter> from_json(std::string_view text);
    static std::unique_ptr<FixtureAdapter> from_file(const std::filesystem::path& path);

    FixtureAdapter(std::string platform_id, std::string token, std::vector<Asset> assets);

    const std::string& platform_id() const override { return platform_; }
    std::vector<Asset> fetch(const std::string& access_token) override;

    void set_failing(bool failing) { failing_ = failing; }
    const std::vector<Asset>& assets() const { return assets_; }

private:
    std::string platform_;
    std::string token_;
    std::vector<Asset> assets_;
    bool failing_ = false;
};

/// Every *.json fixture in a directory, keyed by platform id.
std::map<std::string, std::unique_ptr<FixtureAdapter>> load_fixture_dir(const std::filesystem::path& dir);

} // namespace dw::broker
