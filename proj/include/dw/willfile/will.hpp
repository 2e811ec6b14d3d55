#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dw/common/bytes.hpp"

namespace dw::willfile {

inline constexpr std::string_view kNamespace = "urn:beyondlife:will:1";

class WillError : public Error {
public:
    using Error::Error;
};

/// Document does not match the will vocabulary. path() is like
/// "/will/heirs/heir[2]".
class SchemaViolation : public WillError {
public:
    SchemaViolation(std::string path, const std::string& what);
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// A content policy failed to parse.
class PolicySyntaxError : public SchemaViolation {
public:
    PolicySyntaxError(std::string path, std::size_t offset, const std::string& what);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Raised by serialize_xml / validate for a will that breaks an invariant.
class InvariantViolation : public WillError {
public:
    using WillError::WillError;
};

struct Heir {
    std::string id;
    std::string contact;
    std::string public_key; // hex-encoded keyvault public key
    std::set<std::string> attributes;

    friend bool operator==(const Heir&, const Heir&) = default;
};

struct PlatformLink {
    std::string platform_id;
    std::string access_token; // synthetic placeholder, never a live credential
    std::vector<std::string> asset_selectors;

    friend bool operator==(const PlatformLink&, const PlatformLink&) = default;
};

/// Selector patterns use '*' (any run) and '?' (one character) against
/// "<platform_id>/<asset path>".
struct ContentPolicy {
    std::string asset_selector;
    std::string policy;

    friend bool operator==(const ContentPolicy&, const ContentPolicy&) = default;
};

struct TriggerConfig {
    unsigned vote_threshold = 1;
    std::uint64_t freeze_seconds = 0;
    bool authority_override_allowed = true;

    friend bool operator==(const TriggerConfig&, const TriggerConfig&) = default;
};

struct StoragePrefs {
    std::vector<std::string> location_ids;
    unsigned threshold = 2;

    friend bool operator==(const StoragePrefs&, const StoragePrefs&) = default;
};

/// A top-level element from another namespace, kept byte for byte along with
/// the prefix bindings it borrowed from the root element.
struct Extension {
    std::string xml;
    std::vector<std::pair<std::string, std::string>> namespaces;

    friend bool operator==(const Extension&, const Extension&) = default;
};

struct DigitalWill {
    std::string will_id;
    std::string creator_id;
    std::vector<Heir> heirs;
    std::vector<PlatformLink> platform_links;
    std::vector<ContentPolicy> content_policies;
    TriggerConfig trigger;
    StoragePrefs storage;
    std::vector<Extension> extensions;

    const Heir* heir(std::string_view id) const;
    /// First content policy whose selector matches, or nullptr.
    const ContentPolicy* policy_for(std::string_view asset_id) const;

    friend bool operator==(const DigitalWill&, const DigitalWill&) = default;
};

bool selector_matches(std::string_view pattern, std::string_view text);

/// Throws InvariantViolation on a hard violation; returns warnings.
std::vector<std::string> validate(const DigitalWill& will);

DigitalWill parse_xml(std::string_view xml);
std::string serialize_xml(const DigitalWill& will);

} // namespace dw::willfile
