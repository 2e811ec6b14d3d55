#pragma once

// A broker wired to the committed adapter fixtures and in-memory providers:
// 3 platforms, 2 heirs, 4 providers, threshold 2.

#include <memory>
#include <string>
#include <vector>

#include "dw/broker/broker.hpp"
#include "dw/common/clock.hpp"
#include "dw/common/random.hpp"
#include "dw/keyvault/keyvault.hpp"

namespace dw::testgen {

inline const keyvault::KdfParams kFastKdf{1, 8192};

inline willfile::DigitalWill e2e_will(const keyvault::HeirKeypair& bob, const keyvault::HeirKeypair& cy,
                                      std::size_t locations = 4)
{
    willfile::DigitalWill w;
    w.will_id = "will-e2e";
    w.creator_id = "ada";
    w.heirs.push_back({"bob", "bob@example.org", bob.pk_hex(), {"Son", "Family", "Executor", "Friend"}});
    w.heirs.push_back({"cy", "cy@example.org", cy.pk_hex(), {"Friend"}});
    w.platform_links.push_back({"social", "PLACEHOLDER-social-0001", {"social/*"}});
    w.platform_links.push_back({"email", "PLACEHOLDER-email-0001", {"email/*"}});
    w.platform_links.push_back({"cloud", "PLACEHOLDER-cloud-0001", {"cloud/*"}});
    w.content_policies = {
        {"social/photos/*", "(Son and Family)"},
        {"social/posts/*", "(Son or Friend)"},
        {"email/inbox/*", "(Son and Executor)"},
        {"email/sent/*", "(Family or Friend)"},
        {"cloud/docs/*", "(Executor and (Son or Family))"},
        {"cloud/*", "Son"},
    };
    w.trigger = {2, 3600, true};
    for (std::size_t i = 1; i <= locations; ++i) w.storage.location_ids.push_back("loc-" + std::to_string(i));
    w.storage.threshold = 2;
    return w;
}

struct BrokerWorld {
    SimulatedClock clock{1'700'000'000'000};
    SeededRandom rng;
    keyvault::HeirKeypair bob;
    keyvault::HeirKeypair cy;
    broker::AuthoritySecretKey authority_sk{};
    std::vector<std::shared_ptr<broker::MemoryProvider>> providers;
    std::vector<std::shared_ptr<broker::FixtureAdapter>> adapters;
    std::unique_ptr<broker::Broker> broker;
    willfile::DigitalWill will;

    explicit BrokerWorld(std::uint64_t seed = 1, std::size_t provider_count = 4) : rng(seed)
    {
        Bytes salt(16, 0x42);
        bob = keyvault::derive_keypair("bob's password", salt, kFastKdf);
        cy = keyvault::derive_keypair("cy's password", salt, kFastKdf);
        auto [apk, ask] = broker::authority_keypair(Bytes(32, 7));
        authority_sk = ask;
        broker::BrokerConfig cfg;
        cfg.authority_key = apk;
        broker = std::make_unique<broker::Broker>(cfg, clock, rng);
        for (auto& [id, a] : broker::load_fixture_dir(DW_REPO_DATA "/adapters")) {
            std::shared_ptr<broker::FixtureAdapter> shared = std::move(a);
            adapters.push_back(shared);
            broker->add_adapter(shared);
        }
        for (std::size_t i = 1; i <= provider_count; ++i) {
            auto p = std::make_shared<broker::MemoryProvider>("loc-" + std::to_string(i));
            providers.push_back(p);
            broker->add_provider(p);
        }
        will = e2e_will(bob, cy);
    }

    /// deploy, two votes, freeze expiry.
    void activate()
    {
        broker->deploy(will);
        broker->request_trigger(will.will_id, "bob");
        broker->vote(will.will_id, "bob");
        broker->vote(will.will_id, "cy");
        clock.advance_ms(3'600'000);
        broker->tick();
    }

    void reset_provider_stats()
    {
        for (auto& p : providers) p->reset_stats();
    }

    std::uint64_t total_gets() const
    {
        std::uint64_t n = 0;
        for (const auto& p : providers) n += p->stats().gets;
        return n;
    }

    std::map<std::string, Bytes> adapter_bytes() const
    {
        std::map<std::string, Bytes> out;
        for (const auto& a : adapters) {
            for (const auto& asset : a->assets()) out[asset.id] = asset.document;
        }
        return out;
    }
};

} // namespace dw::testgen
