#pragma once

// Random will generator for round-trip checks: markup-hostile text, optional
// platforms and rules, and foreign-namespace extensions.

#include <string>

#include "dw/willfile/will.hpp"
#include "dw/willfile/xml.hpp"
#include "support/random_policy.hpp"

namespace dw::testgen {

inline std::string random_text(RandomSource& rng, std::size_t max_len)
{
    static const std::string alphabet = "abcXYZ019 <>&\"'_-./@";
    std::string s;
    auto n = rng.uniform(max_len + 1);
    for (std::size_t i = 0; i < n; ++i) s += alphabet[rng.uniform(alphabet.size())];
    return s;
}

inline willfile::DigitalWill random_will(RandomSource& rng)
{
    using namespace willfile;
    DigitalWill w;
    w.will_id = "w" + std::to_string(rng.uniform(100000));
    w.creator_id = "c" + random_text(rng, 8);
    auto heirs = 1 + rng.uniform(4);
    for (std::size_t i = 0; i < heirs; ++i) {
        Heir h{"h" + std::to_string(i), random_text(rng, 12), to_hex(rng.bytes(32)), {}};
        h.attributes = random_attrs(rng, 6);
        if (h.attributes.empty()) h.attributes.insert("A");
        w.heirs.push_back(std::move(h));
    }
    auto platforms = rng.uniform(3);
    for (std::size_t i = 0; i < platforms; ++i) {
        PlatformLink p{"p" + std::to_string(i), "PLACEHOLDER-" + random_text(rng, 6), {}};
        auto sel = rng.uniform(3);
        for (std::size_t k = 0; k < sel; ++k) p.asset_selectors.push_back(p.platform_id + "/" + random_text(rng, 5) + "*");
        w.platform_links.push_back(std::move(p));
    }
    auto rules = rng.uniform(4);
    for (std::size_t i = 0; i < rules; ++i) {
        w.content_policies.push_back({random_text(rng, 10), random_policy(rng, 6, 3).to_string()});
    }
    w.trigger.vote_threshold = static_cast<unsigned>(1 + rng.uniform(heirs));
    w.trigger.freeze_seconds = rng.uniform(1000000);
    w.trigger.authority_override_allowed = rng.uniform(2) == 1;
    auto locs = 2 + rng.uniform(5);
    for (std::size_t i = 0; i < locs; ++i) w.storage.location_ids.push_back("loc" + std::to_string(i));
    w.storage.threshold = static_cast<unsigned>(2 + rng.uniform(locs - 1));
    auto exts = rng.uniform(3);
    for (std::size_t i = 0; i < exts; ++i) {
        if (rng.uniform(2)) {
            w.extensions.push_back({"<x:e" + std::to_string(i) + " v=\"" + std::to_string(rng.uniform(99)) +
                                        "\">" + xml::escape_text(random_text(rng, 6)) + "</x:e" + std::to_string(i) + ">",
                                    {{"x", "urn:test:x"}}});
        } else {
            w.extensions.push_back({"<own xmlns=\"urn:test:own\"><inner  a='1'/></own>", {}});
        }
    }
    return w;
}

} // namespace dw::testgen
