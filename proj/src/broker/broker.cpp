#include "dw/broker/broker.hpp"

#include <sodium.h>

#include <algorithm>
#include <chrono>
#include <json.hpp>

namespace dw::broker {

using ledger::Action;
using nlohmann::json;

namespace {

constexpr std::string_view kOverrideTag = "OVERRIDE";

Bytes attestation_message(std::string_view will_id)
{
    ByteWriter w;
    w.raw(will_id);
    w.raw(kOverrideTag);
    return w.take();
}

std::set<std::string> heir_ids(const willfile::DigitalWill& w)
{
    std::set<std::string> out;
    for (const auto& h : w.heirs) out.insert(h.id);
    return out;
}

TimestampMs freeze_ms(const willfile::DigitalWill& w)
{
    return static_cast<TimestampMs>(w.trigger.freeze_seconds) * 1000;
}

void check_will(const willfile::DigitalWill& w)
{
    try {
        willfile::validate(w);
        for (const auto& h : w.heirs) keyvault::parse_public_key(h.public_key);
    } catch (const Error& e) {
        throw ValidationError(e.what());
    }
}

class Stopwatch {
public:
    double lap()
    {
        auto now = std::chrono::steady_clock::now();
        double s = std::chrono::duration<double>(now - start_).count();
        start_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

} // namespace

struct Broker::Slot {
    explicit Slot(WillRecord r) : rec(std::move(r)) {}

    std::mutex mu;
    WillRecord rec;
    std::vector<PlatformFile> files;
};

std::pair<AuthorityPublicKey, AuthoritySecretKey> authority_keypair(ByteView seed)
{
    crypto::ensure_sodium();
    if (seed.size() != crypto_sign_SEEDBYTES) throw BrokerError("authority seed must be 32 bytes");
    AuthorityPublicKey pk{};
    AuthoritySecretKey sk{};
    crypto_sign_seed_keypair(pk.data(), sk.data(), seed.data());
    return {pk, sk};
}

Bytes make_attestation(const AuthoritySecretKey& sk, std::string_view will_id)
{
    crypto::ensure_sodium();
    auto msg = attestation_message(will_id);
    Bytes sig(crypto_sign_BYTES);
    crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), sk.data());
    return sig;
}

std::string ExecutionReport::to_json() const
{
    json j;
    j["will_id"] = will_id;
    j["platforms_pulled"] = platforms_pulled;
    j["platforms_failed"] = platforms_failed;
    j["assets_pulled"] = assets_pulled;
    j["assets_without_policy"] = assets_without_policy;
    j["counts"] = {{"ciphertexts", ciphertexts()}, {"shares", shares()}, {"envelopes", envelopes}};
    j["files"] = json::array();
    for (const auto& f : files) {
        j["files"].push_back({{"platform_id", f.platform_id},
                              {"file_id", f.file_id},
                              {"payload_ids", f.payload_ids},
                              {"ciphertext_bytes", f.ciphertext_bytes},
                              {"attribute_pairs", f.attribute_pairs},
                              {"shares_placed", f.shares_placed}});
    }
    j["manifest"] = json::array();
    for (const auto& m : manifest) {
        j["manifest"].push_back({{"file_id", m.file_id},
                                 {"share_id", m.share_id},
                                 {"location_id", m.location_id},
                                 {"sha256", to_hex(m.digest)}});
    }
    j["warnings"] = warnings;
    j["timings_s"] = step_seconds;
    return j.dump(2) + "\n";
}

unsigned RetrievalReport::total_requests() const
{
    unsigned n = 0;
    for (const auto& f : files) n += f.requests;
    return n;
}

std::map<std::string, Bytes> RetrievalReport::recovered() const
{
    std::map<std::string, Bytes> out;
    for (const auto& f : files) out.insert(f.report.recovered.begin(), f.report.recovered.end());
    return out;
}

std::vector<std::string> RetrievalReport::denied() const
{
    std::vector<std::string> out;
    for (const auto& f : files) {
        for (const auto& d : f.report.denied) out.push_back(d.payload_id);
    }
    return out;
}

Broker::Broker(BrokerConfig config, const Clock& clock, RandomSource& rng)
    : config_(std::move(config)), clock_(clock), rng_(rng)
{
    auto [pp, mk] = pdcpabe::setup(config_.security_level, rng_);
    pp_ = std::move(pp);
    mk_ = std::move(mk);
}

Broker::~Broker() = default;

void Broker::add_adapter(std::shared_ptr<PlatformAdapter> adapter)
{
    std::lock_guard lock(registry_mu_);
    auto id = adapter->platform_id();
    adapters_[id] = std::move(adapter);
}

void Broker::add_provider(std::shared_ptr<StorageProvider> provider)
{
    std::lock_guard lock(registry_mu_);
    auto id = provider->location_id();
    providers_[id] = std::move(provider);
}

std::shared_ptr<StorageProvider> Broker::provider(const std::string& location_id) const
{
    std::lock_guard lock(registry_mu_);
    auto it = providers_.find(location_id);
    return it == providers_.end() ? nullptr : it->second;
}

Broker::Slot& Broker::slot(const std::string& will_id) const
{
    std::lock_guard lock(registry_mu_);
    auto it = wills_.find(will_id);
    if (it == wills_.end()) throw UnknownWill("no will with id '" + will_id + "'");
    return *it->second;
}

void Broker::log(const std::string& actor, Action action, const std::string& subject, std::string_view payload)
{
    chain_.append(actor, action, subject, as_view(payload), clock_.now_ms());
}

template <class F>
auto Broker::guarded(const std::string& will_id, const char* op, F&& f)
{
    try {
        return f();
    } catch (const Error& e) {
        log(config_.actor, Action::Warn, will_id, std::string(op) + " rejected: " + e.what());
        throw;
    }
}

std::string Broker::deploy(const willfile::DigitalWill& will)
{
    return guarded(will.will_id, "deploy", [&] {
        check_will(will);
        auto s = std::make_unique<Slot>(
            WillRecord{will, WillStateMachine(heir_ids(will), will.trigger.vote_threshold, freeze_ms(will),
                                              will.trigger.authority_override_allowed)});
        {
            std::lock_guard lock(registry_mu_);
            if (wills_.count(will.will_id)) throw ValidationError("will '" + will.will_id + "' is already deployed");
            wills_.emplace(will.will_id, std::move(s));
        }
        log(will.creator_id, Action::DeployWill, will.will_id, willfile::serialize_xml(will));
        return will.will_id;
    });
}

unsigned Broker::update_will(const std::string& will_id, const willfile::DigitalWill& will)
{
    return guarded(will_id, "update", [&] {
        auto& s = slot(will_id);
        std::lock_guard lock(s.mu);
        if (will.will_id != will_id) throw ValidationError("updated will must keep id '" + will_id + "'");
        if (will.creator_id != s.rec.will.creator_id) throw AuthError("only the creator may update a will");
        check_will(will);
        auto v = s.rec.machine.update(heir_ids(will), will.trigger.vote_threshold, freeze_ms(will),
                                      will.trigger.authority_override_allowed);
        s.rec.will = will;
        log(will.creator_id, Action::UpdateWill, will_id, willfile::serialize_xml(will));
        return v;
    });
}

WillState Broker::delete_will(const std::string& will_id, const std::string& creator_id)
{
    return guarded(will_id, "delete", [&] {
        auto& s = slot(will_id);
        std::lock_guard lock(s.mu);
        if (creator_id != s.rec.will.creator_id) throw AuthError("only the creator may delete a will");
        s.rec.machine.remove();
        log(creator_id, Action::DeleteWill, will_id, will_id);
        return s.rec.state();
    });
}

WillState Broker::request_trigger(const std::string& will_id, const std::string& heir_id)
{
    return guarded(will_id, "trigger request", [&] {
        auto& s = slot(will_id);
        std::lock_guard lock(s.mu);
        if (s.rec.machine.request_trigger(heir_id)) {
            log(heir_id, Action::TriggerRequest, will_id, heir_id);
        } else {
            log(heir_id, Action::Warn, will_id, "trigger request ignored: voting already open");
        }
        return s.rec.state();
    });
}

WillState Broker::vote(const std::string& will_id, const std::string& heir_id)
{
    return guarded(will_id, "vote", [&] {
        auto& s = slot(will_id);
        std::lock_guard lock(s.mu);
        auto now = clock_.now_ms();
        auto r = s.rec.machine.vote(heir_id, now);
        if (r.opened) log(heir_id, Action::TriggerRequest, will_id, heir_id);
        if (r.duplicate) {
            log(heir_id, Action::Warn, will_id, "duplicate vote ignored");
            return s.rec.state();
        }
        log(heir_id, Action::VoteCast, will_id, heir_id);
        if (r.froze) {
            log(config_.actor, Action::FreezeStart, will_id,
                "deadline=" + std::to_string(*s.rec.machine.freeze_deadline()));
        }
        return s.rec.state();
    });
}

WillState Broker::veto(const std::string& will_id, const std::string& creator_id)
{
    return guarded(will_id, "veto", [&] {
        auto& s = slot(will_id);
        std::lock_guard lock(s.mu);
        if (creator_id != s.rec.will.creator_id) throw AuthError("veto requires the will creator");
        s.rec.machine.veto(clock_.now_ms());
        log(creator_id, Action::Veto, will_id, creator_id);
        return s.rec.state();
    });
}

WillState Broker::authority_override(const std::string& will_id, ByteView attestation)
{
    return guarded(will_id, "authority override", [&] {
        auto& s = slot(will_id);
        std::lock_guard lock(s.mu);
        if (!config_.authority_key) throw BadAttestation("no authority key is configured");
        auto msg = attestation_message(will_id);
        crypto::ensure_sodium();
        if (attestation.size() != crypto_sign_BYTES ||
            crypto_sign_verify_detached(attestation.data(), msg.data(), msg.size(), config_.authority_key->data()) != 0) {
            throw BadAttestation("attestation does not verify");
        }
        s.rec.machine.override_activate();
        log("authority", Action::AuthorityOverride, will_id, to_hex(attestation));
        log(config_.actor, Action::Activate, will_id, "override");
        return s.rec.state();
    });
}

std::vector<StateChange> Broker::tick()
{
    std::vector<StateChange> changes;
    auto now = clock_.now_ms();
    for (const auto& id : will_ids()) {
        auto& s = slot(id);
        std::lock_guard lock(s.mu);
        auto before = s.rec.state();
        if (s.rec.machine.tick(now)) {
            log(config_.actor, Action::Activate, id, "freeze expired");
            changes.push_back({id, before, s.rec.state()});
        }
    }
    return changes;
}

ExecutionReport Broker::execute(const std::string& will_id)
{
    return guarded(will_id, "execute", [&] {
        auto& s = slot(will_id);
        std::lock_guard lock(s.mu);
        if (s.rec.state() != WillState::Activated) {
            throw IllegalState(std::string("execute not allowed in state ") + to_string(s.rec.state()));
        }
        const auto& will = s.rec.will;
        ExecutionReport rep;
        rep.will_id = will_id;
        Stopwatch sw;

        // (1) pull
        std::vector<std::pair<std::string, std::vector<Asset>>> pulled;
        for (const auto& link : will.platform_links) {
            std::shared_ptr<PlatformAdapter> adapter;
            {
                std::lock_guard reg(registry_mu_);
                auto it = adapters_.find(link.platform_id);
                if (it != adapters_.end()) adapter = it->second;
            }
            try {
                if (!adapter) throw AdapterFailure("no adapter for platform " + link.platform_id);
                std::vector<Asset> assets;
                for (auto& a : adapter->fetch(link.access_token)) {
                    bool wanted = link.asset_selectors.empty() ||
                                  std::any_of(link.asset_selectors.begin(), link.asset_selectors.end(),
                                              [&](const auto& sel) { return willfile::selector_matches(sel, a.id); });
                    if (wanted) assets.push_back(std::move(a));
                }
                std::string digest_input;
                for (const auto& a : assets) digest_input += a.id + '\n' + dw::to_string(a.document) + '\n';
                log(config_.actor, Action::PullData, will_id, digest_input);
                rep.platforms_pulled.push_back(link.platform_id);
                rep.assets_pulled += assets.size();
                pulled.emplace_back(link.platform_id, std::move(assets));
            } catch (const AdapterFailure& e) {
                rep.platforms_failed.push_back(link.platform_id);
                rep.warnings.push_back(e.what());
                log(config_.actor, Action::Warn, will_id, e.what());
            }
        }
        rep.step_seconds["pull"] = sw.lap();

        // (2) encrypt, one ciphertext per platform
        std::vector<std::pair<PlatformFile, Bytes>> blobs;
        for (auto& [platform, assets] : pulled) {
            std::vector<pdcpabe::PlainItem> items;
            for (auto& a : assets) {
                const auto* cp = will.policy_for(a.id);
                if (!cp) {
                    rep.assets_without_policy.push_back(a.id);
                    log(config_.actor, Action::Warn, will_id, "no content policy matches " + a.id);
                    continue;
                }
                items.push_back({a.id, std::move(a.document), policy::parse_policy(cp->policy)});
            }
            if (items.empty()) continue;
            auto ct = pdcpabe::encrypt(pp_, items, rng_);
            PlatformFile f;
            f.platform_id = platform;
            f.file_id = will_id + ":" + platform;
            for (const auto& i : items) f.payload_ids.push_back(i.payload_id);
            f.attribute_pairs = ct.attribute_pair_count();
            auto bytes = pdcpabe::serialize(ct);
            f.ciphertext_bytes = bytes.size();
            log(config_.actor, Action::EncryptData, will_id, to_hex(crypto::sha256(bytes)));
            blobs.emplace_back(std::move(f), std::move(bytes));
        }
        rep.step_seconds["encrypt"] = sw.lap();

        // (3) split and upload
        const auto& prefs = will.storage;
        std::vector<sharding::ManifestEntry> placed_all;
        for (auto& [f, bytes] : blobs) {
            auto n = static_cast<unsigned>(prefs.location_ids.size());
            auto shares = sharding::split(f.file_id, bytes, n, prefs.threshold, rng_);
            std::set<std::string> used;
            std::vector<std::string> spares;
            {
                std::lock_guard reg(registry_mu_);
                for (const auto& [loc, p] : providers_) {
                    if (std::find(prefs.location_ids.begin(), prefs.location_ids.end(), loc) == prefs.location_ids.end()) {
                        spares.push_back(loc);
                    }
                }
            }
            std::vector<sharding::ManifestEntry> placed;
            for (std::size_t i = 0; i < shares.size(); ++i) {
                auto blob = sharding::encode_share(shares[i]);
                std::vector<std::string> candidates = {prefs.location_ids[i]};
                candidates.insert(candidates.end(), spares.begin(), spares.end());
                bool ok = false;
                for (const auto& loc : candidates) {
                    if (used.count(loc)) continue;
                    auto p = provider(loc);
                    try {
                        if (!p) throw StorageFailure("no provider for location " + loc);
                        p->put(f.file_id, shares[i].share_id, blob);
                        used.insert(loc);
                        placed.push_back({f.file_id, shares[i].share_id, loc, crypto::sha256(blob)});
                        ok = true;
                        break;
                    } catch (const StorageFailure& e) {
                        used.insert(loc);
                        rep.warnings.push_back(e.what());
                        log(config_.actor, Action::Warn, will_id, e.what());
                    }
                }
                if (!ok) {
                    log(config_.actor, Action::Warn, will_id,
                        "share " + std::to_string(shares[i].share_id) + " of " + f.file_id + " could not be placed");
                }
            }
            if (placed.size() < prefs.threshold) {
                throw StorageFailure("only " + std::to_string(placed.size()) + " shares of " + f.file_id +
                                     " placed, threshold is " + std::to_string(prefs.threshold));
            }
            f.shares_placed = static_cast<unsigned>(placed.size());
            std::string summary;
            for (const auto& m : placed) summary += std::to_string(m.share_id) + "@" + m.location_id + "\n";
            log(config_.actor, Action::SplitUpload, will_id, f.file_id + "\n" + summary);
            placed_all.insert(placed_all.end(), placed.begin(), placed.end());
        }
        {
            std::lock_guard reg(registry_mu_);
            for (const auto& m : placed_all) manifest_.record(m);
        }
        rep.manifest = placed_all;
        rep.step_seconds["split_upload"] = sw.lap();

        // (4) keys
        std::map<std::pair<std::string, std::string>, Bytes> sealed;
        for (const auto& h : will.heirs) {
            auto key = pdcpabe::keygen(mk_, pp_, h.attributes, rng_);
            auto env = keyvault::envelope_encrypt(keyvault::parse_public_key(h.public_key), pdcpabe::serialize(key), rng_);
            auto wire = keyvault::serialize_envelope(env);
            log(config_.actor, Action::KeyDistribute, will_id, h.id + "\n" + to_hex(crypto::sha256(wire)));
            sealed[{will_id, h.id}] = std::move(wire);
        }
        {
            std::lock_guard reg(registry_mu_);
            for (auto& [k, v] : sealed) envelopes_[k] = std::move(v);
        }
        rep.envelopes = sealed.size();
        rep.step_seconds["key_distribute"] = sw.lap();

        for (auto& [f, bytes] : blobs) rep.files.push_back(f);
        s.files = rep.files;
        s.rec.machine.mark_executed();
        return rep;
    });
}

RetrievalReport Broker::retrieve(const std::string& will_id, const std::string& heir_id,
                                 const keyvault::Scalar& heir_sk)
{
    return guarded(will_id, "retrieve", [&] {
        auto& s = slot(will_id);
        std::lock_guard lock(s.mu);
        if (s.rec.state() != WillState::Executed) {
            throw IllegalState(std::string("retrieve not allowed in state ") + to_string(s.rec.state()));
        }
        if (!s.rec.will.heir(heir_id)) throw NotAnHeir("'" + heir_id + "' is not an heir of this will");

        pdcpabe::UserKey key;
        try {
            auto env = keyvault::deserialize_envelope(envelope_for(will_id, heir_id));
            key = pdcpabe::deserialize_user_key(keyvault::envelope_decrypt(heir_sk, env));
        } catch (const keyvault::AuthFailure&) {
            throw AuthError("heir key does not open the envelope");
        }

        RetrievalReport rep{will_id, heir_id, {}};
        const unsigned t = s.rec.will.storage.threshold;
        const auto manifest = this->manifest();
        for (const auto& f : s.files) {
            FileRetrieval fr{f.platform_id, f.file_id, 0, {}, {}};
            std::vector<sharding::Share> got;
            for (const auto& m : manifest.placements(f.file_id)) {
                if (got.size() == t) break;
                ++fr.requests;
                try {
                    auto p = provider(m.location_id);
                    if (!p) throw StorageFailure("no provider for location " + m.location_id);
                    auto blob = p->get(f.file_id, m.share_id);
                    if (p->last_latency_ms() > config_.request_timeout_ms) throw StorageFailure("timed out");
                    if (crypto::sha256(blob) != m.digest) throw StorageFailure("share digest mismatch");
                    got.push_back(sharding::decode_share(blob));
                } catch (const Error&) {
                    fr.failed_locations.push_back(m.location_id);
                }
            }
            if (got.size() < t) {
                throw sharding::ThresholdNotMet("Insufficient shares to reconstruct the file " + f.file_id);
            }
            auto ct = pdcpabe::deserialize_ciphertext(sharding::combine(got));
            fr.report = pdcpabe::decrypt(pp_, key, ct);
            rep.files.push_back(std::move(fr));
        }
        std::string summary;
        for (const auto& f : rep.files) summary += f.file_id + " requests=" + std::to_string(f.requests) + "\n";
        log(heir_id, Action::RetrieveShares, will_id, summary);
        return rep;
    });
}

WillState Broker::state(const std::string& will_id) const
{
    auto& s = slot(will_id);
    std::lock_guard lock(s.mu);
    return s.rec.state();
}

WillRecord Broker::record(const std::string& will_id) const
{
    auto& s = slot(will_id);
    std::lock_guard lock(s.mu);
    return s.rec;
}

std::vector<std::string> Broker::will_ids() const
{
    std::lock_guard lock(registry_mu_);
    std::vector<std::string> out;
    for (const auto& [id, s] : wills_) out.push_back(id);
    return out;
}

Bytes Broker::envelope_for(const std::string& will_id, const std::string& heir_id) const
{
    std::lock_guard lock(registry_mu_);
    auto it = envelopes_.find({will_id, heir_id});
    if (it == envelopes_.end()) throw UnknownWill("no key envelope for " + heir_id + " on " + will_id);
    return it->second;
}

ledger::ParamsMap Broker::inspector_params() const
{
    ledger::ParamsMap out;
    for (const auto& id : will_ids()) {
        auto rec = record(id);
        out[id] = {rec.will.trigger.vote_threshold, freeze_ms(rec.will)};
    }
    return out;
}

sharding::ShareManifest Broker::manifest() const
{
    std::lock_guard lock(registry_mu_);
    return manifest_;
}

ExportBundle Broker::export_state() const
{
    ExportBundle b;
    b.public_params = pdcpabe::serialize(pp_);
    b.master_key = pdcpabe::serialize(mk_);
    json m = json::array();
    const auto man = manifest();
    for (const auto& e : man.entries()) {
        m.push_back({{"file_id", e.file_id}, {"share_id", e.share_id}, {"location_id", e.location_id},
                     {"sha256", to_hex(e.digest)}});
    }
    b.manifest_json = m.dump(2) + "\n";
    b.ledger_text = chain_.to_text();
    for (const auto& id : will_ids()) b.wills[id] = willfile::serialize_xml(record(id).will);
    return b;
}

} // namespace dw::broker
