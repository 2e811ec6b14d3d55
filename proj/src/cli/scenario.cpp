#include "dw/cli/scenario.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dw/keyvault/keyvault.hpp"
#include "dw/ledger/inspector.hpp"
#include "dw/willfile/will.hpp"

namespace dw::cli {

using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ScenarioError("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ScenarioError("cannot write " + p.string());
    out << text;
}

// Maps an exception to the short name scripts use in "expect_error".
std::string error_name(const std::exception& e)
{
    if (dynamic_cast<const broker::IllegalState*>(&e)) return "IllegalState";
    if (dynamic_cast<const broker::NotAnHeir*>(&e)) return "NotAnHeir";
    if (dynamic_cast<const broker::FreezeExpired*>(&e)) return "FreezeExpired";
    if (dynamic_cast<const broker::UnknownWill*>(&e)) return "UnknownWill";
    if (dynamic_cast<const broker::ValidationError*>(&e)) return "ValidationError";
    if (dynamic_cast<const broker::AuthError*>(&e)) return "AuthError";
    if (dynamic_cast<const broker::BadAttestation*>(&e)) return "BadAttestation";
    if (dynamic_cast<const broker::StorageFailure*>(&e)) return "StorageFailure";
    if (dynamic_cast<const broker::AdapterFailure*>(&e)) return "AdapterFailure";
    if (dynamic_cast<const sharding::ThresholdNotMet*>(&e)) return "ThresholdNotMet";
    return "Error";
}

broker::WillState parse_state(const std::string& s)
{
    using broker::WillState;
    for (auto st : {WillState::Deployed, WillState::VotingOpen, WillState::Frozen, WillState::Activated,
                    WillState::Executed, WillState::Cancelled}) {
        if (s == broker::to_string(st)) return st;
    }
    throw ScenarioError("unknown state '" + s + "'");
}

template <class T>
T field(const json& j, const char* key, std::size_t step)
{
    if (!j.contains(key)) throw ScenarioError("step " + std::to_string(step) + ": missing '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ScenarioError("step " + std::to_string(step) + ": bad '" + key + "': " + e.what());
    }
}

} // namespace

ScenarioOutcome run_scenario(const std::filesystem::path& scenario, const std::filesystem::path& out_dir)
{
    json doc;
    try {
        doc = json::parse(slurp(scenario));
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
    }
    const auto base = scenario.parent_path();
    ScenarioOutcome out;
    out.name = doc.value("name", scenario.stem().string());

    willfile::DigitalWill will;
    try {
        will = willfile::parse_xml(slurp(base / doc.at("will").get<std::string>()));
    } catch (const willfile::WillError& e) {
        throw ScenarioError(std::string("scenario will does not parse: ") + e.what());
    } catch (const json::exception&) {
        throw ScenarioError("scenario needs a \"will\" path");
    }

    std::filesystem::create_directories(out_dir);
    auto storage_root = out_dir / "storage";
    std::filesystem::remove_all(storage_root);

    SimulatedClock clock(doc.value("start_ms", TimestampMs{1'700'000'000'000}));
    SeededRandom rng(doc.value("seed", std::uint64_t{1}));

    broker::BrokerConfig cfg;
    std::optional<broker::AuthoritySecretKey> authority_sk;
    if (doc.contains("authority_seed")) {
        auto [pk, sk] = broker::authority_keypair(from_hex(doc["authority_seed"].get<std::string>()));
        cfg.authority_key = pk;
        authority_sk = sk;
    }
    broker::Broker b(cfg, clock, rng);

    if (doc.contains("adapters")) {
        for (auto& [id, a] : broker::load_fixture_dir(base / doc["adapters"].get<std::string>())) {
            b.add_adapter(std::shared_ptr<broker::PlatformAdapter>(std::move(a)));
        }
    }
    std::map<std::string, std::shared_ptr<broker::StorageProvider>> providers;
    for (const auto& loc : doc.value("providers", std::vector<std::string>{})) {
        auto p = std::make_shared<broker::DirectoryProvider>(storage_root, loc);
        providers[loc] = p;
        b.add_provider(p);
    }

    keyvault::KdfParams kdf;
    Bytes salt;
    if (doc.contains("keyvault")) {
        kdf.opslimit = doc["keyvault"].value("opslimit", kdf.opslimit);
        kdf.memlimit = doc["keyvault"].value("memlimit", kdf.memlimit);
        salt = from_hex(doc["keyvault"].value("salt", std::string()));
    }
    std::map<std::string, keyvault::HeirKeypair> heir_keys;
    for (const auto& [heir, pw] : doc.value("heir_passwords", std::map<std::string, std::string>{})) {
        auto kp = keyvault::derive_keypair(pw, salt, kdf);
        const auto* h = will.heir(heir);
        if (!h) throw ScenarioError("password given for unknown heir '" + heir + "'");
        if (h->public_key != kp.pk_hex()) throw ScenarioError("password for '" + heir + "' does not match the will");
        heir_keys[heir] = kp;
    }

    const auto& will_id = will.will_id;
    json reports = json::array();
    if (!doc.contains("steps") || !doc["steps"].is_array()) throw ScenarioError("scenario needs a \"steps\" array");

    std::size_t i = 0;
    for (const auto& step : doc["steps"]) {
        ++i;
        StepResult r;
        r.index = i;
        r.op = field<std::string>(step, "op", i);
        const auto expect_error = step.value("expect_error", std::string());
        auto fail = [&](const std::string& why) {
            r.ok = false;
            r.detail = why;
            out.failures.push_back("step " + std::to_string(i) + " (" + r.op + "): " + why);
        };
        try {
            const auto& op = r.op;
            if (op == "deploy") {
                b.deploy(will);
            } else if (op == "update") {
                auto next = willfile::parse_xml(slurp(base / field<std::string>(step, "will", i)));
                r.detail = "version " + std::to_string(b.update_will(will_id, next));
            } else if (op == "delete") {
                b.delete_will(will_id, step.value("creator", will.creator_id));
            } else if (op == "request_trigger") {
                b.request_trigger(will_id, field<std::string>(step, "heir", i));
            } else if (op == "vote") {
                b.vote(will_id, field<std::string>(step, "heir", i));
            } else if (op == "veto") {
                b.veto(will_id, step.value("creator", will.creator_id));
            } else if (op == "override") {
                Bytes att;
                if (step.contains("attestation_hex")) {
                    att = from_hex(step["attestation_hex"].get<std::string>());
                } else {
                    if (!authority_sk) throw ScenarioError("override step needs authority_seed");
                    att = broker::make_attestation(*authority_sk, will_id);
                }
                b.authority_override(will_id, att);
            } else if (op == "advance") {
                clock.advance_ms(field<TimestampMs>(step, "ms", i));
            } else if (op == "tick") {
                r.detail = std::to_string(b.tick().size()) + " activated";
            } else if (op == "execute") {
                auto rep = b.execute(will_id);
                reports.push_back(json::parse(rep.to_json()));
                r.detail = std::to_string(rep.ciphertexts()) + " ciphertexts, " + std::to_string(rep.shares()) +
                           " shares, " + std::to_string(rep.envelopes) + " envelopes";
            } else if (op == "retrieve") {
                auto heir = field<std::string>(step, "heir", i);
                auto it = heir_keys.find(heir);
                if (it == heir_keys.end()) throw ScenarioError("no password for heir '" + heir + "'");
                auto rep = b.retrieve(will_id, heir, it->second.sk);
                auto got = rep.recovered().size();
                r.detail = std::to_string(got) + " recovered, " + std::to_string(rep.denied().size()) + " denied, " +
                           std::to_string(rep.total_requests()) + " requests";
                if (step.contains("expect_recovered") && step["expect_recovered"].get<std::size_t>() != got) {
                    fail("expected " + std::to_string(step["expect_recovered"].get<std::size_t>()) + " recovered, got " +
                         std::to_string(got));
                }
                if (step.contains("expect_requests") &&
                    step["expect_requests"].get<unsigned>() != rep.total_requests()) {
                    fail("expected " + std::to_string(step["expect_requests"].get<unsigned>()) + " requests, got " +
                         std::to_string(rep.total_requests()));
                }
            } else if (op == "fault") {
                auto loc = field<std::string>(step, "location", i);
                auto it = providers.find(loc);
                if (it == providers.end()) throw ScenarioError("unknown location '" + loc + "'");
                broker::Faults f;
                f.unavailable = step.value("unavailable", false);
                f.corrupting = step.value("corrupting", false);
                f.latency_ms = step.value("latency_ms", TimestampMs{0});
                it->second->set_faults(f);
            } else if (op == "expect_state") {
                auto want = parse_state(field<std::string>(step, "state", i));
                auto have = b.state(will_id);
                if (want != have) fail(std::string("state is ") + broker::to_string(have));
            } else {
                throw ScenarioError("step " + std::to_string(i) + ": unknown op '" + op + "'");
            }
            if (!expect_error.empty()) fail("expected " + expect_error + " but the step succeeded");
        } catch (const ScenarioError&) {
            throw;
        } catch (const std::exception& e) {
            auto name = error_name(e);
            if (expect_error.empty()) {
                fail(name + ": " + e.what());
            } else if (expect_error != name) {
                fail("expected " + expect_error + ", got " + name + ": " + e.what());
            } else {
                r.detail = "raised " + name + " as expected";
            }
        }
        out.steps.push_back(r);
    }

    try {
        out.final_state = broker::to_string(b.state(will_id));
    } catch (const broker::UnknownWill&) {
        out.final_state = "None";
    }
    auto findings = ledger::inspect(b.ledger().entries(), b.inspector_params());
    out.findings = findings.size();
    out.ledger_entries = b.ledger().size();
    out.ledger_text = b.ledger().to_text();

    if (doc.contains("expect")) {
        const auto& ex = doc["expect"];
        if (ex.contains("final_state") && ex["final_state"].get<std::string>() != out.final_state) {
            out.failures.push_back("final state is " + out.final_state + ", expected " +
                                   ex["final_state"].get<std::string>());
        }
        if (ex.contains("inspect_findings") && ex["inspect_findings"].get<std::size_t>() != out.findings) {
            out.failures.push_back("inspector reported " + std::to_string(out.findings) + " findings");
        }
    }
    out.passed = out.failures.empty();

    write_file(out_dir / "ledger.log", out.ledger_text);
    if (!reports.empty()) write_file(out_dir / "execution-report.json", (reports.size() == 1 ? reports[0] : reports).dump(2) + "\n");
    json summary;
    summary["name"] = out.name;
    summary["passed"] = out.passed;
    summary["final_state"] = out.final_state;
    summary["ledger_entries"] = out.ledger_entries;
    summary["failures"] = out.failures;
    summary["findings"] = json::array();
    for (const auto& f : findings) {
        summary["findings"].push_back({{"seq", f.seq}, {"rule", f.rule}, {"description", f.description},
                                       {"severity", std::string(ledger::to_string(f.severity))}});
    }
    summary["steps"] = json::array();
    for (const auto& s : out.steps) {
        summary["steps"].push_back({{"index", s.index}, {"op", s.op}, {"ok", s.ok}, {"detail", s.detail}});
    }
    write_file(out_dir / "summary.json", summary.dump(2) + "\n");
    return out;
}

} // namespace dw::cli
