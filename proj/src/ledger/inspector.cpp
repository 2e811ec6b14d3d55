#include "dw/ledger/inspector.hpp"

#include <algorithm>
#include <optional>
#include <set>

namespace dw::ledger {

namespace {

// Per-will state for the current trigger round. A TriggerRequest opens a
// new round; Activate closes it.
struct Round {
    std::set<std::string> voters;
    bool override = false;
    std::optional<TimestampMs> freeze_start;
    bool vetoed = false;
    bool activated = false;
};

template <class Visit>
std::vector<InspectionFinding> replay(std::span<const LogEntry> chain, Visit visit)
{
    std::map<std::string, Round> rounds;
    std::vector<InspectionFinding> out;
    for (const auto& e : chain) {
        auto& r = rounds[e.subject];
        visit(e, r, out);
        switch (e.action) {
        case Action::DeployWill:
        case Action::TriggerRequest:
            r = Round{};
            break;
        case Action::VoteCast:
            r.voters.insert(e.actor);
            break;
        case Action::AuthorityOverride:
            r.override = true;
            break;
        case Action::FreezeStart:
            r.freeze_start = e.timestamp;
            break;
        case Action::Veto:
            if (r.freeze_start) r.vetoed = true;
            break;
        case Action::Activate:
            r.activated = true;
            break;
        default:
            break;
        }
    }
    return out;
}

WillParams params_for(const ParamsMap& params, const std::string& will)
{
    auto it = params.find(will);
    return it == params.end() ? WillParams{} : it->second;
}

InspectionFinding halt(const LogEntry& e, const char* rule, std::string what)
{
    return {e.seq, rule, std::move(what), Severity::Halt};
}

std::vector<InspectionFinding> r1(std::span<const LogEntry> chain, const ParamsMap& params)
{
    return replay(chain, [&](const LogEntry& e, const Round& r, auto& out) {
        if (e.action != Action::Activate || r.override) return;
        auto need = params_for(params, e.subject).vote_threshold;
        if (r.voters.size() < need) {
            out.push_back(halt(e, "R1", "Activate with " + std::to_string(r.voters.size()) + " of " +
                                            std::to_string(need) + " votes and no authority override"));
        }
    });
}

std::vector<InspectionFinding> r2(std::span<const LogEntry> chain, const ParamsMap& params)
{
    return replay(chain, [&](const LogEntry& e, const Round& r, auto& out) {
        if (e.action != Action::Activate || r.override) return;
        if (!r.freeze_start) {
            out.push_back(halt(e, "R2", "Activate without a preceding FreezeStart"));
            return;
        }
        auto freeze = params_for(params, e.subject).freeze_ms;
        if (e.timestamp < *r.freeze_start + freeze) {
            out.push_back(halt(e, "R2", "Activate " + std::to_string(e.timestamp - *r.freeze_start) +
                                            " ms after FreezeStart, freeze is " + std::to_string(freeze) + " ms"));
        }
    });
}

std::vector<InspectionFinding> r3(std::span<const LogEntry> chain, const ParamsMap&)
{
    return replay(chain, [&](const LogEntry& e, const Round& r, auto& out) {
        switch (e.action) {
        case Action::PullData:
        case Action::EncryptData:
        case Action::SplitUpload:
        case Action::KeyDistribute:
            if (!r.activated) out.push_back(halt(e, "R3", std::string(to_string(e.action)) + " before Activate"));
            break;
        default:
            break;
        }
    });
}

std::vector<InspectionFinding> r4(std::span<const LogEntry> chain, const ParamsMap&)
{
    return replay(chain, [&](const LogEntry& e, const Round& r, auto& out) {
        if (e.action == Action::Activate && r.vetoed) {
            out.push_back(halt(e, "R4", "Activate after a Veto during the freeze period"));
        }
    });
}

} // namespace

std::string_view to_string(Severity s)
{
    return s == Severity::Halt ? "halt" : "warn";
}

std::vector<Rule> default_rules()
{
    return {{"R1", r1}, {"R2", r2}, {"R3", r3}, {"R4", r4}};
}

std::vector<InspectionFinding> inspect(std::span<const LogEntry> chain, const ParamsMap& params,
                                       const std::vector<Rule>& rules)
{
    if (auto v = verify_chain(chain); !v.ok()) {
        return {{*v.first_bad, "R0", "hash chain verification failed", Severity::Halt}};
    }
    std::vector<InspectionFinding> out;
    for (const auto& rule : rules) {
        auto found = rule.check(chain, params);
        out.insert(out.end(), found.begin(), found.end());
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.seq != b.seq ? a.seq < b.seq : a.rule < b.rule;
    });
    return out;
}

bool has_halt(const std::vector<InspectionFinding>& findings)
{
    return std::any_of(findings.begin(), findings.end(), [](const auto& f) { return f.severity == Severity::Halt; });
}

} // namespace dw::ledger
