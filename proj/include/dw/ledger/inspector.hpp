#pragma once

// Replays a verified chain against the expected will workflow.

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dw/ledger/chain.hpp"

namespace dw::ledger {

enum class Severity { Halt, Warn };

std::string_view to_string(Severity s);

struct InspectionFinding {
    std::uint64_t seq = 0;
    std::string rule;
    std::string description;
    Severity severity = Severity::Halt;

    friend bool operator==(const InspectionFinding&, const InspectionFinding&) = default;
};

struct WillParams {
    unsigned vote_threshold = 1;
    std::int64_t freeze_ms = 0;
};

using ParamsMap = std::map<std::string, WillParams>;

struct Rule {
    std::string id;
    std::function<std::vector<InspectionFinding>(std::span<const LogEntry>, const ParamsMap&)> check;
};

/// R1 votes or override before Activate; R2 freeze elapsed before Activate;
/// R3 data actions only after Activate; R4 no Activate after a Veto in the
/// same trigger round.
std::vector<Rule> default_rules();

/// Findings ordered by seq, then rule id. A chain that fails verification
/// yields a single "R0" halt finding at the first bad seq.
std::vector<InspectionFinding> inspect(std::span<const LogEntry> chain, const ParamsMap& params,
                                       const std::vector<Rule>& rules = default_rules());

bool has_halt(const std::vector<InspectionFinding>& findings);

} // namespace dw::ledger
