#pragma once

// Declarative lifecycle scenarios: a JSON script of broker operations run
// against a fresh broker with a simulated clock and directory storage.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dw/broker/broker.hpp"

namespace dw::cli {

class ScenarioError : public Error {
public:
    using Error::Error;
};

struct StepResult {
    std::size_t index = 0;
    std::string op;
    bool ok = true;
    std::string detail;
};

struct ScenarioOutcome {
    std::string name;
    bool passed = true;
    std::vector<StepResult> steps;
    std::vector<std::string> failures;
    std::string final_state;
    std::size_t findings = 0;
    std::size_t ledger_entries = 0;
    std::string ledger_text;
};

/// Paths inside the scenario ("will", "adapters") are resolved against the
/// scenario file's directory. Writes ledger.log, summary.json and, for each
/// execute step, execution-report.json into out_dir. Throws ScenarioError
/// when the script itself is malformed.
ScenarioOutcome run_scenario(const std::filesystem::path& scenario, const std::filesystem::path& out_dir);

} // namespace dw::cli
