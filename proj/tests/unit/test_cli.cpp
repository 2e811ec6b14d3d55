#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dw/cli/bench.hpp"
#include "dw/cli/scenario.hpp"

using namespace dw;
using namespace dw::cli;
namespace fs = std::filesystem;

namespace {

BenchConfig small_config(std::vector<std::size_t> atoms)
{
    BenchConfig cfg;
    cfg.atom_counts = std::move(atoms);
    cfg.repetitions = 1;
    cfg.sharing_factor = 5;
    cfg.keygen_sizes = {5, 30};
    return cfg;
}

fs::path scratch(const std::string& name)
{
    auto p = fs::temp_directory_path() / ("dw_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST(BenchCsv, GoldenHeader)
{
    BenchResult empty;
    std::ostringstream out;
    write_csv(empty, out);
    EXPECT_EQ(out.str(), "scheme,op,atoms,avg_s,stddev_s,median_s\n");
}

TEST(BenchCsv, RowArithmetic)
{
    auto cfg = small_config({5, 10});
    auto res = run_bench(cfg);
    std::size_t setup = 0, keygen = 0, enc = 0, dec = 0;
    for (const auto& r : res.rows) {
        if (r.op == "setup") ++setup;
        else if (r.op.rfind("keygen_", 0) == 0) ++keygen;
        else if (r.op == "encrypt") ++enc;
        else if (r.op == "decrypt") ++dec;
        EXPECT_GE(r.avg_s, 0.0);
    }
    EXPECT_EQ(enc, 4u);
    EXPECT_EQ(dec, 4u);
    EXPECT_EQ(setup, 2u);
    EXPECT_EQ(keygen, 4u);
    ASSERT_NE(res.find("bsw07", "encrypt", 10), nullptr);
    ASSERT_NE(res.find("pdcpabe", "keygen_30", 0), nullptr);

    std::ostringstream out;
    write_csv(res, out);
    std::size_t lines = 0;
    std::string line;
    std::istringstream in(out.str());
    while (std::getline(in, line)) {
        ++lines;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5) << line;
    }
    EXPECT_EQ(lines, res.rows.size() + 1);
}

TEST(BenchWorkload, FixedSeedIsDeterministic)
{
    auto cfg = small_config({20});
    EXPECT_EQ(make_workload(cfg, 20).fingerprint(), make_workload(cfg, 20).fingerprint());
    auto other = cfg;
    other.seed = 2;
    EXPECT_NE(make_workload(cfg, 20).fingerprint(), make_workload(other, 20).fingerprint());
}

TEST(BenchWorkload, SharingFactorShapesThePool)
{
    BenchConfig cfg;
    cfg.atom_counts = {100, 400};
    cfg.sharing_factor = 50;
    auto w = make_workload(cfg, 100);
    EXPECT_EQ(w.pool.size(), 8u);
    EXPECT_EQ(w.assignment.size(), 100u);
    std::set<std::size_t> used(w.assignment.begin(), w.assignment.end());
    EXPECT_EQ(used.size(), 8u);
    EXPECT_EQ(w.key_attrs.size(), 30u);
    for (const auto& p : w.payloads) EXPECT_EQ(p.size(), 1024u);
    std::size_t satisfied = 0;
    for (const auto& p : w.pool) satisfied += policy::evaluate(p, w.key_attrs);
    EXPECT_EQ(satisfied, 4u);
}

TEST(BenchPairs, PdcpabeCountIndependentOfAtoms)
{
    BenchConfig cfg;
    cfg.atom_counts = {100, 400};
    cfg.sharing_factor = 50;
    cfg.repetitions = 1;
    cfg.keygen_sizes = {5};
    auto res = run_bench(cfg);
    auto p100 = res.attribute_pairs.at({"pdcpabe", 100});
    auto p400 = res.attribute_pairs.at({"pdcpabe", 400});
    EXPECT_EQ(p100, p400);
    EXPECT_GT(p100, 0u);
    // bsw07 pays per atom
    EXPECT_GT(res.attribute_pairs.at({"bsw07", 400}), 3 * res.attribute_pairs.at({"bsw07", 100}));
}

TEST(BenchConfig, Rejections)
{
    BenchConfig cfg;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.atom_counts = {5};
    cfg.repetitions = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.repetitions = 1;
    cfg.sharing_factor = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.sharing_factor = 1;
    cfg.schemes = {"rsa"};
    EXPECT_THROW(cfg.validate(), ConfigError);
    EXPECT_THROW(parse_atom_list("5,x"), ConfigError);
    EXPECT_THROW(parse_atom_list(""), ConfigError);
    EXPECT_EQ(parse_atom_list("5,10,30"), (std::vector<std::size_t>{5, 10, 30}));
}

class Scenarios : public ::testing::Test {
protected:
    fs::path fixture(const std::string& name) { return fs::path(DW_REPO_DATA) / "scenarios" / (name + ".json"); }
};

TEST_F(Scenarios, HappyPath)
{
    auto out = scratch("happy");
    auto res = run_scenario(fixture("happy_path"), out);
    EXPECT_TRUE(res.passed) << (res.failures.empty() ? "" : res.failures.front());
    EXPECT_EQ(res.final_state, "Executed");
    EXPECT_EQ(res.findings, 0u);
    EXPECT_TRUE(fs::exists(out / "ledger.log"));
    EXPECT_TRUE(fs::exists(out / "execution-report.json"));
    auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
    EXPECT_TRUE(summary["passed"].get<bool>());
}

TEST_F(Scenarios, VoteAfterDeleteIsExpectedFailure)
{
    auto res = run_scenario(fixture("vote_after_delete"), scratch("vad"));
    EXPECT_TRUE(res.passed);
    EXPECT_EQ(res.final_state, "Cancelled");
    EXPECT_EQ(res.steps.back().detail, "raised IllegalState as expected");
}

TEST_F(Scenarios, VetoInFreeze)
{
    auto res = run_scenario(fixture("veto_in_freeze"), scratch("veto"));
    EXPECT_TRUE(res.passed);
    EXPECT_EQ(res.final_state, "Cancelled");
}

TEST_F(Scenarios, DeterministicUnderFixedSeed)
{
    auto a = run_scenario(fixture("happy_path"), scratch("det_a"));
    auto b = run_scenario(fixture("happy_path"), scratch("det_b"));
    EXPECT_EQ(a.ledger_text, b.ledger_text);
}

TEST_F(Scenarios, UnexpectedIllegalStateFails)
{
    auto dir = scratch("bad");
    fs::create_directories(dir);
    auto doc = nlohmann::json::parse(slurp(fixture("veto_in_freeze")));
    doc["will"] = (fs::path(DW_REPO_DATA) / "wills" / "e2e.xml").string();
    doc["adapters"] = (fs::path(DW_REPO_DATA) / "adapters").string();
    doc["steps"].back().erase("expect_error");
    std::ofstream(dir / "s.json") << doc.dump();
    auto res = run_scenario(dir / "s.json", dir / "out");
    EXPECT_FALSE(res.passed);
    ASSERT_EQ(res.failures.size(), 1u);
    EXPECT_NE(res.failures[0].find("IllegalState"), std::string::npos);
}

TEST_F(Scenarios, MalformedScriptIsScenarioError)
{
    auto dir = scratch("malformed");
    fs::create_directories(dir);
    std::ofstream(dir / "a.json") << "{not json";
    EXPECT_THROW(run_scenario(dir / "a.json", dir / "out"), ScenarioError);
    auto doc = nlohmann::json::parse(slurp(fixture("happy_path")));
    doc["will"] = (fs::path(DW_REPO_DATA) / "wills" / "e2e.xml").string();
    doc["adapters"] = (fs::path(DW_REPO_DATA) / "adapters").string();
    doc["steps"] = nlohmann::json::array({{{"op", "teleport"}}});
    std::ofstream(dir / "b.json") << doc.dump();
    EXPECT_THROW(run_scenario(dir / "b.json", dir / "out"), ScenarioError);
    doc["heir_passwords"]["bob"] = "wrong";
    doc["steps"] = nlohmann::json::array();
    std::ofstream(dir / "c.json") << doc.dump();
    EXPECT_THROW(run_scenario(dir / "c.json", dir / "out"), ScenarioError);
}
