#include "dw/broker/adapters.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dw/common/random.hpp"

namespace dw::broker {

FixtureAdapter::FixtureAdapter(std::string platform_id, std::string token, std::vector<Asset> assets)
    : platform_(std::move(platform_id)), token_(std::move(token)), assets_(std::move(assets))
{
}

std::unique_ptr<FixtureAdapter> FixtureAdapter::from_json(std::string_view text)
{
    try {
        auto j = nlohmann::json::parse(text);
        auto platform = j.at("platform").get<std::string>();
        std::vector<Asset> assets;
        for (const auto& a : j.value("assets", nlohmann::json::array())) {
            auto doc = a.at("document").dump();
            assets.push_back({platform + "/" + a.at("path").get<std::string>(), to_bytes(doc)});
        }
        if (j.contains("generate")) {
            const auto& g = j["generate"];
            SeededRandom rng(g.at("seed").get<std::uint64_t>());
            auto count = g.at("count").get<std::size_t>();
            auto prefix = g.value("prefix", std::string());
            for (std::size_t i = 0; i < count; ++i) {
                nlohmann::json doc = {{"index", i}, {"body", to_hex(rng.bytes(8 + rng.uniform(56)))}};
                assets.push_back({platform + "/" + prefix + std::to_string(i), to_bytes(doc.dump())});
            }
        }
        return std::make_unique<FixtureAdapter>(platform, j.value("token", std::string()), std::move(assets));
    } catch (const nlohmann::json::exception& e) {
        throw AdapterFailure(std::string("bad adapter fixture: ") + e.what());
    }
}

std::unique_ptr<FixtureAdapter> FixtureAdapter::from_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw AdapterFailure("cannot read fixture " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::vector<Asset> FixtureAdapter::fetch(const std::string& access_token)
{
    if (failing_) throw AdapterFailure("platform " + platform_ + " is not responding");
    if (!token_.empty() && access_token != token_) throw AdapterFailure("platform " + platform_ + " rejected the token");
    return assets_;
}

std::map<std::string, std::unique_ptr<FixtureAdapter>> load_fixture_dir(const std::filesystem::path& dir)
{
    std::map<std::string, std::unique_ptr<FixtureAdapter>> out;
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        auto a = FixtureAdapter::from_file(f);
        auto id = a->platform_id();
        if (out.count(id)) throw AdapterFailure("two fixtures for platform " + id);
        out.emplace(id, std::move(a));
    }
    return out;
}

} // namespace dw::broker
