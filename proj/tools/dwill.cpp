// dwill: command-line front end over the digital-will modules.
//
// Exit codes: 0 ok, 1 verification or assertion failure, 2 usage error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "dw/cli/bench.hpp"
#include "dw/cli/scenario.hpp"
#include "dw/keyvault/keyvault.hpp"
#include "dw/ledger/inspector.hpp"
#include "dw/pdcpabe/scheme.hpp"
#include "dw/sharding/shamir.hpp"
#include "dw/willfile/will.hpp"

namespace fs = std::filesystem;
using namespace dw;

namespace {

struct UsageError : Error {
    using Error::Error;
};

// Raised by commands that ran fine but whose check failed.
struct CheckFailed : Error {
    using Error::Error;
};

Bytes read_bytes(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw UsageError("cannot read " + p.string());
    return Bytes(std::istreambuf_iterator<char>(in), {});
}

std::string read_text(const fs::path& p)
{
    auto b = read_bytes(p);
    return std::string(b.begin(), b.end());
}

void write_bytes(const fs::path& p, ByteView data)
{
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + p.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

policy::AttributeSet parse_attrs(const std::string& csv)
{
    policy::AttributeSet out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        if (!policy::is_valid_attribute(tok)) throw UsageError("bad attribute '" + tok + "'");
        out.insert(tok);
    }
    return out;
}

// Vote threshold and freeze window per will, for the inspector.
ledger::ParamsMap params_from_wills(const std::vector<std::string>& paths)
{
    ledger::ParamsMap out;
    for (const auto& p : paths) {
        auto w = willfile::parse_xml(read_text(p));
        out[w.will_id] = {w.trigger.vote_threshold, static_cast<TimestampMs>(w.trigger.freeze_seconds * 1000)};
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"dwill: digital will toolkit"};
    app.require_subcommand(1);

    // setup
    std::string out_dir;
    unsigned level = 128;
    auto* setup = app.add_subcommand("setup", "Generate pdcpabe public params and master key");
    setup->add_option("--out-dir", out_dir, "Directory for pp.bin and mk.bin")->required();
    setup->add_option("--security", level, "Security level in bits");

    // keygen
    std::string pp_path, mk_path, attrs_csv, out_path;
    auto* keygen = app.add_subcommand("keygen", "Issue a user key for an attribute set");
    keygen->add_option("--pp", pp_path)->required()->check(CLI::ExistingFile);
    keygen->add_option("--mk", mk_path)->required()->check(CLI::ExistingFile);
    keygen->add_option("--attrs", attrs_csv, "Comma-separated attributes")->required();
    keygen->add_option("--out", out_path)->required();

    // encrypt / decrypt
    std::string map_path, in_dir, key_path, ct_path;
    auto* encrypt = app.add_subcommand("encrypt", "Encrypt the files named in a policy map into one ciphertext");
    encrypt->add_option("--pp", pp_path)->required()->check(CLI::ExistingFile);
    encrypt->add_option("--policy-map", map_path, "JSON object: file name -> policy")->required()->check(CLI::ExistingFile);
    encrypt->add_option("--in-dir", in_dir)->required()->check(CLI::ExistingDirectory);
    encrypt->add_option("--out", out_path)->required();

    auto* decrypt = app.add_subcommand("decrypt", "Recover every file the key is entitled to");
    decrypt->add_option("--pp", pp_path)->required()->check(CLI::ExistingFile);
    decrypt->add_option("--key", key_path)->required()->check(CLI::ExistingFile);
    decrypt->add_option("--ct", ct_path)->required()->check(CLI::ExistingFile);
    decrypt->add_option("--out-dir", out_dir)->required();

    // split / combine
    std::string in_path, file_id;
    unsigned n = 0, t = 0;
    auto* split = app.add_subcommand("split", "Shamir-split a file into share files");
    split->add_option("--in", in_path)->required()->check(CLI::ExistingFile);
    split->add_option("-n", n, "Number of shares")->required();
    split->add_option("-t", t, "Threshold (default ceil(n/2), at least 2)");
    split->add_option("--file-id", file_id);
    split->add_option("--out-dir", out_dir)->required();

    std::vector<std::string> share_paths;
    auto* combine = app.add_subcommand("combine", "Reconstruct a file from share files");
    combine->add_option("shares", share_paths)->required()->check(CLI::ExistingFile);
    combine->add_option("--out", out_path)->required();

    // will / ledger
    std::string will_path;
    auto* will_validate = app.add_subcommand("will-validate", "Parse and validate a will file");
    will_validate->add_option("will", will_path)->required()->check(CLI::ExistingFile);
    bool canonical = false;
    will_validate->add_flag("--canonical", canonical, "Print the canonical serialization");

    std::string ledger_path;
    auto* chain_verify = app.add_subcommand("chain-verify", "Verify a ledger file's hash chain");
    chain_verify->add_option("ledger", ledger_path)->required()->check(CLI::ExistingFile);

    std::vector<std::string> will_paths;
    auto* inspect = app.add_subcommand("inspect", "Run the rule inspector over a ledger file");
    inspect->add_option("ledger", ledger_path)->required()->check(CLI::ExistingFile);
    inspect->add_option("--will", will_paths, "Will files supplying thresholds and freeze windows")
        ->check(CLI::ExistingFile);

    // bench
    std::string atoms_csv = "50,100,200,400";
    cli::BenchConfig bench_cfg;
    std::string schemes_csv;
    bool quiet = false;
    auto* bench = app.add_subcommand("bench", "Time pdcpabe against bsw07 and write CSV");
    bench->add_option("--atoms", atoms_csv, "Comma-separated atom counts");
    bench->add_option("--sharing", bench_cfg.sharing_factor, "Atoms per distinct policy");
    bench->add_option("--reps", bench_cfg.repetitions);
    bench->add_option("--seed", bench_cfg.seed);
    bench->add_option("--universe", bench_cfg.attribute_universe_size);
    bench->add_option("--schemes", schemes_csv, "Subset of pdcpabe,bsw07");
    bench->add_option("--out", out_path, "CSV path (default stdout)");
    bench->add_flag("--quiet", quiet);

    // lifecycle
    std::string scenario_path;
    auto* lifecycle = app.add_subcommand("lifecycle", "Run a broker scenario script");
    lifecycle->add_option("--scenario", scenario_path)->required()->check(CLI::ExistingFile);
    lifecycle->add_option("--out-dir", out_dir)->required();

    // keyvault
    std::string password, salt_hex, config_path;
    keyvault::KdfParams kdf;
    auto* derive = app.add_subcommand("derive-key", "Derive an heir's public key from a password");
    derive->add_option("--password", password)->required();
    derive->add_option("--salt", salt_hex, "Hex salt");
    derive->add_option("--config", config_path, "Vault config JSON (salt and KDF limits)")->check(CLI::ExistingFile);
    derive->add_option("--opslimit", kdf.opslimit);
    derive->add_option("--memlimit", kdf.memlimit);

    auto* kv_init = app.add_subcommand("keyvault-init", "Create a vault config with a fresh salt");
    kv_init->add_option("--out", out_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*setup) {
            auto [pp, mk] = pdcpabe::setup(level);
            write_bytes(fs::path(out_dir) / "pp.bin", pdcpabe::serialize(pp));
            write_bytes(fs::path(out_dir) / "mk.bin", pdcpabe::serialize(mk));
        } else if (*keygen) {
            auto pp = pdcpabe::deserialize_public_params(read_bytes(pp_path));
            auto mk = pdcpabe::deserialize_master_key(read_bytes(mk_path));
            write_bytes(out_path, pdcpabe::serialize(pdcpabe::keygen(mk, pp, parse_attrs(attrs_csv))));
        } else if (*encrypt) {
            auto pp = pdcpabe::deserialize_public_params(read_bytes(pp_path));
            auto map = nlohmann::json::parse(read_text(map_path));
            if (!map.is_object()) throw UsageError("policy map must be a JSON object");
            std::vector<pdcpabe::PlainItem> items;
            for (const auto& [name, pol] : map.items()) {
                items.push_back({name, read_bytes(fs::path(in_dir) / name), policy::parse_policy(pol.get<std::string>())});
            }
            auto ct = pdcpabe::encrypt(pp, items);
            write_bytes(out_path, pdcpabe::serialize(ct));
            std::cout << items.size() << " files, " << ct.data_nodes.size() << " policy groups, "
                      << ct.attribute_pair_count() << " attribute pairs\n";
        } else if (*decrypt) {
            auto pp = pdcpabe::deserialize_public_params(read_bytes(pp_path));
            auto key = pdcpabe::deserialize_user_key(read_bytes(key_path));
            auto rep = pdcpabe::decrypt(pp, key, pdcpabe::deserialize_ciphertext(read_bytes(ct_path)));
            for (const auto& [name, data] : rep.recovered) {
                fs::path rel(name);
                bool escapes = rel.is_absolute();
                for (const auto& part : rel) escapes = escapes || part == "..";
                if (escapes) throw Error("refusing to write outside the output directory: " + name);
                write_bytes(fs::path(out_dir) / rel, data);
                std::cout << "recovered " << name << "\n";
            }
            for (const auto& d : rep.denied) {
                std::cout << "denied " << d.payload_id << " (" << pdcpabe::to_string(d.reason) << ")\n";
            }
        } else if (*split) {
            if (t == 0) t = sharding::default_threshold(n);
            if (file_id.empty()) file_id = fs::path(in_path).filename().string();
            auto shares = sharding::split(file_id, read_bytes(in_path), n, t);
            for (const auto& s : shares) {
                write_bytes(fs::path(out_dir) / (file_id + "." + std::to_string(s.share_id) + ".share"),
                            sharding::encode_share(s));
            }
        } else if (*combine) {
            std::vector<sharding::Share> shares;
            for (const auto& p : share_paths) shares.push_back(sharding::decode_share(read_bytes(p)));
            write_bytes(out_path, sharding::combine(shares));
        } else if (*will_validate) {
            auto w = willfile::parse_xml(read_text(will_path));
            for (const auto& warn : willfile::validate(w)) std::cerr << "warning: " << warn << "\n";
            if (canonical) std::cout << willfile::serialize_xml(w);
            else std::cout << "ok " << w.will_id << "\n";
        } else if (*chain_verify) {
            auto chain = ledger::HashChain::load(ledger_path);
            auto v = chain.verify();
            if (!v.ok()) throw CheckFailed("chain broken at seq " + std::to_string(*v.first_bad));
            std::cout << "ok " << chain.size() << " entries\n";
        } else if (*inspect) {
            auto chain = ledger::HashChain::from_text(read_text(ledger_path));
            auto findings = ledger::inspect(chain.entries(), params_from_wills(will_paths));
            for (const auto& f : findings) {
                std::cout << f.seq << "\t" << f.rule << "\t" << ledger::to_string(f.severity) << "\t" << f.description
                          << "\n";
            }
            if (ledger::has_halt(findings)) throw CheckFailed(std::to_string(findings.size()) + " findings");
            if (findings.empty()) std::cout << "no findings\n";
        } else if (*bench) {
            bench_cfg.atom_counts = cli::parse_atom_list(atoms_csv);
            if (!schemes_csv.empty()) {
                bench_cfg.schemes.clear();
                std::stringstream ss(schemes_csv);
                std::string s;
                while (std::getline(ss, s, ',')) bench_cfg.schemes.push_back(s);
            }
            auto res = cli::run_bench(bench_cfg, quiet ? nullptr : &std::cerr);
            if (out_path.empty()) {
                cli::write_csv(res, std::cout);
            } else {
                std::ofstream out(out_path, std::ios::trunc);
                if (!out) throw Error("cannot write " + out_path);
                cli::write_csv(res, out);
            }
        } else if (*lifecycle) {
            auto res = cli::run_scenario(scenario_path, out_dir);
            for (const auto& s : res.steps) {
                std::cout << (s.ok ? "ok   " : "FAIL ") << s.index << " " << s.op;
                if (!s.detail.empty()) std::cout << ": " << s.detail;
                std::cout << "\n";
            }
            std::cout << "final state " << res.final_state << ", " << res.findings << " findings, "
                      << res.ledger_entries << " ledger entries\n";
            for (const auto& f : res.failures) std::cerr << "failure: " << f << "\n";
            if (!res.passed) return 1;
        } else if (*derive) {
            Bytes salt;
            if (!config_path.empty()) {
                auto cfg = keyvault::VaultConfig::load(config_path);
                salt = cfg.salt;
                if (derive->count("--opslimit") == 0) kdf.opslimit = cfg.kdf.opslimit;
                if (derive->count("--memlimit") == 0) kdf.memlimit = cfg.kdf.memlimit;
            }
            if (!salt_hex.empty()) salt = from_hex(salt_hex);
            std::cout << keyvault::derive_keypair(password, salt, kdf).pk_hex() << "\n";
        } else if (*kv_init) {
            if (fs::exists(out_path)) throw UsageError(out_path + " already exists");
            keyvault::VaultConfig::generate().save(out_path);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const cli::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const cli::ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
