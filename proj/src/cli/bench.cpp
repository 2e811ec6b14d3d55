#include "dw/cli/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "dw/bsw07/bsw07.hpp"
#include "dw/common/random.hpp"
#include "dw/pdcpabe/scheme.hpp"

namespace dw::cli {

namespace {

std::string attr(std::size_t i)
{
    return "att" + std::to_string(i);
}

policy::PolicyExpr random_tree(RandomSource& rng, std::size_t universe, std::size_t depth)
{
    if (depth == 0) return policy::PolicyExpr::attr(attr(rng.uniform(universe)));
    auto left = random_tree(rng, universe, depth - 1);
    auto right = random_tree(rng, universe, rng.uniform(depth));
    if (rng.uniform(2)) std::swap(left, right);
    return rng.uniform(2) ? policy::PolicyExpr::all_of(left, right) : policy::PolicyExpr::any_of(left, right);
}

struct Stats {
    double mean = 0, stddev = 0, median = 0;
};

Stats summarize(std::vector<double> v)
{
    Stats s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double acc = 0;
        for (double x : v) acc += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(acc / static_cast<double>(v.size() - 1));
    }
    std::sort(v.begin(), v.end());
    auto n = v.size();
    s.median = n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
    return s;
}

template <class F>
double timed(F&& f)
{
    auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void add_row(BenchResult& r, const std::string& scheme, const std::string& op, std::size_t atoms,
             const std::vector<double>& samples)
{
    auto s = summarize(samples);
    r.rows.push_back({scheme, op, atoms, s.mean, s.stddev, s.median});
}

policy::AttributeSet universe_subset(RandomSource& rng, std::size_t universe, std::size_t k)
{
    std::vector<std::size_t> idx(universe);
    for (std::size_t i = 0; i < universe; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.uniform(universe - i)]);
    policy::AttributeSet out;
    for (std::size_t i = 0; i < k; ++i) out.insert(attr(idx[i]));
    return out;
}

} // namespace

void BenchConfig::validate() const
{
    if (atom_counts.empty()) throw ConfigError("at least one atom count is required");
    for (auto a : atom_counts) {
        if (a == 0) throw ConfigError("atom counts must be positive");
    }
    if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
    if (sharing_factor < 1) throw ConfigError("sharing factor must be at least 1");
    if (attribute_universe_size < 2) throw ConfigError("attribute universe needs at least 2 attributes");
    if (key_attributes < 1 || key_attributes > attribute_universe_size) {
        throw ConfigError("key attribute count must be within the universe");
    }
    for (auto k : keygen_sizes) {
        if (k < 1 || k > attribute_universe_size) throw ConfigError("keygen sizes must be within the universe");
    }
    for (const auto& s : schemes) {
        if (s != "pdcpabe" && s != "bsw07") throw ConfigError("unknown scheme '" + s + "'");
    }
}

std::size_t BenchConfig::pool_size() const
{
    auto max_atoms = *std::max_element(atom_counts.begin(), atom_counts.end());
    return (max_atoms + sharing_factor - 1) / sharing_factor;
}

std::string Workload::fingerprint() const
{
    std::string out;
    for (const auto& p : pool) out += p.to_string() + ";";
    out += "|";
    for (auto a : assignment) out += std::to_string(a) + ",";
    out += "|";
    for (const auto& k : key_attrs) out += k + ",";
    return out;
}

Workload make_workload(const BenchConfig& cfg, std::size_t atoms)
{
    cfg.validate();
    Workload w;
    SeededRandom pool_rng(cfg.seed);
    w.key_attrs = universe_subset(pool_rng, cfg.attribute_universe_size, cfg.key_attributes);
    const auto k = cfg.pool_size();
    const auto satisfied = (k + 1) / 2;
    for (std::size_t i = 0; i < k; ++i) {
        const bool want = i < satisfied;
        for (int attempt = 0;; ++attempt) {
            if (attempt > 100000) throw ConfigError("cannot generate a policy pool for this key size");
            auto p = random_tree(pool_rng, cfg.attribute_universe_size, 2 + pool_rng.uniform(3));
            if (policy::evaluate(p, w.key_attrs) == want) {
                w.pool.push_back(std::move(p));
                break;
            }
        }
    }

    SeededRandom atom_rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * (atoms + 1)));
    // Round-robin then shuffled: every policy carries atoms / k messages, give or take one.
    for (std::size_t i = 0; i < atoms; ++i) w.assignment.push_back(i % k);
    for (std::size_t i = atoms; i > 1; --i) std::swap(w.assignment[i - 1], w.assignment[atom_rng.uniform(i)]);
    for (std::size_t i = 0; i < atoms; ++i) w.payloads.push_back(atom_rng.bytes(cfg.payload_bytes));
    return w;
}

const BenchRow* BenchResult::find(const std::string& scheme, const std::string& op, std::size_t atoms) const
{
    for (const auto& r : rows) {
        if (r.scheme == scheme && r.op == op && r.atoms == atoms) return &r;
    }
    return nullptr;
}

BenchResult run_bench(const BenchConfig& cfg, std::ostream* progress)
{
    cfg.validate();
    BenchResult res;
    SeededRandom rng(cfg.seed + 1);
    auto note = [&](const std::string& s) {
        if (progress) *progress << s << std::endl;
    };

    const bool do_pd = std::find(cfg.schemes.begin(), cfg.schemes.end(), "pdcpabe") != cfg.schemes.end();
    const bool do_bsw = std::find(cfg.schemes.begin(), cfg.schemes.end(), "bsw07") != cfg.schemes.end();

    std::optional<std::pair<pdcpabe::PublicParams, pdcpabe::MasterKey>> pd;
    std::optional<std::pair<bsw07::PublicParams, bsw07::MasterKey>> bs;
    if (do_pd) {
        std::vector<double> t;
        for (std::size_t r = 0; r < cfg.repetitions; ++r) t.push_back(timed([&] { pd = pdcpabe::setup(128, rng); }));
        add_row(res, "pdcpabe", "setup", 0, t);
        for (auto n : cfg.keygen_sizes) {
            auto attrs = universe_subset(rng, cfg.attribute_universe_size, n);
            std::vector<double> kt;
            for (std::size_t r = 0; r < cfg.repetitions; ++r) {
                kt.push_back(timed([&] { pdcpabe::keygen(pd->second, pd->first, attrs, rng); }));
            }
            add_row(res, "pdcpabe", "keygen_" + std::to_string(n), 0, kt);
        }
    }
    if (do_bsw) {
        std::vector<double> t;
        for (std::size_t r = 0; r < cfg.repetitions; ++r) t.push_back(timed([&] { bs = bsw07::setup(rng); }));
        add_row(res, "bsw07", "setup", 0, t);
        for (auto n : cfg.keygen_sizes) {
            auto attrs = universe_subset(rng, cfg.attribute_universe_size, n);
            std::vector<double> kt;
            for (std::size_t r = 0; r < cfg.repetitions; ++r) {
                kt.push_back(timed([&] { bsw07::keygen(bs->first, bs->second, attrs, rng); }));
            }
            add_row(res, "bsw07", "keygen_" + std::to_string(n), 0, kt);
        }
    }

    struct Prepared {
        std::size_t atoms = 0;
        Workload w;
        std::size_t expected = 0;
        std::vector<pdcpabe::PlainItem> items;
        std::optional<pdcpabe::UserKey> pd_key;
        std::optional<bsw07::SecretKey> bs_key;
        std::vector<double> pd_enc, pd_dec, bs_enc, bs_dec;
    };
    std::vector<Prepared> runs;
    for (auto atoms : cfg.atom_counts) {
        Prepared p;
        p.atoms = atoms;
        p.w = make_workload(cfg, atoms);
        res.fingerprints[atoms] = p.w.fingerprint();
        std::vector<bool> sat(p.w.pool.size());
        for (std::size_t i = 0; i < p.w.pool.size(); ++i) sat[i] = policy::evaluate(p.w.pool[i], p.w.key_attrs);
        for (auto a : p.w.assignment) p.expected += sat[a];
        for (std::size_t i = 0; i < atoms; ++i) {
            p.items.push_back({"m" + std::to_string(i), p.w.payloads[i], p.w.pool[p.w.assignment[i]]});
        }
        if (do_pd) p.pd_key = pdcpabe::keygen(pd->second, pd->first, p.w.key_attrs, rng);
        if (do_bsw) p.bs_key = bsw07::keygen(bs->first, bs->second, p.w.key_attrs, rng);
        runs.push_back(std::move(p));
    }

    // Repetitions run in rounds over every atom count, so a slow stretch on
    // the host lands on all sizes rather than on one.
    for (std::size_t r = 0; r < cfg.repetitions; ++r) {
        note("round " + std::to_string(r + 1) + "/" + std::to_string(cfg.repetitions));
        for (auto& p : runs) {
            if (do_pd) {
                pdcpabe::Ciphertext ct;
                p.pd_enc.push_back(timed([&] { ct = pdcpabe::encrypt(pd->first, p.items, rng); }));
                res.attribute_pairs[{"pdcpabe", p.atoms}] = ct.attribute_pair_count();
                pdcpabe::DecryptionReport rep;
                p.pd_dec.push_back(timed([&] { rep = pdcpabe::decrypt(pd->first, *p.pd_key, ct); }));
                if (rep.recovered.size() != p.expected) throw Error("pdcpabe recovered an unexpected payload set");
            }
            if (do_bsw) {
                std::vector<bsw07::Ciphertext> cts;
                cts.reserve(p.atoms);
                p.bs_enc.push_back(timed([&] {
                    for (const auto& it : p.items) cts.push_back(bsw07::encrypt(bs->first, it.data, it.policy, rng));
                }));
                std::size_t pairs = 0;
                for (const auto& c : cts) pairs += c.leaves.size();
                res.attribute_pairs[{"bsw07", p.atoms}] = pairs;
                std::size_t got = 0;
                p.bs_dec.push_back(timed([&] {
                    for (const auto& c : cts) got += bsw07::decrypt(bs->first, *p.bs_key, c).has_value();
                }));
                if (got != p.expected) throw Error("bsw07 recovered an unexpected payload set");
            }
        }
    }
    for (const auto& p : runs) {
        if (do_pd) {
            add_row(res, "pdcpabe", "encrypt", p.atoms, p.pd_enc);
            add_row(res, "pdcpabe", "decrypt", p.atoms, p.pd_dec);
        }
        if (do_bsw) {
            add_row(res, "bsw07", "encrypt", p.atoms, p.bs_enc);
            add_row(res, "bsw07", "decrypt", p.atoms, p.bs_dec);
        }
    }
    return res;
}

void write_csv(const BenchResult& r, std::ostream& out)
{
    out << kCsvHeader << "\n";
    out << std::setprecision(9);
    for (const auto& row : r.rows) {
        out << row.scheme << ',' << row.op << ',' << row.atoms << ',' << row.avg_s << ',' << row.stddev_s << ','
            << row.median_s << "\n";
    }
}

std::vector<std::size_t> parse_atom_list(const std::string& csv)
{
    std::vector<std::size_t> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
            throw ConfigError("bad atom count '" + item + "'");
        }
        out.push_back(std::stoull(item));
    }
    if (out.empty()) throw ConfigError("empty atom list");
    return out;
}

} // namespace dw::cli
