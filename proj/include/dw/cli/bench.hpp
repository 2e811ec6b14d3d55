#pragma once

// Workload generator and timing harness comparing pdcpabe against bsw07.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dw/common/bytes.hpp"
#include "dw/policy/policy.hpp"

namespace dw::cli {

class ConfigError : public Error {
public:
    using Error::Error;
};

inline constexpr std::string_view kCsvHeader = "scheme,op,atoms,avg_s,stddev_s,median_s";

struct BenchConfig {
    std::vector<std::size_t> atom_counts;
    std::size_t sharing_factor = 50; // atoms per distinct policy
    std::size_t attribute_universe_size = 64;
    std::size_t repetitions = 10;
    std::uint64_t seed = 1;
    std::vector<std::size_t> keygen_sizes = {5, 10, 20, 30};
    std::size_t key_attributes = 30; // attributes held by the decrypting key
    std::size_t payload_bytes = 1024;
    std::vector<std::string> schemes = {"pdcpabe", "bsw07"};

    /// Throws ConfigError.
    void validate() const;
    /// Size of the shared policy pool: ceil(max atoms / sharing_factor).
    std::size_t pool_size() const;
};

/// Policies are random binary trees of depth 2 to 4. The pool depends only
/// on the seed and pool size, so every atom count draws from the same
/// policies. Half the pool (rounded up) is satisfied by the key.
struct Workload {
    std::vector<policy::PolicyExpr> pool;
    std::vector<std::size_t> assignment; // atom -> pool index, balanced across the pool
    policy::AttributeSet key_attrs;
    std::vector<Bytes> payloads;

    std::string fingerprint() const;
};

Workload make_workload(const BenchConfig& cfg, std::size_t atoms);

struct BenchRow {
    std::string scheme;
    std::string op;
    std::size_t atoms = 0;
    double avg_s = 0;
    double stddev_s = 0;
    double median_s = 0;
};

struct BenchResult {
    std::vector<BenchRow> rows;
    /// (scheme, atoms) -> attribute ciphertext pairs (pdcpabe) or leaf pairs summed over atoms (bsw07).
    std::map<std::pair<std::string, std::size_t>, std::size_t> attribute_pairs;
    std::map<std::size_t, std::string> fingerprints;

    const BenchRow* find(const std::string& scheme, const std::string& op, std::size_t atoms) const;
};

/// Times every operation. Decryption results are checked against
/// policy::evaluate; a mismatch throws Error.
BenchResult run_bench(const BenchConfig& cfg, std::ostream* progress = nullptr);

void write_csv(const BenchResult& r, std::ostream& out);

std::vector<std::size_t> parse_atom_list(const std::string& csv);

} // namespace dw::cli
