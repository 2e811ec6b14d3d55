#include "dw/ledger/chain.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace dw::ledger {

namespace {

constexpr std::array<std::string_view, 15> kActionNames = {
    "DeployWill", "UpdateWill", "DeleteWill", "TriggerRequest", "VoteCast",
    "FreezeStart", "Veto", "AuthorityOverride", "Activate", "PullData",
    "EncryptData", "SplitUpload", "KeyDistribute", "RetrieveShares", "Warn",
};

bool needs_escape(char c)
{
    return c == '%' || c == '\t' || c == '\n' || c == '\r';
}

std::string escape(std::string_view s)
{
    static const char* digits = "0123456789ABCDEF";
    std::string out;
    for (char c : s) {
        if (needs_escape(c)) {
            auto u = static_cast<unsigned char>(c);
            out += '%';
            out += digits[u >> 4];
            out += digits[u & 15];
        } else {
            out += c;
        }
    }
    return out;
}

int upper_hex(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

// Only the canonical form written by escape() is accepted, so any edit to a
// persisted line either changes a decoded value or fails to load.
std::string unescape(std::string_view s)
{
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '%') {
            out += s[i];
            continue;
        }
        if (i + 2 >= s.size()) throw DecodeError("truncated escape");
        int hi = upper_hex(s[i + 1]), lo = upper_hex(s[i + 2]);
        if (hi < 0 || lo < 0) throw DecodeError("bad escape");
        char c = static_cast<char>(hi * 16 + lo);
        if (!needs_escape(c)) throw DecodeError("non-canonical escape");
        out += c;
        i += 2;
    }
    return out;
}

std::string lower_hex(const Hash& h)
{
    return to_hex(h);
}

Hash parse_hash(std::string_view s)
{
    if (s.size() != 64) throw DecodeError("hash must be 64 hex digits");
    for (char c : s) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) throw DecodeError("hash must be lowercase hex");
    }
    auto b = from_hex(s);
    Hash h{};
    std::copy(b.begin(), b.end(), h.begin());
    return h;
}

std::uint64_t parse_decimal(std::string_view s)
{
    if (s.empty() || (s.size() > 1 && s[0] == '0')) throw DecodeError("non-canonical integer");
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw DecodeError("bad integer");
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

} // namespace

std::string_view to_string(Action a)
{
    auto i = static_cast<std::size_t>(a) - 1;
    return i < kActionNames.size() ? kActionNames[i] : "Unknown";
}

std::optional<Action> action_from_string(std::string_view s)
{
    for (std::size_t i = 0; i < kActionNames.size(); ++i) {
        if (kActionNames[i] == s) return static_cast<Action>(i + 1);
    }
    return std::nullopt;
}

Hash LogEntry::compute_hash() const
{
    ByteWriter w;
    w.u64(seq);
    w.u64(static_cast<std::uint64_t>(timestamp));
    w.str(actor);
    w.u8(static_cast<std::uint8_t>(action));
    w.str(subject);
    w.raw(payload_digest);
    w.raw(prev_hash);
    return crypto::sha256(w.bytes());
}

ChainCorrupt::ChainCorrupt(std::uint64_t seq)
    : Error("hash chain corrupt at seq " + std::to_string(seq)), seq_(seq)
{
}

Verdict verify_chain(std::span<const LogEntry> entries)
{
    Hash prev{};
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.seq != i || e.prev_hash != prev || e.entry_hash != e.compute_hash()) return {i};
        prev = e.entry_hash;
    }
    return {};
}

HashChain::HashChain(const HashChain& other) : entries_(other.snapshot()) {}

HashChain& HashChain::operator=(const HashChain& other)
{
    if (this != &other) {
        auto copy = other.snapshot();
        std::lock_guard lock(mu_);
        entries_ = std::move(copy);
    }
    return *this;
}

const LogEntry& HashChain::append(std::string actor, Action action, std::string subject, ByteView payload,
                                  TimestampMs timestamp)
{
    std::lock_guard lock(mu_);
    if (auto v = verify_chain(entries_); !v.ok()) throw ChainCorrupt(*v.first_bad);
    LogEntry e;
    e.seq = entries_.size();
    e.timestamp = timestamp;
    e.actor = std::move(actor);
    e.action = action;
    e.subject = std::move(subject);
    e.payload_digest = crypto::sha256(payload);
    e.prev_hash = entries_.empty() ? Hash{} : entries_.back().entry_hash;
    e.entry_hash = e.compute_hash();
    entries_.push_back(std::move(e));
    return entries_.back();
}

std::vector<LogEntry> HashChain::snapshot() const
{
    std::lock_guard lock(mu_);
    return entries_;
}

Hash HashChain::tip_hash() const
{
    std::lock_guard lock(mu_);
    return entries_.empty() ? Hash{} : entries_.back().entry_hash;
}

// One header line, then one line per entry:
// seq \t timestamp \t action \t actor \t subject \t digest \t prev \t hash
std::string HashChain::to_text() const
{
    std::string out(kChainMagic);
    out += '\n';
    for (const auto& e : snapshot()) {
        if (e.timestamp < 0) throw Error("negative timestamps cannot be persisted");
        out += std::to_string(e.seq) + '\t' + std::to_string(e.timestamp) + '\t' + std::string(to_string(e.action)) +
               '\t' + escape(e.actor) + '\t' + escape(e.subject) + '\t' + lower_hex(e.payload_digest) + '\t' +
               lower_hex(e.prev_hash) + '\t' + lower_hex(e.entry_hash) + '\n';
    }
    return out;
}

HashChain HashChain::from_text(std::string_view text)
{
    if (text.empty() || text.back() != '\n') throw DecodeError("chain file must end with a newline");
    auto lines = split(text.substr(0, text.size() - 1), '\n');
    if (lines[0] != kChainMagic) throw DecodeError("missing DWCHAIN1 header");
    std::vector<LogEntry> entries;
    for (std::size_t n = 1; n < lines.size(); ++n) {
        try {
            auto f = split(lines[n], '\t');
            if (f.size() != 8) throw DecodeError("expected 8 fields");
            LogEntry e;
            e.seq = parse_decimal(f[0]);
            auto ts = parse_decimal(f[1]);
            if (ts > static_cast<std::uint64_t>(INT64_MAX)) throw DecodeError("timestamp out of range");
            e.timestamp = static_cast<TimestampMs>(ts);
            auto a = action_from_string(f[2]);
            if (!a) throw DecodeError("unknown action");
            e.action = *a;
            e.actor = unescape(f[3]);
            e.subject = unescape(f[4]);
            e.payload_digest = parse_hash(f[5]);
            e.prev_hash = parse_hash(f[6]);
            e.entry_hash = parse_hash(f[7]);
            entries.push_back(std::move(e));
        } catch (const DecodeError& err) {
            throw DecodeError("line " + std::to_string(n + 1) + ": " + err.what());
        }
    }
    return HashChain(std::move(entries));
}

void HashChain::save(const std::string& path) const
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out << to_text();
    if (!out) throw Error("write failed: " + path);
}

HashChain HashChain::load(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

} // namespace dw::ledger
