#include "dw/sharding/shamir.hpp"

#include <algorithm>
#include <cstring>
#include <set>

#include "dw/sharding/gf256.hpp"

namespace dw::sharding {

namespace {

constexpr std::string_view kShareMagic = "DWSHARE1";

} // namespace

unsigned default_threshold(std::size_t n)
{
    if (n < 2) throw TooFewLocations("need at least 2 storage locations, got " + std::to_string(n));
    return std::max<unsigned>(2, static_cast<unsigned>((n + 1) / 2));
}

std::vector<Share> split(const std::string& file_id, ByteView data, unsigned n, unsigned t, RandomSource& rng)
{
    if (t < 2 || t > n) {
        throw InvalidThreshold("threshold " + std::to_string(t) + " outside [2, " + std::to_string(n) + "]");
    }
    if (n > kMaxShares) throw InvalidThreshold("at most 255 shares");
    if (data.empty()) throw ShardingError("nothing to split");

    // coeffs[k][b] is the degree-k coefficient for byte b.
    std::vector<Bytes> coeffs;
    coeffs.emplace_back(data.begin(), data.end());
    for (unsigned k = 1; k < t; ++k) coeffs.push_back(rng.bytes(data.size()));

    std::vector<Share> shares;
    shares.reserve(n);
    for (unsigned i = 1; i <= n; ++i) {
        const auto row = gf256::mul_row(static_cast<std::uint8_t>(i));
        Bytes y = coeffs[t - 1];
        for (unsigned k = t - 1; k-- > 0;) {
            const Bytes& c = coeffs[k];
            for (std::size_t b = 0; b < y.size(); ++b) y[b] = row[y[b]] ^ c[b];
        }
        shares.push_back(Share{file_id, static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(n),
                               static_cast<std::uint16_t>(t), std::move(y)});
    }
    return shares;
}

Bytes combine(const std::vector<Share>& shares)
{
    if (shares.empty()) throw ThresholdNotMet("Insufficient shares to reconstruct the file: none supplied");
    const Share& ref = shares.front();
    std::vector<const Share*> distinct;
    std::set<std::uint16_t> seen;
    for (const auto& s : shares) {
        if (s.file_id != ref.file_id || s.total != ref.total || s.threshold != ref.threshold ||
            s.payload.size() != ref.payload.size()) {
            throw InconsistentShares("shares disagree on file metadata");
        }
        if (s.share_id == 0 || s.share_id > s.total) throw InconsistentShares("share id out of range");
        if (!seen.insert(s.share_id).second) {
            auto prev = std::find_if(distinct.begin(), distinct.end(),
                                     [&](const Share* p) { return p->share_id == s.share_id; });
            if ((*prev)->payload != s.payload) throw InconsistentShares("conflicting copies of one share");
            continue;
        }
        distinct.push_back(&s);
    }
    if (ref.threshold < 1 || distinct.size() < ref.threshold) {
        throw ThresholdNotMet("Insufficient shares to reconstruct the file: have " +
                              std::to_string(distinct.size()) + ", need " + std::to_string(ref.threshold));
    }
    distinct.resize(ref.threshold);

    Bytes out(ref.payload.size(), 0);
    for (const Share* si : distinct) {
        std::uint8_t num = 1, den = 1;
        for (const Share* sj : distinct) {
            if (sj == si) continue;
            num = gf256::mul(num, sj->x());
            den = gf256::mul(den, sj->x() ^ si->x());
        }
        const auto row = gf256::mul_row(gf256::div(num, den));
        for (std::size_t b = 0; b < out.size(); ++b) out[b] ^= row[si->payload[b]];
    }
    return out;
}

Bytes encode_share(const Share& s)
{
    if (s.file_id.size() > 0xffff) throw ShardingError("file id too long");
    ByteWriter w;
    w.raw(kShareMagic);
    w.u16(static_cast<std::uint16_t>(s.file_id.size()));
    w.raw(s.file_id);
    w.u16(s.share_id);
    w.u16(s.total);
    w.u16(s.threshold);
    w.u64(s.payload.size());
    w.raw(s.payload);
    return w.take();
}

Share decode_share(ByteView data)
{
    ByteReader r(data);
    auto magic = r.raw(kShareMagic.size());
    if (std::memcmp(magic.data(), kShareMagic.data(), kShareMagic.size()) != 0) {
        throw DecodeError("not a share file");
    }
    Share s;
    s.file_id = to_string(r.raw(r.u16()));
    s.share_id = r.u16();
    s.total = r.u16();
    s.threshold = r.u16();
    const auto len = r.u64();
    if (len != r.remaining()) throw DecodeError("share payload length mismatch");
    auto p = r.raw(len);
    s.payload.assign(p.begin(), p.end());
    return s;
}

void ShareManifest::record(ManifestEntry e)
{
    for (const auto& x : entries_) {
        if (x.file_id == e.file_id && x.share_id == e.share_id) {
            throw ShardingError("share " + e.file_id + "#" + std::to_string(e.share_id) + " already placed");
        }
    }
    entries_.push_back(std::move(e));
}

std::vector<ManifestEntry> ShareManifest::placements(const std::string& file_id) const
{
    std::vector<ManifestEntry> out;
    for (const auto& e : entries_) {
        if (e.file_id == file_id) out.push_back(e);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.share_id < b.share_id; });
    return out;
}

std::vector<std::string> ShareManifest::files() const
{
    std::vector<std::string> out;
    for (const auto& e : entries_) {
        if (std::find(out.begin(), out.end(), e.file_id) == out.end()) out.push_back(e.file_id);
    }
    return out;
}

} // namespace dw::sharding
