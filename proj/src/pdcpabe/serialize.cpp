#include "dw/pdcpabe/scheme.hpp"

#include <cstring>

namespace dw::pdcpabe {

namespace {

constexpr std::string_view kMagic = "PDCPABE1";
constexpr std::uint16_t kVersion = 1;

enum class Kind : std::uint8_t { Ciphertext = 1, PublicParams = 2, MasterKey = 3, UserKey = 4 };

void header(ByteWriter& w, Kind kind)
{
    w.raw(kMagic);
    w.u16(kVersion);
    w.u16(pairing::kCurveBls12_381);
    w.u8(static_cast<std::uint8_t>(kind));
}

void expect_header(ByteReader& r, Kind kind)
{
    auto magic = r.raw(kMagic.size());
    if (std::memcmp(magic.data(), kMagic.data(), kMagic.size()) != 0) throw DecodeError("bad magic");
    if (r.u16() != kVersion) throw DecodeError("unsupported version");
    if (r.u16() != pairing::kCurveBls12_381) throw DecodeError("unsupported curve");
    if (r.u8() != static_cast<std::uint8_t>(kind)) throw DecodeError("unexpected object kind");
}

void section(ByteWriter& w, char tag, const ByteWriter& body)
{
    w.u8(static_cast<std::uint8_t>(tag));
    w.blob(body.bytes());
}

Bytes read_section(ByteReader& r, char tag)
{
    if (r.u8() != static_cast<std::uint8_t>(tag)) throw DecodeError(std::string("expected section ") + tag);
    return r.blob();
}

template <class T>
T element(ByteReader& r, std::size_t size)
{
    return T::from_bytes(r.raw(size));
}

} // namespace

Bytes serialize(const Ciphertext& ct)
{
    ByteWriter w;
    header(w, Kind::Ciphertext);

    ByteWriter dag;
    dag.raw(ct.dag.dump());
    section(w, 'D', dag);

    ByteWriter idx;
    idx.u32(static_cast<std::uint32_t>(ct.indices.size()));
    for (const auto& s : ct.indices) idx.raw(s.to_bytes());
    section(w, 'I', idx);

    ByteWriter dn;
    dn.u32(static_cast<std::uint32_t>(ct.data_nodes.size()));
    for (const auto& d : ct.data_nodes) {
        dn.str(d.file_group_id);
        dn.u32(d.root_instance);
        dn.raw(d.c.to_bytes());
        dn.raw(d.c1.to_bytes());
        dn.raw(d.c2.to_bytes());
        dn.raw(d.c3.to_bytes());
    }
    section(w, 'N', dn);

    ByteWriter inst;
    inst.u32(static_cast<std::uint32_t>(ct.instances.size()));
    for (const auto& in : ct.instances) {
        inst.u32(in.node);
        inst.u8(static_cast<std::uint8_t>(in.children.size()));
        for (auto c : in.children) inst.u32(c);
    }
    section(w, 'S', inst);

    ByteWriter pairs;
    pairs.u32(static_cast<std::uint32_t>(ct.attr_cts.size()));
    for (const auto& [node, list] : ct.attr_cts) {
        pairs.u32(node);
        pairs.u32(static_cast<std::uint32_t>(list.size()));
        for (const auto& p : list) {
            pairs.u32(p.tag);
            pairs.raw(p.c_hat.to_bytes());
            pairs.raw(p.c_hat_prime.to_bytes());
        }
    }
    section(w, 'A', pairs);

    ByteWriter pl;
    pl.u32(static_cast<std::uint32_t>(ct.payloads.size()));
    for (const auto& p : ct.payloads) {
        pl.str(p.payload_id);
        pl.str(p.file_group_id);
        pl.raw(p.nonce);
        pl.blob(p.sealed);
    }
    section(w, 'P', pl);
    return w.take();
}

Ciphertext deserialize_ciphertext(ByteView data)
{
    Ciphertext ct;
    try {
        ByteReader r(data);
        expect_header(r, Kind::Ciphertext);

        auto dag = read_section(r, 'D');
        ct.dag = policy::IntegratedAccessDAG::parse_dump(dw::to_string(dag));

        auto idx_b = read_section(r, 'I');
        ByteReader idx(idx_b);
        ct.indices.resize(idx.u32());
        for (auto& s : ct.indices) s = element<Scalar>(idx, pairing::kScalarSize);
        idx.expect_done();

        auto dn_b = read_section(r, 'N');
        ByteReader dn(dn_b);
        ct.data_nodes.resize(dn.u32());
        for (auto& d : ct.data_nodes) {
            d.file_group_id = dn.str();
            d.root_instance = dn.u32();
            d.c = element<GT>(dn, pairing::kGtSize);
            d.c1 = element<G1>(dn, pairing::kG1Size);
            d.c2 = element<G1>(dn, pairing::kG1Size);
            d.c3 = element<G1>(dn, pairing::kG1Size);
        }
        dn.expect_done();

        auto in_b = read_section(r, 'S');
        ByteReader in(in_b);
        ct.instances.resize(in.u32());
        for (auto& i : ct.instances) {
            i.node = in.u32();
            i.children.resize(in.u8());
            for (auto& c : i.children) c = in.u32();
        }
        in.expect_done();

        auto pa_b = read_section(r, 'A');
        ByteReader pa(pa_b);
        const auto nodes = pa.u32();
        for (std::uint32_t k = 0; k < nodes; ++k) {
            const NodeId node = pa.u32();
            auto& list = ct.attr_cts[node];
            if (!list.empty()) throw DecodeError("repeated attribute node");
            list.resize(pa.u32());
            for (auto& p : list) {
                p.tag = pa.u32();
                p.c_hat = element<G2>(pa, pairing::kG2Size);
                p.c_hat_prime = element<G1>(pa, pairing::kG1Size);
            }
        }
        pa.expect_done();

        auto pl_b = read_section(r, 'P');
        ByteReader pl(pl_b);
        ct.payloads.resize(pl.u32());
        for (auto& p : ct.payloads) {
            p.payload_id = pl.str();
            p.file_group_id = pl.str();
            auto n = pl.raw(p.nonce.size());
            std::memcpy(p.nonce.data(), n.data(), n.size());
            p.sealed = pl.blob();
        }
        pl.expect_done();
        r.expect_done();
    } catch (const MalformedCiphertext&) {
        throw;
    } catch (const Error& e) {
        throw MalformedCiphertext(std::string("malformed ciphertext: ") + e.what());
    }
    validate(ct);
    return ct;
}

Bytes serialize(const PublicParams& pp)
{
    ByteWriter w;
    header(w, Kind::PublicParams);
    w.raw(pp.g1.to_bytes());
    w.raw(pp.g2.to_bytes());
    w.raw(pp.f1.to_bytes());
    w.raw(pp.f2.to_bytes());
    w.raw(pp.f3.to_bytes());
    w.raw(pp.egg_alpha.to_bytes());
    return w.take();
}

PublicParams deserialize_public_params(ByteView data)
{
    ByteReader r(data);
    expect_header(r, Kind::PublicParams);
    PublicParams pp;
    pp.g1 = element<G1>(r, pairing::kG1Size);
    pp.g2 = element<G2>(r, pairing::kG2Size);
    pp.f1 = element<G1>(r, pairing::kG1Size);
    pp.f2 = element<G1>(r, pairing::kG1Size);
    pp.f3 = element<G1>(r, pairing::kG1Size);
    pp.egg_alpha = element<GT>(r, pairing::kGtSize);
    r.expect_done();
    if (pp.f1.is_identity() || pp.f2.is_identity() || pp.f3.is_identity()) {
        throw DecodeError("public parameter is the identity");
    }
    return pp;
}

Bytes serialize(const MasterKey& mk)
{
    ByteWriter w;
    header(w, Kind::MasterKey);
    w.raw(mk.g_alpha.to_bytes());
    w.raw(mk.beta1.to_bytes());
    w.raw(mk.beta2.to_bytes());
    w.raw(mk.beta3.to_bytes());
    return w.take();
}

MasterKey deserialize_master_key(ByteView data)
{
    ByteReader r(data);
    expect_header(r, Kind::MasterKey);
    MasterKey mk;
    mk.g_alpha = element<G2>(r, pairing::kG2Size);
    mk.beta1 = element<Scalar>(r, pairing::kScalarSize);
    mk.beta2 = element<Scalar>(r, pairing::kScalarSize);
    mk.beta3 = element<Scalar>(r, pairing::kScalarSize);
    r.expect_done();
    if (mk.beta1.is_zero() || mk.beta2.is_zero() || mk.beta3.is_zero()) throw DecodeError("zero beta");
    return mk;
}

Bytes serialize(const UserKey& key)
{
    ByteWriter w;
    header(w, Kind::UserKey);
    w.raw(key.d1.to_bytes());
    w.raw(key.d3.to_bytes());
    w.u32(static_cast<std::uint32_t>(key.components.size()));
    for (const auto& [name, k] : key.components) {
        w.str(name);
        w.raw(k.d.to_bytes());
        w.raw(k.d_prime.to_bytes());
    }
    return w.take();
}

UserKey deserialize_user_key(ByteView data)
{
    ByteReader r(data);
    expect_header(r, Kind::UserKey);
    UserKey key;
    key.d1 = element<G2>(r, pairing::kG2Size);
    key.d3 = element<G2>(r, pairing::kG2Size);
    const auto n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        auto name = r.str();
        if (!policy::is_valid_attribute(name)) throw DecodeError("invalid attribute in key");
        AttributeKey k;
        k.d = element<G1>(r, pairing::kG1Size);
        k.d_prime = element<G2>(r, pairing::kG2Size);
        key.attrs.insert(name);
        key.components.emplace(std::move(name), k);
    }
    r.expect_done();
    if (key.components.size() != n) throw DecodeError("duplicate attribute in key");
    return key;
}

} // namespace dw::pdcpabe
