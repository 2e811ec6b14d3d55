#include "dw/pdcpabe/scheme.hpp"

#include <optional>
#include <set>

namespace dw::pdcpabe {

using policy::DagNode;
using policy::Gate;
using policy::IntegratedAccessDAG;
using policy::NodeKind;

UnsupportedSecurityLevel::UnsupportedSecurityLevel(unsigned bits)
    : Error("no supported pairing group at " + std::to_string(bits) + "-bit security (only " +
            std::to_string(pairing::kSecurityBits) + ")")
{
}

const char* to_string(DenialReason r)
{
    switch (r) {
    case DenialReason::PolicyNotSatisfied:
        return "policy not satisfied";
    case DenialReason::AuthenticationFailed:
        return "authentication failed";
    }
    return "unknown";
}

std::size_t Ciphertext::attribute_pair_count() const
{
    std::size_t n = 0;
    for (const auto& [node, pairs] : attr_cts) n += pairs.size();
    return n;
}

crypto::AeadKey derive_payload_key(const GT& ck)
{
    crypto::Sha256 h;
    h.update(std::string_view("dw.pdcpabe.payload-key.v1"));
    h.update(ck.to_bytes());
    return h.finish();
}

namespace {

Bytes payload_aad(const std::string& payload_id, const std::string& group_id)
{
    ByteWriter w;
    w.str(payload_id);
    w.str(group_id);
    return w.take();
}

} // namespace

std::pair<PublicParams, MasterKey> setup(unsigned security_level, RandomSource& rng)
{
    if (security_level != pairing::kSecurityBits) throw UnsupportedSecurityLevel(security_level);

    const Scalar alpha = Scalar::random_nonzero(rng);
    MasterKey mk;
    mk.beta1 = Scalar::random_nonzero(rng);
    mk.beta2 = Scalar::random_nonzero(rng);
    mk.beta3 = Scalar::random_nonzero(rng);

    PublicParams pp;
    pp.g1 = G1::generator();
    pp.g2 = G2::generator();
    mk.g_alpha = pp.g2 * alpha;
    pp.f1 = pp.g1 * mk.beta1;
    pp.f2 = pp.g1 * mk.beta2;
    pp.f3 = pp.g1 * mk.beta3;
    pp.egg_alpha = pairing::pair(pp.g1, mk.g_alpha);
    return {pp, mk};
}

UserKey keygen(const MasterKey& mk, const PublicParams& pp, const AttributeSet& attrs, RandomSource& rng)
{
    if (attrs.empty()) throw EmptyAttributeSet();
    for (const auto& a : attrs) {
        if (!policy::is_valid_attribute(a)) throw policy::PolicyError("invalid attribute name '" + a + "'");
    }

    const Scalar r = Scalar::random_nonzero(rng);
    UserKey key;
    key.attrs = attrs;
    key.d1 = (mk.g_alpha + pp.g2 * r) * mk.beta1.inverse();
    key.d3 = pp.g2 * (r * mk.beta3.inverse());
    const G1 g1r = pp.g1 * r;
    for (const auto& a : attrs) {
        const Scalar rj = Scalar::random_nonzero(rng);
        key.components.emplace(a, AttributeKey{g1r + G1::hash(a) * rj, pp.g2 * rj});
    }
    return key;
}

// ---- encryption ----

namespace {

struct SecretInstance {
    NodeId node;
    Scalar value;
    bool shareable;
    std::vector<std::uint32_t> children;
};

class Propagator {
public:
    Propagator(const PublicParams& pp, const IntegratedAccessDAG& dag, const std::vector<Scalar>& idx,
               RandomSource& rng, const EncryptOptions& opts, Ciphertext& ct)
        : pp_(pp), dag_(dag), idx_(idx), rng_(rng), opts_(opts), ct_(ct)
    {
    }

    /// Secret for a data node rooted at `root`, and the instance carrying it.
    std::pair<Scalar, std::uint32_t> root(NodeId root)
    {
        if (auto hit = lookup(root)) return {insts_[*hit].value, *hit};
        const Scalar s = Scalar::random(rng_);
        return {s, make(root, s, true)};
    }

    void finish(EncryptTrace* trace)
    {
        for (const auto& in : insts_) {
            ct_.instances.push_back(NodeInstance{in.node, in.children});
            if (trace) trace->instance_values.push_back(in.value);
        }
    }

private:
    std::optional<std::uint32_t> lookup(NodeId n) const
    {
        if (!opts_.reuse_shared_nodes) return std::nullopt;
        auto it = shared_.find(n);
        if (it == shared_.end()) return std::nullopt;
        return it->second;
    }

    Scalar coefficient()
    {
        Scalar a = Scalar::random(rng_);
        if (opts_.trace) opts_.trace->coefficients.push_back(a);
        return a;
    }

    std::uint32_t make(NodeId n, const Scalar& v, bool shareable)
    {
        const auto id = static_cast<std::uint32_t>(insts_.size());
        insts_.push_back(SecretInstance{n, v, shareable, {}});
        if (shareable && opts_.reuse_shared_nodes) shared_.emplace(n, id);
        expand(id);
        return id;
    }

    void expand(std::uint32_t id)
    {
        const DagNode& node = dag_.node(insts_[id].node);
        const Scalar v = insts_[id].value;
        const bool shareable = insts_[id].shareable;

        if (node.kind == NodeKind::Attribute) {
            ct_.attr_cts[node.id].push_back(
                AttributePair{id, pp_.g2 * v, G1::hash(node.label) * v});
            return;
        }

        const NodeId l = node.children[0];
        const NodeId r = node.children[1];
        std::vector<std::uint32_t> kids;
        if (l == r) {
            kids = {make(l, v, shareable)};
        } else if (node.gate == Gate::Or) {
            // Anyone holding either branch learns v, so neither branch may
            // be linked to values used elsewhere.
            kids = {make(l, v, false), make(r, v, false)};
        } else {
            auto hl = shareable ? lookup(l) : std::nullopt;
            auto hr = shareable ? lookup(r) : std::nullopt;
            if (hl.has_value() != hr.has_value()) {
                // Line through (0, v) and the already published child value.
                const NodeId y = hl ? l : r;
                const NodeId z = hl ? r : l;
                const std::uint32_t yid = hl ? *hl : *hr;
                const Scalar slope = (insts_[yid].value - v) * idx_[y].inverse();
                const std::uint32_t zid = make(z, v + slope * idx_[z], shareable);
                kids = hl ? std::vector<std::uint32_t>{yid, zid} : std::vector<std::uint32_t>{zid, yid};
            } else {
                const Scalar a = coefficient();
                const std::uint32_t lid = make(l, v + a * idx_[l], shareable);
                const std::uint32_t rid = make(r, v + a * idx_[r], shareable);
                kids = {lid, rid};
            }
        }
        insts_[id].children = std::move(kids);
    }

    const PublicParams& pp_;
    const IntegratedAccessDAG& dag_;
    const std::vector<Scalar>& idx_;
    RandomSource& rng_;
    const EncryptOptions& opts_;
    Ciphertext& ct_;
    std::vector<SecretInstance> insts_;
    std::map<NodeId, std::uint32_t> shared_; // H: node -> first shareable instance
};

std::vector<Scalar> draw_indices(const IntegratedAccessDAG& dag, RandomSource& rng)
{
    std::vector<Scalar> idx(dag.size());
    std::set<Bytes> used;
    for (const auto& n : dag.nodes()) {
        if (n.kind == NodeKind::Data) continue;
        Scalar s;
        do {
            s = Scalar::random_nonzero(rng);
        } while (!used.insert(s.to_bytes()).second);
        idx[n.id] = s;
    }
    return idx;
}

} // namespace

Ciphertext encrypt(const PublicParams& pp, const std::vector<PlainItem>& items, RandomSource& rng,
                   const EncryptOptions& opts)
{
    if (items.empty()) throw EmptyInput();

    std::vector<std::pair<std::string, policy::PolicyExpr>> keyed;
    keyed.reserve(items.size());
    for (const auto& it : items) keyed.emplace_back(it.payload_id, it.policy);
    const auto groups = policy::group_by_policy(keyed);

    std::vector<std::pair<std::string, policy::PolicyExpr>> dag_input;
    std::map<std::string, std::string> group_of;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        std::string gid = "g" + std::to_string(i);
        for (const auto& pid : groups[i].payload_ids) group_of[pid] = gid;
        dag_input.emplace_back(std::move(gid), groups[i].policy);
    }

    Ciphertext ct;
    ct.dag = policy::build_dag(dag_input);
    ct.indices = draw_indices(ct.dag, rng);

    Propagator prop(pp, ct.dag, ct.indices, rng, opts, ct);
    std::map<std::string, crypto::AeadKey> payload_keys;
    for (NodeId d : ct.dag.data_nodes()) {
        const DagNode& node = ct.dag.node(d);
        auto [s, root_inst] = prop.root(node.children[0]);
        const Scalar eps = Scalar::random(rng);
        const GT ck = pp.egg_alpha.pow(Scalar::random(rng));
        const Scalar se = s + eps;

        DataNodeCiphertext dn;
        dn.file_group_id = node.label;
        dn.root_instance = root_inst;
        dn.c = ck * pp.egg_alpha.pow(se);
        dn.c1 = pp.f1 * se;
        dn.c2 = pp.f2 * se;
        dn.c3 = pp.f3 * eps;
        ct.data_nodes.push_back(std::move(dn));
        payload_keys.emplace(node.label, derive_payload_key(ck));
        if (opts.trace) opts.trace->groups.push_back({node.label, s, eps, ck});
    }
    prop.finish(opts.trace);

    for (const auto& it : items) {
        PayloadCiphertext pc;
        pc.payload_id = it.payload_id;
        pc.file_group_id = group_of.at(it.payload_id);
        rng.fill(pc.nonce);
        pc.sealed = crypto::aead_seal(payload_keys.at(pc.file_group_id), pc.nonce, it.data,
                                      payload_aad(pc.payload_id, pc.file_group_id));
        ct.payloads.push_back(std::move(pc));
    }
    return ct;
}

// ---- validation ----

void validate(const Ciphertext& ct)
{
    const auto& dag = ct.dag;
    auto fail = [](const std::string& what) { throw MalformedCiphertext("malformed ciphertext: " + what); };

    if (ct.indices.size() != dag.size()) fail("index table size mismatch");
    for (const auto& n : dag.nodes()) {
        if (n.kind != NodeKind::Data && ct.indices[n.id].is_zero()) fail("zero node index");
        if (n.kind == NodeKind::Link && n.gate == Gate::And && n.children[0] != n.children[1] &&
            ct.indices[n.children[0]] == ct.indices[n.children[1]]) {
            fail("AND children share an index");
        }
    }

    // Which pair serves each attribute instance.
    std::map<std::uint32_t, NodeId> pair_owner;
    for (const auto& [node, pairs] : ct.attr_cts) {
        if (node >= dag.size() || dag.node(node).kind != NodeKind::Attribute) fail("pairs on non-attribute node");
        if (pairs.empty()) fail("empty pair list");
        for (const auto& p : pairs) {
            if (!pair_owner.emplace(p.tag, node).second) fail("duplicate pair tag");
        }
    }

    for (std::size_t i = 0; i < ct.instances.size(); ++i) {
        const auto& in = ct.instances[i];
        if (in.node >= dag.size()) fail("instance references unknown node");
        const DagNode& n = dag.node(in.node);
        switch (n.kind) {
        case NodeKind::Data:
            fail("instance on data node");
            break;
        case NodeKind::Attribute: {
            if (!in.children.empty()) fail("attribute instance with children");
            auto it = pair_owner.find(static_cast<std::uint32_t>(i));
            if (it == pair_owner.end() || it->second != in.node) fail("attribute instance without pair");
            break;
        }
        case NodeKind::Link: {
            const bool twin = n.children[0] == n.children[1];
            if (in.children.size() != (twin ? 1u : 2u)) fail("link instance arity");
            for (std::size_t k = 0; k < in.children.size(); ++k) {
                if (in.children[k] >= ct.instances.size()) fail("dangling instance reference");
                if (ct.instances[in.children[k]].node != n.children[k]) fail("instance child mismatch");
            }
            break;
        }
        }
    }
    for (const auto& [tag, node] : pair_owner) {
        if (tag >= ct.instances.size() || ct.instances[tag].node != node) fail("pair tag mismatch");
    }

    std::set<std::string> groups;
    if (ct.data_nodes.size() != dag.data_nodes().size()) fail("data node count mismatch");
    for (const auto& dn : ct.data_nodes) {
        auto d = dag.find_data(dn.file_group_id);
        if (!d) fail("unknown file group '" + dn.file_group_id + "'");
        if (!groups.insert(dn.file_group_id).second) fail("duplicate file group");
        if (dn.root_instance >= ct.instances.size() ||
            ct.instances[dn.root_instance].node != dag.node(*d).children[0]) {
            fail("bad root instance");
        }
    }
    std::set<std::string> payload_ids;
    for (const auto& p : ct.payloads) {
        if (!groups.count(p.file_group_id)) fail("payload references unknown file group");
        if (!payload_ids.insert(p.payload_id).second) fail("duplicate payload id");
    }
}

// ---- decryption ----

namespace {

class Recoverer {
public:
    Recoverer(const UserKey& key, const Ciphertext& ct, bool cache)
        : key_(key), ct_(ct), cache_(cache), memo_(ct.instances.size()), sat_(ct.dag.size(), 0)
    {
        for (const auto& [node, pairs] : ct.attr_cts) {
            for (std::size_t i = 0; i < pairs.size(); ++i) pair_of_[pairs[i].tag] = &pairs[i];
        }
        for (const auto& n : ct.dag.nodes()) {
            switch (n.kind) {
            case NodeKind::Attribute:
                sat_[n.id] = key.components.count(n.label) != 0;
                break;
            case NodeKind::Data:
                sat_[n.id] = sat_[n.children[0]];
                break;
            case NodeKind::Link:
                sat_[n.id] = n.gate == Gate::And ? (sat_[n.children[0]] && sat_[n.children[1]])
                                                  : (sat_[n.children[0]] || sat_[n.children[1]]);
                break;
            }
        }
    }

    bool satisfied(NodeId n) const { return sat_[n] != 0; }

    /// e(g,g)^(r * value(instance)); the instance's node must be satisfied.
    GT recover(std::uint32_t iid)
    {
        if (cache_ && memo_[iid]) return *memo_[iid];
        const NodeInstance& in = ct_.instances[iid];
        const DagNode& n = ct_.dag.node(in.node);
        GT v;
        if (n.kind == NodeKind::Attribute) {
            const AttributePair& p = *pair_of_.at(iid);
            const AttributeKey& k = key_.components.at(n.label);
            v = pairing::pair(k.d, p.c_hat) / pairing::pair(p.c_hat_prime, k.d_prime);
        } else if (in.children.size() == 1) {
            v = recover(in.children[0]);
        } else if (n.gate == Gate::Or) {
            std::size_t pick = satisfied(n.children[0]) ? 0 : 1;
            if (cache_ && satisfied(n.children[1]) && !memo_[in.children[0]] && memo_[in.children[1]]) pick = 1;
            v = recover(in.children[pick]);
        } else {
            const Scalar& xl = ct_.indices[n.children[0]];
            const Scalar& xr = ct_.indices[n.children[1]];
            const Scalar ll = xr * (xr - xl).inverse();
            const Scalar lr = xl * (xl - xr).inverse();
            v = recover(in.children[0]).pow(ll) * recover(in.children[1]).pow(lr);
        }
        if (cache_) memo_[iid] = v;
        return v;
    }

private:
    const UserKey& key_;
    const Ciphertext& ct_;
    bool cache_;
    std::vector<std::optional<GT>> memo_; // H2
    std::vector<char> sat_;
    std::map<std::uint32_t, const AttributePair*> pair_of_;
};

} // namespace

DecryptionReport decrypt(const PublicParams&, const UserKey& key, const Ciphertext& ct, const DecryptOptions& opts)
{
    validate(ct);
    Recoverer rec(key, ct, opts.cache_shared);
    DecryptionReport report;

    std::map<std::string, std::optional<crypto::AeadKey>> keys;
    for (const auto& dn : ct.data_nodes) {
        const NodeId d = *ct.dag.find_data(dn.file_group_id);
        if (!rec.satisfied(d)) {
            keys[dn.file_group_id] = std::nullopt;
            continue;
        }
        const GT a = rec.recover(dn.root_instance);
        const GT ck = dn.c * a * pairing::pair(dn.c3, key.d3) / pairing::pair(dn.c1, key.d1);
        keys[dn.file_group_id] = derive_payload_key(ck);
    }

    for (const auto& p : ct.payloads) {
        const auto& k = keys.at(p.file_group_id);
        if (!k) {
            report.denied.push_back({p.payload_id, p.file_group_id, DenialReason::PolicyNotSatisfied});
            continue;
        }
        auto pt = crypto::aead_open(*k, p.nonce, p.sealed, payload_aad(p.payload_id, p.file_group_id));
        if (pt) {
            report.recovered.emplace(p.payload_id, std::move(*pt));
        } else {
            report.denied.push_back({p.payload_id, p.file_group_id, DenialReason::AuthenticationFailed});
        }
    }
    return report;
}

} // namespace dw::pdcpabe
