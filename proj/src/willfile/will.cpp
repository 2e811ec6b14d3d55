#include "dw/willfile/will.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>

#include "dw/policy/policy.hpp"
#include "dw/willfile/xml.hpp"

namespace dw::willfile {

SchemaViolation::SchemaViolation(std::string path, const std::string& what)
    : WillError("schema violation at " + path + ": " + what), path_(std::move(path))
{
}

PolicySyntaxError::PolicySyntaxError(std::string path, std::size_t offset, const std::string& what)
    : SchemaViolation(std::move(path), what), offset_(offset)
{
}

const Heir* DigitalWill::heir(std::string_view id) const
{
    for (const auto& h : heirs) {
        if (h.id == id) return &h;
    }
    return nullptr;
}

const ContentPolicy* DigitalWill::policy_for(std::string_view asset_id) const
{
    for (const auto& c : content_policies) {
        if (selector_matches(c.asset_selector, asset_id)) return &c;
    }
    return nullptr;
}

bool selector_matches(std::string_view pattern, std::string_view text)
{
    // Iterative wildcard match with single backtrack point.
    std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

namespace {

bool blank(std::string_view s)
{
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

template <class T, class Key>
void require_unique(const std::vector<T>& items, Key key, const char* what)
{
    std::set<std::string> seen;
    for (const auto& i : items) {
        const std::string& k = key(i);
        if (k.empty()) throw InvariantViolation(std::string("empty ") + what + " id");
        if (!seen.insert(k).second) throw InvariantViolation(std::string("duplicate ") + what + " id '" + k + "'");
    }
}

std::map<std::string, std::string> extension_bindings(const DigitalWill& will)
{
    std::map<std::string, std::string> out;
    for (const auto& e : will.extensions) {
        for (const auto& [p, uri] : e.namespaces) {
            auto [it, fresh] = out.emplace(p, uri);
            if (!fresh && it->second != uri) {
                throw InvariantViolation("extensions bind prefix '" + p + "' to different namespaces");
            }
        }
    }
    return out;
}

void check_extension(const Extension& e)
{
    std::string wrapper = "<w";
    for (const auto& [p, uri] : e.namespaces) wrapper += " xmlns:" + p + "=\"" + xml::escape_attribute(uri) + "\"";
    wrapper += ">" + e.xml + "</w>";
    xml::Element root;
    try {
        root = xml::parse(wrapper);
    } catch (const xml::XmlError& err) {
        throw InvariantViolation(std::string("extension is not well-formed: ") + err.what());
    }
    if (root.children.size() != 1 || !blank(root.text)) {
        throw InvariantViolation("extension must be exactly one element");
    }
    const auto& el = root.children[0];
    if (el.ns.empty() || el.ns == kNamespace) throw InvariantViolation("extension must use a foreign namespace");
    if (el.begin != wrapper.find('>') + 1 || el.end != wrapper.size() - 4) {
        throw InvariantViolation("extension has content outside its element");
    }
}

} // namespace

std::vector<std::string> validate(const DigitalWill& will)
{
    if (will.will_id.empty()) throw InvariantViolation("will id is empty");
    if (will.creator_id.empty()) throw InvariantViolation("creator id is empty");
    if (will.heirs.empty()) throw InvariantViolation("a will needs at least one heir");
    require_unique(will.heirs, [](const Heir& h) -> const std::string& { return h.id; }, "heir");
    for (const auto& h : will.heirs) {
        if (h.attributes.empty()) throw InvariantViolation("heir '" + h.id + "' has no attributes");
        for (const auto& a : h.attributes) {
            if (!policy::is_valid_attribute(a)) {
                throw InvariantViolation("heir '" + h.id + "' has invalid attribute '" + a + "'");
            }
        }
    }
    if (will.trigger.vote_threshold < 1 || will.trigger.vote_threshold > will.heirs.size()) {
        throw InvariantViolation("vote threshold must be between 1 and the number of heirs");
    }
    require_unique(will.platform_links, [](const PlatformLink& p) -> const std::string& { return p.platform_id; },
                   "platform");
    for (const auto& p : will.platform_links) {
        if (p.platform_id.find('/') != std::string::npos) throw InvariantViolation("platform id contains '/'");
    }

    std::vector<policy::PolicyExpr> parsed;
    for (const auto& c : will.content_policies) {
        try {
            parsed.push_back(policy::parse_policy(c.policy));
        } catch (const policy::PolicyError& e) {
            throw InvariantViolation("content policy for '" + c.asset_selector + "': " + e.what());
        }
    }

    const auto& st = will.storage;
    require_unique(st.location_ids, [](const std::string& s) -> const std::string& { return s; }, "location");
    if (st.location_ids.size() < 2 || st.location_ids.size() > 255) {
        throw InvariantViolation("storage needs between 2 and 255 locations");
    }
    if (st.threshold < 2 || st.threshold > st.location_ids.size()) {
        throw InvariantViolation("share threshold must be between 2 and the number of locations");
    }

    extension_bindings(will);
    for (const auto& e : will.extensions) check_extension(e);

    std::vector<std::string> warnings;
    if (will.content_policies.empty()) warnings.push_back("will has no content policies");
    for (const auto& h : will.heirs) {
        const bool covers = std::any_of(parsed.begin(), parsed.end(), [&](const policy::PolicyExpr& p) {
            auto need = policy::attributes_of(p);
            return std::includes(h.attributes.begin(), h.attributes.end(), need.begin(), need.end());
        });
        if (!parsed.empty() && !covers) {
            warnings.push_back("heir '" + h.id + "' does not hold every attribute of any content policy");
        }
    }
    return warnings;
}

// ---- parsing ----

namespace {

class Reader {
public:
    explicit Reader(std::string_view src) : src_(src) {}

    DigitalWill read()
    {
        xml::Element root;
        try {
            root = xml::parse(src_);
        } catch (const xml::XmlError& e) {
            throw SchemaViolation("/", e.what());
        }
        if (root.ns != kNamespace || root.local != "will") {
            throw SchemaViolation("/" + root.qname, "root must be <will> in " + std::string(kNamespace));
        }
        const std::string path = "/will";
        only_attributes(root, path, {"id"});
        DigitalWill w;
        w.will_id = required(root, path, "id");

        std::set<std::string> seen;
        std::vector<std::pair<std::string, std::string>> root_bindings = root.ns_decls;
        for (const auto& c : root.children) {
            if (c.ns != kNamespace) {
                if (c.ns.empty()) throw SchemaViolation(path + "/" + c.qname, "element has no namespace");
                w.extensions.push_back(extension(c, root_bindings));
                continue;
            }
            const std::string cp = path + "/" + c.local;
            if (!seen.insert(c.local).second) throw SchemaViolation(cp, "element repeated");
            if (c.local == "creator") {
                only_attributes(c, cp, {"id"});
                no_children(c, cp);
                w.creator_id = required(c, cp, "id");
            } else if (c.local == "heirs") {
                w.heirs = heirs(c, cp);
            } else if (c.local == "platforms") {
                w.platform_links = platforms(c, cp);
            } else if (c.local == "contentPolicies") {
                w.content_policies = rules(c, cp);
            } else if (c.local == "trigger") {
                only_attributes(c, cp, {"voteThreshold", "freezeSeconds", "authorityOverride"});
                no_children(c, cp);
                w.trigger.vote_threshold = number<unsigned>(c, cp, "voteThreshold");
                w.trigger.freeze_seconds = number<std::uint64_t>(c, cp, "freezeSeconds");
                w.trigger.authority_override_allowed = flag(c, cp, "authorityOverride");
            } else if (c.local == "storage") {
                w.storage = storage(c, cp);
            } else {
                throw SchemaViolation(cp, "unknown element");
            }
        }
        if (!blank(root.text)) throw SchemaViolation(path, "unexpected text");
        for (const char* req : {"creator", "heirs", "trigger", "storage"}) {
            if (!seen.count(req)) throw SchemaViolation(path + "/" + req, "missing required element");
        }

        if (w.trigger.vote_threshold < 1) throw SchemaViolation(path + "/trigger", "voteThreshold must be at least 1");
        if (w.trigger.vote_threshold > w.heirs.size()) {
            throw SchemaViolation(path + "/trigger", "voteThreshold exceeds the number of heirs");
        }
        try {
            validate(w);
        } catch (const InvariantViolation& e) {
            throw SchemaViolation(path, e.what());
        }
        return w;
    }

private:
    Extension extension(const xml::Element& e, const std::vector<std::pair<std::string, std::string>>& bindings)
    {
        Extension ext;
        ext.xml = std::string(src_.substr(e.begin, e.end - e.begin));
        for (const auto& p : e.free_prefixes()) {
            auto it = std::find_if(bindings.begin(), bindings.end(), [&](const auto& b) { return b.first == p; });
            if (it != bindings.end()) ext.namespaces.push_back(*it);
        }
        return ext;
    }

    static void only_attributes(const xml::Element& e, const std::string& path, std::set<std::string> allowed)
    {
        for (const auto& a : e.attributes) {
            if (a.qname == "xmlns" || a.qname.rfind("xmlns:", 0) == 0) continue;
            if (!allowed.count(a.qname)) throw SchemaViolation(path, "unexpected attribute '" + a.qname + "'");
        }
    }

    static void no_children(const xml::Element& e, const std::string& path)
    {
        if (!e.children.empty()) throw SchemaViolation(path + "/" + e.children[0].qname, "unexpected element");
        if (!blank(e.text)) throw SchemaViolation(path, "unexpected text");
    }

    static std::string required(const xml::Element& e, const std::string& path, const char* name)
    {
        const auto* a = e.attribute(name);
        if (!a) throw SchemaViolation(path, std::string("missing attribute '") + name + "'");
        return a->value;
    }

    template <class N>
    static N number(const xml::Element& e, const std::string& path, const char* name)
    {
        auto v = required(e, path, name);
        N out{};
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
            throw SchemaViolation(path, std::string("attribute '") + name + "' must be a non-negative integer");
        }
        return out;
    }

    static bool flag(const xml::Element& e, const std::string& path, const char* name)
    {
        auto v = required(e, path, name);
        if (v == "true") return true;
        if (v == "false") return false;
        throw SchemaViolation(path, std::string("attribute '") + name + "' must be true or false");
    }

    // Children in the core namespace, all with the given local name.
    static std::vector<const xml::Element*> items(const xml::Element& e, const std::string& path, const char* name)
    {
        if (!blank(e.text)) throw SchemaViolation(path, "unexpected text");
        std::vector<const xml::Element*> out;
        for (const auto& c : e.children) {
            if (c.ns != kNamespace) throw SchemaViolation(path + "/" + c.qname, "foreign element outside the will root");
            if (c.local != name) throw SchemaViolation(path + "/" + c.local, "unexpected element");
            out.push_back(&c);
        }
        return out;
    }

    static std::string indexed(const std::string& path, const char* name, std::size_t i)
    {
        return path + "/" + name + "[" + std::to_string(i + 1) + "]";
    }

    static std::string leaf_text(const xml::Element& e, const std::string& path)
    {
        if (!e.children.empty()) throw SchemaViolation(path + "/" + e.children[0].qname, "unexpected element");
        return e.text;
    }

    static const xml::Element& single(const xml::Element& e, const std::string& path, const char* name)
    {
        const xml::Element* hit = nullptr;
        for (const auto& c : e.children) {
            if (c.ns == kNamespace && c.local == name) {
                if (hit) throw SchemaViolation(path + "/" + name, "element repeated");
                hit = &c;
            }
        }
        if (!hit) throw SchemaViolation(path + "/" + name, "missing required element");
        return *hit;
    }

    static void known_children(const xml::Element& e, const std::string& path, std::set<std::string> names)
    {
        if (!blank(e.text)) throw SchemaViolation(path, "unexpected text");
        for (const auto& c : e.children) {
            if (c.ns != kNamespace) throw SchemaViolation(path + "/" + c.qname, "foreign element outside the will root");
            if (!names.count(c.local)) throw SchemaViolation(path + "/" + c.local, "unexpected element");
        }
    }

    std::vector<Heir> heirs(const xml::Element& e, const std::string& path)
    {
        only_attributes(e, path, {});
        std::vector<Heir> out;
        auto list = items(e, path, "heir");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto& h = *list[i];
            const auto hp = indexed(path, "heir", i);
            only_attributes(h, hp, {"id"});
            known_children(h, hp, {"contact", "publicKey", "attributes"});
            Heir heir;
            heir.id = required(h, hp, "id");
            heir.contact = leaf_text(single(h, hp, "contact"), hp + "/contact");
            heir.public_key = leaf_text(single(h, hp, "publicKey"), hp + "/publicKey");
            const auto& attrs = single(h, hp, "attributes");
            auto al = items(attrs, hp + "/attributes", "attribute");
            for (std::size_t k = 0; k < al.size(); ++k) {
                const auto ap = indexed(hp + "/attributes", "attribute", k);
                only_attributes(*al[k], ap, {});
                auto name = leaf_text(*al[k], ap);
                if (!policy::is_valid_attribute(name)) throw SchemaViolation(ap, "invalid attribute name '" + name + "'");
                heir.attributes.insert(std::move(name));
            }
            out.push_back(std::move(heir));
        }
        return out;
    }

    std::vector<PlatformLink> platforms(const xml::Element& e, const std::string& path)
    {
        only_attributes(e, path, {});
        std::vector<PlatformLink> out;
        auto list = items(e, path, "platform");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto& p = *list[i];
            const auto pp = indexed(path, "platform", i);
            only_attributes(p, pp, {"id"});
            known_children(p, pp, {"accessToken", "assets"});
            PlatformLink link;
            link.platform_id = required(p, pp, "id");
            const auto& tok = single(p, pp, "accessToken");
            only_attributes(tok, pp + "/accessToken", {"kind"});
            if (required(tok, pp + "/accessToken", "kind") != "placeholder") {
                throw SchemaViolation(pp + "/accessToken", "only placeholder tokens are accepted");
            }
            link.access_token = leaf_text(tok, pp + "/accessToken");
            const auto& assets = single(p, pp, "assets");
            only_attributes(assets, pp + "/assets", {});
            auto sl = items(assets, pp + "/assets", "selector");
            for (std::size_t k = 0; k < sl.size(); ++k) {
                const auto sp = indexed(pp + "/assets", "selector", k);
                only_attributes(*sl[k], sp, {});
                link.asset_selectors.push_back(leaf_text(*sl[k], sp));
            }
            out.push_back(std::move(link));
        }
        return out;
    }

    std::vector<ContentPolicy> rules(const xml::Element& e, const std::string& path)
    {
        only_attributes(e, path, {});
        std::vector<ContentPolicy> out;
        auto list = items(e, path, "rule");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto rp = indexed(path, "rule", i);
            only_attributes(*list[i], rp, {"selector"});
            ContentPolicy c{required(*list[i], rp, "selector"), leaf_text(*list[i], rp)};
            try {
                policy::parse_policy(c.policy);
            } catch (const policy::SyntaxError& err) {
                throw PolicySyntaxError(rp, err.offset(), err.what());
            } catch (const policy::PolicyError& err) {
                throw PolicySyntaxError(rp, 0, err.what());
            }
            out.push_back(std::move(c));
        }
        return out;
    }

    StoragePrefs storage(const xml::Element& e, const std::string& path)
    {
        only_attributes(e, path, {"threshold"});
        StoragePrefs st;
        st.threshold = number<unsigned>(e, path, "threshold");
        auto list = items(e, path, "location");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto lp = indexed(path, "location", i);
            only_attributes(*list[i], lp, {"id"});
            no_children(*list[i], lp);
            st.location_ids.push_back(required(*list[i], lp, "id"));
        }
        return st;
    }

    std::string_view src_;
};

void open(std::string& out, int depth, const std::string& tag)
{
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += "<" + tag + ">\n";
}

void close(std::string& out, int depth, const std::string& tag)
{
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += "</" + tag + ">\n";
}

void leaf(std::string& out, int depth, const std::string& tag, std::string_view text, const std::string& attrs = "")
{
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += "<" + tag + attrs + ">" + xml::escape_text(text) + "</" + tag + ">\n";
}

std::string attr(const char* name, std::string_view v)
{
    return std::string(" ") + name + "=\"" + xml::escape_attribute(v) + "\"";
}

} // namespace

DigitalWill parse_xml(std::string_view xml)
{
    return Reader(xml).read();
}

std::string serialize_xml(const DigitalWill& will)
{
    validate(will);
    const auto bindings = extension_bindings(will);

    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<will" + attr("xmlns", kNamespace);
    for (const auto& [p, uri] : bindings) out += " xmlns:" + p + "=\"" + xml::escape_attribute(uri) + "\"";
    out += attr("id", will.will_id) + ">\n";
    out += "  <creator" + attr("id", will.creator_id) + "/>\n";

    open(out, 1, "heirs");
    for (const auto& h : will.heirs) {
        open(out, 2, "heir" + attr("id", h.id));
        leaf(out, 3, "contact", h.contact);
        leaf(out, 3, "publicKey", h.public_key);
        open(out, 3, "attributes");
        for (const auto& a : h.attributes) leaf(out, 4, "attribute", a);
        close(out, 3, "attributes");
        close(out, 2, "heir");
    }
    close(out, 1, "heirs");

    open(out, 1, "platforms");
    for (const auto& p : will.platform_links) {
        open(out, 2, "platform" + attr("id", p.platform_id));
        leaf(out, 3, "accessToken", p.access_token, attr("kind", "placeholder"));
        open(out, 3, "assets");
        for (const auto& s : p.asset_selectors) leaf(out, 4, "selector", s);
        close(out, 3, "assets");
        close(out, 2, "platform");
    }
    close(out, 1, "platforms");

    open(out, 1, "contentPolicies");
    for (const auto& c : will.content_policies) leaf(out, 2, "rule", c.policy, attr("selector", c.asset_selector));
    close(out, 1, "contentPolicies");

    out += "  <trigger" + attr("voteThreshold", std::to_string(will.trigger.vote_threshold)) +
           attr("freezeSeconds", std::to_string(will.trigger.freeze_seconds)) +
           attr("authorityOverride", will.trigger.authority_override_allowed ? "true" : "false") + "/>\n";

    open(out, 1, "storage" + attr("threshold", std::to_string(will.storage.threshold)));
    for (const auto& l : will.storage.location_ids) out += "    <location" + attr("id", l) + "/>\n";
    close(out, 1, "storage");

    for (const auto& e : will.extensions) out += "  " + e.xml + "\n";
    out += "</will>\n";
    return out;
}

} // namespace dw::willfile
