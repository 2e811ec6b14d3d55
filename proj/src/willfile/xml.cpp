#include "dw/willfile/xml.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace dw::xml {

XmlError::XmlError(std::size_t offset, const std::string& what)
    : Error("XML error at offset " + std::to_string(offset) + ": " + what), offset_(offset)
{
}

const Attribute* Element::attribute(std::string_view qname) const
{
    for (const auto& a : attributes) {
        if (a.qname == qname) return &a;
    }
    return nullptr;
}

namespace {

std::string prefix_of(std::string_view qname)
{
    auto colon = qname.find(':');
    return colon == std::string_view::npos ? std::string() : std::string(qname.substr(0, colon));
}

void collect_prefixes(const Element& e, std::set<std::string> declared, std::set<std::string>& used)
{
    for (const auto& [p, uri] : e.ns_decls) declared.insert(p);
    auto note = [&](const std::string& p) {
        if (!p.empty() && p != "xml" && p != "xmlns" && !declared.count(p)) used.insert(p);
    };
    note(e.prefix);
    for (const auto& a : e.attributes) note(prefix_of(a.qname));
    for (const auto& c : e.children) collect_prefixes(c, declared, used);
}

bool is_name_start(char c)
{
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':' ||
           static_cast<unsigned char>(c) >= 0x80;
}

bool is_name_char(char c)
{
    return is_name_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.';
}

void append_utf8(std::string& out, unsigned long cp)
{
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

class Parser {
public:
    explicit Parser(std::string_view doc) : s_(doc) {}

    Element document()
    {
        if (s_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
        misc();
        if (s_.substr(pos_, 5) == "<?xml") {
            auto end = s_.find("?>", pos_);
            if (end == s_.npos) fail("unterminated XML declaration");
            pos_ = end + 2;
        }
        misc();
        if (pos_ >= s_.size() || s_[pos_] != '<') fail("expected root element");
        std::vector<std::map<std::string, std::string>> scope{{{"xml", "http://www.w3.org/XML/1998/namespace"}}};
        Element root = element(scope);
        misc();
        if (pos_ != s_.size()) fail("content after root element");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw XmlError(pos_, what); }

    void ws()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    // Whitespace, comments and processing instructions between markup.
    void misc()
    {
        for (;;) {
            ws();
            if (s_.substr(pos_, 4) == "<!--") {
                comment();
            } else if (s_.substr(pos_, 2) == "<?" && s_.substr(pos_, 5) != "<?xml") {
                auto end = s_.find("?>", pos_);
                if (end == s_.npos) fail("unterminated processing instruction");
                pos_ = end + 2;
            } else if (s_.substr(pos_, 9) == "<!DOCTYPE") {
                fail("DOCTYPE is not supported");
            } else {
                return;
            }
        }
    }

    void comment()
    {
        auto end = s_.find("-->", pos_ + 4);
        if (end == s_.npos) fail("unterminated comment");
        pos_ = end + 3;
    }

    std::string name()
    {
        const std::size_t start = pos_;
        if (pos_ >= s_.size() || !is_name_start(s_[pos_])) fail("expected a name");
        while (pos_ < s_.size() && is_name_char(s_[pos_])) ++pos_;
        return std::string(s_.substr(start, pos_ - start));
    }

    std::string decode(std::string_view raw, std::size_t base)
    {
        std::string out;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] == '<') throw XmlError(base + i, "'<' not allowed here");
            if (raw[i] != '&') {
                out += raw[i];
                continue;
            }
            auto semi = raw.find(';', i);
            if (semi == raw.npos) throw XmlError(base + i, "unterminated entity");
            auto ent = raw.substr(i + 1, semi - i - 1);
            if (ent == "lt") out += '<';
            else if (ent == "gt") out += '>';
            else if (ent == "amp") out += '&';
            else if (ent == "quot") out += '"';
            else if (ent == "apos") out += '\'';
            else if (!ent.empty() && ent[0] == '#') {
                unsigned long cp = 0;
                try {
                    std::size_t used = 0;
                    const bool hex = ent.size() > 1 && ent[1] == 'x';
                    auto digits = std::string(ent.substr(hex ? 2 : 1));
                    cp = std::stoul(digits, &used, hex ? 16 : 10);
                    if (used != digits.size() || digits.empty()) throw std::invalid_argument("junk");
                } catch (const std::exception&) {
                    throw XmlError(base + i, "bad character reference");
                }
                if (cp == 0 || cp > 0x10FFFF) throw XmlError(base + i, "character reference out of range");
                append_utf8(out, cp);
            } else {
                throw XmlError(base + i, "unknown entity '" + std::string(ent) + "'");
            }
            i = semi;
        }
        return out;
    }

    std::string resolve(const std::vector<std::map<std::string, std::string>>& scope, const std::string& prefix,
                        std::size_t at)
    {
        for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
            auto f = it->find(prefix);
            if (f != it->end()) return f->second;
        }
        if (prefix.empty()) return {};
        throw XmlError(at, "undeclared namespace prefix '" + prefix + "'");
    }

    Element element(std::vector<std::map<std::string, std::string>>& scope)
    {
        Element e;
        e.begin = pos_;
        ++pos_; // '<'
        const std::size_t name_at = pos_;
        e.qname = name();
        for (;;) {
            const std::size_t before = pos_;
            ws();
            if (pos_ >= s_.size()) fail("unterminated start tag");
            if (s_[pos_] == '/' || s_[pos_] == '>') break;
            if (before == pos_) fail("expected whitespace before attribute");
            Attribute a;
            a.qname = name();
            ws();
            if (pos_ >= s_.size() || s_[pos_] != '=') fail("expected '='");
            ++pos_;
            ws();
            if (pos_ >= s_.size() || (s_[pos_] != '"' && s_[pos_] != '\'')) fail("expected quoted value");
            const char q = s_[pos_++];
            auto end = s_.find(q, pos_);
            if (end == s_.npos) fail("unterminated attribute value");
            a.value = decode(s_.substr(pos_, end - pos_), pos_);
            pos_ = end + 1;
            if (e.attribute(a.qname)) fail("duplicate attribute '" + a.qname + "'");
            if (a.qname == "xmlns") {
                e.ns_decls.emplace_back("", a.value);
            } else if (a.qname.rfind("xmlns:", 0) == 0) {
                e.ns_decls.emplace_back(a.qname.substr(6), a.value);
            }
            e.attributes.push_back(std::move(a));
        }

        std::map<std::string, std::string> frame;
        for (const auto& [p, uri] : e.ns_decls) frame[p] = uri;
        scope.push_back(std::move(frame));
        e.prefix = prefix_of(e.qname);
        e.local = e.prefix.empty() ? e.qname : e.qname.substr(e.prefix.size() + 1);
        e.ns = resolve(scope, e.prefix, name_at);
        for (const auto& a : e.attributes) {
            auto p = prefix_of(a.qname);
            if (!p.empty() && p != "xmlns") resolve(scope, p, name_at);
        }

        if (s_[pos_] == '/') {
            if (s_.substr(pos_, 2) != "/>") fail("expected '/>'");
            pos_ += 2;
            e.end = pos_;
            scope.pop_back();
            return e;
        }
        ++pos_; // '>'

        for (;;) {
            if (pos_ >= s_.size()) fail("unterminated element <" + e.qname + ">");
            if (s_.substr(pos_, 2) == "</") {
                pos_ += 2;
                const std::size_t close_at = pos_;
                auto closing = name();
                if (closing != e.qname) throw XmlError(close_at, "mismatched closing tag </" + closing + ">");
                ws();
                if (pos_ >= s_.size() || s_[pos_] != '>') fail("expected '>'");
                ++pos_;
                break;
            }
            if (s_.substr(pos_, 4) == "<!--") {
                comment();
            } else if (s_.substr(pos_, 9) == "<![CDATA[") {
                auto end = s_.find("]]>", pos_ + 9);
                if (end == s_.npos) fail("unterminated CDATA section");
                e.text.append(s_.substr(pos_ + 9, end - pos_ - 9));
                pos_ = end + 3;
            } else if (s_.substr(pos_, 2) == "<?") {
                auto end = s_.find("?>", pos_);
                if (end == s_.npos) fail("unterminated processing instruction");
                pos_ = end + 2;
            } else if (s_[pos_] == '<') {
                e.children.push_back(element(scope));
            } else {
                auto end = s_.find('<', pos_);
                if (end == s_.npos) end = s_.size();
                e.text += decode(s_.substr(pos_, end - pos_), pos_);
                pos_ = end;
            }
        }
        e.end = pos_;
        scope.pop_back();
        return e;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

} // namespace

std::vector<std::string> Element::free_prefixes() const
{
    std::set<std::string> used;
    collect_prefixes(*this, {}, used);
    return {used.begin(), used.end()};
}

Element parse(std::string_view doc)
{
    return Parser(doc).document();
}

std::string escape_text(std::string_view s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '\r': out += "&#13;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string escape_attribute(std::string_view s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '"': out += "&quot;"; break;
        case '\n': out += "&#10;"; break;
        case '\t': out += "&#9;"; break;
        case '\r': out += "&#13;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace dw::xml
