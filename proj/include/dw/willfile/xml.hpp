#pragma once

// Minimal namespace-aware XML reader. Keeps byte offsets of every element so
// foreign fragments can be carried through untouched. No DTDs, no external
// entities.

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dw/common/bytes.hpp"

namespace dw::xml {

class XmlError : public Error {
public:
    XmlError(std::size_t offset, const std::string& what);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

struct Attribute {
    std::string qname;
    std::string value;
};

struct Element {
    std::string qname;
    std::string prefix;
    std::string local;
    std::string ns; // resolved namespace URI, empty when none
    std::vector<Attribute> attributes;
    std::vector<std::pair<std::string, std::string>> ns_decls; // declared here; "" is the default
    std::vector<Element> children;
    std::string text; // concatenated character data directly inside
    std::size_t begin = 0, end = 0; // byte span of the whole element

    const Attribute* attribute(std::string_view qname) const;
    /// Prefixes used by this element or its descendants that are not declared
    /// within the subtree.
    std::vector<std::string> free_prefixes() const;
};

Element parse(std::string_view doc);

std::string escape_text(std::string_view s);
std::string escape_attribute(std::string_view s);

} // namespace dw::xml
