#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "dw/common/random.hpp"
#include "dw/willfile/will.hpp"
#include "dw/willfile/xml.hpp"
#include "support/random_policy.hpp"
#include "support/random_will.hpp"

using namespace dw;
using namespace dw::willfile;
using dw::testgen::random_will;

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

DigitalWill minimal()
{
    DigitalWill w;
    w.will_id = "w1";
    w.creator_id = "ada";
    w.heirs.push_back({"bob", "bob@example.org", "00ff", {"Son"}});
    w.platform_links.push_back({"social", "PLACEHOLDER", {"social/*"}});
    w.content_policies.push_back({"social/*", "Son"});
    w.trigger = {1, 60, true};
    w.storage = {{"a", "b"}, 2};
    return w;
}

} // namespace

TEST(Selector, Wildcards)
{
    EXPECT_TRUE(selector_matches("social/*", "social/photos/1.jpg"));
    EXPECT_TRUE(selector_matches("*", ""));
    EXPECT_TRUE(selector_matches("a?c", "abc"));
    EXPECT_FALSE(selector_matches("a?c", "ac"));
    EXPECT_TRUE(selector_matches("*/posts/*", "social/posts/9"));
    EXPECT_FALSE(selector_matches("cloud/*", "social/x"));
    EXPECT_TRUE(selector_matches("a*b*c", "aXXbYYbc"));
}

TEST(WillFile, MinimalRoundTrip)
{
    auto w = minimal();
    auto xml = serialize_xml(w);
    EXPECT_EQ(parse_xml(xml), w);
    EXPECT_EQ(serialize_xml(parse_xml(xml)), xml);
}

TEST(WillFile, SerializationIsDeterministic)
{
    auto w = minimal();
    EXPECT_EQ(serialize_xml(w), serialize_xml(w));
}

TEST(WillFile, RandomizedRoundTrip)
{
    SeededRandom rng(0x5eed);
    for (int i = 0; i < 100; ++i) {
        auto w = random_will(rng);
        auto xml = serialize_xml(w);
        DigitalWill back;
        ASSERT_NO_THROW(back = parse_xml(xml)) << xml;
        ASSERT_EQ(back, w) << xml;
        ASSERT_EQ(serialize_xml(back), xml);
    }
}

TEST(WillFile, GoldenFixtureParses)
{
    auto src = read_file(DW_TEST_DATA "/will_golden.xml");
    auto w = parse_xml(src);
    EXPECT_EQ(w.will_id, "will-0001");
    EXPECT_EQ(w.creator_id, "creator-ada");
    ASSERT_EQ(w.heirs.size(), 2u);
    EXPECT_EQ(w.heirs[0].attributes, (std::set<std::string>{"Family", "Son"}));
    EXPECT_EQ(w.platform_links[0].asset_selectors.size(), 2u);
    EXPECT_EQ(w.content_policies[0].policy, "(Son and Family)");
    EXPECT_EQ(w.trigger.vote_threshold, 2u);
    EXPECT_EQ(w.trigger.freeze_seconds, 3600u);
    EXPECT_EQ(w.storage.location_ids.size(), 3u);
    ASSERT_EQ(w.extensions.size(), 2u);
    EXPECT_EQ(w.extensions[0].namespaces, (std::vector<std::pair<std::string, std::string>>{{"x", "urn:example:provider-a:1"}}));
    EXPECT_TRUE(w.extensions[1].namespaces.empty());

    auto policy = w.policy_for("social/posts/2024-01");
    ASSERT_NE(policy, nullptr);
    EXPECT_EQ(policy->policy, "(Son or Friend)");
    EXPECT_EQ(w.policy_for("mail/inbox"), nullptr);
    EXPECT_NE(w.heir("heir-cy"), nullptr);
}

TEST(WillFile, GoldenCanonicalForm)
{
    auto w = parse_xml(read_file(DW_TEST_DATA "/will_golden.xml"));
    EXPECT_EQ(serialize_xml(w), read_file(DW_TEST_DATA "/will_golden.canonical.xml"));
}

TEST(WillFile, ProviderQuirkPreservedByteIdentical)
{
    const std::string quirk = R"(<x:providerQuirk mode="strict" x:rank="2"><x:note>kept &amp; untouched</x:note></x:providerQuirk>)";
    auto src = read_file(DW_TEST_DATA "/will_golden.xml");
    ASSERT_NE(src.find(quirk), std::string::npos);
    auto w = parse_xml(src);
    EXPECT_EQ(w.extensions[0].xml, quirk);
    auto out = serialize_xml(w);
    EXPECT_NE(out.find(quirk), std::string::npos);
    EXPECT_NE(out.find(R"(<q:audit xmlns:q="urn:example:provider-b:audit">  spaced   </q:audit>)"), std::string::npos);
    EXPECT_EQ(parse_xml(out), w);
}

TEST(WillFile, VoteThresholdZeroIsSchemaViolation)
{
    auto xml = serialize_xml(minimal());
    auto pos = xml.find("voteThreshold=\"1\"");
    xml.replace(pos, 17, "voteThreshold=\"0\"");
    try {
        parse_xml(xml);
        FAIL();
    } catch (const SchemaViolation& e) {
        EXPECT_EQ(e.path(), "/will/trigger");
    }
}

TEST(WillFile, VoteThresholdAboveHeirsIsSchemaViolation)
{
    auto xml = serialize_xml(minimal());
    xml.replace(xml.find("voteThreshold=\"1\""), 17, "voteThreshold=\"2\"");
    EXPECT_THROW(parse_xml(xml), SchemaViolation);
}

TEST(WillFile, EmptyHeirsIsInvariantViolation)
{
    auto w = minimal();
    w.heirs.clear();
    EXPECT_THROW(serialize_xml(w), InvariantViolation);
}

TEST(WillFile, BadPolicyReportsPathAndOffset)
{
    auto w = minimal();
    auto xml = serialize_xml(w);
    xml.replace(xml.find(">Son</rule>"), 11, ">(Son and</rule>");
    try {
        parse_xml(xml);
        FAIL();
    } catch (const PolicySyntaxError& e) {
        EXPECT_EQ(e.path(), "/will/contentPolicies/rule[1]");
        EXPECT_EQ(e.offset(), 8u);
    }
    w.content_policies[0].policy = "Son Daughter";
    EXPECT_THROW(serialize_xml(w), InvariantViolation);
}

TEST(WillFile, SchemaPaths)
{
    auto base = serialize_xml(minimal());
    auto expect_path = [&](std::string from, std::string to, std::string path) {
        auto xml = base;
        auto pos = xml.find(from);
        ASSERT_NE(pos, std::string::npos) << from;
        xml.replace(pos, from.size(), to);
        try {
            parse_xml(xml);
            ADD_FAILURE() << "accepted: " << to;
        } catch (const SchemaViolation& e) {
            EXPECT_EQ(e.path(), path) << e.what();
        }
    };
    expect_path("<contact>", "<contact><b/>", "/will/heirs/heir[1]/contact/b");
    expect_path("<heir id=\"bob\">", "<heir id=\"bob\" age=\"3\">", "/will/heirs/heir[1]");
    expect_path("<attribute>Son</attribute>", "<attribute>So n</attribute>", "/will/heirs/heir[1]/attributes/attribute[1]");
    expect_path("<creator id=\"ada\"/>", "", "/will/creator");
    expect_path("kind=\"placeholder\"", "kind=\"live\"", "/will/platforms/platform[1]/accessToken");
    expect_path("<location id=\"b\"/>", "", "/will");
    expect_path("<heirs>", "<heirs><z:q xmlns:z=\"urn:z\"/>", "/will/heirs/z:q");
    expect_path("<storage", "<bogus/><storage", "/will/bogus");
    expect_path("<storage", "<plain xmlns=\"\"/><storage", "/will/plain");
    expect_path("freezeSeconds=\"60\"", "freezeSeconds=\"-1\"", "/will/trigger");
    expect_path("authorityOverride=\"true\"", "authorityOverride=\"yes\"", "/will/trigger");
    expect_path("<will xmlns", "<testament xmlns", "/");
}

TEST(WillFile, MalformedXml)
{
    EXPECT_THROW(parse_xml("<will xmlns=\"urn:beyondlife:will:1\" id=\"a\">"), SchemaViolation);
    EXPECT_THROW(parse_xml(""), SchemaViolation);
    EXPECT_THROW(parse_xml("<!DOCTYPE will><will/>"), SchemaViolation);
}

TEST(WillFile, ExtensionPrefixConflict)
{
    auto w = minimal();
    w.extensions.push_back({"<x:a/>", {{"x", "urn:one"}}});
    w.extensions.push_back({"<x:b/>", {{"x", "urn:two"}}});
    EXPECT_THROW(serialize_xml(w), InvariantViolation);
}

TEST(WillFile, ExtensionMustBeOneForeignElement)
{
    auto w = minimal();
    w.extensions.push_back({"<a xmlns=\"urn:beyondlife:will:1\"/>", {}});
    EXPECT_THROW(serialize_xml(w), InvariantViolation);
    w.extensions.back() = {"<x:a/><x:b/>", {{"x", "urn:x"}}};
    EXPECT_THROW(serialize_xml(w), InvariantViolation);
    w.extensions.back() = {"<x:a>", {{"x", "urn:x"}}};
    EXPECT_THROW(serialize_xml(w), InvariantViolation);
}

TEST(WillFile, Warnings)
{
    auto w = minimal();
    EXPECT_TRUE(validate(w).empty());
    w.content_policies[0].policy = "(Son and Daughter)";
    auto warn = validate(w);
    ASSERT_EQ(warn.size(), 1u);
    EXPECT_NE(warn[0].find("bob"), std::string::npos);
}

TEST(WillFile, PrefixedRootAccepted)
{
    auto xml = std::string(R"(<w:will xmlns:w="urn:beyondlife:will:1" id="p"><w:creator id="c"/>)") +
               R"(<w:heirs><w:heir id="h"><w:contact/><w:publicKey/><w:attributes><w:attribute>A</w:attribute></w:attributes></w:heir></w:heirs>)" +
               R"(<w:trigger voteThreshold="1" freezeSeconds="0" authorityOverride="false"/>)" +
               R"(<w:storage threshold="2"><w:location id="a"/><w:location id="b"/></w:storage></w:will>)";
    auto w = parse_xml(xml);
    EXPECT_EQ(w.heirs[0].contact, "");
    EXPECT_FALSE(w.trigger.authority_override_allowed);
    EXPECT_EQ(parse_xml(serialize_xml(w)), w);
}
