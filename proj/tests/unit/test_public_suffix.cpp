#include "affscope/public_suffix.hpp"
#include "doctest.h"

using affscope::psl::SuffixList;

TEST_SUITE("psl") {

TEST_CASE("bundled snapshot is loaded") {
    CHECK(SuffixList::bundled().rule_count() > 8000);
}

TEST_CASE("registrable domains under ICANN and private rules") {
    const auto& psl = SuffixList::bundled();
    CHECK(psl.registrable_domain("xyz9.hop.clickbank.net") == "clickbank.net");
    CHECK(psl.subdomain("xyz9.hop.clickbank.net") == "xyz9.hop");
    CHECK(psl.registrable_domain("www.amazon.co.uk") == "amazon.co.uk");
    CHECK(psl.public_suffix("www.amazon.co.uk") == "co.uk");
    CHECK(psl.registrable_domain("foo.github.io") == "foo.github.io");
    CHECK(psl.subdomain("rstyle.me").empty());
    CHECK_FALSE(psl.registrable_domain("co.uk"));
    CHECK_FALSE(psl.registrable_domain("com"));
}

TEST_CASE("wildcard and exception rules") {
    auto psl = SuffixList::parse("// comment\nck\n*.ck\n!www.ck\ncom\n");
    CHECK(psl.public_suffix("a.b.ck") == "b.ck");
    CHECK(psl.registrable_domain("a.b.ck") == "a.b.ck");
    CHECK(psl.registrable_domain("www.ck") == "www.ck");
    CHECK(psl.registrable_domain("x.www.ck") == "www.ck");
    CHECK(psl.public_suffix("example.unknowntld") == "unknowntld");
    CHECK(psl.registrable_domain("example.unknowntld") == "example.unknowntld");
}

TEST_CASE("case and trailing dot are ignored") {
    const auto& psl = SuffixList::bundled();
    CHECK(psl.registrable_domain("WWW.Example.COM.") == "example.com");
}

TEST_CASE("IP literals pass through") {
    const auto& psl = SuffixList::bundled();
    CHECK(affscope::psl::is_ip_literal("192.168.0.1"));
    CHECK(affscope::psl::is_ip_literal("[::1]"));
    CHECK_FALSE(affscope::psl::is_ip_literal("1.example.com"));
    CHECK(psl.registrable_domain("10.0.0.1") == "10.0.0.1");
    CHECK(psl.subdomain("10.0.0.1").empty());
}

}
