#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "affscope/detect.hpp"
#include "affscope/error.hpp"
#include "affscope/resolve.hpp"
#include "doctest.h"
#include "fixture_server.hpp"

using namespace affscope;
using namespace affscope::detect;
using affscope::testing::FixtureServer;
namespace fs = std::filesystem;

namespace {

const fs::path kPatterns = fs::path(AFFSCOPE_TEST_DATA_DIR) / "patterns.jsonl";

const PatternDb& shipped() {
    static const PatternDb db = load_pattern_db(kPatterns);
    return db;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> pattern_lines() {
    std::vector<std::string> out;
    std::istringstream in(read_file(kPatterns));
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line[0] == '{') out.push_back(line);
    }
    return out;
}

std::string join(const std::vector<std::string>& lines) {
    std::string s;
    for (const auto& l : lines) s += l + "\n";
    return s;
}

std::vector<std::string> companies_of(const std::vector<PatternMatch>& ms) {
    std::vector<std::string> out;
    for (const auto& m : ms) out.push_back(m.company);
    return out;
}

// Resolved chain through the given URLs.
resolve::RedirectChain chain_of(const std::vector<std::string>& urls) {
    resolve::RedirectChain c;
    c.original_url = urls.front();
    for (std::size_t i = 0; i < urls.size(); ++i) {
        const bool last = i + 1 == urls.size();
        c.hops.push_back({urls[i], last ? 200 : 301,
                          last ? resolve::Mechanism::terminal : resolve::Mechanism::http_redirect});
    }
    c.final_url = urls.back();
    c.outcome = resolve::Outcome::resolved;
    return c;
}

ContentItem item_with(std::string id, std::string description, Platform platform = Platform::youtube) {
    ContentItem it;
    it.id = std::move(id);
    it.platform = platform;
    it.description = std::move(description);
    it.category = "c";
    it.creator_id = "u";
    return it;
}

// Union of match_url over the hops, written out longhand.
std::vector<UrlMatch> per_hop(const resolve::RedirectChain& chain, const PatternDb& db) {
    std::vector<UrlMatch> out;
    for (const auto& hop : chain.hops) {
        for (const auto& m : match_url(hop.url, db)) {
            UrlMatch um{hop.url, m.pattern_id, m.company};
            if (std::find(out.begin(), out.end(), um) == out.end()) out.push_back(um);
        }
    }
    return out;
}

}  // namespace

TEST_SUITE("detect") {

TEST_CASE("shipped database: 57 patterns, 33 companies") {
    const auto& db = shipped();
    CHECK(db.size() == 57);
    CHECK(db.companies().size() == 33);
    CHECK_NOTHROW(check_shipped_counts(db));
    CHECK_FALSE(db.version().empty());
    for (const auto& p : db.patterns()) {
        const bool constrained = p.path_rule().kind != PathRuleKind::any || !p.required_params().empty() ||
                                 p.host_rule().kind != HostRuleKind::suffix;
        CHECK_MESSAGE(constrained, p.pattern_id());
    }
}

TEST_CASE("duplicate ids, empty files and broken regexes are rejected") {
    auto lines = pattern_lines();
    REQUIRE(lines.size() == 57);

    auto dup = lines;
    dup.push_back(lines[3]);
    CHECK_THROWS_WITH_AS(parse_pattern_db(join(dup)), doctest::Contains("duplicate pattern_id"), DataError);

    CHECK_THROWS_AS(parse_pattern_db(""), DataError);
    CHECK_THROWS_AS(parse_pattern_db("# version: 1\n"), DataError);

    auto short_db = lines;
    short_db.pop_back();
    const auto db56 = parse_pattern_db(join(short_db));
    CHECK_THROWS_AS(check_shipped_counts(db56), DataError);

    const std::string broken =
        R"({"pattern_id": "zz-broken", "company": "Z", "host_rule": {"kind": "regex", "value": "(a"}, )"
        R"("path_rule": {"kind": "any"}, "required_params": [], "source_note": ""})";
    CHECK_THROWS_WITH_AS(parse_pattern_db(broken + "\n"), doctest::Contains("zz-broken"), DataError);

    const std::string bare_suffix =
        R"({"pattern_id": "zz-suffix", "company": "Z", "host_rule": {"kind": "suffix", "value": "z.com"}, )"
        R"("path_rule": {"kind": "any"}, "required_params": [], "source_note": ""})";
    CHECK_THROWS_WITH_AS(parse_pattern_db(bare_suffix + "\n"), doctest::Contains("zz-suffix"), DataError);
}

TEST_CASE("match_url on published URL shapes") {
    const auto& db = shipped();
    CHECK(companies_of(match_url("https://www.amazon.com/dp/B01?tag=chan-20", db)) ==
          std::vector<std::string>{"Amazon"});
    CHECK(match_url("https://www.amazon.com/dp/B01?ref=x", db).empty());
    CHECK(companies_of(match_url("http://www.anrdoezrs.net/click-1234-5678", db)) ==
          std::vector<std::string>{"CJ Affiliate"});
    CHECK(match_url("http://www.anrdoezrs.net/click-x-5678", db).empty());
    CHECK(companies_of(match_url("http://rstyle.me/n/abc", db)) == std::vector<std::string>{"RewardStyle"});
    CHECK(companies_of(match_url("http://xyz9.hop.clickbank.net/", db)) == std::vector<std::string>{"Clickbank"});
    CHECK(match_url("http://hop.clickbank.net/", db).empty());

    for (const char* tld : {"com", "de", "fr", "in", "it"}) {
        CHECK(match_url(std::string("http://amazon.") + tld + "/x?tag=a", db).size() == 1);
    }
    CHECK(match_url("http://amazon.co.uk/x?tag=a", db).empty());

    // Hosts compare case-insensitively, parameter names do not.
    CHECK(match_url("HTTPS://WWW.Amazon.COM/dp/B01?tag=x", db).size() == 1);
    CHECK(match_url("https://www.amazon.com/dp/B01?TAG=x", db).empty());

    CHECK(match_url("not a url", db).empty());
    CHECK(match_url("", db).empty());
}

TEST_CASE("match_url does not depend on pattern file order") {
    auto lines = pattern_lines();
    std::mt19937_64 rng(7);
    const std::vector<std::string> urls{
        "https://www.amazon.com/dp/B01?tag=chan-20", "http://rstyle.me/n/abc", "http://shopstyle.it/l/abc",
        "https://s.aliexpress.com/e?af=123",         "http://www.anrdoezrs.net/click-1-2",
    };
    std::vector<std::vector<PatternMatch>> base;
    for (const auto& u : urls) base.push_back(match_url(u, shipped()));
    for (int round = 0; round < 5; ++round) {
        std::shuffle(lines.begin(), lines.end(), rng);
        const auto db = parse_pattern_db(join(lines));
        for (std::size_t i = 0; i < urls.size(); ++i) CHECK(match_url(urls[i], db) == base[i]);
    }
}

TEST_CASE("monotonicity: more patterns never lose a match, fewer params never gain one") {
    const auto lines = pattern_lines();
    std::vector<std::string> urls;
    for (const auto& p : shipped().patterns()) {
        urls.push_back(synthesize_positive(p));
        urls.push_back(synthesize_negative(p));
    }
    std::mt19937_64 rng(11);
    for (int round = 0; round < 10; ++round) {
        auto subset = lines;
        std::shuffle(subset.begin(), subset.end(), rng);
        subset.resize(20 + round * 3);
        const auto small = parse_pattern_db(join(subset));
        for (const auto& u : urls) {
            for (const auto& m : match_url(u, small)) {
                const auto big = match_url(u, shipped());
                CHECK(std::find(big.begin(), big.end(), m) != big.end());
            }
        }
    }

    // Dropping each query parameter in turn.
    for (const auto& u : urls) {
        const auto q = u.find('?');
        if (q == std::string::npos) continue;
        const auto full = match_url(u, shipped());
        std::vector<std::string> parts;
        std::istringstream in(u.substr(q + 1));
        for (std::string part; std::getline(in, part, '&');) parts.push_back(part);
        for (std::size_t drop = 0; drop < parts.size(); ++drop) {
            std::string reduced = u.substr(0, q);
            char sep = '?';
            for (std::size_t i = 0; i < parts.size(); ++i) {
                if (i == drop) continue;
                reduced += sep + parts[i];
                sep = '&';
            }
            for (const auto& m : match_url(reduced, shipped())) {
                CHECK_MESSAGE(std::find(full.begin(), full.end(), m) != full.end(), reduced);
            }
        }
    }
}

TEST_CASE("synthetic suite: every shipped pattern has a positive and a negative") {
    const auto results = run_synthetic_suite(shipped());
    REQUIRE(results.size() == 57);
    for (const auto& r : results) {
        CHECK_MESSAGE(r.positive_ok, r.pattern_id << " " << r.positive_url);
        CHECK_MESSAGE(r.negative_ok, r.pattern_id << " " << r.negative_url);
        CHECK(r.positive_url != r.negative_url);
    }
}

TEST_CASE("regex witnesses match their regex") {
    for (const char* re : {"/click-[0-9]+-[0-9]+", "(www\\.)?amazon\\.(com|de|fr|in|it)", "/g/[a-z]{2,4}x?",
                           "([a-z0-9-]+\\.)+hop\\.clickbank\\.net", "/(t|r)/.*"}) {
        const auto w = regex_witness(re);
        CHECK_MESSAGE(std::regex_match(w, std::regex(re)), re << " -> " << w);
    }
}

TEST_CASE("match_chain finds intermediate hops and equals the per-hop union") {
    const auto& db = shipped();
    const auto mid = chain_of({"http://bit.ly/x", "http://rstyle.me/abc", "http://merchant.com/p"});
    const auto ms = match_chain(mid, db);
    REQUIRE(ms.size() == 1);
    CHECK(ms[0] == UrlMatch{"http://rstyle.me/abc", "rewardstyle", "RewardStyle"});

    CHECK(match_chain(chain_of({"http://a.com/", "http://b.com/"}), db).empty());

    const auto both = chain_of({"https://www.amazon.com/dp/1?tag=a-20", "http://bit.ly/y",
                                "https://www.amazon.de/dp/1?tag=a-21"});
    const auto bm = match_chain(both, db);
    REQUIRE(bm.size() == 2);
    CHECK(bm[0].url == both.hops[0].url);
    CHECK(bm[1].url == both.hops[2].url);

    // Random chains over a pool of matching and non-matching URLs.
    std::vector<std::string> pool{"http://bit.ly/a", "http://example.org/", "http://tinyurl.com/q"};
    for (const auto& p : db.patterns()) {
        pool.push_back(synthesize_positive(p));
        pool.push_back(synthesize_negative(p));
    }
    std::mt19937_64 rng(3);
    for (int round = 0; round < 200; ++round) {
        std::vector<std::string> urls;
        const auto len = 1 + rng() % 6;
        for (std::size_t i = 0; i < len; ++i) urls.push_back(pool[rng() % pool.size()]);
        const auto chain = chain_of(urls);
        CHECK(match_chain(chain, db) == per_hop(chain, db));
    }
}

TEST_CASE("detect_affiliate") {
    const auto& db = shipped();
    std::map<std::string, resolve::RedirectChain> chains;
    chains["http://shopstyle.it/l/abc"] = chain_of({"http://shopstyle.it/l/abc", "http://shop.com/p"});
    chains["https://example.org"] = chain_of({"https://example.org"});

    auto v = detect_affiliate(item_with("pin1", "Love it http://shopstyle.it/l/abc", Platform::pinterest), chains, db);
    CHECK(v.is_affiliate);
    REQUIRE(v.matches.size() == 1);
    CHECK(v.matches[0].company == "ShopStyle");

    v = detect_affiliate(item_with("v1", "see https://example.org"), chains, db);
    CHECK_FALSE(v.is_affiliate);
    CHECK(v.matches.empty());

    v = detect_affiliate(item_with("v2", "no links here"), chains, db);
    CHECK_FALSE(v.is_affiliate);

    CHECK_THROWS_WITH_AS(detect_affiliate(item_with("v3", "http://unknown.com/x"), chains, db),
                         doctest::Contains("http://unknown.com/x"), DataError);
}

TEST_CASE("a timed-out affiliate URL still matches on the original URL") {
    FixtureServer server;
    const std::string u = "https://s.aliexpress.com/e?af=123";
    server.hang(u, std::chrono::milliseconds(3000));
    resolve::ResolvePolicy policy;
    policy.timeout_seconds = 1;
    std::map<std::string, resolve::RedirectChain> chains;
    chains[u] = resolve::resolve(u, policy, server.fetcher());
    REQUIRE(chains[u].outcome == resolve::Outcome::timeout);

    const auto v = detect_affiliate(item_with("v", "deal " + u), chains, shipped());
    CHECK(v.is_affiliate);
    REQUIRE(v.matches.size() == 1);
    CHECK(v.matches[0] == UrlMatch{u, "aliexpress", "AliExpress"});
}

TEST_CASE("failed chains are matched on the original URL only") {
    resolve::RedirectChain c;
    c.original_url = "http://bit.ly/z";
    c.hops = {{"http://bit.ly/z", 301, resolve::Mechanism::http_redirect}, {"http://rstyle.me/q", 404,
                                                                           resolve::Mechanism::terminal}};
    c.outcome = resolve::Outcome::http_error;
    std::map<std::string, resolve::RedirectChain> chains{{c.original_url, c}};
    CHECK_FALSE(detect_affiliate(item_with("x", "http://bit.ly/z"), chains, shipped()).is_affiliate);

    // Loops are not failures; their hops count.
    c.outcome = resolve::Outcome::loop_detected;
    c.hops = {{"http://bit.ly/z", 301, resolve::Mechanism::http_redirect},
              {"http://rstyle.me/q", 301, resolve::Mechanism::http_redirect},
              {"http://bit.ly/z", 301, resolve::Mechanism::http_redirect}};
    chains[c.original_url] = c;
    CHECK(detect_affiliate(item_with("x", "http://bit.ly/z"), chains, shipped()).is_affiliate);
}

TEST_CASE("verdict lines round trip; inconsistent lines are rejected") {
    AffiliateVerdict v{"id1", true, {{"http://rstyle.me/a", "rewardstyle", "RewardStyle"}}};
    CHECK(parse_verdict(format_verdict(v)) == v);
    AffiliateVerdict none{"id2", false, {}};
    CHECK(parse_verdict(format_verdict(none)) == none);

    CHECK_THROWS_WITH_AS(parse_verdict(R"({"content_id":"a","is_affiliate":true,"matches":[]})", 4),
                         doctest::Contains("verdict line 4"), DataError);
    CHECK_THROWS_AS(parse_verdict("{", 1), DataError);

    const auto path = fs::temp_directory_path() / "affscope_detect_verdicts.jsonl";
    write_verdicts(path, {v, none});
    const auto loaded = load_verdicts(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded.at("id1") == v);
    CHECK(loaded.at("id2") == none);
}

}  // TEST_SUITE
