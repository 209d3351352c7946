#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "affscope/corpus.hpp"
#include "affscope/detect.hpp"
#include "doctest.h"
#include "fixture_server.hpp"

using affscope::testing::FixtureServer;
namespace fs = std::filesystem;

namespace {

const fs::path kData = AFFSCOPE_TEST_DATA_DIR;

struct Run {
    int code = -1;
    std::string out;
};

// Runs the CLI with stdout and stderr captured together.
Run cli(const std::string& args) {
    const auto log = fs::temp_directory_path() / "affscope_cli_output.txt";
    const std::string cmd = std::string("\"") + AFFSCOPE_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::ostringstream s;
    s << in.rdbuf();
    r.out = s.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string q(const fs::path& p) {
    return "\"" + p.string() + "\"";
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("affscope_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Serves every URL in the bundled sample corpus; two are shorteners.
void serve_sample(FixtureServer& server) {
    server.redirect("http://bit.ly/amybrush", "http://rstyle.me/n/amybrush", 301);
    server.redirect("http://rstyle.me/n/amybrush", "https://shop.example.com/brushes", 302);
    server.meta_refresh("https://tinyurl.com/calpad", "https://www.amazon.com/dp/B0C?tag=cal-20");
    for (const auto& item : affscope::corpus::load_corpus(kData / "sample_corpus.jsonl")) {
        for (const auto& u : affscope::corpus::extract_urls(item.description)) {
            if (u.find("bit.ly") == std::string::npos && u.find("tinyurl") == std::string::npos) server.page(u);
        }
    }
    server.page("https://shop.example.com/brushes");
    server.page("https://www.amazon.com/dp/B0C?tag=cal-20");
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("patterns validate: shipped, short and broken files") {
    auto r = cli("patterns validate --patterns " + q(kData / "patterns.jsonl"));
    CHECK(r.code == 0);
    CHECK(r.out.find("57 patterns, 33 companies: ok") != std::string::npos);

    auto dir = scratch("validate");
    const auto text = slurp(kData / "patterns.jsonl");
    std::ofstream(dir / "56.jsonl") << text.substr(0, text.rfind("{\"pattern_id\""));
    r = cli("patterns validate --patterns " + q(dir / "56.jsonl"));
    CHECK(r.code != 0);

    std::string broken = text;
    const auto pos = broken.find("\"pattern_id\": \"clickbank\"");
    REQUIRE(pos != std::string::npos);
    const auto re = broken.find("hop\\\\.clickbank", pos);
    REQUIRE(re != std::string::npos);
    broken.insert(re, "(");
    std::ofstream(dir / "broken.jsonl") << broken;
    r = cli("patterns validate --patterns " + q(dir / "broken.jsonl"));
    CHECK(r.code != 0);
    CHECK(r.out.find("clickbank") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
    CHECK(cli("").code == 1);
    CHECK(cli("frobnicate").code == 1);
    CHECK(cli("detect --input x.jsonl").code == 1);
    CHECK(cli("disclose --input x --output y --linkage ward").code == 1);
    CHECK(cli("--version").code == 0);
    CHECK(cli("--help").code == 0);
}

TEST_CASE("data errors exit 2 and name the problem") {
    auto dir = scratch("data");
    auto r = cli("detect --input " + q(dir / "absent.jsonl") + " --cache " + q(dir / "c.jsonl") + " --output " +
                 q(dir / "v.jsonl"));
    CHECK(r.code == 2);
    CHECK(r.out.find("absent.jsonl") != std::string::npos);

    std::ofstream(dir / "cache.jsonl") << R"({"original_url":"http://a.com/","hops":[{"url":"http://a.com/","status":200,"mechanism":"terminal"}],"final_url":"http://a.com/","outcome":"resolved"})"
                                       << "\n"
                                       << "{broken\n";
    r = cli("mine --cache " + q(dir / "cache.jsonl") + " --output " + q(dir / "sheet.tsv"));
    CHECK(r.code == 2);
    CHECK(r.out.find("cache line 2") != std::string::npos);
}

TEST_CASE("mine: empty cache gives a header-only sheet") {
    auto dir = scratch("mine");
    std::ofstream(dir / "cache.jsonl").close();
    auto r = cli("mine --cache " + q(dir / "cache.jsonl") + " --output " + q(dir / "sheet.tsv"));
    CHECK(r.code == 0);
    CHECK(slurp(dir / "sheet.tsv") == "kind\tdomain\tdetail\tcount\tdisposition\n");
}

TEST_CASE("sample corpus: resolve, detect, mine, disclose, report") {
    FixtureServer server;
    serve_sample(server);
    auto dir = scratch("sample");
    const auto corpus = q(kData / "sample_corpus.jsonl");
    const auto connect = " --connect-to 127.0.0.1:" + std::to_string(server.port());

    auto r = cli("resolve --input " + corpus + " --cache " + q(dir / "cache.jsonl") + " --timeout 5" + connect);
    REQUIRE_MESSAGE(r.code == 0, r.out);
    const auto cache = slurp(dir / "cache.jsonl");
    r = cli("resolve --input " + corpus + " --cache " + q(dir / "cache.jsonl") + connect);
    CHECK(r.code == 0);
    CHECK(r.out.find("fetched 0") != std::string::npos);
    CHECK(slurp(dir / "cache.jsonl") == cache);

    r = cli("detect --input " + corpus + " --cache " + q(dir / "cache.jsonl") + " --output " + q(dir / "v.jsonl"));
    REQUIRE_MESSAGE(r.code == 0, r.out);
    const auto verdicts = affscope::detect::load_verdicts(dir / "v.jsonl");
    REQUIRE(verdicts.size() == 12);
    for (const char* id : {"yt-0001", "yt-0002", "yt-0003", "yt-0006", "yt-0007", "pin-0001", "pin-0002", "pin-0004"}) {
        CHECK_MESSAGE(verdicts.at(id).is_affiliate, id);
    }
    for (const char* id : {"yt-0004", "yt-0005", "yt-0008", "pin-0003"}) CHECK_FALSE_MESSAGE(verdicts.at(id).is_affiliate, id);
    CHECK(verdicts.at("pin-0001").matches.front().company == "ShopStyle");
    CHECK(verdicts.at("yt-0002").matches.front().url == "http://rstyle.me/n/amybrush");

    r = cli("mine --cache " + q(dir / "cache.jsonl") + " --output " + q(dir / "sheet.tsv") + " --min-count 1");
    CHECK(r.code == 0);
    CHECK(slurp(dir / "sheet.tsv").find("param_cooccurrence\tamazon.com\ttag\t") != std::string::npos);

    r = cli("disclose --input " + corpus + " --output " + q(dir / "d.jsonl") + " --affiliate-only --verdicts " +
            q(dir / "v.jsonl"));
    REQUIRE_MESSAGE(r.code == 0, r.out);
    const auto records = slurp(dir / "d.jsonl");
    CHECK(records.find(R"("content_id":"yt-0001")") != std::string::npos);
    CHECK(records.find(R"("dtype":"Explanation")") != std::string::npos);
    CHECK(records.find(R"("dtype":"ChannelSupport")") != std::string::npos);
    // Spanish item is filtered; Pinterest support sentence is not ChannelSupport.
    CHECK(records.find("yt-0007") == std::string::npos);
    CHECK(records.find("pin-0004") == std::string::npos);
    CHECK(fs::exists(dir / "d.digest.jsonl"));

    r = cli("report --input " + corpus + " --verdicts " + q(dir / "v.jsonl") + " --disclosures " +
            q(dir / "d.jsonl") + " --output " + q(dir / "report.jsonl") + " --min-affiliate 1");
    REQUIRE_MESSAGE(r.code == 0, r.out);
    CHECK(r.out.find("Mann-Whitney") != std::string::npos);
    CHECK(fs::exists(dir / "report.txt"));
    const auto report = slurp(dir / "report.jsonl");
    CHECK(report.find(R"("record":"overall")") != std::string::npos);
    CHECK(report.find(R"("record":"rank_test")") != std::string::npos);
}

TEST_CASE("resolve exits 3 when too many URLs fail") {
    FixtureServer server;  // every route is a 404
    auto dir = scratch("failing");
    auto r = cli("resolve --input " + q(kData / "sample_corpus.jsonl") + " --cache " + q(dir / "cache.jsonl") +
                 " --timeout 5 --connect-to 127.0.0.1:" + std::to_string(server.port()));
    CHECK(r.code == 3);
    CHECK(fs::exists(dir / "cache.jsonl"));

    r = cli("resolve --input " + q(kData / "sample_corpus.jsonl") + " --cache " + q(dir / "cache.jsonl") +
            " --max-failure-rate 1 --connect-to 127.0.0.1:" + std::to_string(server.port()));
    CHECK(r.code == 0);
}

}  // TEST_SUITE
