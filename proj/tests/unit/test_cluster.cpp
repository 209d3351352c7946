#include <algorithm>
#include <cmath>
#include <random>

#include "affscope/disclose.hpp"
#include "affscope/error.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace affscope;
using namespace affscope::disclose;

namespace {

std::vector<Sentence> sentences_of(const std::vector<std::string>& lines) {
    std::string desc;
    for (const auto& l : lines) desc += l + "\n";
    return segment(desc);
}

// Random short sentences over a small vocabulary so that ties and duplicates
// are common.
std::vector<std::string> random_corpus(std::mt19937_64& rng, std::size_t n) {
    static const std::vector<std::string> words{"affiliate", "link", "links", "support", "channel",
                                                "video", "great", "thanks", "aff", "commission"};
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::string s;
        const auto len = 1 + rng() % 5;
        for (std::size_t k = 0; k < len; ++k) s += words[rng() % words.size()] + " ";
        out.push_back(s);
    }
    return out;
}

}  // namespace

TEST_SUITE("cluster") {

TEST_CASE("three sentences: the affiliate pair merges first and the cut at 1.5 separates it") {
    const auto s = sentences_of({"affiliate link", "affiliate links", "great video"});
    const auto bag = vectorize(s);
    CHECK(euclidean(bag.vectors[0], bag.vectors[1]) == doctest::Approx(std::sqrt(2.0)));
    CHECK(euclidean(bag.vectors[0], bag.vectors[2]) == doctest::Approx(2.0));
    CHECK(euclidean(bag.vectors[1], bag.vectors[2]) == doctest::Approx(2.0));

    const auto tree = hcluster(bag.vectors);
    REQUIRE(tree.merges.size() == 2);
    CHECK(tree.merges[0].left == 0);
    CHECK(tree.merges[0].right == 1);
    CHECK(tree.merges[0].distance == doctest::Approx(std::sqrt(2.0)));
    CHECK(tree.merges[0].size == 2);
    CHECK(tree.merges[1].left == 2);
    CHECK(tree.merges[1].right == 3);
    CHECK(tree.merges[1].distance == doctest::Approx(2.0));
    CHECK(tree.merges[1].size == 3);

    CHECK(cut(tree, 1.5) == std::vector<std::vector<std::size_t>>{{0, 1}, {2}});
    CHECK(cut(tree, 0.0) == std::vector<std::vector<std::size_t>>{{0}, {1}, {2}});
    CHECK(cut(tree, 2.0) == std::vector<std::vector<std::size_t>>{{0, 1, 2}});
}

TEST_CASE("identical sentences merge at distance zero") {
    const auto bag = vectorize(sentences_of({"same words", "same words", "same words", "same words"}));
    const auto tree = hcluster(bag.vectors);
    REQUIRE(tree.merges.size() == 3);
    for (const auto& m : tree.merges) CHECK(m.distance == 0.0);
    // Ties resolve to the smallest node ids.
    CHECK(tree.merges[0].left == 0);
    CHECK(tree.merges[0].right == 1);
    CHECK(tree.merges[1].left == 2);
    CHECK(tree.merges[1].right == 3);
    CHECK(cut(tree, 0.0).size() == 1);
}

TEST_CASE("single vector and empty input") {
    const auto bag = vectorize(sentences_of({"alone"}));
    const auto tree = hcluster(bag.vectors);
    CHECK(tree.merges.empty());
    CHECK(tree.leaves == 1);
    CHECK(cut(tree, 1.5) == std::vector<std::vector<std::size_t>>{{0}});
    CHECK_THROWS_AS(hcluster(std::vector<SentenceVector>{}), UsageError);
    CHECK_THROWS_AS(cut(tree, -1.0), UsageError);
}

TEST_CASE("linkage names") {
    for (auto l : {Linkage::single, Linkage::complete, Linkage::average}) CHECK(parse_linkage(to_string(l)) == l);
    CHECK_FALSE(parse_linkage("ward"));
}

TEST_CASE("merge sequence equals the brute-force oracle for every linkage") {
    for (auto linkage : {Linkage::single, Linkage::complete, Linkage::average}) {
        for (std::uint64_t seed = 0; seed < 150; ++seed) {
            std::mt19937_64 rng(seed);
            const auto n = 1 + rng() % 10;
            const auto s = sentences_of(random_corpus(rng, n));
            const auto bag = vectorize(s);
            const auto got = hcluster(bag.vectors, linkage).merges;
            const auto want = testing::brute_force_hcluster(testing::densify(bag), linkage);
            REQUIRE(got.size() == want.size());
            for (std::size_t k = 0; k < got.size(); ++k) {
                CHECK_MESSAGE(got[k].left == want[k].left, "seed " << seed << " step " << k);
                CHECK_MESSAGE(got[k].right == want[k].right, "seed " << seed << " step " << k);
                CHECK(got[k].size == want[k].size);
                CHECK(std::abs(got[k].distance - want[k].distance) <= 1e-9);
            }
        }
    }
}

TEST_CASE("tree shape: ids, sizes and monotone distances") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed + 1000);
        const auto n = 2 + rng() % 40;
        const auto bag = vectorize(sentences_of(random_corpus(rng, n)));
        const auto tree = hcluster(bag.vectors);
        REQUIRE(tree.merges.size() == bag.vectors.size() - 1);
        std::vector<bool> used(2 * bag.vectors.size(), false);
        for (std::size_t k = 0; k < tree.merges.size(); ++k) {
            const auto& m = tree.merges[k];
            CHECK(m.left < m.right);
            CHECK(m.right < bag.vectors.size() + k);
            CHECK_FALSE(used[m.left]);
            CHECK_FALSE(used[m.right]);
            used[m.left] = used[m.right] = true;
            if (k > 0) CHECK(m.distance >= tree.merges[k - 1].distance - 1e-12);
        }
        CHECK(tree.merges.back().size == bag.vectors.size());
    }
}

TEST_CASE("cut: partitions, fewer clusters as the threshold grows") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        std::mt19937_64 rng(seed + 77);
        const auto n = 2 + rng() % 30;
        const auto bag = vectorize(sentences_of(random_corpus(rng, n)));
        const auto tree = hcluster(bag.vectors);
        std::size_t previous = bag.vectors.size() + 1;
        for (double t = 0.0; t <= 6.0; t += 0.25) {
            const auto clusters = cut(tree, t);
            CHECK(clusters.size() <= previous);
            previous = clusters.size();
            std::vector<std::size_t> all;
            for (const auto& c : clusters) {
                CHECK(std::is_sorted(c.begin(), c.end()));
                all.insert(all.end(), c.begin(), c.end());
            }
            std::sort(all.begin(), all.end());
            for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
            for (std::size_t i = 1; i < clusters.size(); ++i) CHECK(clusters[i - 1][0] < clusters[i][0]);
        }
        CHECK(cut(tree, tree.merges.back().distance).size() == 1);
    }
}

}  // TEST_SUITE
