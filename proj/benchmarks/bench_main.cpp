#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "affscope/detect.hpp"
#include "affscope/disclose.hpp"
#include "affscope/stats.hpp"

using namespace affscope;

namespace {

const detect::PatternDb& db() {
    static const auto d = detect::load_pattern_db(std::string(AFFSCOPE_BENCH_DATA_DIR) + "/patterns.jsonl");
    return d;
}

std::vector<std::string> url_mix() {
    std::vector<std::string> urls;
    for (const auto& p : db().patterns()) {
        urls.push_back(detect::synthesize_positive(p));
        urls.push_back(detect::synthesize_negative(p));
    }
    urls.push_back("https://www.example.org/blog/post?utm_source=x");
    urls.push_back("http://bit.ly/abc");
    return urls;
}

void BM_MatchUrl(benchmark::State& state) {
    const auto urls = url_mix();
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(detect::match_url(urls[i++ % urls.size()], db()));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MatchUrl);

std::vector<disclose::Sentence> sentences(std::size_t n) {
    static const std::vector<std::string> words{"affiliate", "links", "link", "support", "channel", "video",
                                                "commission", "thanks", "watching", "subscribe", "shop", "amazon"};
    std::mt19937_64 rng(1);
    std::string desc;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0, len = 3 + rng() % 8; k < len; ++k) desc += words[rng() % words.size()] + " ";
        desc += "\n";
    }
    return disclose::segment(desc);
}

void BM_Hcluster(benchmark::State& state) {
    const auto s = sentences(static_cast<std::size_t>(state.range(0)));
    const auto bag = disclose::vectorize(s);
    for (auto _ : state) benchmark::DoNotOptimize(disclose::hcluster(bag.vectors));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Hcluster)->RangeMultiplier(2)->Range(64, 1024)->Unit(benchmark::kMillisecond)->Complexity();

void BM_MannWhitney(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<double> a(n), b(4 * n);
    for (auto& v : a) v = static_cast<double>(rng() % 100000);
    for (auto& v : b) v = static_cast<double>(rng() % 100000);
    for (auto _ : state) benchmark::DoNotOptimize(stats::mann_whitney_u(a, b));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(5 * n));
}
BENCHMARK(BM_MannWhitney)->Arg(8)->Arg(1000)->Arg(100000);

void BM_Classify(benchmark::State& state) {
    const auto s = sentences(512);
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(disclose::classify_disclosure(s[i++ % s.size()]));
}
BENCHMARK(BM_Classify);

}  // namespace

BENCHMARK_MAIN();
