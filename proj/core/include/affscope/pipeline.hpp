#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "affscope/disclose.hpp"
#include "affscope/resolve.hpp"
#include "affscope/stats.hpp"

// File-to-file pipeline stages. Each stage reads its inputs, writes its
// outputs and returns a summary; errors surface as DataError / UsageError.
namespace affscope::pipeline {

struct RunConfig {
    std::filesystem::path input;        // corpus
    std::filesystem::path patterns;     // empty: default_patterns_path()
    std::filesystem::path cache;
    std::filesystem::path output;
    std::filesystem::path verdicts;     // detect output, read by disclose/report
    std::filesystem::path disclosures;  // disclose output, read by report
    std::filesystem::path digest;       // empty: derived from output

    std::uint64_t min_count = 15;
    double cluster_threshold = disclose::kDefaultCutThreshold;
    disclose::Linkage linkage = disclose::Linkage::average;
    std::size_t max_cluster_sentences = 2000;
    resolve::ResolvePolicy policy;
    double alpha = stats::kDefaultAlpha;
    std::uint64_t seed = 0;
    bool affiliate_only = false;
    double max_failure_rate = 0.10;
    std::uint64_t min_affiliate = stats::kDefaultMinAffiliate;

    // Throws UsageError on out-of-range values.
    void validate() const;
};

// $AFFSCOPE_DATA_DIR, then the installed data directory, then the source tree.
std::filesystem::path default_data_dir();
std::filesystem::path default_patterns_path();

struct ResolveSummary {
    std::size_t urls = 0;      // distinct URLs in the corpus
    std::size_t reused = 0;    // already in the cache
    std::size_t resolved = 0;  // fetched this run
    std::size_t failed = 0;    // corpus URLs whose chain is a failure
    double failure_rate() const { return urls == 0 ? 0.0 : static_cast<double>(failed) / static_cast<double>(urls); }
};

// Reads input (+ cache if present), writes cache.
ResolveSummary run_resolve(const RunConfig& cfg, const resolve::Fetcher& fetcher);

struct DetectSummary {
    std::size_t items = 0;
    std::size_t affiliate = 0;
};

// Reads input, cache and patterns; writes output as verdicts.
DetectSummary run_detect(const RunConfig& cfg);

struct MineSummary {
    std::size_t chains = 0;  // non-failed chains counted
    std::size_t candidates = 0;
};

// Reads cache; writes output as a review sheet.
MineSummary run_mine(const RunConfig& cfg);

struct DiscloseSummary {
    std::size_t items = 0;       // items considered
    std::size_t records = 0;
    std::size_t clustered = 0;   // distinct sentences clustered
    std::size_t clusters = 0;
    std::filesystem::path digest_path;
};

// Reads input (and verdicts with affiliate_only); writes output as disclosure
// records and a cluster digest.
DiscloseSummary run_disclose(const RunConfig& cfg);

struct Report {
    std::vector<stats::CategoryStats> overall;
    std::vector<stats::CategoryStats> categories;
    std::vector<stats::TypePrevalence> types;
    std::vector<stats::RankTestResult> tests;
};

Report build_report(std::span<const ContentItem> items, const stats::VerdictMap& verdicts,
                    std::span<const disclose::DisclosureRecord> disclosures, const RunConfig& cfg);
std::string report_jsonl(const Report& r, double alpha);
std::string report_table(const Report& r, double alpha);

// Reads input, verdicts and disclosures; writes output (JSON lines) and the
// same path with a .txt extension (table).
Report run_report(const RunConfig& cfg);

struct ValidateResult {
    std::size_t patterns = 0;
    std::size_t companies = 0;
    std::vector<std::string> problems;  // empty iff valid
    bool ok() const { return problems.empty(); }
};

// Loads, checks the shipped counts and runs the synthetic URL suite. Load
// failures are reported as problems rather than thrown.
ValidateResult run_patterns_validate(const RunConfig& cfg);

}  // namespace affscope::pipeline
