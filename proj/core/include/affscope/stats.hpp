#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affscope/corpus.hpp"
#include "affscope/detect.hpp"
#include "affscope/disclose.hpp"

namespace affscope::stats {

struct CategoryStats {
    Platform platform = Platform::youtube;
    std::string category;
    std::uint64_t n_items = 0;
    std::uint64_t n_affiliate = 0;
    std::uint64_t n_disclosed = 0;  // affiliate items with at least one disclosure record
    std::uint64_t unique_disclosing_creators = 0;
    double affiliate_pct = 0.0;
    double disclosed_raw_pct = 0.0;
    double disclosed_scaled_pct = 0.0;
    bool excluded = false;  // n_affiliate < min_affiliate
};

inline constexpr std::uint64_t kDefaultMinAffiliate = 100;

using VerdictMap = std::map<std::string, detect::AffiliateVerdict>;

// One row per (platform, category), ordered by platform then category.
// Throws DataError when an item has no verdict.
std::vector<CategoryStats> prevalence_by_category(std::span<const ContentItem> items, const VerdictMap& verdicts,
                                                  std::span<const disclose::DisclosureRecord> disclosures,
                                                  std::uint64_t min_affiliate = kDefaultMinAffiliate);

// Same figures with every category of a platform pooled; category is "*".
std::vector<CategoryStats> prevalence_overall(std::span<const ContentItem> items, const VerdictMap& verdicts,
                                              std::span<const disclose::DisclosureRecord> disclosures);

struct TypePrevalence {
    Platform platform = Platform::youtube;
    disclose::DisclosureType dtype = disclose::DisclosureType::AffiliateLink;
    std::uint64_t n_items = 0;      // affiliate items carrying this type
    std::uint64_t n_affiliate = 0;
    double pct = 0.0;               // share of all affiliate items
};

// Per platform with affiliate items, all three types in enum order.
std::vector<TypePrevalence> disclosure_type_prevalence(std::span<const ContentItem> items,
                                                       const VerdictMap& verdicts,
                                                       std::span<const disclose::DisclosureRecord> disclosures);

enum class TestMethod { exact, normal_approx };
std::string_view to_string(TestMethod m);

struct RankTestResult {
    std::string metric;
    double u_statistic = 0.0;  // for the first group
    double p_value = 1.0;      // two-sided
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    TestMethod method = TestMethod::normal_approx;
    bool significant = false;
};

inline constexpr std::size_t kExactMaxGroup = 8;

// Exact when both groups have at most kExactMaxGroup values and there are no
// ties: p = min(1, 2 min(P(U <= u), P(U >= u))). Otherwise the normal
// approximation with tie-corrected variance and continuity correction.
// Throws UsageError on an empty group.
RankTestResult mann_whitney_u(std::span<const double> a, std::span<const double> b, std::string metric = {});

// significant[i] iff p[i] < alpha / m; m defaults to p.size().
std::vector<bool> bonferroni(std::span<const double> p_values, double alpha = 0.01,
                             std::optional<std::size_t> m = std::nullopt);

inline constexpr double kDefaultAlpha = 0.01;

// Affiliate vs non-affiliate items per platform metric ("youtube.view_count",
// ...), sorted by metric name. Rows need values in both groups. Bonferroni is
// applied across all rows.
std::vector<RankTestResult> engagement_comparison(std::span<const ContentItem> items, const VerdictMap& verdicts,
                                                  double alpha = kDefaultAlpha);

}  // namespace affscope::stats
