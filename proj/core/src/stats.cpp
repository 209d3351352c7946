#include "affscope/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "affscope/error.hpp"

namespace affscope::stats {

namespace {

const detect::AffiliateVerdict& verdict_for(const VerdictMap& verdicts, const ContentItem& item) {
    auto it = verdicts.find(item.id);
    if (it == verdicts.end()) throw DataError("no verdict for item " + item.id);
    return it->second;
}

struct Tally {
    std::uint64_t n_items = 0;
    std::uint64_t n_affiliate = 0;
    std::uint64_t n_disclosed = 0;
    std::set<std::string> creators;
};

CategoryStats finish(Platform platform, std::string category, const Tally& t) {
    CategoryStats s;
    s.platform = platform;
    s.category = std::move(category);
    s.n_items = t.n_items;
    s.n_affiliate = t.n_affiliate;
    s.n_disclosed = t.n_disclosed;
    s.unique_disclosing_creators = t.creators.size();
    if (s.n_items > 0) s.affiliate_pct = 100.0 * static_cast<double>(s.n_affiliate) / static_cast<double>(s.n_items);
    if (s.n_affiliate > 0) {
        s.disclosed_raw_pct = 100.0 * static_cast<double>(s.n_disclosed) / static_cast<double>(s.n_affiliate);
    }
    if (s.n_disclosed > 0) {
        s.disclosed_scaled_pct = s.disclosed_raw_pct * static_cast<double>(s.unique_disclosing_creators) /
                                 static_cast<double>(s.n_disclosed);
    }
    return s;
}

std::set<std::string> disclosing_ids(std::span<const disclose::DisclosureRecord> disclosures) {
    std::set<std::string> ids;
    for (const auto& r : disclosures) ids.insert(r.content_id);
    return ids;
}

template <typename KeyFn>
std::map<std::pair<Platform, std::string>, Tally> tally(std::span<const ContentItem> items,
                                                       const VerdictMap& verdicts,
                                                       std::span<const disclose::DisclosureRecord> disclosures,
                                                       KeyFn key) {
    const auto disclosed = disclosing_ids(disclosures);
    std::map<std::pair<Platform, std::string>, Tally> out;
    for (const auto& item : items) {
        auto& t = out[{item.platform, key(item)}];
        ++t.n_items;
        if (!verdict_for(verdicts, item).is_affiliate) continue;
        ++t.n_affiliate;
        if (disclosed.contains(item.id)) {
            ++t.n_disclosed;
            t.creators.insert(item.creator_id);
        }
    }
    return out;
}

}  // namespace

std::vector<CategoryStats> prevalence_by_category(std::span<const ContentItem> items, const VerdictMap& verdicts,
                                                  std::span<const disclose::DisclosureRecord> disclosures,
                                                  std::uint64_t min_affiliate) {
    std::vector<CategoryStats> out;
    for (const auto& [key, t] : tally(items, verdicts, disclosures, [](const ContentItem& i) { return i.category; })) {
        auto s = finish(key.first, key.second, t);
        s.excluded = s.n_affiliate < min_affiliate;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<CategoryStats> prevalence_overall(std::span<const ContentItem> items, const VerdictMap& verdicts,
                                              std::span<const disclose::DisclosureRecord> disclosures) {
    std::vector<CategoryStats> out;
    for (const auto& [key, t] : tally(items, verdicts, disclosures, [](const ContentItem&) { return "*"; })) {
        out.push_back(finish(key.first, key.second, t));
    }
    return out;
}

std::vector<TypePrevalence> disclosure_type_prevalence(std::span<const ContentItem> items,
                                                       const VerdictMap& verdicts,
                                                       std::span<const disclose::DisclosureRecord> disclosures) {
    std::map<std::string, std::set<disclose::DisclosureType>> types;
    for (const auto& r : disclosures) types[r.content_id].insert(r.dtype);

    std::map<Platform, std::pair<std::uint64_t, std::map<disclose::DisclosureType, std::uint64_t>>> per;
    for (const auto& item : items) {
        if (!verdict_for(verdicts, item).is_affiliate) continue;
        auto& [n_affiliate, by_type] = per[item.platform];
        ++n_affiliate;
        if (auto it = types.find(item.id); it != types.end()) {
            for (auto t : it->second) ++by_type[t];
        }
    }

    std::vector<TypePrevalence> out;
    for (const auto& [platform, entry] : per) {
        for (auto t : {disclose::DisclosureType::AffiliateLink, disclose::DisclosureType::Explanation,
                       disclose::DisclosureType::ChannelSupport}) {
            TypePrevalence row;
            row.platform = platform;
            row.dtype = t;
            row.n_affiliate = entry.first;
            auto it = entry.second.find(t);
            row.n_items = it == entry.second.end() ? 0 : it->second;
            row.pct = 100.0 * static_cast<double>(row.n_items) / static_cast<double>(row.n_affiliate);
            out.push_back(row);
        }
    }
    return out;
}

std::string_view to_string(TestMethod m) {
    return m == TestMethod::exact ? "exact" : "normal_approx";
}

namespace {

// counts[u] = number of arrangements of m and n ranks whose first group has
// U = u.
std::vector<double> u_distribution(std::size_t m, std::size_t n) {
    std::vector<std::vector<std::vector<double>>> f(m + 1, std::vector<std::vector<double>>(n + 1));
    for (std::size_t i = 0; i <= m; ++i) {
        for (std::size_t j = 0; j <= n; ++j) {
            auto& cur = f[i][j];
            cur.assign(i * j + 1, 0.0);
            if (i == 0 || j == 0) {
                cur[0] = 1.0;
                continue;
            }
            // Largest value belongs to the first group (beats all j of the
            // second) or to the second group.
            for (std::size_t u = 0; u < f[i - 1][j].size(); ++u) cur[u + j] += f[i - 1][j][u];
            for (std::size_t u = 0; u < f[i][j - 1].size(); ++u) cur[u] += f[i][j - 1][u];
        }
    }
    return f[m][n];
}

double normal_sf(double z) {
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace

RankTestResult mann_whitney_u(std::span<const double> a, std::span<const double> b, std::string metric) {
    if (a.empty() || b.empty()) throw UsageError("mann_whitney_u: empty group");
    const std::size_t n1 = a.size();
    const std::size_t n2 = b.size();
    const std::size_t total = n1 + n2;

    std::vector<std::pair<double, bool>> pooled;  // (value, from a)
    pooled.reserve(total);
    for (double v : a) pooled.emplace_back(v, true);
    for (double v : b) pooled.emplace_back(v, false);
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });

    double rank_sum_a = 0.0;
    double tie_term = 0.0;  // sum of t^3 - t over tie groups
    bool ties = false;
    for (std::size_t i = 0; i < total;) {
        std::size_t j = i;
        while (j < total && pooled[j].first == pooled[i].first) ++j;
        const double t = static_cast<double>(j - i);
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (pooled[k].second) rank_sum_a += midrank;
        }
        if (j - i > 1) {
            ties = true;
            tie_term += t * t * t - t;
        }
        i = j;
    }

    RankTestResult r;
    r.metric = std::move(metric);
    r.n1 = n1;
    r.n2 = n2;
    r.u_statistic = rank_sum_a - static_cast<double>(n1) * static_cast<double>(n1 + 1) / 2.0;

    const double n1n2 = static_cast<double>(n1) * static_cast<double>(n2);
    if (n1 <= kExactMaxGroup && n2 <= kExactMaxGroup && !ties) {
        r.method = TestMethod::exact;
        const auto dist = u_distribution(n1, n2);
        const double all = std::accumulate(dist.begin(), dist.end(), 0.0);
        const auto u = static_cast<std::size_t>(std::llround(r.u_statistic));
        const double le = std::accumulate(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(u) + 1, 0.0);
        const double ge = std::accumulate(dist.begin() + static_cast<std::ptrdiff_t>(u), dist.end(), 0.0);
        r.p_value = std::min(1.0, 2.0 * std::min(le, ge) / all);
        return r;
    }

    r.method = TestMethod::normal_approx;
    const double nt = static_cast<double>(total);
    const double mean = n1n2 / 2.0;
    const double variance = n1n2 / 12.0 * ((nt + 1.0) - tie_term / (nt * (nt - 1.0)));
    if (!(variance > 0.0)) {
        r.p_value = 1.0;
        return r;
    }
    const double z = std::max(0.0, std::abs(r.u_statistic - mean) - 0.5) / std::sqrt(variance);
    r.p_value = std::clamp(2.0 * normal_sf(z), 0.0, 1.0);
    return r;
}

std::vector<bool> bonferroni(std::span<const double> p_values, double alpha, std::optional<std::size_t> m) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw UsageError("alpha must be in (0, 1]");
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) throw UsageError("p-value outside [0, 1]");
    }
    const std::size_t family = m.value_or(p_values.size());
    if (family < p_values.size()) throw UsageError("bonferroni: m smaller than the number of p-values");
    std::vector<bool> out;
    out.reserve(p_values.size());
    for (double p : p_values) out.push_back(p < alpha / static_cast<double>(family));
    return out;
}

std::vector<RankTestResult> engagement_comparison(std::span<const ContentItem> items, const VerdictMap& verdicts,
                                                  double alpha) {
    using Field = std::optional<std::int64_t> ContentItem::*;
    struct Metric {
        Platform platform;
        std::string_view name;
        Field field;
    };
    static const std::vector<Metric> metrics{
        {Platform::pinterest, "repin_count", &ContentItem::repin_count},
        {Platform::youtube, "comment_count", &ContentItem::comment_count},
        {Platform::youtube, "dislike_count", &ContentItem::dislike_count},
        {Platform::youtube, "duration_seconds", &ContentItem::duration_seconds},
        {Platform::youtube, "like_count", &ContentItem::like_count},
        {Platform::youtube, "view_count", &ContentItem::view_count},
    };

    std::vector<RankTestResult> out;
    for (const auto& m : metrics) {
        std::vector<double> affiliate;
        std::vector<double> other;
        for (const auto& item : items) {
            if (item.platform != m.platform) continue;
            const bool is_aff = verdict_for(verdicts, item).is_affiliate;
            const auto& v = item.*(m.field);
            if (!v) continue;
            (is_aff ? affiliate : other).push_back(static_cast<double>(*v));
        }
        if (affiliate.empty() || other.empty()) continue;
        out.push_back(mann_whitney_u(affiliate, other, std::string(to_string(m.platform)) + "." + std::string(m.name)));
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.metric < y.metric; });

    std::vector<double> p;
    for (const auto& r : out) p.push_back(r.p_value);
    const auto flags = bonferroni(p, alpha);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].significant = flags[i];
    return out;
}

}  // namespace affscope::stats
