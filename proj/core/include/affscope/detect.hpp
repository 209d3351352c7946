#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "affscope/corpus.hpp"
#include "affscope/resolve.hpp"
#include "affscope/url.hpp"

namespace affscope::detect {

enum class HostRuleKind { exact, suffix, regex };
enum class PathRuleKind { any, prefix, regex };

std::string_view to_string(HostRuleKind k);
std::string_view to_string(PathRuleKind k);

struct HostRule {
    HostRuleKind kind = HostRuleKind::exact;
    std::string value;  // regex values must match the whole host
};

struct PathRule {
    PathRuleKind kind = PathRuleKind::any;
    std::optional<std::string> value;  // regex values must match a prefix of the path
};

// One affiliate URL grammar. Construct through AffiliatePattern::make so the
// rules are validated and compiled.
class AffiliatePattern {
public:
    static AffiliatePattern make(std::string pattern_id, std::string company, HostRule host,
                                 PathRule path, std::set<std::string> required_params,
                                 std::string source_note = {});

    const std::string& pattern_id() const { return pattern_id_; }
    const std::string& company() const { return company_; }
    const HostRule& host_rule() const { return host_; }
    const PathRule& path_rule() const { return path_; }
    const std::set<std::string>& required_params() const { return required_params_; }
    const std::string& source_note() const { return source_note_; }

    bool matches(const url::Url& u) const;

private:
    AffiliatePattern() = default;

    std::string pattern_id_;
    std::string company_;
    HostRule host_;
    PathRule path_;
    std::set<std::string> required_params_;
    std::string source_note_;
    std::shared_ptr<const std::regex> host_regex_;
    std::shared_ptr<const std::regex> path_regex_;
};

class PatternDb {
public:
    PatternDb() = default;
    // Throws DataError on duplicate ids or an empty pattern list.
    PatternDb(std::vector<AffiliatePattern> patterns, std::string version);

    const std::vector<AffiliatePattern>& patterns() const { return patterns_; }
    const std::string& version() const { return version_; }
    std::size_t size() const { return patterns_.size(); }
    std::set<std::string> companies() const;
    const AffiliatePattern* find(std::string_view pattern_id) const;

private:
    std::vector<AffiliatePattern> patterns_;  // sorted by pattern_id
    std::string version_;
};

inline constexpr std::size_t kShippedPatternCount = 57;
inline constexpr std::size_t kShippedCompanyCount = 33;

// Pattern file: one JSON record per line; '#' lines are comments, and
// "# version: X" sets the database version.
PatternDb parse_pattern_db(std::string_view text);
PatternDb load_pattern_db(const std::filesystem::path& path);
// Throws DataError unless the db has the shipped pattern/company counts.
void check_shipped_counts(const PatternDb& db);

struct PatternMatch {
    std::string pattern_id;
    std::string company;

    bool operator==(const PatternMatch&) const = default;
};

struct UrlMatch {
    std::string url;
    std::string pattern_id;
    std::string company;

    bool operator==(const UrlMatch&) const = default;
    auto operator<=>(const UrlMatch&) const = default;
};

struct AffiliateVerdict {
    std::string content_id;
    bool is_affiliate = false;
    std::vector<UrlMatch> matches;

    bool operator==(const AffiliateVerdict&) const = default;
};

// Ordered by pattern_id. Unparseable URLs give an empty result.
std::vector<PatternMatch> match_url(std::string_view url, const PatternDb& db);

// Matches over every hop, de-duplicated on (pattern_id, url), hop order kept.
std::vector<UrlMatch> match_chain(const resolve::RedirectChain& chain, const PatternDb& db);

// Throws DataError if an extracted URL has no chain.
AffiliateVerdict detect_affiliate(const ContentItem& item,
                                  const std::map<std::string, resolve::RedirectChain>& chains,
                                  const PatternDb& db);

std::string format_verdict(const AffiliateVerdict& v);
AffiliateVerdict parse_verdict(std::string_view line, std::size_t line_no = 0);
std::map<std::string, AffiliateVerdict> load_verdicts(const std::filesystem::path& path);
void write_verdicts(const std::filesystem::path& path, const std::vector<AffiliateVerdict>& verdicts);

// A URL built from the pattern's own rules, and a one-edit mutation of it
// (drop a required parameter, break the path digit group or prefix, or move
// the host) that must not match.
std::string synthesize_positive(const AffiliatePattern& p);
std::string synthesize_negative(const AffiliatePattern& p);

struct SyntheticResult {
    std::string pattern_id;
    std::string positive_url;
    std::string negative_url;
    bool positive_ok = false;  // matches, and only this pattern's company
    bool negative_ok = false;  // matches nothing in the db
};
std::vector<SyntheticResult> run_synthetic_suite(const PatternDb& db);

// Shortest-ish string matched by a regex built from literals, escapes, '.',
// character classes, groups with '|', and the ? * + {n,m} quantifiers.
std::string regex_witness(std::string_view pattern);

}  // namespace affscope::detect
