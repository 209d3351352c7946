#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "affscope/corpus.hpp"

namespace affscope::disclose {

struct Sentence {
    std::string content_id;
    std::size_t line_index = 0;
    std::size_t sentence_index = 0;
    std::string text;
    std::vector<std::string> tokens;  // in order of appearance

    bool operator==(const Sentence&) const = default;
};

// Maximal runs of letters/digits, lowercased. Non-ASCII UTF-8 bytes count as
// letters so accented words stay whole.
std::vector<std::string> tokenize(std::string_view text);

// Newlines first, then '.', '!' or '?' followed by whitespace or end of line.
// Terminators inside URLs never split.
std::vector<Sentence> segment(std::string_view description, std::string_view content_id = {});

struct SentenceVector {
    std::size_t sentence = 0;  // index into the vectorized input
    std::vector<std::pair<std::uint32_t, std::uint32_t>> counts;  // (vocabulary id, count), by id
};

struct BagOfWords {
    std::vector<std::string> vocabulary;  // sorted; a token's id is its index
    std::vector<SentenceVector> vectors;

    std::uint32_t count(std::size_t vector_index, std::string_view token) const;
};

BagOfWords vectorize(std::span<const Sentence> sentences);

double euclidean(const SentenceVector& a, const SentenceVector& b);

enum class Linkage { single, complete, average };
std::string_view to_string(Linkage l);
std::optional<Linkage> parse_linkage(std::string_view s);

struct Merge {
    std::size_t left = 0;   // node ids: leaves are 0..n-1, merge k creates n+k
    std::size_t right = 0;  // left < right
    double distance = 0.0;
    std::size_t size = 0;   // leaves under the new node
};

struct ClusterTree {
    std::size_t leaves = 0;
    std::vector<Merge> merges;
};

// Agglomerative clustering under Euclidean distance. At each step the pair
// with the smallest linkage distance merges; distances within a relative
// 1e-12 count as equal and the pair with the smaller (left, right) node ids
// wins. Throws UsageError on empty input.
ClusterTree hcluster(std::span<const SentenceVector> vectors, Linkage linkage = Linkage::average);

inline constexpr double kDefaultCutThreshold = 1.5;

// Connected components of merges with distance <= threshold. Each cluster
// lists leaf indices ascending; clusters are ordered by their first leaf.
std::vector<std::vector<std::size_t>> cut(const ClusterTree& tree, double threshold);

enum class DisclosureType { AffiliateLink, Explanation, ChannelSupport };
std::string_view to_string(DisclosureType t);
std::optional<DisclosureType> parse_disclosure_type(std::string_view s);

struct Classification {
    DisclosureType type;
    std::string rule_id;

    bool operator==(const Classification&) const = default;
};

// Rule ids recorded on DisclosureRecord.
inline constexpr std::string_view kRuleExplanation = "explanation:affiliate-or-link+compensation";
inline constexpr std::string_view kRuleChannelSupport = "channel-support:support+link-shop-channel";
inline constexpr std::string_view kRuleAffiliateLink = "affiliate-link:affiliate-term";

// Fixed-precedence cascade: Explanation, then ChannelSupport, then
// AffiliateLink. ChannelSupport is skipped when the platform is Pinterest.
// Text inside URL spans is ignored.
std::optional<Classification> classify_disclosure(const Sentence& sentence,
                                                  std::optional<Platform> platform = std::nullopt);
std::optional<Classification> classify_text(std::string_view text,
                                            std::optional<Platform> platform = std::nullopt);

bool is_affiliate_term(std::string_view token);
bool is_link_term(std::string_view token);
bool is_compensation_term(std::string_view token);
bool is_support_term(std::string_view token);
bool is_shop_or_channel_term(std::string_view token);

struct DisclosureRecord {
    std::string content_id;
    std::size_t line_index = 0;
    std::size_t sentence_index = 0;
    std::string text;
    DisclosureType dtype = DisclosureType::AffiliateLink;
    std::string rule_id;

    bool operator==(const DisclosureRecord&) const = default;
};

// English items only; one record per classified sentence.
std::vector<DisclosureRecord> extract_disclosures(std::span<const ContentItem> items);

std::string format_record(const DisclosureRecord& r);
DisclosureRecord parse_record(std::string_view line, std::size_t line_no = 0);
std::vector<DisclosureRecord> load_records(const std::filesystem::path& path);
void write_records(const std::filesystem::path& path, std::span<const DisclosureRecord> records);

struct ClusterDigest {
    std::size_t size = 0;
    std::string medoid;
    std::vector<std::string> samples;  // up to five members, input order
};

// Clusters ordered by size descending, then by first member.
std::vector<ClusterDigest> digest(std::span<const Sentence> sentences, const BagOfWords& bag,
                                  const std::vector<std::vector<std::size_t>>& clusters);
std::string format_digest(const ClusterDigest& d);

}  // namespace affscope::disclose
