#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace affscope {

enum class Platform { youtube, pinterest };

std::string_view to_string(Platform p);
std::optional<Platform> parse_platform(std::string_view s);

// One video or pin record.
struct ContentItem {
    std::string id;
    Platform platform = Platform::youtube;
    std::string description;
    std::string category;
    std::string creator_id;
    std::optional<std::int64_t> view_count;
    std::optional<std::int64_t> like_count;
    std::optional<std::int64_t> dislike_count;   // youtube only
    std::optional<std::int64_t> comment_count;
    std::optional<std::int64_t> repin_count;     // pinterest only
    std::optional<std::int64_t> duration_seconds;  // youtube only
    // Keys outside the schema, kept verbatim as serialized JSON values.
    std::map<std::string, std::string> extra;

    bool operator==(const ContentItem&) const = default;
};

// Throws DataError describing the first violated invariant.
void validate(const ContentItem& item);

namespace corpus {

// Parses one corpus line. `line_no` is used in error messages only.
ContentItem parse_item(std::string_view line, std::size_t line_no = 0);
std::string format_item(const ContentItem& item);

// Blank lines are skipped; any malformed line raises DataError with its
// 1-based line number and offending field.
std::vector<ContentItem> load_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, std::span<const ContentItem> items);

struct SamplePrefix {
    Platform platform;
    std::string value;

    bool operator==(const SamplePrefix&) const = default;
};

// A-Z a-z 0-9 - _ : the character set of 11-character video identifiers.
inline constexpr std::string_view kIdentifierAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
inline constexpr std::size_t kYoutubePrefixLength = 5;

// Draws `count` 5-character prefixes from mt19937_64(seed). Each character
// takes the top six bits of one generator output. Throws UsageError on count 0.
std::vector<SamplePrefix> gen_youtube_prefixes(std::size_t count, std::uint64_t seed);

// Replaces the last five digits of `seed_id` with every counter in [lo, hi].
std::vector<std::string> gen_pinterest_ids(std::string_view seed_id, int lo = 0, int hi = 1500);

// Every http(s) URL in free text, in order, duplicates kept.
std::vector<std::string> extract_urls(std::string_view text);

struct UrlSpan {
    std::size_t begin;
    std::size_t end;  // one past the last byte
};
std::vector<UrlSpan> find_url_spans(std::string_view text);

// Share of letter tokens found in the bundled common-word list >= 0.25.
bool is_english(std::string_view text);
double english_word_ratio(std::string_view text);
std::span<const std::string_view> common_english_words();

}  // namespace corpus
}  // namespace affscope
