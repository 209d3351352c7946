#include "affscope/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <random>
#include <unordered_set>

#include "affscope/error.hpp"
#include "json.hpp"

namespace affscope {

using nlohmann::json;

std::string_view to_string(Platform p) {
    return p == Platform::youtube ? "youtube" : "pinterest";
}

std::optional<Platform> parse_platform(std::string_view s) {
    if (s == "youtube") return Platform::youtube;
    if (s == "pinterest") return Platform::pinterest;
    return std::nullopt;
}

void validate(const ContentItem& item) {
    if (item.id.empty()) throw DataError("content item has an empty id");
    auto check = [&](const std::optional<std::int64_t>& v, const char* field) {
        if (v && *v < 0) {
            throw DataError("item " + item.id + ": field \"" + field + "\" is negative");
        }
    };
    check(item.view_count, "view_count");
    check(item.like_count, "like_count");
    check(item.dislike_count, "dislike_count");
    check(item.comment_count, "comment_count");
    check(item.repin_count, "repin_count");
    check(item.duration_seconds, "duration_seconds");

    auto only_for = [&](const std::optional<std::int64_t>& v, const char* field, Platform p) {
        if (v && item.platform != p) {
            throw DataError("item " + item.id + ": field \"" + field + "\" is only valid for " +
                            std::string(to_string(p)));
        }
    };
    only_for(item.repin_count, "repin_count", Platform::pinterest);
    only_for(item.dislike_count, "dislike_count", Platform::youtube);
    only_for(item.duration_seconds, "duration_seconds", Platform::youtube);
}

namespace corpus {

namespace {

struct CounterField {
    const char* name;
    std::optional<std::int64_t> ContentItem::*member;
};

constexpr std::array<CounterField, 6> kCounters{{
    {"view_count", &ContentItem::view_count},
    {"like_count", &ContentItem::like_count},
    {"dislike_count", &ContentItem::dislike_count},
    {"comment_count", &ContentItem::comment_count},
    {"repin_count", &ContentItem::repin_count},
    {"duration_seconds", &ContentItem::duration_seconds},
}};

constexpr std::array<const char*, 5> kRequired{"id", "platform", "description", "category",
                                               "creator_id"};

[[noreturn]] void fail(std::size_t line_no, std::string_view field, std::string_view what) {
    std::string msg = "line " + std::to_string(line_no);
    if (!field.empty()) msg += ": field \"" + std::string(field) + "\"";
    msg += ": ";
    msg += what;
    throw DataError(msg);
}

bool is_schema_key(const std::string& key) {
    if (std::find_if(kRequired.begin(), kRequired.end(),
                     [&](const char* k) { return key == k; }) != kRequired.end()) {
        return true;
    }
    return std::find_if(kCounters.begin(), kCounters.end(),
                        [&](const CounterField& f) { return key == f.name; }) != kCounters.end();
}

}  // namespace

ContentItem parse_item(std::string_view line, std::size_t line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        fail(line_no, {}, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) fail(line_no, {}, "record is not an object");

    for (const char* key : kRequired) {
        auto it = j.find(key);
        if (it == j.end()) fail(line_no, key, "missing");
        if (!it->is_string()) fail(line_no, key, "must be a string");
    }

    ContentItem item;
    item.id = j["id"].get<std::string>();
    if (item.id.empty()) fail(line_no, "id", "must not be empty");
    const auto platform_name = j["platform"].get<std::string>();
    auto platform = parse_platform(platform_name);
    if (!platform) fail(line_no, "platform", "unknown platform \"" + platform_name + "\"");
    item.platform = *platform;
    item.description = j["description"].get<std::string>();
    item.category = j["category"].get<std::string>();
    item.creator_id = j["creator_id"].get<std::string>();

    for (const auto& field : kCounters) {
        auto it = j.find(field.name);
        if (it == j.end() || it->is_null()) continue;
        if (it->is_number_unsigned()) {
            item.*field.member = static_cast<std::int64_t>(it->get<std::uint64_t>());
        } else if (it->is_number_integer()) {
            auto v = it->get<std::int64_t>();
            if (v < 0) fail(line_no, field.name, "must be non-negative");
            item.*field.member = v;
        } else {
            fail(line_no, field.name, "must be an integer");
        }
    }

    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!is_schema_key(it.key())) item.extra.emplace(it.key(), it.value().dump());
    }

    try {
        validate(item);
    } catch (const DataError& e) {
        fail(line_no, {}, e.what());
    }
    return item;
}

std::string format_item(const ContentItem& item) {
    json j = json::object();
    for (const auto& [key, raw] : item.extra) j[key] = json::parse(raw);
    j["id"] = item.id;
    j["platform"] = std::string(to_string(item.platform));
    j["description"] = item.description;
    j["category"] = item.category;
    j["creator_id"] = item.creator_id;
    for (const auto& field : kCounters) {
        if (const auto& v = item.*field.member) j[field.name] = *v;
    }
    return j.dump();
}

std::vector<ContentItem> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file " + path.string());
    std::vector<ContentItem> items;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        items.push_back(parse_item(line, line_no));
    }
    return items;
}

void write_corpus(const std::filesystem::path& path, std::span<const ContentItem> items) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write corpus file " + path.string());
    for (const auto& item : items) out << format_item(item) << '\n';
    if (!out) throw DataError("write failed for " + path.string());
}

std::vector<SamplePrefix> gen_youtube_prefixes(std::size_t count, std::uint64_t seed) {
    if (count == 0) throw UsageError("gen_youtube_prefixes: count must be at least 1");
    static_assert(kIdentifierAlphabet.size() == 64);
    std::mt19937_64 rng(seed);
    std::vector<SamplePrefix> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::string value(kYoutubePrefixLength, '\0');
        for (auto& c : value) c = kIdentifierAlphabet[rng() >> 58];
        out.push_back({Platform::youtube, std::move(value)});
    }
    return out;
}

std::vector<std::string> gen_pinterest_ids(std::string_view seed_id, int lo, int hi) {
    if (seed_id.size() < 6 ||
        !std::all_of(seed_id.begin(), seed_id.end(),
                     [](unsigned char c) { return std::isdigit(c); })) {
        throw UsageError("gen_pinterest_ids: seed id must be a digit string of length >= 6");
    }
    if (lo < 0 || hi > 99999 || lo > hi) {
        throw UsageError("gen_pinterest_ids: need 0 <= lo <= hi <= 99999");
    }
    const std::string stem(seed_id.substr(0, seed_id.size() - 5));
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (int n = lo; n <= hi; ++n) {
        std::string suffix = std::to_string(n);
        ids.push_back(stem + std::string(5 - suffix.size(), '0') + suffix);
    }
    return ids;
}

namespace {

bool is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool iequals_prefix(std::string_view text, std::size_t pos, std::string_view prefix) {
    if (text.size() - pos < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(text[pos + i])) != prefix[i]) return false;
    }
    return true;
}

}  // namespace

std::vector<UrlSpan> find_url_spans(std::string_view text) {
    std::vector<UrlSpan> spans;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t scheme_len = 0;
        if (iequals_prefix(text, pos, "http://")) {
            scheme_len = 7;
        } else if (iequals_prefix(text, pos, "https://")) {
            scheme_len = 8;
        }
        if (scheme_len == 0) {
            ++pos;
            continue;
        }
        std::size_t end = pos;
        while (end < text.size() && !is_space(static_cast<unsigned char>(text[end]))) ++end;

        // Strip trailing punctuation; a ')' stays only when it closes a '('
        // inside the URL.
        while (end > pos + scheme_len) {
            const char last = text[end - 1];
            if (last == ')') {
                auto body = text.substr(pos, end - pos);
                auto opens = std::count(body.begin(), body.end(), '(');
                auto closes = std::count(body.begin(), body.end(), ')');
                if (closes <= opens) break;
            } else if (std::string_view("(.,!;\"'").find(last) == std::string_view::npos) {
                break;
            }
            --end;
        }
        if (end > pos + scheme_len) spans.push_back({pos, end});
        pos = std::max(end, pos + scheme_len);
    }
    return spans;
}

std::vector<std::string> extract_urls(std::string_view text) {
    std::vector<std::string> urls;
    for (const auto& span : find_url_spans(text)) {
        urls.emplace_back(text.substr(span.begin, span.end - span.begin));
    }
    return urls;
}

namespace {

constexpr std::array<std::string_view, 200> kCommonWords{
    "the", "be", "to", "of", "and", "a", "in", "that", "have", "i",
    "it", "for", "not", "on", "with", "he", "as", "you", "do", "at",
    "this", "but", "his", "by", "from", "they", "we", "say", "her", "she",
    "or", "an", "will", "my", "one", "all", "would", "there", "their", "what",
    "so", "up", "out", "if", "about", "who", "get", "which", "go", "me",
    "when", "make", "can", "like", "time", "no", "just", "him", "know", "take",
    "people", "into", "year", "your", "good", "some", "could", "them", "see", "other",
    "than", "then", "now", "look", "only", "come", "its", "over", "think", "also",
    "back", "after", "use", "two", "how", "our", "work", "first", "well", "way",
    "even", "new", "want", "because", "any", "these", "give", "day", "most", "us",
    "is", "are", "was", "were", "been", "has", "had", "did", "said", "am",
    "very", "much", "many", "more", "here", "where", "why", "really", "every", "before",
    "through", "down", "off", "still", "should", "need", "find", "those", "while", "same",
    "right", "long", "little", "own", "old", "big", "last", "never", "always", "something",
    "each", "again", "going", "got", "made", "world", "life", "man", "woman", "home",
    "part", "place", "case", "point", "great", "small", "large", "next", "early", "young",
    "few", "public", "bad", "able", "between", "another", "without", "under", "both", "being",
    "around", "video", "videos", "link", "links", "watch", "watching", "subscribe", "channel", "check",
    "below", "love", "thanks", "thank", "please", "follow", "free", "buy", "shop", "today",
    "best", "help", "click", "share", "comment", "enjoy", "let", "don", "lot", "things",
};

const std::unordered_set<std::string_view>& common_word_set() {
    static const std::unordered_set<std::string_view> set(kCommonWords.begin(), kCommonWords.end());
    return set;
}

bool is_letter_byte(unsigned char c) {
    return std::isalpha(c) || c >= 0x80;
}

}  // namespace

std::span<const std::string_view> common_english_words() {
    return kCommonWords;
}

double english_word_ratio(std::string_view text) {
    std::string masked(text);
    for (const auto& span : find_url_spans(text)) {
        std::fill(masked.begin() + static_cast<std::ptrdiff_t>(span.begin),
                  masked.begin() + static_cast<std::ptrdiff_t>(span.end), ' ');
    }

    const auto& words = common_word_set();
    std::size_t tokens = 0;
    std::size_t hits = 0;
    std::size_t i = 0;
    while (i < masked.size()) {
        if (!is_letter_byte(static_cast<unsigned char>(masked[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        std::string token;
        while (j < masked.size() && is_letter_byte(static_cast<unsigned char>(masked[j]))) {
            token += static_cast<char>(std::tolower(static_cast<unsigned char>(masked[j])));
            ++j;
        }
        ++tokens;
        if (words.contains(token)) ++hits;
        i = j;
    }
    return tokens == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(tokens);
}

bool is_english(std::string_view text) {
    return english_word_ratio(text) >= 0.25;
}

}  // namespace corpus
}  // namespace affscope
