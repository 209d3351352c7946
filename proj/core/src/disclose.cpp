#include "affscope/disclose.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "affscope/error.hpp"
#include "json.hpp"

namespace affscope::disclose {

using nlohmann::json;

namespace {

bool is_word_byte(unsigned char c) {
    return std::isalnum(c) || c >= 0x80;
}

bool is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v' || c == '\n';
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

template <std::size_t N>
bool in(const std::array<std::string_view, N>& words, std::string_view token) {
    return std::find(words.begin(), words.end(), token) != words.end();
}

constexpr std::array<std::string_view, 10> kAffiliateTerms{
    "affiliate", "affiliates", "affiliated", "aff", "affil",
    "affiliatelink", "affiliatelinks", "afflink", "afflinks", "affiliatelinking",
};
constexpr std::array<std::string_view, 4> kLinkTerms{"link", "links", "url", "urls"};
constexpr std::array<std::string_view, 11> kCompensationTerms{
    "commission", "commissions", "earn", "earns", "earned", "earning",
    "receive", "receives", "received", "paid", "sales",
};
constexpr std::array<std::string_view, 4> kSupportTerms{"support", "supports", "supporting", "supported"};
constexpr std::array<std::string_view, 6> kShopChannelTerms{"shop", "shops", "shopping", "channel", "channels", "show"};

}  // namespace

bool is_affiliate_term(std::string_view t) { return in(kAffiliateTerms, t); }
bool is_link_term(std::string_view t) { return in(kLinkTerms, t); }
bool is_compensation_term(std::string_view t) { return in(kCompensationTerms, t); }
bool is_support_term(std::string_view t) { return in(kSupportTerms, t); }
bool is_shop_or_channel_term(std::string_view t) { return in(kShopChannelTerms, t) || is_link_term(t); }

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_word_byte(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::string token;
        while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) {
            token += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
            ++i;
        }
        tokens.push_back(std::move(token));
    }
    return tokens;
}

std::vector<Sentence> segment(std::string_view description, std::string_view content_id) {
    std::vector<Sentence> out;
    std::size_t line_index = 0;
    std::size_t line_start = 0;
    while (line_start <= description.size()) {
        auto nl = description.find('\n', line_start);
        const auto line_end = nl == std::string_view::npos ? description.size() : nl;
        const auto line = description.substr(line_start, line_end - line_start);

        const auto urls = corpus::find_url_spans(line);
        auto in_url = [&](std::size_t pos) {
            return std::any_of(urls.begin(), urls.end(),
                               [&](const corpus::UrlSpan& s) { return pos >= s.begin && pos < s.end; });
        };

        std::size_t sentence_index = 0;
        std::size_t start = 0;
        auto emit = [&](std::size_t end) {
            auto text = trim(line.substr(start, end - start));
            start = end;
            if (text.empty()) return;
            Sentence s;
            s.content_id = std::string(content_id);
            s.line_index = line_index;
            s.sentence_index = sentence_index++;
            s.tokens = tokenize(text);
            s.text = std::move(text);
            out.push_back(std::move(s));
        };
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if ((c == '.' || c == '!' || c == '?') && !in_url(i) &&
                (i + 1 == line.size() || is_space(static_cast<unsigned char>(line[i + 1])))) {
                emit(i + 1);
            }
        }
        emit(line.size());

        if (nl == std::string_view::npos) break;
        line_start = nl + 1;
        ++line_index;
    }
    return out;
}

std::uint32_t BagOfWords::count(std::size_t vector_index, std::string_view token) const {
    auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), token);
    if (it == vocabulary.end() || *it != token) return 0;
    const auto id = static_cast<std::uint32_t>(it - vocabulary.begin());
    const auto& counts = vectors.at(vector_index).counts;
    auto c = std::lower_bound(counts.begin(), counts.end(), std::pair<std::uint32_t, std::uint32_t>{id, 0});
    return c != counts.end() && c->first == id ? c->second : 0;
}

BagOfWords vectorize(std::span<const Sentence> sentences) {
    BagOfWords bag;
    for (const auto& s : sentences) {
        bag.vocabulary.insert(bag.vocabulary.end(), s.tokens.begin(), s.tokens.end());
    }
    std::sort(bag.vocabulary.begin(), bag.vocabulary.end());
    bag.vocabulary.erase(std::unique(bag.vocabulary.begin(), bag.vocabulary.end()), bag.vocabulary.end());

    bag.vectors.reserve(sentences.size());
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        std::map<std::uint32_t, std::uint32_t> counts;
        for (const auto& t : sentences[i].tokens) {
            auto it = std::lower_bound(bag.vocabulary.begin(), bag.vocabulary.end(), t);
            ++counts[static_cast<std::uint32_t>(it - bag.vocabulary.begin())];
        }
        bag.vectors.push_back({i, {counts.begin(), counts.end()}});
    }
    return bag;
}

double euclidean(const SentenceVector& a, const SentenceVector& b) {
    std::uint64_t sum = 0;
    auto i = a.counts.begin();
    auto j = b.counts.begin();
    auto sq = [](std::int64_t d) { return static_cast<std::uint64_t>(d * d); };
    while (i != a.counts.end() || j != b.counts.end()) {
        if (j == b.counts.end() || (i != a.counts.end() && i->first < j->first)) {
            sum += sq(i->second);
            ++i;
        } else if (i == a.counts.end() || j->first < i->first) {
            sum += sq(j->second);
            ++j;
        } else {
            sum += sq(static_cast<std::int64_t>(i->second) - static_cast<std::int64_t>(j->second));
            ++i;
            ++j;
        }
    }
    return std::sqrt(static_cast<double>(sum));
}

std::string_view to_string(DisclosureType t) {
    switch (t) {
        case DisclosureType::AffiliateLink: return "AffiliateLink";
        case DisclosureType::Explanation: return "Explanation";
        case DisclosureType::ChannelSupport: return "ChannelSupport";
    }
    return "AffiliateLink";
}

std::optional<DisclosureType> parse_disclosure_type(std::string_view s) {
    for (auto t : {DisclosureType::AffiliateLink, DisclosureType::Explanation, DisclosureType::ChannelSupport}) {
        if (to_string(t) == s) return t;
    }
    return std::nullopt;
}

std::optional<Classification> classify_disclosure(const Sentence& sentence, std::optional<Platform> platform) {
    // URL text never triggers a rule: "?aff_id=" or "%2F" inside a link is not a disclosure.
    std::string masked = sentence.text;
    for (const auto& span : corpus::find_url_spans(masked)) {
        std::fill(masked.begin() + static_cast<std::ptrdiff_t>(span.begin),
                  masked.begin() + static_cast<std::ptrdiff_t>(span.end), ' ');
    }

    bool affiliate = false;
    bool link = false;
    bool compensation = masked.find('%') != std::string::npos;
    bool support = false;
    bool shop_or_channel = false;
    for (const auto& t : tokenize(masked)) {
        affiliate = affiliate || is_affiliate_term(t);
        link = link || is_link_term(t);
        compensation = compensation || is_compensation_term(t);
        support = support || is_support_term(t);
        shop_or_channel = shop_or_channel || is_shop_or_channel_term(t);
    }

    if ((affiliate || link) && compensation) {
        return Classification{DisclosureType::Explanation, std::string(kRuleExplanation)};
    }
    if (support && shop_or_channel && platform != Platform::pinterest) {
        return Classification{DisclosureType::ChannelSupport, std::string(kRuleChannelSupport)};
    }
    if (affiliate) {
        return Classification{DisclosureType::AffiliateLink, std::string(kRuleAffiliateLink)};
    }
    return std::nullopt;
}

std::optional<Classification> classify_text(std::string_view text, std::optional<Platform> platform) {
    Sentence s;
    s.text = std::string(text);
    s.tokens = tokenize(text);
    return classify_disclosure(s, platform);
}

std::vector<DisclosureRecord> extract_disclosures(std::span<const ContentItem> items) {
    std::vector<DisclosureRecord> out;
    for (const auto& item : items) {
        if (!corpus::is_english(item.description)) continue;
        for (auto& s : segment(item.description, item.id)) {
            auto c = classify_disclosure(s, item.platform);
            if (!c) continue;
            out.push_back({item.id, s.line_index, s.sentence_index, std::move(s.text), c->type,
                           std::move(c->rule_id)});
        }
    }
    return out;
}

std::string format_record(const DisclosureRecord& r) {
    return json{{"content_id", r.content_id},
                {"line_index", r.line_index},
                {"sentence_index", r.sentence_index},
                {"text", r.text},
                {"dtype", std::string(to_string(r.dtype))},
                {"rule_id", r.rule_id}}
        .dump();
}

DisclosureRecord parse_record(std::string_view line, std::size_t line_no) {
    try {
        const json j = json::parse(line);
        DisclosureRecord r;
        r.content_id = j.at("content_id").get<std::string>();
        r.line_index = j.at("line_index").get<std::size_t>();
        r.sentence_index = j.at("sentence_index").get<std::size_t>();
        r.text = j.at("text").get<std::string>();
        auto type = parse_disclosure_type(j.at("dtype").get<std::string>());
        if (!type) throw DataError("unknown dtype");
        r.dtype = *type;
        r.rule_id = j.at("rule_id").get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw DataError("disclosure line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError("disclosure line " + std::to_string(line_no) + ": " + e.what());
    }
}

std::vector<DisclosureRecord> load_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open disclosures file " + path.string());
    std::vector<DisclosureRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(parse_record(line, line_no));
    }
    return out;
}

void write_records(const std::filesystem::path& path, std::span<const DisclosureRecord> records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write disclosures file " + path.string());
    for (const auto& r : records) out << format_record(r) << '\n';
    if (!out) throw DataError("write failed for " + path.string());
}

std::vector<ClusterDigest> digest(std::span<const Sentence> sentences, const BagOfWords& bag,
                                  const std::vector<std::vector<std::size_t>>& clusters) {
    std::vector<std::pair<std::size_t, ClusterDigest>> keyed;
    for (const auto& members : clusters) {
        if (members.empty()) continue;
        ClusterDigest d;
        d.size = members.size();
        std::size_t best = members.front();
        double best_sum = std::numeric_limits<double>::infinity();
        for (auto m : members) {
            double sum = 0.0;
            for (auto o : members) sum += euclidean(bag.vectors[m], bag.vectors[o]);
            if (sum < best_sum) {
                best_sum = sum;
                best = m;
            }
        }
        d.medoid = sentences[best].text;
        for (std::size_t i = 0; i < std::min<std::size_t>(5, members.size()); ++i) {
            d.samples.push_back(sentences[members[i]].text);
        }
        keyed.emplace_back(members.front(), std::move(d));
    }
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        if (a.second.size != b.second.size) return a.second.size > b.second.size;
        return a.first < b.first;
    });
    std::vector<ClusterDigest> out;
    out.reserve(keyed.size());
    for (auto& [key, d] : keyed) out.push_back(std::move(d));
    return out;
}

std::string format_digest(const ClusterDigest& d) {
    return json{{"size", d.size}, {"medoid", d.medoid}, {"samples", d.samples}}.dump();
}

}  // namespace affscope::disclose
