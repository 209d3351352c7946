#include <algorithm>
#include <cctype>

#include "affscope/detect.hpp"
#include "affscope/error.hpp"

namespace affscope::detect {

namespace {

class WitnessBuilder {
public:
    explicit WitnessBuilder(std::string_view re) : re_(re) {}

    std::string run() {
        std::string out = alternation();
        if (pos_ != re_.size()) fail("unbalanced ')'");
        return out;
    }

private:
    std::string_view re_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& why) const {
        throw UsageError("regex_witness: " + why + " in /" + std::string(re_) + "/");
    }

    bool at_end() const { return pos_ >= re_.size(); }
    char peek() const { return re_[pos_]; }

    // First alternative is the witness; the rest are parsed and dropped.
    std::string alternation() {
        std::string first = sequence();
        while (!at_end() && peek() == '|') {
            ++pos_;
            (void)sequence();
        }
        return first;
    }

    std::string sequence() {
        std::string out;
        while (!at_end() && peek() != '|' && peek() != ')') {
            std::string piece = atom();
            const std::size_t reps = quantifier();
            for (std::size_t i = 0; i < reps; ++i) out += piece;
        }
        return out;
    }

    std::string atom() {
        const char c = re_[pos_++];
        switch (c) {
            case '^':
            case '$':
                return {};
            case '.':
                return "x";
            case '(': {
                if (re_.substr(pos_, 2) == "?:") pos_ += 2;
                std::string inner = alternation();
                if (at_end() || peek() != ')') fail("missing ')'");
                ++pos_;
                return inner;
            }
            case '[':
                return std::string(1, char_class());
            case '\\':
                return std::string(1, escape());
            default:
                return std::string(1, c);
        }
    }

    char escape() {
        if (at_end()) fail("dangling escape");
        const char c = re_[pos_++];
        switch (c) {
            case 'd': return '0';
            case 'w': return 'a';
            case 's': return ' ';
            default: return c;
        }
    }

    char char_class() {
        bool negated = false;
        if (!at_end() && peek() == '^') {
            negated = true;
            ++pos_;
        }
        std::vector<std::pair<char, char>> ranges;
        bool first = true;
        while (true) {
            if (at_end()) fail("missing ']'");
            char c = re_[pos_++];
            if (c == ']' && !first) break;
            first = false;
            if (c == '\\') c = escape();
            char hi = c;
            if (!at_end() && peek() == '-' && pos_ + 1 < re_.size() && re_[pos_ + 1] != ']') {
                ++pos_;
                hi = re_[pos_++];
                if (hi == '\\') hi = escape();
            }
            ranges.emplace_back(c, hi);
        }
        if (!negated) return ranges.front().first;
        for (char candidate : std::string_view("xz0_A")) {
            const bool inside = std::any_of(ranges.begin(), ranges.end(), [&](const auto& r) {
                return candidate >= r.first && candidate <= r.second;
            });
            if (!inside) return candidate;
        }
        fail("cannot satisfy negated class");
    }

    // Repetition count used for the witness: optional and starred atoms are
    // taken once so the example stays realistic.
    std::size_t quantifier() {
        if (at_end()) return 1;
        std::size_t reps = 1;
        const char c = peek();
        if (c == '?' || c == '*' || c == '+') {
            ++pos_;
        } else if (c == '{') {
            auto close = re_.find('}', pos_);
            if (close == std::string_view::npos) fail("missing '}'");
            const auto body = re_.substr(pos_ + 1, close - pos_ - 1);
            const auto comma = body.find(',');
            const std::string lo(body.substr(0, comma));
            reps = lo.empty() ? 0 : static_cast<std::size_t>(std::stoul(lo));
            if (reps == 0) {
                const std::string hi = comma == std::string_view::npos ? "" : std::string(body.substr(comma + 1));
                reps = (comma != std::string_view::npos && (hi.empty() || std::stoul(hi) > 0)) ? 1 : 0;
            }
            pos_ = close + 1;
        } else {
            return 1;
        }
        if (!at_end() && peek() == '?') ++pos_;  // lazy marker
        return reps;
    }
};

std::string scheme_of(const AffiliatePattern& p) {
    return p.source_note().starts_with("https") ? "https" : "http";
}

std::string host_of(const AffiliatePattern& p) {
    if (p.host_rule().kind != HostRuleKind::regex) return p.host_rule().value;
    std::string host = regex_witness(p.host_rule().value);
    std::transform(host.begin(), host.end(), host.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return host;
}

std::string path_of(const AffiliatePattern& p) {
    const auto& rule = p.path_rule();
    switch (rule.kind) {
        case PathRuleKind::any: return "/item";
        case PathRuleKind::prefix: return rule.value->ends_with("/") ? *rule.value + "item" : *rule.value;
        case PathRuleKind::regex: return regex_witness(*rule.value);
    }
    return "/";
}

std::string query_of(const std::set<std::string>& params) {
    std::string q;
    for (const auto& name : params) {
        q += q.empty() ? "?" : "&";
        q += name + "=1";
    }
    return q;
}

}  // namespace

std::string regex_witness(std::string_view pattern) {
    return WitnessBuilder(pattern).run();
}

std::string synthesize_positive(const AffiliatePattern& p) {
    return scheme_of(p) + "://" + host_of(p) + path_of(p) + query_of(p.required_params());
}

std::string synthesize_negative(const AffiliatePattern& p) {
    std::string host = host_of(p);
    std::string path = path_of(p);
    auto params = p.required_params();

    if (!params.empty()) {
        params.erase(params.begin());
    } else if (p.path_rule().kind == PathRuleKind::regex) {
        auto digit = std::find_if(path.begin(), path.end(), [](unsigned char c) { return std::isdigit(c); });
        if (digit != path.end()) {
            auto end = std::find_if(digit, path.end(), [](unsigned char c) { return !std::isdigit(c); });
            path.replace(digit, end, "x");
        } else {
            path = "/x" + path;
        }
    } else if (p.path_rule().kind == PathRuleKind::prefix) {
        path = "/x" + path;
    } else {
        host += ".invalid";
    }
    return scheme_of(p) + "://" + host + path + query_of(params);
}

std::vector<SyntheticResult> run_synthetic_suite(const PatternDb& db) {
    std::vector<SyntheticResult> results;
    results.reserve(db.size());
    for (const auto& p : db.patterns()) {
        SyntheticResult r;
        r.pattern_id = p.pattern_id();
        r.positive_url = synthesize_positive(p);
        r.negative_url = synthesize_negative(p);

        const auto positive = match_url(r.positive_url, db);
        r.positive_ok = !positive.empty() &&
                        std::any_of(positive.begin(), positive.end(),
                                    [&](const PatternMatch& m) { return m.pattern_id == p.pattern_id(); }) &&
                        std::all_of(positive.begin(), positive.end(),
                                    [&](const PatternMatch& m) { return m.company == p.company(); });
        r.negative_ok = match_url(r.negative_url, db).empty();
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace affscope::detect
