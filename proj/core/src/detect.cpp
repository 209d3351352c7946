#include "affscope/detect.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "affscope/error.hpp"
#include "affscope/log.hpp"
#include "json.hpp"

namespace affscope::detect {

using nlohmann::json;

std::string_view to_string(HostRuleKind k) {
    switch (k) {
        case HostRuleKind::exact: return "exact";
        case HostRuleKind::suffix: return "suffix";
        case HostRuleKind::regex: return "regex";
    }
    return "exact";
}

std::string_view to_string(PathRuleKind k) {
    switch (k) {
        case PathRuleKind::any: return "any";
        case PathRuleKind::prefix: return "prefix";
        case PathRuleKind::regex: return "regex";
    }
    return "any";
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::shared_ptr<const std::regex> compile(const std::string& id, const std::string& what,
                                          const std::string& source,
                                          std::regex::flag_type extra = {}) {
    try {
        return std::make_shared<const std::regex>(source, std::regex::ECMAScript | extra);
    } catch (const std::regex_error& e) {
        throw DataError("pattern " + id + ": " + what + " regex does not compile: " + e.what());
    }
}

}  // namespace

AffiliatePattern AffiliatePattern::make(std::string pattern_id, std::string company, HostRule host,
                                        PathRule path, std::set<std::string> required_params,
                                        std::string source_note) {
    if (pattern_id.empty()) throw DataError("pattern with empty pattern_id");
    const std::string& id = pattern_id;
    if (company.empty()) throw DataError("pattern " + id + ": empty company");
    if (host.value.empty()) throw DataError("pattern " + id + ": empty host_rule value");
    if (path.kind != PathRuleKind::any && (!path.value || path.value->empty())) {
        throw DataError("pattern " + id + ": path_rule " + std::string(to_string(path.kind)) +
                        " needs a value");
    }
    if (path.kind == PathRuleKind::any) path.value.reset();
    if (std::any_of(required_params.begin(), required_params.end(),
                    [](const std::string& p) { return p.empty(); })) {
        throw DataError("pattern " + id + ": empty required parameter name");
    }
    if (host.kind == HostRuleKind::suffix && path.kind == PathRuleKind::any && required_params.empty()) {
        throw DataError("pattern " + id + ": a bare host-suffix rule is too permissive");
    }

    AffiliatePattern p;
    if (host.kind == HostRuleKind::regex) {
        p.host_regex_ = compile(id, "host", host.value, std::regex::icase);
    } else {
        host.value = lower(host.value);
    }
    if (path.kind == PathRuleKind::regex) p.path_regex_ = compile(id, "path", *path.value);

    p.pattern_id_ = std::move(pattern_id);
    p.company_ = std::move(company);
    p.host_ = std::move(host);
    p.path_ = std::move(path);
    p.required_params_ = std::move(required_params);
    p.source_note_ = std::move(source_note);
    return p;
}

bool AffiliatePattern::matches(const url::Url& u) const {
    switch (host_.kind) {
        case HostRuleKind::exact:
            if (u.host != host_.value) return false;
            break;
        case HostRuleKind::suffix:
            if (u.host != host_.value &&
                !(u.host.size() > host_.value.size() && u.host.ends_with(host_.value) &&
                  u.host[u.host.size() - host_.value.size() - 1] == '.')) {
                return false;
            }
            break;
        case HostRuleKind::regex:
            if (!std::regex_match(u.host, *host_regex_)) return false;
            break;
    }

    switch (path_.kind) {
        case PathRuleKind::any: break;
        case PathRuleKind::prefix:
            if (!u.path.starts_with(*path_.value)) return false;
            break;
        case PathRuleKind::regex:
            if (!std::regex_search(u.path, *path_regex_, std::regex_constants::match_continuous)) {
                return false;
            }
            break;
    }

    if (required_params_.empty()) return true;
    const auto names = u.param_names();
    return std::all_of(required_params_.begin(), required_params_.end(), [&](const std::string& p) {
        return std::find(names.begin(), names.end(), p) != names.end();
    });
}

PatternDb::PatternDb(std::vector<AffiliatePattern> patterns, std::string version)
    : patterns_(std::move(patterns)), version_(std::move(version)) {
    if (patterns_.empty()) throw DataError("pattern database is empty");
    std::sort(patterns_.begin(), patterns_.end(),
              [](const auto& a, const auto& b) { return a.pattern_id() < b.pattern_id(); });
    for (std::size_t i = 1; i < patterns_.size(); ++i) {
        if (patterns_[i].pattern_id() == patterns_[i - 1].pattern_id()) {
            throw DataError("duplicate pattern_id " + patterns_[i].pattern_id());
        }
    }
}

std::set<std::string> PatternDb::companies() const {
    std::set<std::string> out;
    for (const auto& p : patterns_) out.insert(p.company());
    return out;
}

const AffiliatePattern* PatternDb::find(std::string_view pattern_id) const {
    auto it = std::lower_bound(patterns_.begin(), patterns_.end(), pattern_id,
                               [](const AffiliatePattern& p, std::string_view id) { return p.pattern_id() < id; });
    return it != patterns_.end() && it->pattern_id() == pattern_id ? &*it : nullptr;
}

namespace {

AffiliatePattern pattern_from_json(const json& j, std::size_t line_no) {
    std::string id = "<line " + std::to_string(line_no) + ">";
    try {
        id = j.at("pattern_id").get<std::string>();
        HostRule host;
        const auto& h = j.at("host_rule");
        const auto host_kind = h.at("kind").get<std::string>();
        if (host_kind == "exact") {
            host.kind = HostRuleKind::exact;
        } else if (host_kind == "suffix") {
            host.kind = HostRuleKind::suffix;
        } else if (host_kind == "regex") {
            host.kind = HostRuleKind::regex;
        } else {
            throw DataError("pattern " + id + ": unknown host_rule kind " + host_kind);
        }
        host.value = h.at("value").get<std::string>();

        PathRule path;
        const auto& pr = j.at("path_rule");
        const auto path_kind = pr.at("kind").get<std::string>();
        if (path_kind == "any") {
            path.kind = PathRuleKind::any;
        } else if (path_kind == "prefix") {
            path.kind = PathRuleKind::prefix;
        } else if (path_kind == "regex") {
            path.kind = PathRuleKind::regex;
        } else {
            throw DataError("pattern " + id + ": unknown path_rule kind " + path_kind);
        }
        if (auto v = pr.find("value"); v != pr.end() && !v->is_null()) path.value = v->get<std::string>();

        std::set<std::string> params;
        for (const auto& p : j.at("required_params")) params.insert(p.get<std::string>());

        std::string note = j.contains("source_note") ? j.at("source_note").get<std::string>() : "";
        return AffiliatePattern::make(id, j.at("company").get<std::string>(), std::move(host),
                                      std::move(path), std::move(params), std::move(note));
    } catch (const json::exception& e) {
        throw DataError("pattern " + id + " (line " + std::to_string(line_no) + "): " + e.what());
    }
}

}  // namespace

PatternDb parse_pattern_db(std::string_view text) {
    std::vector<AffiliatePattern> patterns;
    std::string version = "unversioned";
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        if (line[start] == '#') {
            auto body = std::string_view(line).substr(start + 1);
            auto body_start = body.find_first_not_of(' ');
            body = body_start == std::string_view::npos ? std::string_view{} : body.substr(body_start);
            if (body.starts_with("version:")) {
                auto v = body.substr(8);
                auto b = v.find_first_not_of(' ');
                auto e = v.find_last_not_of(" \r");
                if (b != std::string_view::npos) version = std::string(v.substr(b, e - b + 1));
            }
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError("pattern file line " + std::to_string(line_no) + ": " + e.what());
        }
        patterns.push_back(pattern_from_json(j, line_no));
    }
    return PatternDb(std::move(patterns), std::move(version));
}

PatternDb load_pattern_db(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open pattern file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_pattern_db(buf.str());
}

void check_shipped_counts(const PatternDb& db) {
    const auto companies = db.companies().size();
    if (db.size() != kShippedPatternCount || companies != kShippedCompanyCount) {
        throw DataError("pattern database has " + std::to_string(db.size()) + " patterns across " +
                        std::to_string(companies) + " companies; expected " +
                        std::to_string(kShippedPatternCount) + " across " +
                        std::to_string(kShippedCompanyCount));
    }
}

std::vector<PatternMatch> match_url(std::string_view text, const PatternDb& db) {
    std::vector<PatternMatch> out;
    const auto parsed = url::parse_http_url(text);
    if (!parsed) {
        log::debug("match_url: unparseable URL " + std::string(text));
        return out;
    }
    for (const auto& p : db.patterns()) {
        if (p.matches(*parsed)) out.push_back({p.pattern_id(), p.company()});
    }
    return out;
}

std::vector<UrlMatch> match_chain(const resolve::RedirectChain& chain, const PatternDb& db) {
    std::vector<UrlMatch> out;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& hop : chain.hops) {
        for (auto& m : match_url(hop.url, db)) {
            if (seen.emplace(m.pattern_id, hop.url).second) {
                out.push_back({hop.url, std::move(m.pattern_id), std::move(m.company)});
            }
        }
    }
    return out;
}

AffiliateVerdict detect_affiliate(const ContentItem& item,
                                  const std::map<std::string, resolve::RedirectChain>& chains,
                                  const PatternDb& db) {
    AffiliateVerdict verdict;
    verdict.content_id = item.id;
    std::set<std::pair<std::string, std::string>> seen;
    auto add = [&](UrlMatch m) {
        if (seen.emplace(m.pattern_id, m.url).second) verdict.matches.push_back(std::move(m));
    };

    for (const auto& u : corpus::extract_urls(item.description)) {
        auto it = chains.find(u);
        if (it == chains.end()) {
            throw DataError("item " + item.id + ": no resolved chain for URL " + u);
        }
        const auto& chain = it->second;
        if (resolve::is_failure(chain.outcome)) {
            for (auto& m : match_url(chain.original_url, db)) {
                add({chain.original_url, std::move(m.pattern_id), std::move(m.company)});
            }
        } else {
            for (auto& m : match_chain(chain, db)) add(std::move(m));
        }
    }
    verdict.is_affiliate = !verdict.matches.empty();
    return verdict;
}

std::string format_verdict(const AffiliateVerdict& v) {
    json matches = json::array();
    for (const auto& m : v.matches) {
        matches.push_back({{"url", m.url}, {"pattern_id", m.pattern_id}, {"company", m.company}});
    }
    return json{{"content_id", v.content_id}, {"is_affiliate", v.is_affiliate}, {"matches", matches}}.dump();
}

AffiliateVerdict parse_verdict(std::string_view line, std::size_t line_no) {
    try {
        const json j = json::parse(line);
        AffiliateVerdict v;
        v.content_id = j.at("content_id").get<std::string>();
        v.is_affiliate = j.at("is_affiliate").get<bool>();
        for (const auto& m : j.at("matches")) {
            v.matches.push_back({m.at("url").get<std::string>(), m.at("pattern_id").get<std::string>(),
                                 m.at("company").get<std::string>()});
        }
        if (v.is_affiliate == v.matches.empty()) throw DataError("is_affiliate disagrees with matches");
        return v;
    } catch (const json::exception& e) {
        throw DataError("verdict line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError("verdict line " + std::to_string(line_no) + ": " + e.what());
    }
}

std::map<std::string, AffiliateVerdict> load_verdicts(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open verdicts file " + path.string());
    std::map<std::string, AffiliateVerdict> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto v = parse_verdict(line, line_no);
        auto key = v.content_id;
        out.insert_or_assign(std::move(key), std::move(v));
    }
    return out;
}

void write_verdicts(const std::filesystem::path& path, const std::vector<AffiliateVerdict>& verdicts) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write verdicts file " + path.string());
    for (const auto& v : verdicts) out << format_verdict(v) << '\n';
    if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace affscope::detect
