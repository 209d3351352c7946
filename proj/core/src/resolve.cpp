#include "affscope/resolve.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <thread>

#include "affscope/error.hpp"
#include "affscope/url.hpp"
#include "json.hpp"

namespace affscope::resolve {

using nlohmann::json;

std::string_view to_string(Mechanism m) {
    switch (m) {
        case Mechanism::http_redirect: return "http_redirect";
        case Mechanism::meta_refresh: return "meta_refresh";
        case Mechanism::terminal: return "terminal";
    }
    return "terminal";
}

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::resolved: return "resolved";
        case Outcome::timeout: return "timeout";
        case Outcome::http_error: return "http_error";
        case Outcome::loop_detected: return "loop_detected";
        case Outcome::depth_exceeded: return "depth_exceeded";
        case Outcome::fetch_failed: return "fetch_failed";
    }
    return "fetch_failed";
}

std::optional<Mechanism> parse_mechanism(std::string_view s) {
    for (auto m : {Mechanism::http_redirect, Mechanism::meta_refresh, Mechanism::terminal}) {
        if (to_string(m) == s) return m;
    }
    return std::nullopt;
}

std::optional<Outcome> parse_outcome(std::string_view s) {
    for (auto o : {Outcome::resolved, Outcome::timeout, Outcome::http_error, Outcome::loop_detected,
                   Outcome::depth_exceeded, Outcome::fetch_failed}) {
        if (to_string(o) == s) return o;
    }
    return std::nullopt;
}

bool is_failure(Outcome o) {
    return o == Outcome::timeout || o == Outcome::http_error || o == Outcome::fetch_failed;
}

void validate(const RedirectChain& chain) {
    if (chain.hops.empty()) throw DataError("chain for " + chain.original_url + " has no hops");
    if (chain.hops.front().url != chain.original_url) {
        throw DataError("chain for " + chain.original_url + ": first hop differs from original_url");
    }
    for (std::size_t i = 0; i < chain.hops.size(); ++i) {
        const auto& hop = chain.hops[i];
        if (hop.mechanism == Mechanism::http_redirect && (hop.status < 300 || hop.status > 399)) {
            throw DataError("chain for " + chain.original_url + ": http_redirect hop with status " +
                            std::to_string(hop.status));
        }
        if (hop.mechanism == Mechanism::terminal && i + 1 != chain.hops.size()) {
            throw DataError("chain for " + chain.original_url + ": terminal hop before the end");
        }
    }
    const bool resolved = chain.outcome == Outcome::resolved;
    const bool final_matches = chain.final_url && *chain.final_url == chain.hops.back().url;
    if (resolved != final_matches) {
        throw DataError("chain for " + chain.original_url +
                        ": final_url must be present and equal the last hop iff resolved");
    }
}

void ResolvePolicy::validate() const {
    if (max_depth < 1) throw UsageError("max_depth must be >= 1");
    if (!(timeout_seconds >= 1.0) || !std::isfinite(timeout_seconds)) {
        throw UsageError("timeout must be >= 1 second");
    }
    if (max_parallel < 1) throw UsageError("max_parallel must be >= 1");
}

std::chrono::milliseconds ResolvePolicy::timeout() const {
    return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(timeout_seconds * 1000.0)));
}

const std::string* FetchResponse::header(std::string_view name) const {
    std::string key(name);
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    auto it = headers.find(key);
    return it == headers.end() ? nullptr : &it->second;
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n\f";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

bool is_ws(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f';
}

std::string decode_entities(std::string_view s) {
    static constexpr std::pair<std::string_view, char> kEntities[] = {
        {"&amp;", '&'}, {"&quot;", '"'}, {"&#39;", '\''}, {"&apos;", '\''},
        {"&lt;", '<'},  {"&gt;", '>'},
    };
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        bool replaced = false;
        if (s[i] == '&') {
            for (const auto& [name, ch] : kEntities) {
                if (lower(s.substr(i, name.size())) == name) {
                    out += ch;
                    i += name.size();
                    replaced = true;
                    break;
                }
            }
        }
        if (!replaced) out += s[i++];
    }
    return out;
}

// Attributes of the tag whose name ends at `pos`; advances pos past '>'.
std::map<std::string, std::string> read_attributes(std::string_view html, std::size_t& pos) {
    std::map<std::string, std::string> attrs;
    while (pos < html.size()) {
        while (pos < html.size() && (is_ws(html[pos]) || html[pos] == '/')) ++pos;
        if (pos >= html.size()) break;
        if (html[pos] == '>') {
            ++pos;
            break;
        }
        std::size_t name_start = pos;
        while (pos < html.size() && !is_ws(html[pos]) && html[pos] != '=' && html[pos] != '>' &&
               html[pos] != '/') {
            ++pos;
        }
        std::string name = lower(html.substr(name_start, pos - name_start));
        while (pos < html.size() && is_ws(html[pos])) ++pos;
        std::string value;
        if (pos < html.size() && html[pos] == '=') {
            ++pos;
            while (pos < html.size() && is_ws(html[pos])) ++pos;
            if (pos < html.size() && (html[pos] == '"' || html[pos] == '\'')) {
                const char quote = html[pos++];
                auto close = html.find(quote, pos);
                if (close == std::string_view::npos) close = html.size();
                value = html.substr(pos, close - pos);
                pos = std::min(close + 1, html.size());
            } else {
                std::size_t v = pos;
                while (pos < html.size() && !is_ws(html[pos]) && html[pos] != '>') ++pos;
                value = html.substr(v, pos - v);
            }
        }
        if (!name.empty() && !attrs.contains(name)) attrs.emplace(std::move(name), decode_entities(value));
    }
    return attrs;
}

// "5; URL='/next'" -> "/next"
std::optional<std::string> refresh_target(std::string_view content) {
    const std::string lowered = lower(content);
    std::size_t search = 0;
    while (true) {
        auto at = lowered.find("url", search);
        if (at == std::string::npos) return std::nullopt;
        std::size_t p = at + 3;
        while (p < lowered.size() && is_ws(lowered[p])) ++p;
        if (p < lowered.size() && lowered[p] == '=') {
            auto target = trim(content.substr(p + 1));
            if (target.size() >= 2 && (target.front() == '\'' || target.front() == '"') &&
                target.back() == target.front()) {
                target = trim(target.substr(1, target.size() - 2));
            } else if (!target.empty() && (target.front() == '\'' || target.front() == '"')) {
                target = trim(target.substr(1));
            }
            if (target.empty()) return std::nullopt;
            return std::string(target);
        }
        search = at + 3;
    }
}

}  // namespace

std::optional<std::string> parse_meta_refresh(std::string_view html, std::string_view base_url) {
    const std::string lowered = lower(html);
    std::size_t pos = 0;
    while ((pos = lowered.find("<meta", pos)) != std::string::npos) {
        pos += 5;
        if (pos < lowered.size() && !is_ws(lowered[pos]) && lowered[pos] != '/' && lowered[pos] != '>') {
            continue;  // <metadata> and friends
        }
        auto attrs = read_attributes(html, pos);
        auto equiv = attrs.find("http-equiv");
        if (equiv == attrs.end() || lower(trim(equiv->second)) != "refresh") continue;
        auto content = attrs.find("content");
        if (content == attrs.end()) continue;
        auto target = refresh_target(content->second);
        if (!target) continue;
        if (auto absolute = url::resolve_reference(base_url, *target)) return absolute;
        if (url::has_http_scheme(*target)) return target;
        return std::nullopt;
    }
    return std::nullopt;
}

RedirectChain resolve(const std::string& start, const ResolvePolicy& policy, const Fetcher& fetcher) {
    if (!url::has_http_scheme(start)) {
        throw UsageError("resolve: not an http(s) URL: " + start);
    }
    policy.validate();

    RedirectChain chain;
    chain.original_url = start;
    std::set<std::string> visited;
    std::string current = start;

    auto finish = [&](int status, Outcome outcome) {
        chain.hops.push_back({current, status, Mechanism::terminal});
        chain.outcome = outcome;
        if (outcome == Outcome::resolved) chain.final_url = current;
        return chain;
    };

    while (true) {
        if (!visited.insert(current).second) return finish(0, Outcome::loop_detected);
        if (!url::has_http_scheme(current)) return finish(0, Outcome::fetch_failed);

        const FetchResponse response = fetcher.fetch(current, policy.timeout());
        if (response.transport == FetchResponse::Transport::timeout) return finish(0, Outcome::timeout);
        if (response.transport == FetchResponse::Transport::failed) return finish(0, Outcome::fetch_failed);

        const int status = response.status;
        std::optional<std::string> next;
        Mechanism mechanism = Mechanism::terminal;
        if (status >= 300 && status <= 399) {
            const std::string* location = response.header("location");
            if (!location || trim(*location).empty()) return finish(status, Outcome::http_error);
            next = url::resolve_reference(current, trim(*location));
            mechanism = Mechanism::http_redirect;
        } else if (status >= 200 && status <= 299) {
            const std::string* type = response.header("content-type");
            if (type && lower(*type).find("html") != std::string::npos) {
                next = parse_meta_refresh(response.body, current);
                mechanism = Mechanism::meta_refresh;
            }
            if (!next) return finish(status, Outcome::resolved);
        } else {
            return finish(status, Outcome::http_error);
        }

        if (!next) return finish(status, Outcome::fetch_failed);
        chain.hops.push_back({current, status, mechanism});
        if (chain.hops.size() > static_cast<std::size_t>(policy.max_depth)) {
            chain.outcome = Outcome::depth_exceeded;
            return chain;
        }
        current = *next;
    }
}

std::map<std::string, RedirectChain> resolve_corpus(std::span<const std::string> urls,
                                                    const ResolvePolicy& policy,
                                                    const Fetcher& fetcher) {
    policy.validate();
    const std::set<std::string> distinct(urls.begin(), urls.end());
    const std::vector<std::string> work(distinct.begin(), distinct.end());
    std::vector<RedirectChain> results(work.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < work.size(); i = next++) {
            try {
                results[i] = resolve(work[i], policy, fetcher);
            } catch (const std::exception&) {
                results[i] = RedirectChain{work[i], {{work[i], 0, Mechanism::terminal}}, std::nullopt,
                                           Outcome::fetch_failed};
            }
        }
    };

    const auto threads = std::min<std::size_t>(static_cast<std::size_t>(policy.max_parallel), work.size());
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    std::map<std::string, RedirectChain> out;
    for (std::size_t i = 0; i < work.size(); ++i) out.emplace(work[i], std::move(results[i]));
    return out;
}

std::string format_chain(const RedirectChain& chain) {
    json hops = json::array();
    for (const auto& hop : chain.hops) {
        hops.push_back({{"url", hop.url},
                        {"status", hop.status},
                        {"mechanism", std::string(to_string(hop.mechanism))}});
    }
    json j = {{"original_url", chain.original_url},
              {"outcome", std::string(to_string(chain.outcome))},
              {"final_url", chain.final_url ? json(*chain.final_url) : json(nullptr)},
              {"hops", std::move(hops)}};
    return j.dump();
}

RedirectChain parse_chain(std::string_view line, std::size_t line_no) {
    const std::string where = "cache line " + std::to_string(line_no) + ": ";
    try {
        const json j = json::parse(line);
        RedirectChain chain;
        chain.original_url = j.at("original_url").get<std::string>();
        const auto outcome = parse_outcome(j.at("outcome").get<std::string>());
        if (!outcome) throw DataError("unknown outcome");
        chain.outcome = *outcome;
        const auto& final_url = j.at("final_url");
        if (!final_url.is_null()) chain.final_url = final_url.get<std::string>();
        for (const auto& hop : j.at("hops")) {
            const auto mechanism = parse_mechanism(hop.at("mechanism").get<std::string>());
            if (!mechanism) throw DataError("unknown mechanism");
            chain.hops.push_back({hop.at("url").get<std::string>(), hop.at("status").get<int>(), *mechanism});
        }
        validate(chain);
        return chain;
    } catch (const json::exception& e) {
        throw DataError(where + e.what());
    } catch (const DataError& e) {
        throw DataError(where + e.what());
    }
}

std::map<std::string, RedirectChain> load_cache(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open cache file " + path.string());
    std::map<std::string, RedirectChain> chains;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto chain = parse_chain(line, line_no);
        auto key = chain.original_url;
        chains.insert_or_assign(std::move(key), std::move(chain));
    }
    return chains;
}

void write_cache(const std::filesystem::path& path, const std::map<std::string, RedirectChain>& chains) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write cache file " + path.string());
    for (const auto& [key, chain] : chains) out << format_chain(chain) << '\n';
    if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace affscope::resolve
