#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace affscope::resolve {

enum class Mechanism { http_redirect, meta_refresh, terminal };
enum class Outcome { resolved, timeout, http_error, loop_detected, depth_exceeded, fetch_failed };

std::string_view to_string(Mechanism m);
std::string_view to_string(Outcome o);
std::optional<Mechanism> parse_mechanism(std::string_view s);
std::optional<Outcome> parse_outcome(std::string_view s);

// True for outcomes whose hop list is not trustworthy past the first URL.
bool is_failure(Outcome o);

struct RedirectHop {
    std::string url;
    int status = 0;  // 0 when no response was obtained for this URL
    Mechanism mechanism = Mechanism::terminal;

    bool operator==(const RedirectHop&) const = default;
};

struct RedirectChain {
    std::string original_url;
    std::vector<RedirectHop> hops;
    std::optional<std::string> final_url;
    Outcome outcome = Outcome::fetch_failed;

    bool operator==(const RedirectChain&) const = default;
};

// Throws DataError naming the broken invariant.
void validate(const RedirectChain& chain);

struct ResolvePolicy {
    int max_depth = 10;
    double timeout_seconds = 30.0;
    int max_parallel = 16;

    void validate() const;
    std::chrono::milliseconds timeout() const;
};

struct FetchResponse {
    enum class Transport { ok, timeout, failed };

    Transport transport = Transport::ok;
    int status = 0;
    std::map<std::string, std::string> headers;  // lowercased names
    std::string body;
    std::string error;

    const std::string* header(std::string_view name) const;
};

// One GET without following redirects. Implementations must be safe to call
// from several threads at once.
class Fetcher {
public:
    virtual ~Fetcher() = default;
    virtual FetchResponse fetch(const std::string& url, std::chrono::milliseconds timeout) const = 0;
};

// Target of the first <meta http-equiv="refresh" content="...url=..."> in the
// document, resolved against base_url.
std::optional<std::string> parse_meta_refresh(std::string_view html, std::string_view base_url);

// Follows 3xx Location headers and meta refresh on HTML 2xx pages. Throws
// UsageError when url is not http(s).
RedirectChain resolve(const std::string& url, const ResolvePolicy& policy, const Fetcher& fetcher);

// One chain per distinct URL, at most policy.max_parallel fetches in flight.
std::map<std::string, RedirectChain> resolve_corpus(std::span<const std::string> urls,
                                                    const ResolvePolicy& policy,
                                                    const Fetcher& fetcher);

// Cache file: one JSON record per line.
std::string format_chain(const RedirectChain& chain);
RedirectChain parse_chain(std::string_view line, std::size_t line_no = 0);
std::map<std::string, RedirectChain> load_cache(const std::filesystem::path& path);
void write_cache(const std::filesystem::path& path, const std::map<std::string, RedirectChain>& chains);

}  // namespace affscope::resolve
