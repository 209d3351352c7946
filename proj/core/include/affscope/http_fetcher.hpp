#pragma once

#include <optional>
#include <string>

#include "affscope/resolve.hpp"

namespace affscope::resolve {

// Fetcher backed by cpp-httplib. https needs the library to be built with
// OpenSSL (AFFSCOPE_WITH_TLS).
class HttpFetcher final : public Fetcher {
public:
    struct Endpoint {
        std::string host;
        int port = 80;
    };

    struct Options {
        // Send every request to this plain-HTTP endpoint instead of the URL's
        // host, keeping the original Host header (like curl --connect-to).
        std::optional<Endpoint> connect_to;
        std::string user_agent = "affscope/1.0";
        std::size_t max_body_bytes = 1 << 20;
    };

    HttpFetcher() = default;
    explicit HttpFetcher(Options options) : options_(std::move(options)) {}

    FetchResponse fetch(const std::string& url, std::chrono::milliseconds timeout) const override;

    static bool tls_supported();

private:
    Options options_;
};

// Parses "HOST:PORT". Returns std::nullopt when malformed.
std::optional<HttpFetcher::Endpoint> parse_endpoint(std::string_view text);

}  // namespace affscope::resolve
