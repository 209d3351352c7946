#include "affscope/http_fetcher.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "affscope/url.hpp"

#ifdef AFFSCOPE_WITH_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

namespace affscope::resolve {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

FetchResponse failure(FetchResponse::Transport transport, std::string error) {
    FetchResponse r;
    r.transport = transport;
    r.error = std::move(error);
    return r;
}

}  // namespace

bool HttpFetcher::tls_supported() {
#ifdef AFFSCOPE_WITH_TLS
    return true;
#else
    return false;
#endif
}

std::optional<HttpFetcher::Endpoint> parse_endpoint(std::string_view text) {
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon == 0) return std::nullopt;
    HttpFetcher::Endpoint ep;
    ep.host = std::string(text.substr(0, colon));
    auto digits = text.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), ep.port);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || ep.port < 1 || ep.port > 65535) {
        return std::nullopt;
    }
    return ep;
}

FetchResponse HttpFetcher::fetch(const std::string& target_url, std::chrono::milliseconds timeout) const {
    const auto parsed = url::parse_http_url(target_url);
    if (!parsed) return failure(FetchResponse::Transport::failed, "unparseable URL");

    std::unique_ptr<httplib::Client> client;
    httplib::Headers headers{{"User-Agent", options_.user_agent}, {"Accept", "*/*"}};
    if (options_.connect_to) {
        client = std::make_unique<httplib::Client>(options_.connect_to->host, options_.connect_to->port);
        std::string host = parsed->host;
        if (parsed->port) host += ":" + std::to_string(*parsed->port);
        headers.emplace("Host", host);
    } else if (parsed->scheme == "https") {
#ifdef AFFSCOPE_WITH_TLS
        client = std::make_unique<httplib::Client>("https://" + parsed->host + ":" +
                                                   std::to_string(parsed->port.value_or(443)));
        // Only the redirect structure is recorded, never page content.
        client->enable_server_certificate_verification(false);
#else
        return failure(FetchResponse::Transport::failed, "https not supported in this build");
#endif
    } else {
        client = std::make_unique<httplib::Client>(parsed->host, parsed->port.value_or(80));
    }

    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client->set_connection_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));
    client->set_read_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));
    client->set_write_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));
    client->set_follow_location(false);
    client->set_keep_alive(false);

    FetchResponse out;
    bool truncated = false;
    const auto started = std::chrono::steady_clock::now();
    auto result = client->Get(
        parsed->target(), headers,
        [&](const httplib::Response& response) {
            out.status = response.status;
            for (const auto& [name, value] : response.headers) {
                out.headers.emplace(lower(name), value);
            }
            return true;
        },
        [&](const char* data, std::size_t length) {
            const std::size_t room = options_.max_body_bytes - out.body.size();
            out.body.append(data, std::min(room, length));
            if (length > room) {
                truncated = true;
                return false;
            }
            return true;
        });

    if (result.error() == httplib::Error::Success || (truncated && out.status != 0)) return out;

    const auto elapsed = std::chrono::steady_clock::now() - started;
    const bool timed_out = result.error() == httplib::Error::ConnectionTimeout ||
                           (result.error() == httplib::Error::Read && elapsed >= timeout * 9 / 10);
    return failure(timed_out ? FetchResponse::Transport::timeout : FetchResponse::Transport::failed,
                   httplib::to_string(result.error()));
}

}  // namespace affscope::resolve
