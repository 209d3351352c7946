#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace affscope::url {

// Generic RFC 3986 split of an absolute or relative reference. Components
// that are absent are std::nullopt; an empty-but-present component ("?" with
// nothing after it) is an empty string.
struct Reference {
    std::optional<std::string> scheme;     // lowercased
    std::optional<std::string> authority;  // raw, "user@host:port"
    std::string path;
    std::optional<std::string> query;
    std::optional<std::string> fragment;

    std::string to_string() const;
};

Reference split(std::string_view ref);

// RFC 3986 section 5.2 reference resolution. Returns std::nullopt when the
// base is not absolute.
std::optional<std::string> resolve_reference(std::string_view base, std::string_view ref);

std::string remove_dot_segments(std::string_view path);

// Parsed absolute http(s) URL with a normalized host.
struct Url {
    std::string scheme;  // "http" or "https"
    std::string host;    // lowercased, no trailing dot
    std::optional<int> port;
    std::string path;    // "/" when empty
    std::optional<std::string> query;

    // Names of query parameters in order of appearance (duplicates kept).
    std::vector<std::string> param_names() const;
    // "/path?query", what goes on an HTTP request line.
    std::string target() const;
};

// Accepts only http/https URLs with a non-empty host.
std::optional<Url> parse_http_url(std::string_view text);

bool has_http_scheme(std::string_view text);

}  // namespace affscope::url
