#include "affscope/url.hpp"

#include <algorithm>
#include <cctype>

namespace affscope::url {

namespace {

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool valid_scheme(std::string_view s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '+' || c == '-' || c == '.';
    });
}

std::string merge_paths(const Reference& base, std::string_view ref_path) {
    if (base.authority && base.path.empty()) {
        return "/" + std::string(ref_path);
    }
    auto slash = base.path.rfind('/');
    if (slash == std::string::npos) return std::string(ref_path);
    return base.path.substr(0, slash + 1) + std::string(ref_path);
}

}  // namespace

std::string Reference::to_string() const {
    std::string out;
    if (scheme) out += *scheme + ":";
    if (authority) out += "//" + *authority;
    out += path;
    if (query) out += "?" + *query;
    if (fragment) out += "#" + *fragment;
    return out;
}

Reference split(std::string_view ref) {
    Reference r;
    std::string_view rest = ref;

    auto colon = rest.find(':');
    auto delim = rest.find_first_of("/?#");
    if (colon != std::string_view::npos && (delim == std::string_view::npos || colon < delim) &&
        valid_scheme(rest.substr(0, colon))) {
        r.scheme = to_lower(rest.substr(0, colon));
        rest.remove_prefix(colon + 1);
    }

    if (rest.substr(0, 2) == "//") {
        rest.remove_prefix(2);
        auto end = rest.find_first_of("/?#");
        r.authority = std::string(rest.substr(0, end));
        rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end);
    }

    auto hash = rest.find('#');
    if (hash != std::string_view::npos) {
        r.fragment = std::string(rest.substr(hash + 1));
        rest = rest.substr(0, hash);
    }
    auto qmark = rest.find('?');
    if (qmark != std::string_view::npos) {
        r.query = std::string(rest.substr(qmark + 1));
        rest = rest.substr(0, qmark);
    }
    r.path = std::string(rest);
    return r;
}

std::string remove_dot_segments(std::string_view path) {
    std::string input(path);
    std::string output;
    while (!input.empty()) {
        if (input.starts_with("../")) {
            input.erase(0, 3);
        } else if (input.starts_with("./")) {
            input.erase(0, 2);
        } else if (input.starts_with("/./")) {
            input.erase(0, 2);
        } else if (input == "/.") {
            input = "/";
        } else if (input.starts_with("/../") || input == "/..") {
            input = input.size() == 3 ? "/" : input.substr(3);
            auto last = output.rfind('/');
            output.erase(last == std::string::npos ? 0 : last);
        } else if (input == "." || input == "..") {
            input.clear();
        } else {
            auto next = input.find('/', input.front() == '/' ? 1 : 0);
            output += input.substr(0, next);
            input.erase(0, next);
        }
    }
    return output;
}

std::optional<std::string> resolve_reference(std::string_view base_text, std::string_view ref_text) {
    const Reference base = split(base_text);
    if (!base.scheme) return std::nullopt;
    const Reference ref = split(ref_text);

    Reference t;
    if (ref.scheme) {
        t.scheme = ref.scheme;
        t.authority = ref.authority;
        t.path = remove_dot_segments(ref.path);
        t.query = ref.query;
    } else {
        if (ref.authority) {
            t.authority = ref.authority;
            t.path = remove_dot_segments(ref.path);
            t.query = ref.query;
        } else {
            if (ref.path.empty()) {
                t.path = base.path;
                t.query = ref.query ? ref.query : base.query;
            } else {
                if (ref.path.front() == '/') {
                    t.path = remove_dot_segments(ref.path);
                } else {
                    t.path = remove_dot_segments(merge_paths(base, ref.path));
                }
                t.query = ref.query;
            }
            t.authority = base.authority;
        }
        t.scheme = base.scheme;
    }
    t.fragment = ref.fragment;
    return t.to_string();
}

std::vector<std::string> Url::param_names() const {
    std::vector<std::string> names;
    if (!query) return names;
    std::string_view q = *query;
    while (!q.empty()) {
        auto amp = q.find('&');
        auto pair = q.substr(0, amp);
        auto eq = pair.find('=');
        auto name = pair.substr(0, eq);
        if (!name.empty()) names.emplace_back(name);
        if (amp == std::string_view::npos) break;
        q.remove_prefix(amp + 1);
    }
    return names;
}

std::string Url::target() const {
    return query ? path + "?" + *query : path;
}

bool has_http_scheme(std::string_view text) {
    auto r = split(text);
    return r.scheme && (*r.scheme == "http" || *r.scheme == "https");
}

std::optional<Url> parse_http_url(std::string_view text) {
    if (std::any_of(text.begin(), text.end(),
                    [](unsigned char c) { return c <= 0x20 || c == 0x7f; })) {
        return std::nullopt;
    }
    Reference r = split(text);
    if (!r.scheme || (*r.scheme != "http" && *r.scheme != "https") || !r.authority) {
        return std::nullopt;
    }

    std::string_view authority = *r.authority;
    if (auto at = authority.rfind('@'); at != std::string_view::npos) {
        authority.remove_prefix(at + 1);
    }

    Url u;
    u.scheme = *r.scheme;
    std::string_view host = authority;
    std::string_view port;
    if (!authority.empty() && authority.front() == '[') {
        auto close = authority.find(']');
        if (close == std::string_view::npos) return std::nullopt;
        host = authority.substr(0, close + 1);
        auto after = authority.substr(close + 1);
        if (!after.empty()) {
            if (after.front() != ':') return std::nullopt;
            port = after.substr(1);
        }
    } else if (auto c = authority.rfind(':'); c != std::string_view::npos) {
        host = authority.substr(0, c);
        port = authority.substr(c + 1);
    }

    if (!port.empty()) {
        if (port.size() > 5 ||
            !std::all_of(port.begin(), port.end(), [](unsigned char c) { return std::isdigit(c); })) {
            return std::nullopt;
        }
        int value = std::stoi(std::string(port));
        if (value > 65535) return std::nullopt;
        u.port = value;
    }

    u.host = to_lower(host);
    while (!u.host.empty() && u.host.back() == '.') u.host.pop_back();
    if (u.host.empty()) return std::nullopt;

    u.path = r.path.empty() ? "/" : r.path;
    u.query = r.query;
    return u;
}

}  // namespace affscope::url
