#include "affscope/public_suffix.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

namespace affscope::psl {

extern const char* const kBundledSuffixRules;

namespace {

std::vector<std::string_view> labels_of(std::string_view host) {
    std::vector<std::string_view> labels;
    while (!host.empty()) {
        auto dot = host.find('.');
        labels.push_back(host.substr(0, dot));
        if (dot == std::string_view::npos) break;
        host.remove_prefix(dot + 1);
    }
    return labels;
}

std::string join_tail(const std::vector<std::string_view>& labels, std::size_t from) {
    std::string out;
    for (std::size_t i = from; i < labels.size(); ++i) {
        if (!out.empty()) out += '.';
        out += labels[i];
    }
    return out;
}

std::string normalize(std::string_view host) {
    std::string h(host);
    std::transform(h.begin(), h.end(), h.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    while (!h.empty() && h.back() == '.') h.pop_back();
    return h;
}

}  // namespace

bool is_ip_literal(std::string_view host) {
    if (!host.empty() && host.front() == '[') return true;
    int dots = 0;
    for (char c : host) {
        if (c == '.') {
            ++dots;
        } else if (!std::isdigit(static_cast<unsigned char>(c))) {
            return false;
        }
    }
    return dots == 3;
}

SuffixList SuffixList::parse(std::string_view text) {
    SuffixList list;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        // A rule is the first whitespace-delimited token on the line.
        auto start = line.find_first_not_of(" \t\r");
        if (start == std::string_view::npos) continue;
        line.remove_prefix(start);
        line = line.substr(0, line.find_first_of(" \t\r"));
        if (line.empty() || line.starts_with("//")) continue;

        std::string rule = normalize(line);
        if (rule.starts_with("!")) {
            list.exceptions_.insert(rule.substr(1));
        } else if (rule.starts_with("*.")) {
            list.wildcards_.insert(rule.substr(2));
        } else {
            list.rules_.insert(std::move(rule));
        }
    }
    return list;
}

const SuffixList& SuffixList::bundled() {
    static const SuffixList list = parse(kBundledSuffixRules);
    return list;
}

std::string SuffixList::public_suffix(std::string_view host_in) const {
    const std::string host = normalize(host_in);
    const auto labels = labels_of(host);
    if (labels.empty()) return {};

    // Scan from the longest candidate; the first hit is the longest match.
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const std::string candidate = join_tail(labels, i);
        if (exceptions_.contains(candidate)) {
            return join_tail(labels, i + 1);
        }
        if (rules_.contains(candidate)) {
            return candidate;
        }
        if (i + 1 < labels.size() && wildcards_.contains(join_tail(labels, i + 1))) {
            return candidate;
        }
    }
    return std::string(labels.back());
}

std::optional<std::string> SuffixList::registrable_domain(std::string_view host_in) const {
    const std::string host = normalize(host_in);
    if (host.empty()) return std::nullopt;
    if (is_ip_literal(host)) return host;

    const std::string suffix = public_suffix(host);
    if (suffix.size() >= host.size()) return std::nullopt;
    const auto head = std::string_view(host).substr(0, host.size() - suffix.size() - 1);
    const auto dot = head.rfind('.');
    return std::string(dot == std::string_view::npos ? head : head.substr(dot + 1)) + "." + suffix;
}

std::string SuffixList::subdomain(std::string_view host_in) const {
    const std::string host = normalize(host_in);
    const auto domain = registrable_domain(host);
    if (!domain || domain->size() >= host.size()) return {};
    return host.substr(0, host.size() - domain->size() - 1);
}

}  // namespace affscope::psl
