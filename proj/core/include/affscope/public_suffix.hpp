#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>

namespace affscope::psl {

// Public Suffix List matcher (normal, wildcard and exception rules).
class SuffixList {
public:
    // Parses the textual .dat format. Comment and blank lines are skipped.
    static SuffixList parse(std::string_view text);

    // The snapshot compiled into the library.
    static const SuffixList& bundled();

    std::size_t rule_count() const { return rules_.size() + wildcards_.size() + exceptions_.size(); }

    // Longest public suffix of host; falls back to the last label ("*" rule).
    std::string public_suffix(std::string_view host) const;

    // Public suffix plus one label. Hosts that are themselves a public suffix
    // have none. IP literals are returned unchanged.
    std::optional<std::string> registrable_domain(std::string_view host) const;

    // Labels left of the registrable domain ("a.b" for "a.b.example.com"),
    // empty when there are none.
    std::string subdomain(std::string_view host) const;

private:
    std::unordered_set<std::string> rules_;
    std::unordered_set<std::string> wildcards_;   // "ck" for "*.ck"
    std::unordered_set<std::string> exceptions_;  // "www.ck" for "!www.ck"
};

bool is_ip_literal(std::string_view host);

}  // namespace affscope::psl
