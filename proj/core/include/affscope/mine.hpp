#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "affscope/resolve.hpp"

namespace affscope::mine {

// Domain/sub-domain/path/parameter tallies over resolved hop URLs. Domains
// are registrable domains under the bundled public-suffix snapshot.
struct CooccurrenceTable {
    std::map<std::string, std::map<std::string, std::uint64_t>> domain_subdomain;
    std::map<std::string, std::map<std::string, std::uint64_t>> domain_path;
    std::map<std::pair<std::string, std::string>, std::uint64_t> domain_param;
    std::uint64_t observed_urls = 0;
    std::uint64_t skipped_urls = 0;

    // Count addition; associative and commutative.
    CooccurrenceTable& merge(const CooccurrenceTable& other);
    bool empty() const;
    bool operator==(const CooccurrenceTable&) const = default;
};

// Adds one hop URL. Returns false (and bumps skipped_urls) when it cannot be
// parsed or has no registrable domain.
bool observe(CooccurrenceTable& table, std::string_view url);

// Every hop of every chain; with workers > 1 the chains are sharded and the
// partial tables merged.
CooccurrenceTable build_tables(std::span<const resolve::RedirectChain> chains, unsigned workers = 1);

enum class CandidateKind { subdomain_fanout, path_fanout, param_cooccurrence };
std::string_view to_string(CandidateKind k);

struct PatternCandidate {
    CandidateKind kind;
    std::string domain;
    std::string detail;
    std::uint64_t count;

    bool operator==(const PatternCandidate&) const = default;
};

inline constexpr std::uint64_t kDefaultMinCount = 15;

// Param candidates need `count >= min_count` occurrences; fan-out candidates
// need that many distinct sub-domains (first path segments). Sorted by count
// descending, then domain, detail, kind.
std::vector<PatternCandidate> candidates(const CooccurrenceTable& table,
                                         std::uint64_t min_count = kDefaultMinCount);

// Tab-separated sheet with an empty disposition column for the reviewer.
void export_review_sheet(std::span<const PatternCandidate> cands, const std::filesystem::path& path);
std::string review_sheet_text(std::span<const PatternCandidate> cands);

}  // namespace affscope::mine
