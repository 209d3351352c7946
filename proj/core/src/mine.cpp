#include "affscope/mine.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <thread>

#include "affscope/error.hpp"
#include "affscope/public_suffix.hpp"
#include "affscope/url.hpp"

namespace affscope::mine {

std::string_view to_string(CandidateKind k) {
    switch (k) {
        case CandidateKind::subdomain_fanout: return "subdomain_fanout";
        case CandidateKind::path_fanout: return "path_fanout";
        case CandidateKind::param_cooccurrence: return "param_cooccurrence";
    }
    return "param_cooccurrence";
}

CooccurrenceTable& CooccurrenceTable::merge(const CooccurrenceTable& other) {
    for (const auto& [domain, subs] : other.domain_subdomain) {
        auto& mine = domain_subdomain[domain];
        for (const auto& [sub, n] : subs) mine[sub] += n;
    }
    for (const auto& [domain, paths] : other.domain_path) {
        auto& mine = domain_path[domain];
        for (const auto& [seg, n] : paths) mine[seg] += n;
    }
    for (const auto& [key, n] : other.domain_param) domain_param[key] += n;
    observed_urls += other.observed_urls;
    skipped_urls += other.skipped_urls;
    return *this;
}

bool CooccurrenceTable::empty() const {
    return domain_subdomain.empty() && domain_path.empty() && domain_param.empty();
}

bool observe(CooccurrenceTable& table, std::string_view text) {
    const auto parsed = url::parse_http_url(text);
    if (!parsed) {
        ++table.skipped_urls;
        return false;
    }
    const auto& psl = psl::SuffixList::bundled();
    const auto domain = psl.registrable_domain(parsed->host);
    if (!domain) {
        ++table.skipped_urls;
        return false;
    }
    ++table.observed_urls;

    if (auto sub = psl.subdomain(parsed->host); !sub.empty()) {
        ++table.domain_subdomain[*domain][sub];
    }

    std::string_view path = parsed->path;
    if (path.starts_with('/')) path.remove_prefix(1);
    if (auto segment = path.substr(0, path.find('/')); !segment.empty()) {
        ++table.domain_path[*domain][std::string(segment)];
    }

    // A parameter repeated inside one URL is one co-occurrence.
    auto names = parsed->param_names();
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    for (auto& name : names) ++table.domain_param[{*domain, std::move(name)}];
    return true;
}

CooccurrenceTable build_tables(std::span<const resolve::RedirectChain> chains, unsigned workers) {
    auto count_range = [&](std::size_t begin, std::size_t end) {
        CooccurrenceTable t;
        for (std::size_t i = begin; i < end; ++i) {
            for (const auto& hop : chains[i].hops) observe(t, hop.url);
        }
        return t;
    };

    workers = std::max(1u, workers);
    if (workers == 1 || chains.size() < 2 * workers) return count_range(0, chains.size());

    std::vector<CooccurrenceTable> partial(workers);
    {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (chains.size() + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = std::min(chains.size(), w * chunk);
            const std::size_t end = std::min(chains.size(), begin + chunk);
            pool.emplace_back([&, w, begin, end] { partial[w] = count_range(begin, end); });
        }
    }
    CooccurrenceTable total;
    for (const auto& t : partial) total.merge(t);
    return total;
}

namespace {

std::string fanout_detail(const std::map<std::string, std::uint64_t>& counts, std::string_view noun) {
    std::vector<std::pair<std::string, std::uint64_t>> items(counts.begin(), counts.end());
    std::stable_sort(items.begin(), items.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    std::string out = std::to_string(counts.size()) + " distinct " + std::string(noun) + "; top:";
    for (std::size_t i = 0; i < std::min<std::size_t>(5, items.size()); ++i) {
        out += (i == 0 ? " " : ",") + items[i].first + "=" + std::to_string(items[i].second);
    }
    return out;
}

}  // namespace

std::vector<PatternCandidate> candidates(const CooccurrenceTable& table, std::uint64_t min_count) {
    if (min_count < 1) throw UsageError("min_count must be >= 1");
    std::vector<PatternCandidate> out;
    for (const auto& [key, n] : table.domain_param) {
        if (n >= min_count) out.push_back({CandidateKind::param_cooccurrence, key.first, key.second, n});
    }
    for (const auto& [domain, subs] : table.domain_subdomain) {
        if (subs.size() >= min_count) {
            out.push_back({CandidateKind::subdomain_fanout, domain, fanout_detail(subs, "subdomains"),
                           subs.size()});
        }
    }
    for (const auto& [domain, paths] : table.domain_path) {
        if (paths.size() >= min_count) {
            out.push_back({CandidateKind::path_fanout, domain, fanout_detail(paths, "paths"), paths.size()});
        }
    }
    std::sort(out.begin(), out.end(), [](const PatternCandidate& a, const PatternCandidate& b) {
        if (a.count != b.count) return a.count > b.count;
        if (a.domain != b.domain) return a.domain < b.domain;
        if (a.detail != b.detail) return a.detail < b.detail;
        return a.kind < b.kind;
    });
    return out;
}

std::string review_sheet_text(std::span<const PatternCandidate> cands) {
    auto clean = [](std::string s) {
        std::replace_if(s.begin(), s.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
        return s;
    };
    std::string out = "kind\tdomain\tdetail\tcount\tdisposition\n";
    for (const auto& c : cands) {
        out += std::string(to_string(c.kind)) + "\t" + clean(c.domain) + "\t" + clean(c.detail) + "\t" +
               std::to_string(c.count) + "\t\n";
    }
    return out;
}

void export_review_sheet(std::span<const PatternCandidate> cands, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write review sheet " + path.string());
    out << review_sheet_text(cands);
    if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace affscope::mine
