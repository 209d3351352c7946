#include "affscope/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "affscope/corpus.hpp"
#include "affscope/detect.hpp"
#include "affscope/error.hpp"
#include "affscope/log.hpp"
#include "affscope/mine.hpp"
#include "json.hpp"

#ifndef AFFSCOPE_INSTALL_DATA_DIR
#define AFFSCOPE_INSTALL_DATA_DIR ""
#endif
#ifndef AFFSCOPE_SOURCE_DATA_DIR
#define AFFSCOPE_SOURCE_DATA_DIR ""
#endif

namespace affscope::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::validate() const {
    policy.validate();
    if (min_count < 1) throw UsageError("--min-count must be >= 1");
    if (!(cluster_threshold >= 0.0)) throw UsageError("--cluster-threshold must be >= 0");
    if (max_cluster_sentences < 1) throw UsageError("--max-cluster-sentences must be >= 1");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw UsageError("--alpha must be in (0, 1]");
    if (!(max_failure_rate >= 0.0 && max_failure_rate <= 1.0)) {
        throw UsageError("--max-failure-rate must be in [0, 1]");
    }
}

fs::path default_data_dir() {
    if (const char* env = std::getenv("AFFSCOPE_DATA_DIR"); env && *env) return env;
    for (const char* dir : {AFFSCOPE_INSTALL_DATA_DIR, AFFSCOPE_SOURCE_DATA_DIR}) {
        std::error_code ec;
        if (*dir && fs::exists(fs::path(dir) / "patterns.jsonl", ec)) return dir;
    }
    return "data";
}

fs::path default_patterns_path() {
    return default_data_dir() / "patterns.jsonl";
}

namespace {

void require(const fs::path& p, std::string_view flag) {
    if (p.empty()) throw UsageError(std::string(flag) + " is required");
}

fs::path patterns_path(const RunConfig& cfg) {
    return cfg.patterns.empty() ? default_patterns_path() : cfg.patterns;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("write failed for " + path.string());
}

std::string fixed(double v, int decimals = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string pad(std::string s, std::size_t width, bool left = false) {
    if (s.size() >= width) return s;
    return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

}  // namespace

ResolveSummary run_resolve(const RunConfig& cfg, const resolve::Fetcher& fetcher) {
    require(cfg.input, "--input");
    require(cfg.cache, "--cache");
    cfg.validate();
    const auto items = corpus::load_corpus(cfg.input);

    std::set<std::string> urls;
    for (const auto& item : items) {
        for (auto& u : corpus::extract_urls(item.description)) urls.insert(std::move(u));
    }

    std::map<std::string, resolve::RedirectChain> cache;
    if (fs::exists(cfg.cache)) cache = resolve::load_cache(cfg.cache);

    ResolveSummary s;
    s.urls = urls.size();
    std::vector<std::string> todo;
    for (const auto& u : urls) {
        if (cache.contains(u)) {
            ++s.reused;
        } else {
            todo.push_back(u);
        }
    }
    log::info("resolving " + std::to_string(todo.size()) + " URLs (" + std::to_string(s.reused) + " cached)");
    for (auto& [u, chain] : resolve::resolve_corpus(todo, cfg.policy, fetcher)) {
        cache.insert_or_assign(u, std::move(chain));
    }
    s.resolved = todo.size();
    for (const auto& u : urls) {
        if (resolve::is_failure(cache.at(u).outcome)) ++s.failed;
    }
    resolve::write_cache(cfg.cache, cache);
    return s;
}

DetectSummary run_detect(const RunConfig& cfg) {
    require(cfg.input, "--input");
    require(cfg.cache, "--cache");
    require(cfg.output, "--output");
    const auto items = corpus::load_corpus(cfg.input);
    const auto chains = resolve::load_cache(cfg.cache);
    const auto db = detect::load_pattern_db(patterns_path(cfg));

    DetectSummary s;
    std::vector<detect::AffiliateVerdict> verdicts;
    verdicts.reserve(items.size());
    for (const auto& item : items) {
        verdicts.push_back(detect::detect_affiliate(item, chains, db));
        if (verdicts.back().is_affiliate) ++s.affiliate;
    }
    s.items = items.size();
    detect::write_verdicts(cfg.output, verdicts);
    return s;
}

MineSummary run_mine(const RunConfig& cfg) {
    require(cfg.cache, "--cache");
    require(cfg.output, "--output");
    cfg.validate();
    const auto cache = resolve::load_cache(cfg.cache);
    std::vector<resolve::RedirectChain> chains;
    for (const auto& [u, chain] : cache) {
        if (!resolve::is_failure(chain.outcome)) chains.push_back(chain);
    }
    const auto table = mine::build_tables(chains, std::max(1u, std::thread::hardware_concurrency()));
    const auto cands = mine::candidates(table, cfg.min_count);
    mine::export_review_sheet(cands, cfg.output);
    return {chains.size(), cands.size()};
}

DiscloseSummary run_disclose(const RunConfig& cfg) {
    require(cfg.input, "--input");
    require(cfg.output, "--output");
    cfg.validate();
    auto items = corpus::load_corpus(cfg.input);
    if (cfg.affiliate_only) {
        require(cfg.verdicts, "--verdicts (with --affiliate-only)");
        const auto verdicts = detect::load_verdicts(cfg.verdicts);
        std::erase_if(items, [&](const ContentItem& item) {
            auto it = verdicts.find(item.id);
            if (it == verdicts.end()) throw DataError("no verdict for item " + item.id);
            return !it->second.is_affiliate;
        });
    }

    DiscloseSummary s;
    s.items = items.size();
    const auto records = disclose::extract_disclosures(items);
    s.records = records.size();
    disclose::write_records(cfg.output, records);

    // Distinct English sentences in first-seen order, sampled down to the cap.
    std::vector<disclose::Sentence> sentences;
    std::unordered_set<std::string> seen;
    for (const auto& item : items) {
        if (!corpus::is_english(item.description)) continue;
        for (auto& sentence : disclose::segment(item.description, item.id)) {
            if (seen.insert(sentence.text).second) sentences.push_back(std::move(sentence));
        }
    }
    if (sentences.size() > cfg.max_cluster_sentences) {
        std::vector<std::size_t> idx(sentences.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::mt19937_64 rng(cfg.seed);
        // Partial Fisher-Yates; rng() % bound keeps the draw library-independent.
        for (std::size_t i = 0; i < cfg.max_cluster_sentences; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng() % (idx.size() - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(cfg.max_cluster_sentences);
        std::sort(idx.begin(), idx.end());
        std::vector<disclose::Sentence> kept;
        kept.reserve(idx.size());
        for (auto i : idx) kept.push_back(std::move(sentences[i]));
        sentences = std::move(kept);
    }

    s.digest_path = cfg.digest;
    if (s.digest_path.empty()) {
        s.digest_path = cfg.output;
        s.digest_path.replace_extension(".digest.jsonl");
    }
    std::string text;
    if (!sentences.empty()) {
        const auto bag = disclose::vectorize(sentences);
        const auto tree = disclose::hcluster(bag.vectors, cfg.linkage);
        const auto clusters = disclose::cut(tree, cfg.cluster_threshold);
        s.clusters = clusters.size();
        for (const auto& d : disclose::digest(sentences, bag, clusters)) text += disclose::format_digest(d) + "\n";
    }
    s.clustered = sentences.size();
    write_text(s.digest_path, text);
    return s;
}

Report build_report(std::span<const ContentItem> items, const stats::VerdictMap& verdicts,
                    std::span<const disclose::DisclosureRecord> disclosures, const RunConfig& cfg) {
    Report r;
    r.overall = stats::prevalence_overall(items, verdicts, disclosures);
    r.categories = stats::prevalence_by_category(items, verdicts, disclosures, cfg.min_affiliate);
    r.types = stats::disclosure_type_prevalence(items, verdicts, disclosures);
    r.tests = stats::engagement_comparison(items, verdicts, cfg.alpha);
    return r;
}

namespace {

json category_json(std::string_view record, const stats::CategoryStats& c) {
    return json{{"record", record},
                {"platform", std::string(to_string(c.platform))},
                {"category", c.category},
                {"n_items", c.n_items},
                {"n_affiliate", c.n_affiliate},
                {"n_disclosed", c.n_disclosed},
                {"unique_disclosing_creators", c.unique_disclosing_creators},
                {"affiliate_pct", c.affiliate_pct},
                {"disclosed_raw_pct", c.disclosed_raw_pct},
                {"disclosed_scaled_pct", c.disclosed_scaled_pct},
                {"excluded", c.excluded}};
}

}  // namespace

std::string report_jsonl(const Report& r, double alpha) {
    std::string out;
    for (const auto& c : r.overall) out += category_json("overall", c).dump() + "\n";
    for (const auto& c : r.categories) out += category_json("category", c).dump() + "\n";
    for (const auto& t : r.types) {
        out += json{{"record", "disclosure_type"},
                    {"platform", std::string(to_string(t.platform))},
                    {"dtype", std::string(to_string(t.dtype))},
                    {"n_items", t.n_items},
                    {"n_affiliate", t.n_affiliate},
                    {"pct", t.pct}}
                   .dump() +
               "\n";
    }
    for (const auto& t : r.tests) {
        out += json{{"record", "rank_test"},
                    {"metric", t.metric},
                    {"u_statistic", t.u_statistic},
                    {"p_value", t.p_value},
                    {"n1", t.n1},
                    {"n2", t.n2},
                    {"method", std::string(to_string(t.method))},
                    {"alpha", alpha},
                    {"family_size", r.tests.size()},
                    {"significant", t.significant}}
                   .dump() +
               "\n";
    }
    return out;
}

std::string report_table(const Report& r, double alpha) {
    std::ostringstream out;
    auto prevalence = [&](const std::vector<stats::CategoryStats>& rows, std::string_view title) {
        out << title << "\n";
        out << pad("platform", 10, true) << pad("category", 24, true) << pad("items", 9) << pad("affiliate", 10)
            << pad("aff%", 8) << pad("disclosed", 10) << pad("raw%", 8) << pad("scaled%", 9) << "\n";
        for (const auto& c : rows) {
            out << pad(std::string(to_string(c.platform)), 10, true) << pad(c.category + (c.excluded ? " (*)" : ""), 24, true)
                << pad(std::to_string(c.n_items), 9) << pad(std::to_string(c.n_affiliate), 10)
                << pad(fixed(c.affiliate_pct), 8) << pad(std::to_string(c.n_disclosed), 10)
                << pad(fixed(c.disclosed_raw_pct), 8) << pad(fixed(c.disclosed_scaled_pct), 9) << "\n";
        }
        out << "\n";
    };
    prevalence(r.overall, "Affiliate content and disclosure, all categories");
    prevalence(r.categories, "By category ((*) fewer affiliate items than the ranking minimum)");

    out << "Disclosure types (share of affiliate content)\n";
    out << pad("platform", 10, true) << pad("type", 16, true) << pad("items", 8) << pad("pct", 8) << "\n";
    for (const auto& t : r.types) {
        out << pad(std::string(to_string(t.platform)), 10, true) << pad(std::string(to_string(t.dtype)), 16, true)
            << pad(std::to_string(t.n_items), 8) << pad(fixed(t.pct), 8) << "\n";
    }
    out << "\n";

    out << "Engagement, affiliate vs other (Mann-Whitney U, Bonferroni alpha=" << alpha << ", m=" << r.tests.size()
        << ")\n";
    out << pad("metric", 26, true) << pad("U", 14) << pad("p", 11) << pad("n1", 8) << pad("n2", 8) << "  "
        << pad("method", 14, true) << "sig\n";
    for (const auto& t : r.tests) {
        out << pad(t.metric, 26, true) << pad(sci(t.u_statistic), 14) << pad(sci(t.p_value), 11)
            << pad(std::to_string(t.n1), 8) << pad(std::to_string(t.n2), 8) << "  "
            << pad(std::string(to_string(t.method)), 14, true) << (t.significant ? "yes" : "no") << "\n";
    }
    return out.str();
}

Report run_report(const RunConfig& cfg) {
    require(cfg.input, "--input");
    require(cfg.verdicts, "--verdicts");
    require(cfg.disclosures, "--disclosures");
    require(cfg.output, "--output");
    cfg.validate();
    fs::path table_path = cfg.output;
    table_path.replace_extension(".txt");
    if (table_path == cfg.output) throw UsageError("--output must not end in .txt; the table is written there");

    const auto items = corpus::load_corpus(cfg.input);
    const auto verdicts = detect::load_verdicts(cfg.verdicts);
    const auto records = disclose::load_records(cfg.disclosures);
    auto report = build_report(items, verdicts, records, cfg);
    write_text(cfg.output, report_jsonl(report, cfg.alpha));
    write_text(table_path, report_table(report, cfg.alpha));
    return report;
}

ValidateResult run_patterns_validate(const RunConfig& cfg) {
    ValidateResult r;
    detect::PatternDb db;
    try {
        db = detect::load_pattern_db(patterns_path(cfg));
    } catch (const std::exception& e) {
        r.problems.push_back(e.what());
        return r;
    }
    r.patterns = db.size();
    r.companies = db.companies().size();
    try {
        detect::check_shipped_counts(db);
    } catch (const DataError& e) {
        r.problems.push_back(e.what());
    }
    try {
        for (const auto& s : detect::run_synthetic_suite(db)) {
            if (!s.positive_ok) r.problems.push_back(s.pattern_id + ": positive URL " + s.positive_url + " not matched");
            if (!s.negative_ok) r.problems.push_back(s.pattern_id + ": negative URL " + s.negative_url + " matched");
        }
    } catch (const UsageError& e) {
        r.problems.push_back(e.what());
    }
    return r;
}

}  // namespace affscope::pipeline
