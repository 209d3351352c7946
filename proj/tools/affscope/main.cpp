#include <iostream>

#include "CLI11.hpp"
#include "affscope/error.hpp"
#include "affscope/http_fetcher.hpp"
#include "affscope/log.hpp"
#include "affscope/pipeline.hpp"

namespace {

using affscope::pipeline::RunConfig;

enum Exit : int { kOk = 0, kUsage = 1, kData = 2, kNetwork = 3 };

void add_input(CLI::App& cmd, RunConfig& cfg) {
    cmd.add_option("--input", cfg.input, "Corpus file (JSON lines)")->required();
}

void add_patterns(CLI::App& cmd, RunConfig& cfg) {
    cmd.add_option("--patterns", cfg.patterns, "Pattern database (default: shipped patterns.jsonl)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Affiliate-link and disclosure measurement over content corpora"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "affscope 1.0.0");

    RunConfig cfg;
    int verbosity = 0;
    app.add_flag("-v,--verbose", verbosity, "More logging (repeatable)");

    std::string connect_to;
    std::string linkage = "average";

    auto* resolve_cmd = app.add_subcommand("resolve", "Resolve every URL in the corpus into the chain cache");
    add_input(*resolve_cmd, cfg);
    resolve_cmd->add_option("--cache", cfg.cache, "Chain cache, read and rewritten")->required();
    resolve_cmd->add_option("--max-depth", cfg.policy.max_depth, "Redirect hops to follow")->capture_default_str();
    resolve_cmd->add_option("--timeout", cfg.policy.timeout_seconds, "Per-request timeout, seconds")
        ->capture_default_str();
    resolve_cmd->add_option("--max-parallel", cfg.policy.max_parallel, "Concurrent fetches")->capture_default_str();
    resolve_cmd->add_option("--max-failure-rate", cfg.max_failure_rate,
                            "Exit 3 when the share of failed URLs exceeds this")
        ->capture_default_str();
    resolve_cmd->add_option("--connect-to", connect_to,
                            "HOST:PORT; send every request there over plain HTTP, keeping the Host header");

    auto* detect_cmd = app.add_subcommand("detect", "Match resolved chains against the pattern database");
    add_input(*detect_cmd, cfg);
    add_patterns(*detect_cmd, cfg);
    detect_cmd->add_option("--cache", cfg.cache, "Chain cache")->required();
    detect_cmd->add_option("--output", cfg.output, "Verdicts file")->required();

    auto* mine_cmd = app.add_subcommand("mine", "Emit a review sheet of candidate affiliate URL patterns");
    mine_cmd->add_option("--cache", cfg.cache, "Chain cache")->required();
    mine_cmd->add_option("--output", cfg.output, "Review sheet (TSV)")->required();
    mine_cmd->add_option("--min-count", cfg.min_count, "Candidate threshold")->capture_default_str();

    auto* disclose_cmd = app.add_subcommand("disclose", "Extract and classify disclosure sentences");
    add_input(*disclose_cmd, cfg);
    disclose_cmd->add_option("--output", cfg.output, "Disclosure records")->required();
    disclose_cmd->add_option("--digest", cfg.digest, "Cluster digest (default: <output>.digest.jsonl)");
    disclose_cmd->add_option("--verdicts", cfg.verdicts, "Verdicts file, needed with --affiliate-only");
    disclose_cmd->add_flag("--affiliate-only", cfg.affiliate_only, "Only items with an affiliate verdict");
    disclose_cmd->add_option("--cluster-threshold", cfg.cluster_threshold, "Cut distance")->capture_default_str();
    disclose_cmd->add_option("--linkage", linkage, "single|complete|average")
        ->check(CLI::IsMember({"single", "complete", "average"}))
        ->capture_default_str();
    disclose_cmd->add_option("--max-cluster-sentences", cfg.max_cluster_sentences,
                             "Distinct sentences clustered; larger sets are sampled with --seed")
        ->capture_default_str();
    disclose_cmd->add_option("--seed", cfg.seed, "Sampling seed")->capture_default_str();

    auto* report_cmd = app.add_subcommand("report", "Prevalence and engagement statistics");
    add_input(*report_cmd, cfg);
    report_cmd->add_option("--verdicts", cfg.verdicts, "Verdicts file")->required();
    report_cmd->add_option("--disclosures", cfg.disclosures, "Disclosure records")->required();
    report_cmd->add_option("--output", cfg.output, "Report (JSON lines); a .txt table is written beside it")
        ->required();
    report_cmd->add_option("--alpha", cfg.alpha, "Family-wise significance level")->capture_default_str();
    report_cmd->add_option("--min-affiliate", cfg.min_affiliate, "Categories below this are flagged excluded")
        ->capture_default_str();

    auto* patterns_cmd = app.add_subcommand("patterns", "Pattern database tools");
    patterns_cmd->require_subcommand(1);
    auto* validate_cmd = patterns_cmd->add_subcommand("validate", "Check counts and the synthetic URL suite");
    add_patterns(*validate_cmd, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    using affscope::log::Level;
    affscope::log::set_level(verbosity >= 2 ? Level::debug : verbosity == 1 ? Level::info : Level::warn);
    cfg.linkage = *affscope::disclose::parse_linkage(linkage);

    namespace pl = affscope::pipeline;
    try {
        if (*resolve_cmd) {
            affscope::resolve::HttpFetcher::Options options;
            if (!connect_to.empty()) {
                options.connect_to = affscope::resolve::parse_endpoint(connect_to);
                if (!options.connect_to) throw affscope::UsageError("--connect-to must be HOST:PORT");
            }
            affscope::resolve::HttpFetcher fetcher(options);
            const auto s = pl::run_resolve(cfg, fetcher);
            std::cout << "urls " << s.urls << ", cached " << s.reused << ", fetched " << s.resolved << ", failed "
                      << s.failed << "\n";
            if (s.failure_rate() > cfg.max_failure_rate) {
                std::cerr << "error: " << s.failed << " of " << s.urls << " URLs failed to resolve\n";
                return kNetwork;
            }
        } else if (*detect_cmd) {
            const auto s = pl::run_detect(cfg);
            std::cout << "items " << s.items << ", affiliate " << s.affiliate << "\n";
        } else if (*mine_cmd) {
            const auto s = pl::run_mine(cfg);
            std::cout << "chains " << s.chains << ", candidates " << s.candidates << "\n";
        } else if (*disclose_cmd) {
            const auto s = pl::run_disclose(cfg);
            std::cout << "items " << s.items << ", records " << s.records << ", clusters " << s.clusters << " over "
                      << s.clustered << " sentences\n";
        } else if (*report_cmd) {
            const auto r = pl::run_report(cfg);
            std::cout << pl::report_table(r, cfg.alpha);
        } else if (*validate_cmd) {
            const auto r = pl::run_patterns_validate(cfg);
            for (const auto& p : r.problems) std::cerr << "error: " << p << "\n";
            std::cout << r.patterns << " patterns, " << r.companies << " companies: " << (r.ok() ? "ok" : "FAILED")
                      << "\n";
            return r.ok() ? kOk : kData;
        }
    } catch (const affscope::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const affscope::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    }
    return kOk;
}
