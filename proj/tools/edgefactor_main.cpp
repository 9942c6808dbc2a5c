// edgefactor — location-level novelty scoring for scientific corpora.
//
// Subcommands: vocab, corpus, scan, cohorts, score, report, synth, pipeline.
// Exit codes: 0 success, 1 validation error, 2 runtime error.

#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edgefactor/cohort.hpp"
#include "edgefactor/common.hpp"
#include "edgefactor/corpus.hpp"
#include "edgefactor/edge_factor.hpp"
#include "edgefactor/matcher.hpp"
#include "edgefactor/parallel.hpp"
#include "edgefactor/pipeline.hpp"
#include "edgefactor/scan_table.hpp"
#include "edgefactor/scoring.hpp"
#include "edgefactor/synth.hpp"
#include "edgefactor/text.hpp"
#include "edgefactor/toml_lite.hpp"
#include "edgefactor/vocab.hpp"

namespace ef = edgefactor;

namespace {

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ef::ValidationError("cannot open " + path);
    return in;
}

ef::Thesaurus load_thesaurus_files(const std::string& vocab, const std::string& categories,
                                   ef::Diagnostics* diag) {
    auto v = open_or_throw(vocab);
    auto c = open_or_throw(categories);
    return ef::load_thesaurus(v, c, diag);
}

void print_diagnostics(const ef::Diagnostics& diag) {
    for (const auto& [key, n] : diag.counts)
        std::cout << "  " << key << ": " << n << "\n";
    for (const auto& msg : diag.messages)
        std::cerr << "  warning: " << msg << "\n";
}

struct FilterFlags {
    ef::FilterConfig filters;

    void attach(CLI::App* app) {
        app->add_option("--year-lo", filters.year_lo, "sample window start year");
        app->add_option("--year-hi", filters.year_hi, "sample window end year");
        app->add_option("--char-lo", filters.char_lo, "minimum title+abstract characters");
        app->add_option("--char-hi", filters.char_hi, "maximum title+abstract characters");
        app->add_flag("--no-char-limits", [this](std::int64_t) { filters.char_limits = false; },
                      "disable the character bounds");
        app->add_flag("--all-types", [this](std::int64_t) { filters.original_only = false; },
                      "include non-research article types");
    }
};

int cmd_vocab_check(const std::string& vocab, const std::string& categories) {
    ef::Diagnostics diag;
    ef::Thesaurus th = load_thesaurus_files(vocab, categories, &diag);
    std::cout << "terms: " << th.term_count() << "\n"
              << "concepts: " << th.concept_names.size() << "\n"
              << "categories: " << th.categories.size() << "\n"
              << "input lines: " << th.stats.lines << "\n"
              << "dropped (empty after normalization): " << th.stats.dropped_empty << "\n"
              << "skipped (malformed): " << th.stats.malformed << "\n"
              << "skipped (unknown category): " << th.stats.unknown_category << "\n";
    print_diagnostics(diag);
    return 0;
}

int cmd_corpus_stats(const std::string& corpus, const std::string& gazetteer,
                     const std::string& regions, const ef::FilterConfig& filters) {
    ef::Diagnostics diag;
    auto in = open_or_throw(corpus);
    std::optional<ef::Gazetteer> gaz;
    if (!gazetteer.empty()) {
        auto g = open_or_throw(gazetteer);
        if (regions.empty()) {
            gaz = ef::Gazetteer::load(g, nullptr, &diag);
        } else {
            auto r = open_or_throw(regions);
            gaz = ef::Gazetteer::load(g, &r, &diag);
        }
    }
    std::uint64_t total = 0, pass = 0, located = 0, original = 0;
    std::map<int, std::uint64_t> by_year;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        auto pub = ef::parse_publication_line(line, &diag, lineno);
        if (!pub)
            continue;
        ++total;
        ++by_year[pub->year];
        original += pub->original_research ? 1 : 0;
        pass += ef::passes_sample_filters(*pub, filters) ? 1 : 0;
        if (gaz && gaz->resolve(pub->affiliation))
            ++located;
    }
    std::cout << "papers: " << total << "\n"
              << "original research: " << original << "\n"
              << "pass sample filters: " << pass << "\n";
    if (gaz)
        std::cout << "matched to a location: " << located << "\n";
    if (!by_year.empty())
        std::cout << "years: " << by_year.begin()->first << ".." << by_year.rbegin()->first
                  << "\n";
    print_diagnostics(diag);
    return 0;
}

int cmd_corpus_classify(const std::string& corpus, const std::string& journals,
                        const std::string& status_rules, const std::string& out_path,
                        const ef::FilterConfig& filters, const std::string& period) {
    ef::Diagnostics diag;
    auto jin = open_or_throw(journals);
    ef::JournalTable table = ef::JournalTable::load(jin, &diag);
    ef::StatusRules rules = ef::StatusRules::defaults();
    if (!status_rules.empty()) {
        auto rin = open_or_throw(status_rules);
        rules = ef::StatusRules::load(rin, &diag);
    }
    ef::PeriodRange range{std::numeric_limits<int>::min(), std::numeric_limits<int>::max()};
    if (!period.empty())
        range = ef::parse_period(period);

    ef::AreaStatusAccumulator acc(table.area_count());
    auto in = open_or_throw(corpus);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        auto pub = ef::parse_publication_line(line, &diag, lineno);
        if (!pub || !ef::passes_sample_filters(*pub, filters) || !range.contains(pub->year))
            continue;
        const std::vector<ef::AreaId>* areas = table.areas_of(pub->journal);
        if (!areas)
            continue;
        acc.add(std::span<const ef::AreaId>(*areas),
                ef::translational_status(pub->mesh_codes, rules, &diag));
    }
    std::vector<ef::AreaGroup> groups = acc.classify();
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file)
            throw ef::PipelineError("cannot write " + out_path);
        out = &file;
    }
    *out << "research_area,group\n";
    for (ef::AreaId a = 0; a < table.area_count(); ++a)
        *out << ef::csv_escape(table.area_names[a]) << ',' << ef::area_group_label(groups[a])
             << '\n';
    print_diagnostics(diag);
    return 0;
}

int cmd_scan(const std::string& vocab, const std::string& categories, const std::string& corpus,
             const std::string& out_path, const std::string& csv_path,
             const std::string& status_rules, int workers, bool bench) {
    ef::Diagnostics diag;
    ef::Thesaurus th = load_thesaurus_files(vocab, categories, &diag);
    ef::DictionaryMatcher matcher = ef::DictionaryMatcher::build(th);
    ef::StatusRules rules = ef::StatusRules::defaults();
    if (!status_rules.empty()) {
        auto rin = open_or_throw(status_rules);
        rules = ef::StatusRules::load(rin, &diag);
    }

    if (bench) {
        // Throughput over pre-normalized documents, reported per worker count.
        auto in = open_or_throw(corpus);
        std::vector<ef::TokenSeq> docs;
        std::uint64_t total_tokens = 0;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty())
                continue;
            auto pub = ef::parse_publication_line(line, &diag, lineno);
            if (!pub)
                continue;
            docs.push_back(ef::normalize_text(pub->text()));
            total_tokens += docs.back().size();
        }
        if (docs.empty())
            throw ef::ValidationError("bench: no parsable documents in corpus");
        int max_workers = workers > 0 ? workers : ef::resolve_workers(0);
        for (int w = 1; w <= max_workers; w *= 2) {
            std::atomic<std::uint64_t> matches{0};
            auto t0 = std::chrono::steady_clock::now();
            ef::parallel_chunks(docs.size(), w, [&](int, std::size_t begin, std::size_t end) {
                ef::DictionaryMatcher::Scratch scratch;
                std::vector<ef::TermId> hits;
                std::uint64_t local = 0;
                for (std::size_t i = begin; i < end; ++i) {
                    matcher.find_terms(docs[i], scratch, hits);
                    local += hits.size();
                }
                matches += local;
            });
            double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                              .count();
            std::cout << "workers=" << w << " tokens/s=" << std::uint64_t(total_tokens / secs)
                      << " matches/s=" << std::uint64_t(double(matches.load()) / secs) << "\n";
        }
        return 0;
    }

    auto in = open_or_throw(corpus);
    std::uint64_t rows = 0;
    {
        std::ofstream out(out_path, std::ios::binary);
        if (!out)
            throw ef::PipelineError("cannot write " + out_path);
        rows = ef::scan_corpus_stream(in, matcher, rules, workers, out, &diag);
    }
    std::cout << "scanned " << rows << " papers, " << matcher.pattern_count() << " patterns\n";
    if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        if (!csv)
            throw ef::PipelineError("cannot write " + csv_path);
        csv << "paper_id,term_id,term\n";
        for (const ef::ScanRecord& rec : ef::load_scan_records(out_path))
            for (ef::TermId t : rec.terms)
                csv << ef::csv_escape(rec.paper_id) << ',' << t << ','
                    << ef::csv_escape(th.terms[t].text) << '\n';
    }
    print_diagnostics(diag);
    return 0;
}

int cmd_cohorts(const std::string& matches, const std::string& vocab,
                const std::string& categories, const std::string& mode, int floor,
                const std::string& out_path) {
    ef::Diagnostics diag;
    ef::Thesaurus th = load_thesaurus_files(vocab, categories, &diag);
    std::vector<ef::ScanRecord> records = ef::load_scan_records(matches);
    ef::CohortTable table = ef::compute_cohorts_from_records(records, th.term_count());
    table.apply_floor(floor);
    if (mode == "synonym")
        table = ef::pool_synonyms(table, th);
    else if (mode != "term")
        throw ef::ValidationError("--mode must be term or synonym");
    std::ofstream out(out_path);
    if (!out)
        throw ef::PipelineError("cannot write " + out_path);
    ef::save_cohorts(table, out);
    std::cout << "observed terms: " << table.observed_count() << "\n"
              << "excluded by floor " << floor << ": " << table.excluded_count() << "\n";
    // first-appearance histogram; coverage artifacts (late abstract coverage,
    // corpus start) show up as spikes here
    std::map<int, std::uint64_t> by_year;
    for (ef::TermId t = 0; t < table.term_count(); ++t)
        if (table.observed(t))
            ++by_year[table.year(t)];
    if (!by_year.empty()) {
        auto peak = by_year.begin();
        for (auto it = by_year.begin(); it != by_year.end(); ++it)
            if (it->second > peak->second)
                peak = it;
        std::cout << "cohort years: " << by_year.begin()->first << ".."
                  << by_year.rbegin()->first << ", peak " << peak->first << " ("
                  << peak->second << " terms)\n";
    }
    print_diagnostics(diag);
    return 0;
}

int cmd_score(const std::string& matches, const std::string& vocab,
              const std::string& categories, const std::string& journals,
              const std::string& gazetteer, const std::string& regions,
              const std::string& cohorts_path, const std::string& mode, int floor,
              const std::string& period, double cutoff, const ef::FilterConfig& filters,
              const std::string& out_path) {
    ef::Diagnostics diag;
    ef::Thesaurus th = load_thesaurus_files(vocab, categories, &diag);
    auto jin = open_or_throw(journals);
    ef::JournalTable journal_table = ef::JournalTable::load(jin, &diag);
    auto gin = open_or_throw(gazetteer);
    std::optional<std::ifstream> rin;
    if (!regions.empty())
        rin = open_or_throw(regions);
    ef::Gazetteer gaz = ef::Gazetteer::load(gin, rin ? &*rin : nullptr, &diag);

    std::vector<ef::ScanRecord> records = ef::load_scan_records(matches);
    ef::CohortTable cohorts(th.term_count(), ef::CohortMode::TermOnly);
    if (cohorts_path.empty()) {
        cohorts = ef::compute_cohorts_from_records(records, th.term_count());
    } else {
        auto cin = open_or_throw(cohorts_path);
        cohorts = ef::load_cohorts(cin, th.term_count(), ef::CohortMode::TermOnly, &diag);
    }
    cohorts.apply_floor(floor);
    if (mode == "synonym")
        cohorts = ef::pool_synonyms(cohorts, th);
    else if (mode != "term")
        throw ef::ValidationError("--mode must be term or synonym");

    ef::ScoreRun run = ef::score_scan_records(records, filters, ef::parse_period(period), gaz,
                                              journal_table, cohorts, th, cutoff);
    std::ofstream out(out_path);
    if (!out)
        throw ef::PipelineError("cannot write " + out_path);
    out << "paper_id,idea_category,research_area,pub_year,cohort_year,location,novel,score\n";
    for (const ef::Contribution& c : run.contributions)
        out << ef::csv_escape(run.paper_ids[c.paper]) << ','
            << ef::csv_escape(th.categories[c.cell.category].name) << ','
            << ef::csv_escape(journal_table.area_names[c.cell.area]) << ',' << c.pub_year << ','
            << c.cohort_year << ','
            << (c.location == ef::kNoLocation
                    ? std::string()
                    : ef::csv_escape(run.locations.name(c.location)))
            << ',' << (c.novel ? 1 : 0) << ',' << ef::format_double(c.score, 9) << '\n';
    std::cout << "contributions: " << run.contributions.size() << "\n"
              << "papers contributing: " << run.paper_ids.size() << "\n"
              << "locations: " << run.locations.size() << "\n";
    for (const auto& [k, v] : run.diag.counts)
        diag.count(k, v);
    print_diagnostics(diag);
    return 0;
}

// Command-line knobs shared by `report` and `pipeline`; every robustness
// variant is reachable without editing the config file.
struct PipelineFlags {
    std::string weights, missing, synonyms, period, bootstrap_draw, groups, top_terms;
    double cutoff = -1.0;
    long long seed = -1;
    int samples = 0;
    bool ci = false;
    int workers = -1;
    std::string out_dir;
    int year_lo = -1, year_hi = -1, char_lo = -1, char_hi = -1, floor = -1;
    bool no_char_limits = false, all_types = false;

    void attach(CLI::App* app) {
        app->add_option("--weights", weights, "global | own | period:YYYY-YYYY");
        app->add_option("--missing", missing, "own-avg | zero | hundred");
        app->add_option("--cutoff", cutoff, "novelty cutoff in (0,1)");
        app->add_option("--synonyms", synonyms, "on | off (synonym-pooled cohorts)");
        app->add_option("--period", period, "scoring period YYYY-YYYY");
        app->add_flag("--ci", ci, "emit bootstrap confidence intervals");
        app->add_option("--seed", seed, "bootstrap seed");
        app->add_option("--samples", samples, "bootstrap replicates");
        app->add_option("--bootstrap-draw", bootstrap_draw, "uniform | weighted cell resampling");
        app->add_option("--groups", groups, "on | off group breakdown columns");
        app->add_option("--top-terms", top_terms, "on | off top-terms report");
        app->add_option("--year-lo", year_lo, "sample window start year");
        app->add_option("--year-hi", year_hi, "sample window end year");
        app->add_option("--char-lo", char_lo, "minimum title+abstract characters");
        app->add_option("--char-hi", char_hi, "maximum title+abstract characters");
        app->add_flag("--no-char-limits", no_char_limits, "disable the character bounds");
        app->add_flag("--all-types", all_types, "include non-research article types");
        app->add_option("--floor", floor, "cohort floor year");
        app->add_option("--workers", workers, "worker threads (0 = hardware)");
        app->add_option("--out", out_dir, "output directory override");
    }

    static bool on_off(const std::string& value, const char* flag) {
        if (value != "on" && value != "off")
            throw ef::ValidationError(std::string(flag) + " expects on or off");
        return value == "on";
    }

    void apply(ef::RunConfig& cfg) const {
        if (!weights.empty())
            cfg.set_weights(weights);
        if (!missing.empty())
            cfg.set_missing(missing);
        if (cutoff >= 0.0)
            cfg.cutoff = cutoff;
        if (!synonyms.empty())
            cfg.cohort_mode = on_off(synonyms, "--synonyms") ? ef::CohortMode::SynonymPooled
                                                             : ef::CohortMode::TermOnly;
        if (!period.empty())
            cfg.period = ef::parse_period(period);
        if (!bootstrap_draw.empty())
            cfg.set_bootstrap_draw(bootstrap_draw);
        if (ci)
            cfg.ci = true;
        if (seed >= 0)
            cfg.seed = std::uint64_t(seed);
        if (samples > 0)
            cfg.ci_samples = samples;
        if (!groups.empty())
            cfg.groups = on_off(groups, "--groups");
        if (!top_terms.empty())
            cfg.top_terms = on_off(top_terms, "--top-terms");
        if (year_lo >= 0)
            cfg.filters.year_lo = year_lo;
        if (year_hi >= 0)
            cfg.filters.year_hi = year_hi;
        if (char_lo >= 0)
            cfg.filters.char_lo = char_lo;
        if (char_hi >= 0)
            cfg.filters.char_hi = char_hi;
        if (no_char_limits)
            cfg.filters.char_limits = false;
        if (all_types)
            cfg.filters.original_only = false;
        if (floor >= 0)
            cfg.cohort_floor = floor;
        if (workers >= 0)
            cfg.workers = workers;
        if (!out_dir.empty())
            cfg.out_dir = out_dir;
    }
};

int cmd_pipeline(const std::string& config_path, const PipelineFlags& flags) {
    ef::RunConfig cfg = ef::RunConfig::from_toml_file(config_path);
    flags.apply(cfg);
    ef::PipelineResult result = ef::run_pipeline(cfg);
    for (const ef::StageInfo& s : result.stages) {
        std::cout << "stage " << s.name << ": "
                  << (s.cached ? "cached" : "computed") << " (" << ef::format_double(s.seconds, 2)
                  << "s, " << s.rows << " rows)\n";
    }
    std::cout << "report rows: " << result.report.size() << " -> "
              << (cfg.out_dir / "edge_factors.csv").string() << "\n";
    print_diagnostics(result.diag);
    return 0;
}

int cmd_synth(const std::string& config_path, const std::string& out_dir) {
    ef::TomlTable t = ef::TomlTable::parse_file(config_path);
    ef::SynthConfig cfg = ef::SynthConfig::from_toml(t);
    ef::SynthResult res = ef::synth_generate(cfg, out_dir);
    std::cout << "ideas: " << res.ideas << "\npapers: " << res.papers << "\nwrote " << out_dir
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"edgefactor — novelty scoring for scientific corpora"};
    app.require_subcommand(1);

    // vocab check
    auto* vocab_cmd = app.add_subcommand("vocab", "thesaurus operations");
    vocab_cmd->require_subcommand(1);
    auto* vocab_check = vocab_cmd->add_subcommand("check", "validate vocab/category tables");
    std::string vc_vocab, vc_categories;
    vocab_check->add_option("--vocab", vc_vocab, "vocab.tsv")->required();
    vocab_check->add_option("--categories", vc_categories, "categories.tsv")->required();

    // corpus stats / classify-areas
    auto* corpus_cmd = app.add_subcommand("corpus", "corpus operations");
    corpus_cmd->require_subcommand(1);
    auto* corpus_stats = corpus_cmd->add_subcommand("stats", "corpus counts and filter rates");
    std::string cs_corpus, cs_gaz, cs_regions;
    FilterFlags cs_filters;
    corpus_stats->add_option("--corpus", cs_corpus, "corpus.jsonl")->required();
    corpus_stats->add_option("--gazetteer", cs_gaz, "gazetteer.tsv (optional)");
    corpus_stats->add_option("--regions", cs_regions, "regions.tsv (optional)");
    cs_filters.attach(corpus_stats);

    auto* corpus_classify = corpus_cmd->add_subcommand(
        "classify-areas", "A-C-H classification of research areas");
    std::string cc_corpus, cc_journals, cc_rules, cc_out, cc_period;
    FilterFlags cc_filters;
    corpus_classify->add_option("--corpus", cc_corpus, "corpus.jsonl")->required();
    corpus_classify->add_option("--journals", cc_journals, "journals.tsv")->required();
    corpus_classify->add_option("--status-rules", cc_rules, "status_rules.tsv (default built-in)");
    corpus_classify->add_option("--out", cc_out, "output CSV (default stdout)");
    corpus_classify->add_option("--period", cc_period, "restrict to YYYY-YYYY");
    cc_filters.attach(corpus_classify);

    // scan
    auto* scan_cmd = app.add_subcommand("scan", "match thesaurus terms against the corpus");
    std::string sc_vocab, sc_categories, sc_corpus, sc_out = "matches.bin", sc_csv, sc_rules;
    int sc_workers = 0;
    bool sc_bench = false;
    scan_cmd->add_option("--vocab", sc_vocab, "vocab.tsv")->required();
    scan_cmd->add_option("--categories", sc_categories, "categories.tsv")->required();
    scan_cmd->add_option("--corpus", sc_corpus, "corpus.jsonl")->required();
    scan_cmd->add_option("--out", sc_out, "matches output file");
    scan_cmd->add_option("--csv", sc_csv, "also emit a CSV debug table");
    scan_cmd->add_option("--status-rules", sc_rules, "status_rules.tsv (default built-in)");
    scan_cmd->add_option("--workers", sc_workers, "worker threads (0 = hardware)");
    scan_cmd->add_flag("--bench", sc_bench, "report tokens/second instead of writing output");

    // cohorts
    auto* cohorts_cmd = app.add_subcommand("cohorts", "first-appearance year per term");
    std::string ch_matches, ch_vocab, ch_categories, ch_mode = "term", ch_out = "cohorts.tsv";
    int ch_floor = 1950;
    cohorts_cmd->add_option("--matches", ch_matches, "matches.bin from scan")->required();
    cohorts_cmd->add_option("--vocab", ch_vocab, "vocab.tsv")->required();
    cohorts_cmd->add_option("--categories", ch_categories, "categories.tsv")->required();
    cohorts_cmd->add_option("--mode", ch_mode, "term|synonym");
    cohorts_cmd->add_option("--floor", ch_floor, "exclude terms with cohort before this year");
    cohorts_cmd->add_option("--out", ch_out, "output cohorts.tsv");

    // score
    auto* score_cmd = app.add_subcommand("score", "expand, flag, and normalize contributions");
    std::string s_matches, s_vocab, s_categories, s_journals, s_gaz, s_regions, s_cohorts;
    std::string s_mode = "term", s_period = "2015-2016", s_out = "contributions.csv";
    int s_floor = 1950;
    double s_cutoff = 0.05;
    FilterFlags s_filters;
    score_cmd->add_option("--matches", s_matches, "matches.bin from scan")->required();
    score_cmd->add_option("--vocab", s_vocab, "vocab.tsv")->required();
    score_cmd->add_option("--categories", s_categories, "categories.tsv")->required();
    score_cmd->add_option("--journals", s_journals, "journals.tsv")->required();
    score_cmd->add_option("--gazetteer", s_gaz, "gazetteer.tsv")->required();
    score_cmd->add_option("--regions", s_regions, "regions.tsv (optional)");
    score_cmd->add_option("--cohorts", s_cohorts,
                          "cohorts.tsv (default: recomputed from matches)");
    score_cmd->add_option("--mode", s_mode, "cohort mode: term|synonym");
    score_cmd->add_option("--floor", s_floor, "cohort floor year");
    score_cmd->add_option("--period", s_period, "scoring period YYYY-YYYY");
    score_cmd->add_option("--cutoff", s_cutoff, "novelty cutoff in (0,1)");
    score_cmd->add_option("--out", s_out, "output contributions.csv");
    s_filters.attach(score_cmd);

    // report / pipeline
    std::string p_config;
    PipelineFlags p_flags;
    auto* report_cmd =
        app.add_subcommand("report", "full pipeline run emitting edge_factors.csv");
    report_cmd->add_option("--config", p_config, "run config (TOML)")->required();
    p_flags.attach(report_cmd);
    auto* pipeline_cmd = app.add_subcommand("pipeline", "run all stages with caching");
    std::string pl_config;
    PipelineFlags pl_flags;
    pipeline_cmd->add_option("--config", pl_config, "run config (TOML)")->required();
    pl_flags.attach(pipeline_cmd);

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus with ground truth");
    std::string sy_config, sy_out;
    synth_cmd->add_option("--config", sy_config, "synth config (TOML)")->required();
    synth_cmd->add_option("--out", sy_out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (vocab_check->parsed())
            return cmd_vocab_check(vc_vocab, vc_categories);
        if (corpus_stats->parsed())
            return cmd_corpus_stats(cs_corpus, cs_gaz, cs_regions, cs_filters.filters);
        if (corpus_classify->parsed())
            return cmd_corpus_classify(cc_corpus, cc_journals, cc_rules, cc_out,
                                       cc_filters.filters, cc_period);
        if (scan_cmd->parsed())
            return cmd_scan(sc_vocab, sc_categories, sc_corpus, sc_out, sc_csv, sc_rules,
                            sc_workers, sc_bench);
        if (cohorts_cmd->parsed())
            return cmd_cohorts(ch_matches, ch_vocab, ch_categories, ch_mode, ch_floor, ch_out);
        if (score_cmd->parsed())
            return cmd_score(s_matches, s_vocab, s_categories, s_journals, s_gaz, s_regions,
                             s_cohorts, s_mode, s_floor, s_period, s_cutoff, s_filters.filters,
                             s_out);
        if (report_cmd->parsed())
            return cmd_pipeline(p_config, p_flags);
        if (pipeline_cmd->parsed())
            return cmd_pipeline(pl_config, pl_flags);
        if (synth_cmd->parsed())
            return cmd_synth(sy_config, sy_out);
    } catch (const ef::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
