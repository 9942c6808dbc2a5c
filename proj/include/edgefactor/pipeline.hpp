#pragma once

#include <array>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "edgefactor/cohort.hpp"
#include "edgefactor/common.hpp"
#include "edgefactor/corpus.hpp"
#include "edgefactor/edge_factor.hpp"
#include "edgefactor/matcher.hpp"
#include "edgefactor/parallel.hpp"
#include "edgefactor/scan_table.hpp"
#include "edgefactor/scoring.hpp"
#include "edgefactor/text.hpp"
#include "edgefactor/toml_lite.hpp"
#include "edgefactor/vocab.hpp"

namespace edgefactor {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// small shared pieces

class Interner {
public:
    std::int32_t intern(const std::string& name) {
        auto [it, inserted] = ids_.emplace(name, std::int32_t(names_.size()));
        if (inserted)
            names_.push_back(name);
        return it->second;
    }

    std::optional<std::int32_t> find(const std::string& name) const {
        auto it = ids_.find(name);
        if (it == ids_.end())
            return std::nullopt;
        return it->second;
    }

    const std::string& name(std::int32_t id) const { return names_[std::size_t(id)]; }
    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::int32_t> ids_;
};

inline PeriodRange parse_period(std::string_view text) {
    auto dash = text.find('-');
    if (dash == std::string_view::npos) {
        auto y = parse_int(text);
        if (!y)
            throw ValidationError("bad period \"" + std::string(text) + "\" (want YYYY or YYYY-YYYY)");
        return PeriodRange{int(*y), int(*y)};
    }
    auto lo = parse_int(text.substr(0, dash));
    auto hi = parse_int(text.substr(dash + 1));
    if (!lo || !hi || *hi < *lo)
        throw ValidationError("bad period \"" + std::string(text) + "\" (want YYYY-YYYY)");
    return PeriodRange{int(*lo), int(*hi)};
}

inline std::string period_label(PeriodRange p) {
    return std::to_string(p.lo) + "-" + std::to_string(p.hi);
}

// CSV with minimal quoting: fields containing comma, quote, or newline are
// wrapped in quotes with embedded quotes doubled.
inline std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\n") == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += "\"\"";
        else
            out.push_back(c);
    }
    out += '"';
    return out;
}

inline std::vector<std::string> csv_parse_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

// ---------------------------------------------------------------------------
// run configuration

struct RunConfig {
    fs::path vocab, categories, corpus, journals, gazetteer;
    fs::path regions, status_rules; // optional; empty = identity / built-in rules
    fs::path out_dir = "out";

    FilterConfig filters;
    CohortMode cohort_mode = CohortMode::TermOnly;
    int cohort_floor = 1950;

    PeriodRange period{2015, 2016};
    double cutoff = 0.05;

    WeightScheme weight_scheme = WeightScheme::GlobalCount;
    PeriodRange weight_period{0, 0};
    MissingPolicy missing = MissingPolicy::OwnAverage;

    bool ci = false;
    int ci_samples = 1000;
    std::uint64_t seed = 1;
    BootstrapDraw bootstrap_draw = BootstrapDraw::Uniform;
    bool groups = true;
    // small-sample fallback: group columns for (location, group) pairs with
    // fewer contributions than the threshold are recomputed over the wider
    // fallback period; 0 disables it
    std::uint64_t group_fallback_min = 0;
    PeriodRange group_fallback_period{0, 0};
    std::vector<PeriodRange> periods; // extra period columns (fixed weights)
    bool top_terms = false;

    int workers = 0;

    static RunConfig from_toml(const TomlTable& t, const fs::path& base_dir) {
        RunConfig c;
        auto path_of = [&](const char* key) -> fs::path {
            std::string v = t.get_string(key);
            if (v.empty())
                return {};
            fs::path p(v);
            return p.is_absolute() ? p : base_dir / p;
        };
        c.vocab = path_of("inputs.vocab");
        c.categories = path_of("inputs.categories");
        c.corpus = path_of("inputs.corpus");
        c.journals = path_of("inputs.journals");
        c.gazetteer = path_of("inputs.gazetteer");
        c.regions = path_of("inputs.regions");
        c.status_rules = path_of("inputs.status_rules");
        if (t.has("output.dir"))
            c.out_dir = path_of("output.dir");

        c.filters.year_lo = int(t.get_int("filters.year_lo", c.filters.year_lo));
        c.filters.year_hi = int(t.get_int("filters.year_hi", c.filters.year_hi));
        c.filters.char_limits = t.get_bool("filters.char_limits", c.filters.char_limits);
        c.filters.char_lo = int(t.get_int("filters.char_lo", c.filters.char_lo));
        c.filters.char_hi = int(t.get_int("filters.char_hi", c.filters.char_hi));
        c.filters.original_only = t.get_bool("filters.original_only", c.filters.original_only);

        std::string mode = t.get_string("cohorts.mode", "term");
        if (mode == "term")
            c.cohort_mode = CohortMode::TermOnly;
        else if (mode == "synonym")
            c.cohort_mode = CohortMode::SynonymPooled;
        else
            throw ValidationError("cohorts.mode must be \"term\" or \"synonym\"");
        c.cohort_floor = int(t.get_int("cohorts.floor", c.cohort_floor));

        if (t.has("scoring.period"))
            c.period = parse_period(t.get_string("scoring.period"));
        c.cutoff = t.get_double("scoring.cutoff", c.cutoff);

        if (t.has("report.weights"))
            c.set_weights(t.get_string("report.weights"));
        if (t.has("report.missing"))
            c.set_missing(t.get_string("report.missing"));
        c.ci = t.get_bool("report.ci", c.ci);
        c.ci_samples = int(t.get_int("report.samples", c.ci_samples));
        c.seed = std::uint64_t(t.get_int("report.seed", (long long)c.seed));
        if (t.has("report.bootstrap_draw"))
            c.set_bootstrap_draw(t.get_string("report.bootstrap_draw"));
        c.groups = t.get_bool("report.groups", c.groups);
        c.group_fallback_min = std::uint64_t(t.get_int("report.group_fallback_min", 0));
        if (t.has("report.group_fallback_period"))
            c.group_fallback_period = parse_period(t.get_string("report.group_fallback_period"));
        for (const std::string& p : t.get_string_array("report.periods"))
            c.periods.push_back(parse_period(p));
        c.top_terms = t.get_bool("report.top_terms", c.top_terms);

        c.workers = int(t.get_int("run.workers", c.workers));
        return c;
    }

    static RunConfig from_toml_file(const fs::path& path) {
        TomlTable t = TomlTable::parse_file(path.string());
        return from_toml(t, path.parent_path());
    }

    void set_weights(std::string_view text) {
        if (text == "global") {
            weight_scheme = WeightScheme::GlobalCount;
        } else if (text == "own") {
            weight_scheme = WeightScheme::OwnCount;
        } else if (text.starts_with("period:")) {
            weight_scheme = WeightScheme::FixedPeriod;
            weight_period = parse_period(text.substr(7));
        } else {
            throw ValidationError("weights must be global, own, or period:YYYY-YYYY");
        }
    }

    void set_missing(std::string_view text) {
        if (text == "own-avg")
            missing = MissingPolicy::OwnAverage;
        else if (text == "zero")
            missing = MissingPolicy::Zero;
        else if (text == "hundred")
            missing = MissingPolicy::Hundred;
        else
            throw ValidationError("missing must be own-avg, zero, or hundred");
    }

    void set_bootstrap_draw(std::string_view text) {
        if (text == "uniform")
            bootstrap_draw = BootstrapDraw::Uniform;
        else if (text == "weighted")
            bootstrap_draw = BootstrapDraw::Weighted;
        else
            throw ValidationError("bootstrap draw must be uniform or weighted");
    }

    void validate() const {
        for (const auto& [name, path] :
             {std::pair<const char*, const fs::path&>{"vocab", vocab},
              {"categories", categories},
              {"corpus", corpus},
              {"journals", journals},
              {"gazetteer", gazetteer}})
            if (path.empty() || !fs::exists(path))
                throw ValidationError(std::string("input file for \"") + name +
                                      "\" missing: " + path.string());
        for (const fs::path& p : {regions, status_rules})
            if (!p.empty() && !fs::exists(p))
                throw ValidationError("configured input file missing: " + p.string());
        if (cutoff <= 0.0 || cutoff >= 1.0)
            throw ValidationError("scoring.cutoff must be in (0, 1)");
        if (ci && ci_samples <= 0)
            throw ValidationError("report.samples must be positive");
        if (ci && weight_scheme == WeightScheme::OwnCount)
            throw ValidationError("bootstrap CIs need a shared cell weight table; "
                                  "use global or period weights");
        if (group_fallback_min > 0 && group_fallback_period == PeriodRange{0, 0})
            throw ValidationError("report.group_fallback_min needs report.group_fallback_period");
    }
};

// ---------------------------------------------------------------------------
// scan: corpus.jsonl -> ScanRecords

inline ScanRecord scan_publication(const Publication& pub, const DictionaryMatcher& matcher,
                                   DictionaryMatcher::Scratch& scratch, const StatusRules& rules,
                                   Diagnostics* diag = nullptr) {
    ScanRecord rec;
    rec.paper_id = pub.id;
    rec.year = pub.year;
    rec.journal = pub.journal;
    rec.affiliation = pub.affiliation;
    rec.original_research = pub.original_research;
    std::string text = pub.text();
    rec.char_count = std::uint32_t(text.size());
    NormalizeStats stats;
    TokenSeq tokens = normalize_text(text, stats);
    if (stats.invalid_bytes && diag)
        diag->warn("scan.invalid_utf8", "paper " + pub.id + ": dropped " +
                                            std::to_string(stats.invalid_bytes) +
                                            " invalid UTF-8 bytes");
    matcher.find_terms(tokens, scratch, rec.terms);
    TranslationalStatus st = translational_status(pub.mesh_codes, rules, diag);
    rec.status_h = st.h;
    rec.status_a = st.a;
    rec.status_c = st.c;
    return rec;
}

// Streams the corpus in batches; batch members are scanned in parallel and
// written in input order.
inline std::uint64_t scan_corpus_stream(std::istream& jsonl, const DictionaryMatcher& matcher,
                                        const StatusRules& rules, int workers,
                                        std::ostream& matches_out, Diagnostics* diag = nullptr) {
    write_scan_header(matches_out);
    workers = resolve_workers(workers);
    const std::size_t batch_size = 2048;
    std::vector<std::string> lines;
    std::vector<std::size_t> linenos;
    std::vector<std::optional<ScanRecord>> results;
    std::string line;
    std::size_t lineno = 0;
    std::uint64_t written = 0;

    std::vector<Diagnostics> worker_diags{std::size_t(workers)};
    auto flush_batch = [&] {
        results.assign(lines.size(), std::nullopt);
        parallel_chunks(lines.size(), workers, [&](int w, std::size_t begin, std::size_t end) {
            DictionaryMatcher::Scratch scratch;
            for (std::size_t i = begin; i < end; ++i) {
                auto pub = parse_publication_line(lines[i], &worker_diags[std::size_t(w)],
                                                  linenos[i]);
                if (pub)
                    results[i] = scan_publication(*pub, matcher, scratch, rules,
                                                  &worker_diags[std::size_t(w)]);
            }
        });
        for (auto& rec : results)
            if (rec) {
                write_scan_record(matches_out, *rec);
                ++written;
            }
        lines.clear();
        linenos.clear();
    };

    while (std::getline(jsonl, line)) {
        ++lineno;
        if (line.empty())
            continue;
        lines.push_back(line);
        linenos.push_back(lineno);
        if (lines.size() >= batch_size)
            flush_batch();
    }
    if (!lines.empty())
        flush_batch();
    if (diag)
        for (auto& wd : worker_diags) {
            for (auto& [k, v] : wd.counts)
                diag->count(k, v);
            for (auto& m : wd.messages)
                if (diag->messages.size() < diag->max_messages)
                    diag->messages.push_back(m);
        }
    return written;
}

inline std::vector<ScanRecord> load_scan_records(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw PipelineError("cannot open matches file " + path.string());
    ScanReader reader(in);
    std::vector<ScanRecord> records;
    ScanRecord rec;
    while (reader.next(rec))
        records.push_back(rec);
    return records;
}

inline bool record_passes_filters(const ScanRecord& rec, const FilterConfig& cfg) {
    if (cfg.original_only && !rec.original_research)
        return false;
    if (rec.year < cfg.year_lo || rec.year > cfg.year_hi)
        return false;
    if (cfg.char_limits &&
        (rec.char_count < std::uint32_t(cfg.char_lo) || rec.char_count > std::uint32_t(cfg.char_hi)))
        return false;
    return true;
}

// Cohorts come from the full record stream: every year, every article type.
inline CohortTable compute_cohorts_from_records(const std::vector<ScanRecord>& records,
                                                std::size_t term_count) {
    CohortTable table(term_count, CohortMode::TermOnly);
    for (const ScanRecord& rec : records)
        for (TermId t : rec.terms)
            table.observe(t, rec.year);
    return table;
}

// A-C-H classification over the filtered, in-period sample.
inline std::vector<AreaGroup> classify_areas_from_records(const std::vector<ScanRecord>& records,
                                                          const JournalTable& journals,
                                                          const FilterConfig& filters,
                                                          PeriodRange period) {
    AreaStatusAccumulator acc(journals.area_count());
    for (const ScanRecord& rec : records) {
        if (!record_passes_filters(rec, filters) || !period.contains(rec.year))
            continue;
        const std::vector<AreaId>* areas = journals.areas_of(rec.journal);
        if (!areas)
            continue;
        acc.add(std::span<const AreaId>(*areas),
                TranslationalStatus{rec.status_h, rec.status_a, rec.status_c});
    }
    return acc.classify();
}

// ---------------------------------------------------------------------------
// scoring runs

struct ScoreRun {
    std::vector<Contribution> contributions;
    std::vector<NewestTermEvent> newest_events;
    std::vector<std::string> paper_ids; // index = Contribution::paper
    Interner locations;
    Diagnostics diag;
};

// Expands, flags, and normalizes the filtered in-period slice of the record
// stream. Location resolution failures keep the paper in the pools with no
// location, per the sample design.
inline ScoreRun score_scan_records(const std::vector<ScanRecord>& records,
                                   const FilterConfig& filters, PeriodRange period,
                                   const Gazetteer& gazetteer, const JournalTable& journals,
                                   const CohortTable& cohorts, const Thesaurus& thesaurus,
                                   double cutoff) {
    ScoreRun run;
    for (const ScanRecord& rec : records) {
        if (!record_passes_filters(rec, filters) || !period.contains(rec.year))
            continue;
        const std::vector<AreaId>* areas = journals.areas_of(rec.journal);
        if (!areas) {
            run.diag.warn("score.unknown_journal", "paper " + rec.paper_id + ": journal \"" +
                                                       rec.journal + "\" not in journals.tsv");
            continue;
        }
        std::int32_t location = kNoLocation;
        if (auto loc = gazetteer.resolve(rec.affiliation))
            location = run.locations.intern(*loc);
        else
            run.diag.count("score.unlocated_papers");
        auto paper_idx = std::uint32_t(run.paper_ids.size());
        std::vector<Contribution> contribs =
            extract_contributions(paper_idx, rec.year, location, rec.terms, cohorts, thesaurus,
                                  std::span<const AreaId>(*areas), &run.newest_events);
        if (contribs.empty())
            continue;
        run.paper_ids.push_back(rec.paper_id);
        run.contributions.insert(run.contributions.end(), contribs.begin(), contribs.end());
    }
    flag_novelty(run.contributions, cutoff);
    normalize_scores(run.contributions);
    return run;
}

// Unflagged contributions over an arbitrary year window (period analyses and
// fixed-period weights); locations interned into the shared table.
inline std::vector<Contribution> extract_raw_contributions(
    const std::vector<ScanRecord>& records, const FilterConfig& filters, PeriodRange window,
    const Gazetteer& gazetteer, const JournalTable& journals, const CohortTable& cohorts,
    const Thesaurus& thesaurus, Interner& locations) {
    std::vector<Contribution> out;
    std::uint32_t paper_idx = 0;
    for (const ScanRecord& rec : records) {
        if (!record_passes_filters(rec, filters) || !window.contains(rec.year))
            continue;
        const std::vector<AreaId>* areas = journals.areas_of(rec.journal);
        if (!areas)
            continue;
        std::int32_t location = kNoLocation;
        if (auto loc = gazetteer.resolve(rec.affiliation))
            location = locations.intern(*loc);
        std::vector<Contribution> contribs =
            extract_contributions(paper_idx, rec.year, location, rec.terms, cohorts, thesaurus,
                                  std::span<const AreaId>(*areas));
        out.insert(out.end(), contribs.begin(), contribs.end());
        ++paper_idx;
    }
    return out;
}

// ---------------------------------------------------------------------------
// report rows

struct LocationReport {
    std::string location;
    std::uint64_t contributions = 0;
    std::optional<double> edge_factor;
    std::optional<std::pair<double, double>> ci;
    std::array<std::optional<double>, kCategoryGroupCount> by_category_group;
    std::array<std::optional<double>, kAreaGroupCount> by_area_group;
};

struct StageInfo {
    std::string name;
    std::string key;
    bool cached = false;
    double seconds = 0.0;
    std::uint64_t rows = 0;
    std::vector<std::string> outputs;
};

struct PipelineResult {
    std::vector<StageInfo> stages;
    fs::path manifest_path;
    std::vector<LocationReport> report; // emission order of edge_factors.csv
    Diagnostics diag;

    const StageInfo* stage(std::string_view name) const {
        for (const auto& s : stages)
            if (s.name == name)
                return &s;
        return nullptr;
    }
};

// ---------------------------------------------------------------------------
// pipeline

class Pipeline {
public:
    explicit Pipeline(RunConfig cfg) : cfg_(std::move(cfg)) {}

    PipelineResult run() {
        cfg_.validate();
        fs::create_directories(cfg_.out_dir);
        load_previous_manifest();

        stage_vocab();
        stage_scan();
        stage_cohorts();
        stage_areas();
        stage_score();
        stage_report();

        write_manifest();
        result_.manifest_path = cfg_.out_dir / "manifest.json";
        return std::move(result_);
    }

private:
    using Clock = std::chrono::steady_clock;

    RunConfig cfg_;
    PipelineResult result_;
    nlohmann::json prev_manifest_;

    Thesaurus thesaurus_;
    std::vector<ScanRecord> records_;
    bool records_loaded_ = false;
    CohortTable cohorts_term_;   // floored, term-only
    CohortTable cohorts_active_; // mode-selected
    JournalTable journals_;
    std::vector<AreaGroup> area_groups_;
    ScoreRun score_;

    // --- helpers ----------------------------------------------------------

    static std::string hex64(std::uint64_t v) {
        static const char* digits = "0123456789abcdef";
        std::string out(16, '0');
        for (int i = 15; i >= 0; --i) {
            out[std::size_t(i)] = digits[v & 0xf];
            v >>= 4;
        }
        return out;
    }

    static std::string digest_file(const fs::path& path) {
        if (path.empty())
            return "absent";
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw ValidationError("cannot read input file " + path.string());
        std::uint64_t h = 0xcbf29ce484222325ull;
        char buf[1 << 16];
        while (in.read(buf, sizeof buf) || in.gcount() > 0)
            h = fnv1a64(std::string_view(buf, std::size_t(in.gcount())), h);
        return hex64(h);
    }

    static std::string stage_key(std::initializer_list<std::string_view> parts) {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (auto p : parts) {
            h = fnv1a64(p, h);
            h = fnv1a64("|", h);
        }
        return hex64(h);
    }

    std::string filters_fingerprint() const {
        std::ostringstream os;
        os << cfg_.filters.year_lo << ',' << cfg_.filters.year_hi << ','
           << cfg_.filters.char_limits << ',' << cfg_.filters.char_lo << ','
           << cfg_.filters.char_hi << ',' << cfg_.filters.original_only;
        return os.str();
    }

    void load_previous_manifest() {
        std::ifstream in(cfg_.out_dir / "manifest.json");
        if (!in)
            return;
        prev_manifest_ = nlohmann::json::parse(in, nullptr, false);
        if (prev_manifest_.is_discarded())
            prev_manifest_ = nlohmann::json();
    }

    bool stage_is_cached(const std::string& name, const std::string& key,
                         const std::vector<fs::path>& outputs) const {
        if (!prev_manifest_.is_object() || !prev_manifest_.contains("stages"))
            return false;
        const auto& stages = prev_manifest_["stages"];
        if (!stages.is_object() || !stages.contains(name))
            return false;
        const auto& st = stages[name];
        if (!st.is_object() || !st.contains("key") || st["key"] != key)
            return false;
        for (const fs::path& p : outputs)
            if (!fs::exists(p))
                return false;
        return true;
    }

    std::uint64_t previous_rows(const std::string& name) const {
        if (prev_manifest_.is_object() && prev_manifest_.contains("stages")) {
            const auto& stages = prev_manifest_["stages"];
            if (stages.is_object() && stages.contains(name) && stages[name].contains("rows"))
                return stages[name]["rows"].get<std::uint64_t>();
        }
        return 0;
    }

    StageInfo& record_stage(std::string name, std::string key, bool cached, double seconds,
                            std::uint64_t rows, std::vector<fs::path> outputs) {
        StageInfo info;
        info.name = std::move(name);
        info.key = std::move(key);
        info.cached = cached;
        info.seconds = seconds;
        info.rows = rows;
        for (const auto& p : outputs)
            info.outputs.push_back(p.string());
        result_.stages.push_back(std::move(info));
        return result_.stages.back();
    }

    // Writes through a .partial file; the final name appears only on success.
    template <typename Fn>
    void write_output(const fs::path& path, Fn&& fn) {
        fs::path partial = path;
        partial += ".partial";
        {
            std::ofstream out(partial, std::ios::binary);
            if (!out)
                throw PipelineError("cannot write " + partial.string());
            fn(out);
            out.flush();
            if (!out)
                throw PipelineError("write failed for " + partial.string());
        }
        fs::rename(partial, path);
    }

    const std::vector<ScanRecord>& records() {
        if (!records_loaded_) {
            records_ = load_scan_records(cfg_.out_dir / "matches.bin");
            records_loaded_ = true;
        }
        return records_;
    }

    StatusRules status_rules() const {
        if (cfg_.status_rules.empty())
            return StatusRules::defaults();
        std::ifstream in(cfg_.status_rules);
        if (!in)
            throw ValidationError("cannot read " + cfg_.status_rules.string());
        return StatusRules::load(in, nullptr);
    }

    Gazetteer gazetteer() {
        std::ifstream gaz(cfg_.gazetteer);
        if (!gaz)
            throw ValidationError("cannot read " + cfg_.gazetteer.string());
        if (cfg_.regions.empty())
            return Gazetteer::load(gaz, nullptr, &result_.diag);
        std::ifstream regions(cfg_.regions);
        if (!regions)
            throw ValidationError("cannot read " + cfg_.regions.string());
        return Gazetteer::load(gaz, &regions, &result_.diag);
    }

    // --- stages -------------------------------------------------------------

    std::string vocab_key_, scan_key_, cohort_key_, areas_key_, score_key_;

    void stage_vocab() {
        auto t0 = Clock::now();
        vocab_key_ = stage_key({"vocab", digest_file(cfg_.vocab), digest_file(cfg_.categories)});
        std::ifstream vocab(cfg_.vocab), categories(cfg_.categories);
        if (!vocab || !categories)
            throw ValidationError("cannot read vocabulary inputs");
        thesaurus_ = load_thesaurus(vocab, categories, &result_.diag);
        double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        // no file outputs; "cached" records that the inputs were unchanged
        record_stage("vocab", vocab_key_, stage_is_cached("vocab", vocab_key_, {}), secs,
                     thesaurus_.term_count(), {});
    }

    void stage_scan() {
        auto t0 = Clock::now();
        fs::path matches = cfg_.out_dir / "matches.bin";
        scan_key_ = stage_key({"scan", vocab_key_, digest_file(cfg_.corpus),
                               digest_file(cfg_.status_rules)});
        if (stage_is_cached("scan", scan_key_, {matches})) {
            record_stage("scan", scan_key_, true, 0.0, previous_rows("scan"), {matches});
            return;
        }
        DictionaryMatcher matcher = DictionaryMatcher::build(thesaurus_);
        StatusRules rules = status_rules();
        std::ifstream corpus(cfg_.corpus);
        if (!corpus)
            throw ValidationError("cannot read " + cfg_.corpus.string());
        std::uint64_t rows = 0;
        write_output(matches, [&](std::ostream& out) {
            rows = scan_corpus_stream(corpus, matcher, rules, cfg_.workers, out, &result_.diag);
        });
        records_loaded_ = false;
        double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        record_stage("scan", scan_key_, false, secs, rows, {matches});
    }

    void stage_cohorts() {
        auto t0 = Clock::now();
        fs::path path = cfg_.out_dir / "cohorts.tsv";
        cohort_key_ = stage_key({"cohorts", scan_key_, std::to_string(cfg_.cohort_floor)});
        bool cached = stage_is_cached("cohorts", cohort_key_, {path});
        if (cached) {
            std::ifstream in(path);
            cohorts_term_ = load_cohorts(in, thesaurus_.term_count(), CohortMode::TermOnly,
                                         &result_.diag);
            cohorts_term_.apply_floor(cfg_.cohort_floor);
        } else {
            cohorts_term_ = compute_cohorts_from_records(records(), thesaurus_.term_count());
            cohorts_term_.apply_floor(cfg_.cohort_floor);
            write_output(path, [&](std::ostream& out) { save_cohorts(cohorts_term_, out); });
        }
        cohorts_active_ = (cfg_.cohort_mode == CohortMode::SynonymPooled)
                              ? pool_synonyms(cohorts_term_, thesaurus_)
                              : cohorts_term_;
        double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        record_stage("cohorts", cohort_key_, cached, secs, cohorts_term_.observed_count(), {path});
    }

    void stage_areas() {
        auto t0 = Clock::now();
        fs::path path = cfg_.out_dir / "research_area_groups.csv";
        areas_key_ = stage_key({"areas", scan_key_, digest_file(cfg_.journals),
                                filters_fingerprint(), period_label(cfg_.period)});
        {
            std::ifstream in(cfg_.journals);
            if (!in)
                throw ValidationError("cannot read " + cfg_.journals.string());
            journals_ = JournalTable::load(in, &result_.diag);
        }
        bool cached = stage_is_cached("areas", areas_key_, {path});
        if (cached) {
            area_groups_.assign(journals_.area_count(), AreaGroup::Other);
            std::ifstream in(path);
            std::string line;
            std::getline(in, line); // header
            while (std::getline(in, line)) {
                if (line.empty())
                    continue;
                auto fields = csv_parse_line(line);
                if (fields.size() != 2)
                    throw PipelineError("corrupt research_area_groups.csv; delete " +
                                        path.string() + " and rerun");
                AreaId id = journals_.intern_area(fields[0]);
                if (id >= area_groups_.size())
                    area_groups_.resize(id + 1, AreaGroup::Other);
                for (int g = 0; g < kAreaGroupCount; ++g)
                    if (fields[1] == area_group_label(static_cast<AreaGroup>(g)))
                        area_groups_[id] = static_cast<AreaGroup>(g);
            }
        } else {
            area_groups_ =
                classify_areas_from_records(records(), journals_, cfg_.filters, cfg_.period);
            write_output(path, [&](std::ostream& out) {
                out << "research_area,group\n";
                for (AreaId a = 0; a < journals_.area_count(); ++a)
                    out << csv_escape(journals_.area_names[a]) << ','
                        << area_group_label(area_groups_[a]) << '\n';
            });
        }
        double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        record_stage("areas", areas_key_, cached, secs, journals_.area_count(), {path});
    }

    void stage_score() {
        auto t0 = Clock::now();
        fs::path contrib_path = cfg_.out_dir / "contributions.csv";
        fs::path newest_path = cfg_.out_dir / "newest_terms.tsv";
        std::ostringstream cfg_fp;
        cfg_fp << period_label(cfg_.period) << '|' << format_double(cfg_.cutoff, 9) << '|'
               << (cfg_.cohort_mode == CohortMode::SynonymPooled ? "synonym" : "term");
        score_key_ = stage_key({"score", scan_key_, cohort_key_, digest_file(cfg_.journals),
                                digest_file(cfg_.gazetteer), digest_file(cfg_.regions),
                                filters_fingerprint(), cfg_fp.str()});
        bool cached = stage_is_cached("score", score_key_, {contrib_path, newest_path});
        if (cached) {
            load_score_run(contrib_path, newest_path);
        } else {
            score_ = score_scan_records(records(), cfg_.filters, cfg_.period, gazetteer(),
                                        journals_, cohorts_active_, thesaurus_, cfg_.cutoff);
            for (auto& [k, v] : score_.diag.counts)
                result_.diag.count(k, v);
            write_output(contrib_path, [&](std::ostream& out) { write_contributions(out); });
            write_output(newest_path, [&](std::ostream& out) {
                for (const NewestTermEvent& ev : score_.newest_events)
                    out << ev.paper << '\t' << ev.term << '\t' << ev.category << '\n';
            });
        }
        double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        record_stage("score", score_key_, cached, secs, score_.contributions.size(),
                     {contrib_path, newest_path});
    }

    void write_contributions(std::ostream& out) const {
        out << "paper_id,idea_category,research_area,pub_year,cohort_year,location,novel,score\n";
        for (const Contribution& c : score_.contributions) {
            out << csv_escape(score_.paper_ids[c.paper]) << ','
                << csv_escape(thesaurus_.categories[c.cell.category].name) << ','
                << csv_escape(journals_.area_names[c.cell.area]) << ',' << c.pub_year << ','
                << c.cohort_year << ','
                << (c.location == kNoLocation ? std::string()
                                              : csv_escape(score_.locations.name(c.location)))
                << ',' << (c.novel ? 1 : 0) << ',' << format_double(c.score, 9) << '\n';
        }
    }

    void load_score_run(const fs::path& contrib_path, const fs::path& newest_path) {
        score_ = ScoreRun{};
        std::unordered_map<std::string, std::uint32_t> paper_ids;
        std::unordered_map<std::string, AreaId> area_ids;
        for (AreaId a = 0; a < journals_.area_count(); ++a)
            area_ids.emplace(journals_.area_names[a], a);
        std::ifstream in(contrib_path);
        if (!in)
            throw PipelineError("cannot read cached " + contrib_path.string());
        std::string line;
        std::getline(in, line); // header
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            auto f = csv_parse_line(line);
            if (f.size() != 8)
                throw PipelineError("corrupt contributions.csv; delete the output directory");
            Contribution c;
            auto [pit, pnew] = paper_ids.emplace(f[0], std::uint32_t(score_.paper_ids.size()));
            if (pnew)
                score_.paper_ids.push_back(f[0]);
            c.paper = pit->second;
            c.cell.category = thesaurus_.category_id(f[1]);
            auto ait = area_ids.find(f[2]);
            if (ait == area_ids.end())
                throw PipelineError("contributions.csv references unknown research area \"" +
                                    f[2] + "\"");
            c.cell.area = ait->second;
            auto pub_year = parse_int(f[3]);
            auto cohort_year = parse_int(f[4]);
            auto novel = parse_int(f[6]);
            auto score = parse_double(f[7]);
            if (!pub_year || !cohort_year || !novel || !score)
                throw PipelineError("corrupt contributions.csv; delete the output directory");
            c.pub_year = std::int32_t(*pub_year);
            c.cohort_year = std::int32_t(*cohort_year);
            c.location = f[5].empty() ? kNoLocation : score_.locations.intern(f[5]);
            c.novel = *novel != 0;
            c.score = *score;
            score_.contributions.push_back(c);
        }
        std::ifstream nin(newest_path);
        if (!nin)
            throw PipelineError("cannot read cached " + newest_path.string());
        while (std::getline(nin, line)) {
            if (line.empty())
                continue;
            auto cols = split_char(line, '\t');
            if (cols.size() != 3)
                throw PipelineError("corrupt newest_terms.tsv; delete the output directory");
            auto paper = parse_int(cols[0]);
            auto term = parse_int(cols[1]);
            auto category = parse_int(cols[2]);
            if (!paper || !term || !category)
                throw PipelineError("corrupt newest_terms.tsv; delete the output directory");
            score_.newest_events.push_back(NewestTermEvent{std::uint32_t(*paper),
                                                           CategoryId(*category), TermId(*term)});
        }
    }

    void stage_report() {
        auto t0 = Clock::now();
        fs::path ef_path = cfg_.out_dir / "edge_factors.csv";
        fs::path plot_path = cfg_.out_dir / "plot_data.csv";
        fs::path top_path = cfg_.out_dir / "top_terms.csv";

        std::ostringstream fp;
        fp << int(cfg_.weight_scheme) << '|' << period_label(cfg_.weight_period) << '|'
           << int(cfg_.missing) << '|' << cfg_.ci << '|' << cfg_.ci_samples << '|' << cfg_.seed
           << '|' << int(cfg_.bootstrap_draw) << '|' << cfg_.groups << '|'
           << cfg_.group_fallback_min << '|' << period_label(cfg_.group_fallback_period) << '|'
           << cfg_.top_terms;
        for (const PeriodRange& p : cfg_.periods)
            fp << '|' << period_label(p);
        std::string report_key = stage_key({"report", score_key_, areas_key_, fp.str()});

        std::vector<fs::path> outputs = {ef_path, plot_path};
        if (cfg_.top_terms)
            outputs.push_back(top_path);
        if (stage_is_cached("report", report_key, outputs)) {
            load_report(ef_path);
            double secs = std::chrono::duration<double>(Clock::now() - t0).count();
            record_stage("report", report_key, true, secs, result_.report.size(), outputs);
            return;
        }

        const std::uint32_t n_locations = std::uint32_t(score_.locations.size());
        AggregateTables tables(score_.contributions, n_locations);

        WeightTable weights;
        Gazetteer gaz = gazetteer();
        if (cfg_.weight_scheme == WeightScheme::FixedPeriod) {
            std::vector<Contribution> slice = extract_raw_contributions(
                records(), cfg_.filters, cfg_.weight_period, gaz, journals_, cohorts_active_,
                thesaurus_, score_.locations);
            weights = global_count_weights(slice);
        } else {
            weights = global_count_weights(score_.contributions);
        }

        // small-sample fallback: a second scored slice over the wider period
        std::optional<AggregateTables> fallback_tables;
        WeightTable fallback_weights;
        if (cfg_.groups && cfg_.group_fallback_min > 0) {
            std::vector<Contribution> wide = extract_raw_contributions(
                records(), cfg_.filters, cfg_.group_fallback_period, gaz, journals_,
                cohorts_active_, thesaurus_, score_.locations);
            flag_novelty(wide, cfg_.cutoff);
            normalize_scores(wide);
            fallback_tables.emplace(wide, std::uint32_t(score_.locations.size()));
            fallback_weights = global_count_weights(wide);
        }

        std::vector<LocationReport> rows(n_locations);
        for (std::uint32_t loc = 0; loc < n_locations; ++loc) {
            LocationReport& row = rows[loc];
            row.location = score_.locations.name(std::int32_t(loc));
            row.contributions = tables.location_contributions(loc);
            row.edge_factor = (cfg_.weight_scheme == WeightScheme::OwnCount)
                                  ? own_count_edge_factor(tables, loc)
                                  : overall_edge_factor(tables, loc, weights, cfg_.missing);
            if (cfg_.groups) {
                auto grouped = [&](auto&& pred) -> std::optional<double> {
                    if (fallback_tables) {
                        std::uint64_t in_group = 0;
                        for (const AggregateTables::Row& r : tables.location_rows(loc))
                            if (pred(tables.cell_at(r.cell)))
                                in_group += r.count;
                        if (in_group < cfg_.group_fallback_min)
                            return cfg_.weight_scheme == WeightScheme::OwnCount
                                       ? own_count_edge_factor(*fallback_tables, loc, pred)
                                       : grouped_edge_factor(*fallback_tables, loc,
                                                             fallback_weights, cfg_.missing,
                                                             pred);
                    }
                    return cfg_.weight_scheme == WeightScheme::OwnCount
                               ? own_count_edge_factor(tables, loc, pred)
                               : grouped_edge_factor(tables, loc, weights, cfg_.missing, pred);
                };
                for (int g = 0; g < kCategoryGroupCount; ++g) {
                    auto group = static_cast<CategoryGroup>(g);
                    row.by_category_group[std::size_t(g)] = grouped([&](CellKey cell) {
                        return thesaurus_.category_group(cell.category) == group;
                    });
                }
                for (int g = 0; g < kAreaGroupCount; ++g) {
                    auto group = static_cast<AreaGroup>(g);
                    row.by_area_group[std::size_t(g)] = grouped([&](CellKey cell) {
                        return cell.area < area_groups_.size() &&
                               area_groups_[cell.area] == group;
                    });
                }
            }
        }
        if (cfg_.ci) {
            BootstrapResult boot =
                bootstrap_ci(tables, weights, cfg_.missing, cfg_.ci_samples, cfg_.seed,
                             resolve_workers(cfg_.workers), cfg_.bootstrap_draw);
            for (std::uint32_t loc = 0; loc < n_locations; ++loc) {
                rows[loc].ci = boot.ci[loc];
                if (!boot.ci[loc] && boot.collected[loc] > 0)
                    result_.diag.warn("report.ci_absent",
                                      "location " + rows[loc].location + " present in only " +
                                          std::to_string(boot.collected[loc]) + "/" +
                                          std::to_string(cfg_.ci_samples) +
                                          " bootstrap replicates; CI omitted");
            }
        }

        std::sort(rows.begin(), rows.end(), [](const LocationReport& a, const LocationReport& b) {
            if (a.edge_factor.has_value() != b.edge_factor.has_value())
                return a.edge_factor.has_value();
            if (a.edge_factor && b.edge_factor && *a.edge_factor != *b.edge_factor)
                return *a.edge_factor > *b.edge_factor;
            return a.location < b.location;
        });
        result_.report = rows;

        write_output(ef_path, [&](std::ostream& out) { write_edge_factors(out, rows); });

        // plot_data.csv: baseline values plus any configured period columns.
        std::vector<std::vector<std::optional<double>>> period_values;
        if (!cfg_.periods.empty()) {
            PeriodRange weight_period = cfg_.weight_scheme == WeightScheme::FixedPeriod
                                            ? cfg_.weight_period
                                            : cfg_.period;
            // one extraction spanning every requested period plus the weight
            // period; period_edge_factors slices it per period itself
            PeriodRange span{weight_period.lo, weight_period.hi};
            for (const PeriodRange& p : cfg_.periods) {
                span.lo = std::min(span.lo, p.lo);
                span.hi = std::max(span.hi, p.hi);
            }
            std::vector<Contribution> raw = extract_raw_contributions(
                records(), cfg_.filters, span, gaz, journals_, cohorts_active_, thesaurus_,
                score_.locations);
            period_values = period_edge_factors(raw, cfg_.periods, weight_period, cfg_.cutoff,
                                                cfg_.missing,
                                                std::uint32_t(score_.locations.size()));
        }
        write_output(plot_path, [&](std::ostream& out) {
            out << "location,value,period\n";
            for (const LocationReport& row : rows)
                if (row.edge_factor)
                    out << csv_escape(row.location) << ',' << format_double(*row.edge_factor) << ','
                        << period_label(cfg_.period) << '\n';
            for (std::size_t p = 0; p < cfg_.periods.size(); ++p)
                for (std::size_t loc = 0; loc < period_values.size(); ++loc)
                    if (period_values[loc][p])
                        out << csv_escape(score_.locations.name(std::int32_t(loc))) << ','
                            << format_double(*period_values[loc][p]) << ','
                            << period_label(cfg_.periods[p]) << '\n';
        });

        if (cfg_.top_terms)
            write_output(top_path, [&](std::ostream& out) { write_top_terms(out); });

        double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        record_stage("report", report_key, false, secs, rows.size(), outputs);
    }

    void write_edge_factors(std::ostream& out, const std::vector<LocationReport>& rows) const {
        out << "location,contributions,edge_factor,ci_lo,ci_hi";
        for (int g = 0; g < kCategoryGroupCount; ++g) {
            std::string label(category_group_label(static_cast<CategoryGroup>(g)));
            for (char& c : label)
                c = (c == ' ') ? '_' : char(std::tolower(static_cast<unsigned char>(c)));
            out << ",ef_" << label;
        }
        for (int g = 0; g < kAreaGroupCount; ++g) {
            std::string label(area_group_label(static_cast<AreaGroup>(g)));
            for (char& c : label)
                c = (c == ' ') ? '_' : char(std::tolower(static_cast<unsigned char>(c)));
            out << ",ef_area_" << label;
        }
        out << '\n';
        auto cell = [&](const std::optional<double>& v) {
            out << ',';
            if (v)
                out << format_double(*v);
        };
        for (const LocationReport& row : rows) {
            out << csv_escape(row.location) << ',' << row.contributions;
            cell(row.edge_factor);
            cell(row.ci ? std::optional<double>(row.ci->first) : std::nullopt);
            cell(row.ci ? std::optional<double>(row.ci->second) : std::nullopt);
            for (const auto& v : row.by_category_group)
                cell(v);
            for (const auto& v : row.by_area_group)
                cell(v);
            out << '\n';
        }
    }

    void write_top_terms(std::ostream& out) {
        out << "group,decade,rank,count,cumulative_share,term,cohort,synonym_cohort,category\n";
        CohortTable pooled = pool_synonyms(cohorts_term_, thesaurus_);
        // decades present among the active cohorts of reported terms
        std::map<std::pair<int, int>, bool> slices; // (group, decade)
        for (const NewestTermEvent& ev : score_.newest_events) {
            int group = int(thesaurus_.category_group(ev.category));
            int decade = (cohorts_active_.year(ev.term) / 10) * 10;
            slices[{group, decade}] = true;
        }
        for (const auto& [slice, _] : slices) {
            auto rows = top_terms_report(score_.newest_events, cohorts_active_, &pooled,
                                         thesaurus_, static_cast<CategoryGroup>(slice.first),
                                         slice.second);
            for (const TopTermRow& r : rows) {
                out << csv_escape(
                           std::string(category_group_label(static_cast<CategoryGroup>(slice.first))))
                    << ',' << slice.second << ',' << r.rank << ',' << r.count << ','
                    << format_double(r.cumulative_share) << ',' << csv_escape(r.term) << ','
                    << r.cohort;
                out << ',';
                if (r.synonym_cohort)
                    out << *r.synonym_cohort;
                out << ',' << csv_escape(r.category) << '\n';
            }
        }
    }

    void load_report(const fs::path& ef_path) {
        result_.report.clear();
        std::ifstream in(ef_path);
        if (!in)
            throw PipelineError("cannot read cached " + ef_path.string());
        std::string line;
        std::getline(in, line); // header
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            auto f = csv_parse_line(line);
            if (f.size() != std::size_t(5 + kCategoryGroupCount + kAreaGroupCount))
                throw PipelineError("corrupt edge_factors.csv; delete the output directory");
            LocationReport row;
            row.location = f[0];
            if (auto n = parse_int(f[1]))
                row.contributions = std::uint64_t(*n);
            auto opt = [&](const std::string& s) -> std::optional<double> {
                if (s.empty())
                    return std::nullopt;
                return parse_double(s);
            };
            row.edge_factor = opt(f[2]);
            auto lo = opt(f[3]), hi = opt(f[4]);
            if (lo && hi)
                row.ci = std::make_pair(*lo, *hi);
            for (int g = 0; g < kCategoryGroupCount; ++g)
                row.by_category_group[std::size_t(g)] = opt(f[std::size_t(5 + g)]);
            for (int g = 0; g < kAreaGroupCount; ++g)
                row.by_area_group[std::size_t(g)] = opt(f[std::size_t(5 + kCategoryGroupCount + g)]);
            result_.report.push_back(std::move(row));
        }
    }

    void write_manifest() {
        nlohmann::json m;
        m["config"] = {
            {"vocab", cfg_.vocab.string()},
            {"categories", cfg_.categories.string()},
            {"corpus", cfg_.corpus.string()},
            {"journals", cfg_.journals.string()},
            {"gazetteer", cfg_.gazetteer.string()},
            {"regions", cfg_.regions.string()},
            {"status_rules", cfg_.status_rules.string()},
            {"out_dir", cfg_.out_dir.string()},
            {"filters", filters_fingerprint()},
            {"cohort_mode", cfg_.cohort_mode == CohortMode::SynonymPooled ? "synonym" : "term"},
            {"cohort_floor", cfg_.cohort_floor},
            {"period", period_label(cfg_.period)},
            {"cutoff", cfg_.cutoff},
            {"weights", int(cfg_.weight_scheme)},
            {"weight_period", period_label(cfg_.weight_period)},
            {"missing", int(cfg_.missing)},
            {"ci", cfg_.ci},
            {"samples", cfg_.ci_samples},
            {"seed", cfg_.seed},
            {"groups", cfg_.groups},
            {"top_terms", cfg_.top_terms},
        };
        nlohmann::json inputs = nlohmann::json::object();
        for (const auto& [name, path] :
             {std::pair<const char*, const fs::path&>{"vocab", cfg_.vocab},
              {"categories", cfg_.categories},
              {"corpus", cfg_.corpus},
              {"journals", cfg_.journals},
              {"gazetteer", cfg_.gazetteer},
              {"regions", cfg_.regions},
              {"status_rules", cfg_.status_rules}})
            inputs[name] = digest_file(path);
        m["inputs"] = inputs;
        nlohmann::json stages = nlohmann::json::object();
        for (const StageInfo& s : result_.stages) {
            stages[s.name] = {{"key", s.key},
                              {"cached", s.cached},
                              {"seconds", s.seconds},
                              {"rows", s.rows},
                              {"outputs", s.outputs}};
        }
        m["stages"] = stages;
        nlohmann::json diag = nlohmann::json::object();
        for (const auto& [k, v] : result_.diag.counts)
            diag[k] = v;
        m["diagnostics"] = diag;
        write_output(cfg_.out_dir / "manifest.json",
                     [&](std::ostream& out) { out << m.dump(2) << '\n'; });
    }
};

inline PipelineResult run_pipeline(const RunConfig& cfg) { return Pipeline(cfg).run(); }

} // namespace edgefactor
