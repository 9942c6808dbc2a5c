// Acceptance suite: one binary, ten numbered criteria, one PASS/FAIL line
// each. Run all with no arguments or a single criterion with --only N.
// Exit code 0 iff every executed criterion passed.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "edgefactor/cohort.hpp"
#include "edgefactor/corpus.hpp"
#include "edgefactor/edge_factor.hpp"
#include "edgefactor/matcher.hpp"
#include "edgefactor/parallel.hpp"
#include "edgefactor/pipeline.hpp"
#include "edgefactor/rng.hpp"
#include "edgefactor/scoring.hpp"
#include "edgefactor/synth.hpp"
#include "edgefactor/text.hpp"
#include "edgefactor/vocab.hpp"

#include "../support/oracles.hpp"

using namespace edgefactor;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Check {
    bool ok = true;
    std::string detail;

    void fail(const std::string& why) {
        ok = false;
        if (!detail.empty())
            detail += "; ";
        detail += why;
    }
    void note(const std::string& info) {
        if (!detail.empty())
            detail += "; ";
        detail += info;
    }
};

// ---------------------------------------------------------------------------
// shared: run the scoring pipeline in memory over a generated corpus

struct SynthRun {
    Thesaurus thesaurus;
    JournalTable journals;
    Gazetteer gazetteer;
    CohortTable cohorts;
    ScoreRun score;
};

SynthRun run_synth(const SynthConfig& synth_cfg, const fs::path& dir,
                   const FilterConfig& filters, PeriodRange period, double cutoff) {
    synth_generate(synth_cfg, dir);
    SynthRun out;
    {
        std::ifstream vocab(dir / "vocab.tsv"), categories(dir / "categories.tsv");
        out.thesaurus = load_thesaurus(vocab, categories);
    }
    {
        std::ifstream in(dir / "journals.tsv");
        out.journals = JournalTable::load(in, nullptr);
    }
    {
        std::ifstream gaz(dir / "gazetteer.tsv"), regions(dir / "regions.tsv");
        out.gazetteer = Gazetteer::load(gaz, &regions, nullptr);
    }
    DictionaryMatcher matcher = DictionaryMatcher::build(out.thesaurus);
    StatusRules rules = StatusRules::defaults();
    std::vector<ScanRecord> records;
    {
        std::ifstream corpus(dir / "corpus.jsonl");
        DictionaryMatcher::Scratch scratch;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(corpus, line)) {
            ++lineno;
            if (line.empty())
                continue;
            auto pub = parse_publication_line(line, nullptr, lineno);
            if (pub)
                records.push_back(scan_publication(*pub, matcher, scratch, rules));
        }
    }
    out.cohorts = compute_cohorts_from_records(records, out.thesaurus.term_count());
    out.cohorts.apply_floor(1950);
    out.score = score_scan_records(records, filters, period, out.gazetteer, out.journals,
                                   out.cohorts, out.thesaurus, cutoff);
    return out;
}

fs::path scratch_dir(const std::string& name) {
    fs::path dir = fs::path("acceptance_tmp") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// ---------------------------------------------------------------------------
// 1. matcher vs naive contiguous-subsequence oracle

Check criterion_matcher_oracle() {
    Check check;
    auto t0 = Clock::now();
    SplitMix64 rng(0x5eed0001);
    std::vector<std::string> alphabet;
    for (int i = 0; i < 40; ++i)
        alphabet.push_back("tok" + std::to_string(i));

    std::size_t mismatches = 0;
    for (int instance = 0; instance < 500; ++instance) {
        std::size_t dict_size = 1 + rng.below(2000);
        std::vector<std::pair<TermId, TokenSeq>> patterns;
        patterns.reserve(dict_size);
        for (std::size_t i = 0; i < dict_size; ++i) {
            TokenSeq pat;
            std::size_t len = 1 + rng.below(5);
            for (std::size_t k = 0; k < len; ++k)
                pat.push_back(alphabet[rng.below(alphabet.size())]);
            patterns.emplace_back(TermId(i), std::move(pat));
        }
        DictionaryMatcher matcher = DictionaryMatcher::build(
            std::span<const std::pair<TermId, TokenSeq>>(patterns), TermId(dict_size));

        TokenSeq doc;
        std::size_t doc_len = rng.below(501);
        while (doc.size() < doc_len) {
            std::uint64_t r = rng.below(10);
            if (r < 2) {
                const TokenSeq& inject = patterns[rng.below(patterns.size())].second;
                doc.insert(doc.end(), inject.begin(), inject.end());
            } else if (r < 3) {
                doc.push_back("outofvocab" + std::to_string(rng.below(4)));
            } else {
                doc.push_back(alphabet[rng.below(alphabet.size())]);
            }
        }
        doc.resize(std::min(doc.size(), std::size_t(500)));

        if (matcher.find_terms(doc) != testsupport::naive_find_terms(patterns, doc))
            ++mismatches;
    }
    double secs = seconds_since(t0);
    if (mismatches)
        check.fail(std::to_string(mismatches) + "/500 instances diverge from the oracle");
    if (secs >= 30.0)
        check.fail("runtime " + format_double(secs, 1) + "s exceeds 30s");
    check.note("500 instances, " + format_double(secs, 1) + "s");
    return check;
}

// ---------------------------------------------------------------------------
// 2. novelty flags vs sort-and-count oracle, plus cutoff monotonicity

Check criterion_novelty_oracle() {
    Check check;
    auto t0 = Clock::now();
    SplitMix64 rng(0x5eed0002);
    const double cutoffs[] = {0.01, 0.05, 0.10, 0.20};

    std::size_t mismatches = 0, monotonicity_breaks = 0;
    for (int pool_idx = 0; pool_idx < 500; ++pool_idx) {
        std::size_t n = 1 + rng.below(1000);
        bool heavy_ties = pool_idx % 2 == 0;
        std::vector<std::int32_t> years;
        years.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            years.push_back(heavy_ties ? 2010 + std::int32_t(rng.below(4))
                                       : 1950 + std::int32_t(rng.below(67)));

        std::vector<std::vector<bool>> flagged;
        for (double p : cutoffs) {
            std::vector<Contribution> pool;
            pool.reserve(n);
            for (std::int32_t y : years) {
                Contribution c;
                c.cell = {0, 0};
                c.pub_year = 2016;
                c.cohort_year = y;
                pool.push_back(c);
            }
            flag_novelty(pool, p);
            std::vector<bool> got(n);
            for (std::size_t i = 0; i < n; ++i)
                got[i] = pool[i].novel;
            if (got != testsupport::oracle_novelty(years, p))
                ++mismatches;
            flagged.push_back(std::move(got));
        }
        for (std::size_t k = 0; k + 1 < flagged.size(); ++k)
            for (std::size_t i = 0; i < n; ++i)
                if (flagged[k][i] && !flagged[k + 1][i])
                    ++monotonicity_breaks;
    }
    double secs = seconds_since(t0);
    if (mismatches)
        check.fail(std::to_string(mismatches) + " pool/cutoff combinations diverge");
    if (monotonicity_breaks)
        check.fail(std::to_string(monotonicity_breaks) + " cutoff-monotonicity violations");
    if (secs >= 30.0)
        check.fail("runtime " + format_double(secs, 1) + "s exceeds 30s");
    check.note("500 pools x 4 cutoffs, " + format_double(secs, 1) + "s");
    return check;
}

// ---------------------------------------------------------------------------
// 3. normalization at scale: per-cell mean 100 (1e-9), global weighted mean
//    of location EFs 100 (1e-6)

Check criterion_normalization() {
    Check check;
    SynthConfig synth;
    synth.seed = 303;
    synth.year_lo = 2005;
    synth.year_hi = 2016;
    synth.prehistory = 12;
    synth.categories = 10;
    synth.journals = 10;
    synth.areas = 5;
    synth.mentions_per_paper = 6;
    synth.births_per_year = 1.5;
    synth.locations = {{"Alphaville", 0, 700}, {"Betatown", 2, 700}, {"Gammapolis", 4, 700}};

    FilterConfig filters;
    filters.year_lo = 2005;
    filters.year_hi = 2016;
    SynthRun run = run_synth(synth, scratch_dir("normalization"), filters,
                             PeriodRange{2009, 2016}, 0.05);

    const std::size_t n_contribs = run.score.contributions.size();
    if (n_contribs < 100000)
        check.fail("only " + std::to_string(n_contribs) + " contributions (need >= 1e5)");

    AggregateTables tables(run.score.contributions, std::uint32_t(run.score.locations.size()));
    if (tables.cell_count() < 50)
        check.fail("only " + std::to_string(tables.cell_count()) + " cells (need >= 50)");

    double worst_cell = 0.0;
    for (std::uint32_t cell = 0; cell < tables.cell_count(); ++cell)
        worst_cell = std::max(worst_cell, std::abs(tables.cell_mean(cell) - 100.0));
    if (worst_cell >= 1e-9)
        check.fail("worst per-cell |mean-100| = " + format_double(worst_cell, 12));

    // no missing cells: every location present in every cell
    for (std::uint32_t loc = 0; loc < tables.location_count(); ++loc)
        if (tables.location_rows(loc).size() != tables.cell_count())
            check.fail("location " + run.score.locations.name(std::int32_t(loc)) +
                       " is missing cells; the global-mean identity needs full coverage");

    WeightTable weights = global_count_weights(run.score.contributions);
    NeumaierSum weighted, total;
    for (std::uint32_t loc = 0; loc < tables.location_count(); ++loc) {
        auto ef = overall_edge_factor(tables, loc, weights, MissingPolicy::OwnAverage);
        if (!ef) {
            check.fail("location without an edge factor");
            continue;
        }
        double n_loc = double(tables.location_contributions(loc));
        weighted.add(n_loc * *ef);
        total.add(n_loc);
    }
    double global_mean = weighted.value() / total.value();
    if (std::abs(global_mean - 100.0) >= 1e-6)
        check.fail("global weighted mean " + format_double(global_mean, 10));

    check.note(std::to_string(n_contribs) + " contributions, " +
               std::to_string(tables.cell_count()) + " cells, worst cell dev " +
               format_double(worst_cell, 12) + ", global mean " +
               format_double(global_mean, 10));
    return check;
}

// ---------------------------------------------------------------------------
// 4. impute-own-average equals the present-cells weighted mean (100 patterns)

Check criterion_imputation_identity() {
    Check check;
    SplitMix64 rng(0x5eed0004);
    double worst = 0.0;
    for (int pattern = 0; pattern < 100; ++pattern) {
        int n_cells = 2 + int(rng.below(40));
        std::vector<Contribution> contribs;
        WeightTable weights;
        std::vector<long double> cell_weight(std::size_t(n_cells), 0.0L);
        std::vector<long double> cell_ef(std::size_t(n_cells), 0.0L);
        std::vector<bool> present(std::size_t(n_cells), false);
        for (int cell = 0; cell < n_cells; ++cell) {
            double w = 1.0 + double(rng.below(500));
            cell_weight[std::size_t(cell)] = w;
            weights.entries.emplace_back(cell_key_pack({CategoryId(cell), 0}), w);
            Contribution keeper; // another location keeps the cell alive
            keeper.cell = {CategoryId(cell), 0};
            keeper.location = 1;
            keeper.score = double(rng.below(300));
            contribs.push_back(keeper);
            if (rng.below(2) == 0) {
                present[std::size_t(cell)] = true;
                Contribution c;
                c.cell = {CategoryId(cell), 0};
                c.location = 0;
                c.score = double(rng.below(3000)) / 10.0;
                cell_ef[std::size_t(cell)] = c.score;
                contribs.push_back(c);
            }
        }
        std::sort(weights.entries.begin(), weights.entries.end());
        AggregateTables tables(contribs, 2);
        auto got = overall_edge_factor(tables, 0, weights, MissingPolicy::OwnAverage);

        long double num = 0.0L, den = 0.0L;
        for (int cell = 0; cell < n_cells; ++cell)
            if (present[std::size_t(cell)]) {
                num += cell_weight[std::size_t(cell)] * cell_ef[std::size_t(cell)];
                den += cell_weight[std::size_t(cell)];
            }
        if (den == 0.0L) {
            if (got.has_value())
                check.fail("value reported for a location with no present cells");
            continue;
        }
        if (!got.has_value()) {
            check.fail("missing value for a location with present cells");
            continue;
        }
        long double expect = num / den;
        double rel = double(std::fabs((long double)*got - expect) /
                            std::max<long double>(1.0L, std::fabs(expect)));
        worst = std::max(worst, rel);
    }
    if (worst > 1e-12)
        check.fail("worst relative deviation " + format_double(worst, 16));
    check.note("100 patterns, worst relative deviation " + format_double(worst, 16));
    return check;
}

// ---------------------------------------------------------------------------
// 5. own-count weights collapse to the location's plain mean score

Check criterion_own_count_identity() {
    Check check;
    SplitMix64 rng(0x5eed0005);
    double worst = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<Contribution> contribs;
        long double sum = 0.0L;
        std::uint64_t n = 0;
        int rows = 50 + int(rng.below(400));
        for (int i = 0; i < rows; ++i) {
            Contribution c;
            c.cell = {CategoryId(rng.below(12)), AreaId(rng.below(4))};
            c.location = std::int32_t(rng.below(3));
            c.score = double(rng.below(40000)) / 10.0;
            contribs.push_back(c);
            if (c.location == 0) {
                sum += c.score;
                ++n;
            }
        }
        AggregateTables tables(contribs, 3);
        auto got = own_count_edge_factor(tables, 0);
        if (n == 0) {
            if (got.has_value())
                check.fail("value reported for a location with no contributions");
            continue;
        }
        long double expect = sum / (long double)n;
        if (!got.has_value()) {
            check.fail("missing own-count edge factor");
            continue;
        }
        double rel = double(std::fabs((long double)*got - expect) /
                            std::max<long double>(1.0L, std::fabs(expect)));
        worst = std::max(worst, rel);
    }
    if (worst > 1e-12)
        check.fail("worst relative deviation " + format_double(worst, 16));
    check.note("100 runs, worst relative deviation " + format_double(worst, 16));
    return check;
}

// ---------------------------------------------------------------------------
// 6. planted adoption-lag ordering is recovered in >= 48 of 50 seeds

Check criterion_planted_ordering() {
    Check check;
    auto t0 = Clock::now();
    int successes = 0;
    std::uint64_t min_cell_count = std::numeric_limits<std::uint64_t>::max();
    for (int seed = 0; seed < 50; ++seed) {
        SynthConfig synth;
        synth.seed = 7000 + std::uint64_t(seed);
        synth.year_lo = 2008;
        synth.year_hi = 2016;
        synth.prehistory = 10;
        synth.categories = 4;
        synth.journals = 4;
        synth.areas = 2;
        synth.mentions_per_paper = 3;
        // weak recency bias: the zero-lag location must not monopolize the
        // novel band, or the laggards tie at zero and their order is noise
        synth.mention_rho = 0.15;
        synth.locations = {{"Alphaville", 0, 130}, {"Betatown", 3, 130}, {"Gammapolis", 6, 130}};

        FilterConfig filters;
        filters.year_lo = 2008;
        filters.year_hi = 2016;
        SynthRun run = run_synth(synth, scratch_dir("planted_" + std::to_string(seed)), filters,
                                 PeriodRange{2012, 2016}, 0.20);

        AggregateTables tables(run.score.contributions,
                               std::uint32_t(run.score.locations.size()));
        for (std::uint32_t loc = 0; loc < tables.location_count(); ++loc)
            for (const auto& row : tables.location_rows(loc))
                min_cell_count = std::min(min_cell_count, row.count);

        WeightTable weights = global_count_weights(run.score.contributions);
        auto ef_of = [&](const char* code) -> double {
            auto id = run.score.locations.find(code);
            if (!id)
                return -1.0;
            auto ef = overall_edge_factor(tables, std::uint32_t(*id), weights,
                                          MissingPolicy::OwnAverage);
            return ef.value_or(-1.0);
        };
        double a = ef_of("ALPHAVILLE"), b = ef_of("BETATOWN"), g = ef_of("GAMMAPOLIS");
        if (a > b && b > g)
            ++successes;
    }
    double secs = seconds_since(t0);
    if (min_cell_count < 200)
        check.fail("only " + std::to_string(min_cell_count) +
                   " contributions in the smallest (location, cell)");
    if (successes < 48)
        check.fail("ordering recovered in " + std::to_string(successes) + "/50 seeds");
    if (secs >= 300.0)
        check.fail("runtime " + format_double(secs, 1) + "s exceeds 5min");
    check.note(std::to_string(successes) + "/50 seeds, min cell size " +
               std::to_string(min_cell_count) + ", " + format_double(secs, 1) + "s");
    return check;
}

// ---------------------------------------------------------------------------
// 7. bootstrap: determinism across runs/workers, degenerate CI, width shrink

Check criterion_bootstrap() {
    Check check;

    // determinism across worker counts and repeated runs
    {
        SplitMix64 rng(0x5eed0007);
        std::vector<Contribution> contribs;
        for (int cell = 0; cell < 30; ++cell)
            for (int i = 0; i < 10; ++i) {
                Contribution c;
                c.cell = {CategoryId(cell), 0};
                c.location = std::int32_t(i % 3);
                c.score = double(rng.below(2000)) / 10.0;
                contribs.push_back(c);
            }
        AggregateTables tables(contribs, 3);
        WeightTable weights = global_count_weights(contribs);
        BootstrapResult reference =
            bootstrap_ci(tables, weights, MissingPolicy::OwnAverage, 1000, 20180617, 1);
        for (int workers : {1, 4, 8}) {
            BootstrapResult again =
                bootstrap_ci(tables, weights, MissingPolicy::OwnAverage, 1000, 20180617, workers);
            for (std::uint32_t loc = 0; loc < 3; ++loc) {
                if (!reference.ci[loc] || !again.ci[loc]) {
                    check.fail("missing CI in determinism check");
                    continue;
                }
                if (reference.ci[loc]->first != again.ci[loc]->first ||
                    reference.ci[loc]->second != again.ci[loc]->second)
                    check.fail("CI differs at " + std::to_string(workers) + " workers");
            }
        }
    }

    // single cell: every replicate identical, zero-width interval
    {
        std::vector<Contribution> contribs;
        for (int i = 0; i < 12; ++i) {
            Contribution c;
            c.cell = {0, 0};
            c.location = 0;
            c.score = (i % 2) ? 180.0 : 20.0;
            contribs.push_back(c);
        }
        AggregateTables tables(contribs, 1);
        WeightTable weights = global_count_weights(contribs);
        BootstrapResult r = bootstrap_ci(tables, weights, MissingPolicy::OwnAverage, 1000, 5, 2);
        if (!r.ci[0])
            check.fail("single-cell corpus produced no CI");
        else if (r.ci[0]->first != r.ci[0]->second)
            check.fail("single-cell CI has width " +
                       format_double(r.ci[0]->second - r.ci[0]->first, 12));
    }

    // width shrinks when the cell count grows 10 -> 1000 at fixed cell size
    {
        auto mean_width = [&](int n_cells, std::uint64_t seed_base) {
            double total = 0.0;
            for (int seed = 0; seed < 20; ++seed) {
                SplitMix64 rng(mix_seed({seed_base, std::uint64_t(seed)}));
                std::vector<Contribution> contribs;
                for (int cell = 0; cell < n_cells; ++cell) {
                    double cell_level = 60.0 + double(rng.below(800)) / 10.0;
                    for (int i = 0; i < 8; ++i) {
                        Contribution c;
                        c.cell = {CategoryId(cell), 0};
                        c.location = 0;
                        c.score = cell_level + double(rng.below(100)) / 10.0;
                        contribs.push_back(c);
                    }
                }
                AggregateTables tables(contribs, 1);
                WeightTable weights = global_count_weights(contribs);
                BootstrapResult r =
                    bootstrap_ci(tables, weights, MissingPolicy::OwnAverage, 400,
                                 mix_seed({seed_base, std::uint64_t(seed), 77}), 2);
                total += r.ci[0]->second - r.ci[0]->first;
            }
            return total / 20.0;
        };
        double width_small = mean_width(10, 0xabc1);
        double width_large = mean_width(1000, 0xabc2);
        if (!(width_large < width_small))
            check.fail("width did not shrink: 10 cells " + format_double(width_small, 4) +
                       " vs 1000 cells " + format_double(width_large, 4));
        check.note("mean width 10 cells " + format_double(width_small, 3) + " -> 1000 cells " +
                   format_double(width_large, 3));
    }
    return check;
}

// ---------------------------------------------------------------------------
// 8. A-C-H classification fixture: 12 areas spanning every rule branch

Check criterion_ach_classification() {
    Check check;
    struct Fixture {
        int h, a, c, n; // counts out of n papers
        AreaGroup expected;
        const char* why;
    };
    const Fixture fixtures[] = {
        {90, 10, 20, 100, AreaGroup::Applied, "clearly applied"},
        {25, 0, 10, 100, AreaGroup::Applied, "avgH just above 0.2"},
        {100, 100, 90, 100, AreaGroup::Applied, "applied despite basic aspects"},
        {10, 30, 80, 100, AreaGroup::BasicScience, "clearly basic"},
        {0, 0, 60, 100, AreaGroup::BasicScience, "cells and molecules only"},
        {40, 79, 55, 100, AreaGroup::BasicScience, "avgA just below 0.8"},
        {10, 90, 90, 100, AreaGroup::Other, "veterinary carve-out avgA >= 0.8"},
        {10, 80, 90, 100, AreaGroup::Other, "carve-out boundary avgA == 0.8"},
        {50, 10, 50, 100, AreaGroup::Other, "tie avgH == avgC"},
        {20, 10, 10, 100, AreaGroup::Other, "avgH at the 0.2 boundary"},
        {10, 20, 50, 100, AreaGroup::Other, "avgC at the 0.5 boundary"},
        {0, 0, 0, 0, AreaGroup::Other, "no linked papers"},
    };
    const std::size_t n_areas = std::size(fixtures);
    AreaStatusAccumulator acc(n_areas);
    for (std::size_t area = 0; area < n_areas; ++area) {
        const Fixture& f = fixtures[area];
        for (int i = 0; i < f.n; ++i) {
            TranslationalStatus st;
            st.h = i < f.h;
            st.a = i < f.a;
            st.c = i < f.c;
            AreaId ids[] = {AreaId(area)};
            acc.add(ids, st);
        }
    }
    std::vector<AreaGroup> groups = acc.classify();
    int wrong = 0;
    for (std::size_t area = 0; area < n_areas; ++area)
        if (groups[area] != fixtures[area].expected) {
            ++wrong;
            check.fail("area " + std::to_string(area) + " (" + fixtures[area].why + ") got " +
                       std::string(area_group_label(groups[area])));
        }
    check.note("12 areas, " + std::to_string(12 - wrong) + " classified as constructed");
    return check;
}

// ---------------------------------------------------------------------------
// 9. K*J expansion (1000 random papers)

Check criterion_kj_expansion() {
    Check check;
    SplitMix64 rng(0x5eed0009);

    // random thesaurus: 40 terms over 8 categories, some multi-category
    std::string vocab_text, categories_text;
    for (int cat = 0; cat < 8; ++cat)
        categories_text += "cat" + std::to_string(cat) + "\t" +
                           std::string(category_group_label(
                               static_cast<CategoryGroup>(cat % kCategoryGroupCount))) +
                           "\n";
    for (int t = 0; t < 40; ++t) {
        int primary = int(rng.below(8));
        vocab_text += "term" + std::to_string(t) + "\tC" + std::to_string(t) + "\tcat" +
                      std::to_string(primary) + "\n";
        if (rng.below(4) == 0)
            vocab_text += "term" + std::to_string(t) + "\tC" + std::to_string(t) + "\tcat" +
                          std::to_string((primary + 3) % 8) + "\n";
    }
    std::istringstream vocab_in(vocab_text), categories_in(categories_text);
    Thesaurus th = load_thesaurus(vocab_in, categories_in);

    CohortTable cohorts(th.term_count(), CohortMode::TermOnly);
    for (TermId t = 0; t < th.term_count(); ++t)
        if (rng.below(10) != 0) // leave some terms unobserved
            cohorts.observe(t, rng.below(8) == 0 ? 1940 : 1960 + std::int32_t(rng.below(50)));
    cohorts.apply_floor(1950);

    std::size_t failures = 0;
    for (int paper = 0; paper < 1000; ++paper) {
        std::vector<TermId> matched;
        for (TermId t = 0; t < th.term_count(); ++t)
            if (rng.below(3) == 0)
                matched.push_back(t);
        std::vector<AreaId> areas;
        std::size_t n_areas = 1 + rng.below(4);
        for (AreaId a = 0; a < n_areas; ++a)
            areas.push_back(a);

        auto contribs = extract_contributions(std::uint32_t(paper), 2016, -1, matched, cohorts,
                                              th, std::span<const AreaId>(areas));

        std::set<CategoryId> k;
        for (TermId t : matched)
            if (cohorts.retained(t))
                for (CategoryId cat : th.terms[t].category_ids)
                    k.insert(cat);
        if (contribs.size() != k.size() * areas.size())
            ++failures;

        // every cell appears exactly once
        std::set<std::uint64_t> cells;
        for (const Contribution& c : contribs)
            cells.insert(cell_key_pack(c.cell));
        if (cells.size() != contribs.size())
            ++failures;
    }
    if (failures)
        check.fail(std::to_string(failures) + "/1000 papers break the K*J count");
    check.note("1000 papers");
    return check;
}

// ---------------------------------------------------------------------------
// 10. scanning throughput and worker scaling

Check criterion_performance() {
    Check check;

    // 1e5-pattern dictionary over a 5e4-token vocabulary
    SplitMix64 rng(0x5eed000a);
    std::vector<std::string> vocab;
    vocab.reserve(50000);
    for (int i = 0; i < 50000; ++i)
        vocab.push_back("w" + std::to_string(i));
    std::vector<std::pair<TermId, TokenSeq>> patterns;
    patterns.reserve(100000);
    for (int i = 0; i < 100000; ++i) {
        TokenSeq pat;
        std::size_t len = 1 + rng.below(3);
        for (std::size_t k = 0; k < len; ++k)
            pat.push_back(vocab[rng.below(vocab.size())]);
        patterns.emplace_back(TermId(i), std::move(pat));
    }
    auto t_build = Clock::now();
    DictionaryMatcher matcher = DictionaryMatcher::build(
        std::span<const std::pair<TermId, TokenSeq>>(patterns), TermId(patterns.size()));
    double build_secs = seconds_since(t_build);

    std::vector<TokenSeq> docs(2000);
    std::uint64_t tokens_per_pass = 0;
    for (auto& doc : docs) {
        std::size_t len = 200 + rng.below(201);
        doc.reserve(len);
        for (std::size_t k = 0; k < len; ++k) {
            if (rng.below(20) == 0) {
                const TokenSeq& inject = patterns[rng.below(patterns.size())].second;
                doc.insert(doc.end(), inject.begin(), inject.end());
            } else {
                doc.push_back(vocab[rng.below(vocab.size())]);
            }
        }
        tokens_per_pass += doc.size();
    }

    auto measure = [&](int workers) {
        int passes = 0;
        std::atomic<std::uint64_t> matches{0};
        auto t0 = Clock::now();
        double secs = 0.0;
        do {
            parallel_chunks(docs.size(), workers, [&](int, std::size_t begin, std::size_t end) {
                DictionaryMatcher::Scratch scratch;
                std::vector<TermId> hits;
                std::uint64_t local = 0;
                for (std::size_t i = begin; i < end; ++i) {
                    matcher.find_terms(docs[i], scratch, hits);
                    local += hits.size();
                }
                matches += local;
            });
            ++passes;
            secs = seconds_since(t0);
        } while (secs < 1.0);
        return double(tokens_per_pass) * passes / secs;
    };

    double tput8 = measure(8);
    double tput1 = measure(1);
    double ratio = tput8 / tput1;
    unsigned hw = std::thread::hardware_concurrency();

    if (tput8 < 1e6)
        check.fail("8-worker throughput " + format_double(tput8 / 1e6, 2) + "M tokens/s < 1M");
    if (ratio < 4.0)
        check.fail("scaling 1->8 workers is " + format_double(ratio, 2) +
                   "x < 4x (hardware_concurrency=" + std::to_string(hw) + ")");
    check.note("build " + format_double(build_secs, 1) + "s, 8w " +
               format_double(tput8 / 1e6, 1) + "M tok/s, 1w " + format_double(tput1 / 1e6, 1) +
               "M tok/s, scaling " + format_double(ratio, 2) + "x, hw threads " +
               std::to_string(hw));
    return check;
}

struct Criterion {
    int number;
    const char* name;
    Check (*run)();
};

const Criterion kCriteria[] = {
    {1, "matcher equals the naive contiguous-subsequence oracle", criterion_matcher_oracle},
    {2, "novelty flags equal the sort-and-count oracle", criterion_novelty_oracle},
    {3, "per-cell mean 100 and global weighted mean 100", criterion_normalization},
    {4, "impute-own-average equals the present-cells weighted mean", criterion_imputation_identity},
    {5, "own-count weights equal the location's plain mean score", criterion_own_count_identity},
    {6, "planted adoption-lag ordering recovered across seeds", criterion_planted_ordering},
    {7, "bootstrap determinism, degenerate CI, width shrink", criterion_bootstrap},
    {8, "A-C-H research-area classification fixture", criterion_ach_classification},
    {9, "contribution count is exactly K*J", criterion_kj_expansion},
    {10, "scan throughput and worker scaling", criterion_performance},
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--only" && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else if (arg == "--help" || arg == "-h") {
            std::puts("usage: acceptance [--only N]");
            return 0;
        }
    }

    int failures = 0;
    for (const Criterion& criterion : kCriteria) {
        if (only != 0 && criterion.number != only)
            continue;
        Check result = criterion.run();
        std::printf("[%s] criterion %2d: %s%s%s\n", result.ok ? "PASS" : "FAIL",
                    criterion.number, criterion.name, result.detail.empty() ? "" : " — ",
                    result.detail.c_str());
        std::fflush(stdout);
        failures += result.ok ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
