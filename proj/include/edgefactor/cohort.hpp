#pragma once

#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "edgefactor/common.hpp"
#include "edgefactor/corpus.hpp"
#include "edgefactor/matcher.hpp"
#include "edgefactor/text.hpp"
#include "edgefactor/vocab.hpp"

namespace edgefactor {

enum class CohortMode : std::uint8_t { TermOnly, SynonymPooled };

// First-appearance year per term. Entries are a min-reduce over the full,
// unfiltered corpus; terms never matched stay absent. Floor-excluded terms
// are flagged, not deleted, so diagnostics can report them.
class CohortTable {
public:
    static constexpr std::int32_t kUnobserved = std::numeric_limits<std::int32_t>::max();

    CohortTable() = default;
    CohortTable(std::size_t term_count, CohortMode mode)
        : mode_(mode), year_(term_count, kUnobserved), excluded_(term_count, 0) {}

    CohortMode mode() const { return mode_; }
    int floor_year() const { return floor_year_; }
    std::size_t term_count() const { return year_.size(); }

    void observe(TermId term, std::int32_t year) {
        if (year < year_[term])
            year_[term] = year;
    }

    // Pointwise min; partial tables from corpus partitions merge associatively.
    void merge_min(const CohortTable& other) {
        for (std::size_t i = 0; i < year_.size(); ++i)
            if (other.year_[i] < year_[i])
                year_[i] = std::int32_t(other.year_[i]);
    }

    bool observed(TermId term) const { return year_[term] != kUnobserved; }
    std::int32_t year(TermId term) const { return year_[term]; }
    bool excluded(TermId term) const { return excluded_[term] != 0; }
    bool retained(TermId term) const { return observed(term) && !excluded(term); }

    // Flags every entry with cohort < floor_year; the boundary year is kept.
    void apply_floor(int floor_year) {
        floor_year_ = floor_year;
        for (std::size_t i = 0; i < year_.size(); ++i)
            excluded_[i] = (year_[i] != kUnobserved && year_[i] < floor_year) ? 1 : 0;
    }

    std::size_t observed_count() const {
        std::size_t n = 0;
        for (auto y : year_)
            n += (y != kUnobserved);
        return n;
    }

    std::size_t excluded_count() const {
        std::size_t n = 0;
        for (auto e : excluded_)
            n += e;
        return n;
    }

private:
    CohortMode mode_ = CohortMode::TermOnly;
    int floor_year_ = 0;
    std::vector<std::int32_t> year_;
    std::vector<std::uint8_t> excluded_;

    friend CohortTable pool_synonyms(const CohortTable&, const Thesaurus&);
};

// In-memory min-reduce over a publication batch. The pipeline streams larger
// corpora record by record and calls observe() itself.
inline CohortTable compute_cohorts(const std::vector<Publication>& pubs,
                                   const DictionaryMatcher& matcher) {
    CohortTable table(matcher.term_bound(), CohortMode::TermOnly);
    DictionaryMatcher::Scratch scratch;
    std::vector<TermId> hits;
    for (const Publication& pub : pubs) {
        matcher.find_terms(normalize_text(pub.text()), scratch, hits);
        for (TermId t : hits)
            table.observe(t, pub.year);
    }
    return table;
}

// Synonym-pooled variant: each observed term takes the minimum year over its
// concept group; unobserved members are ignored and stay absent.
inline CohortTable pool_synonyms(const CohortTable& table, const Thesaurus& thesaurus) {
    CohortTable pooled(table.term_count(), CohortMode::SynonymPooled);
    for (const auto& group : thesaurus.concept_terms) {
        std::int32_t min_year = CohortTable::kUnobserved;
        for (TermId t : group)
            if (table.observed(t) && table.year(t) < min_year)
                min_year = table.year(t);
        if (min_year == CohortTable::kUnobserved)
            continue;
        for (TermId t : group)
            if (table.observed(t))
                pooled.year_[t] = min_year;
    }
    if (table.floor_year() != 0)
        pooled.apply_floor(table.floor_year());
    return pooled;
}

// cohorts.tsv: TERM_ID<TAB>COHORT_YEAR<TAB>{kept|excluded}; observed terms only.
inline void save_cohorts(const CohortTable& table, std::ostream& out) {
    for (TermId t = 0; t < table.term_count(); ++t) {
        if (!table.observed(t))
            continue;
        out << t << '\t' << table.year(t) << '\t' << (table.excluded(t) ? "excluded" : "kept")
            << '\n';
    }
}

inline CohortTable load_cohorts(std::istream& in, std::size_t term_count, CohortMode mode,
                                Diagnostics* diag = nullptr) {
    CohortTable table(term_count, mode);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = line;
        if (!sv.empty() && sv.back() == '\r')
            sv.remove_suffix(1);
        if (sv.empty())
            continue;
        auto cols = split_char(sv, '\t');
        auto term = cols.size() >= 2 ? parse_int(cols[0]) : std::nullopt;
        auto year = cols.size() >= 2 ? parse_int(cols[1]) : std::nullopt;
        if (!term || !year || *term < 0 || std::size_t(*term) >= term_count) {
            if (diag)
                diag->warn("cohorts.malformed", "cohorts.tsv line " + std::to_string(lineno));
            continue;
        }
        table.observe(TermId(*term), std::int32_t(*year));
    }
    return table;
}

} // namespace edgefactor
