#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "edgefactor/cohort.hpp"
#include "edgefactor/common.hpp"
#include "edgefactor/corpus.hpp"
#include "edgefactor/vocab.hpp"

namespace edgefactor {

// The unit of novelty comparison, normalization, weighting, and resampling.
struct CellKey {
    CategoryId category = 0;
    AreaId area = 0;

    friend bool operator==(const CellKey&, const CellKey&) = default;
};

inline std::uint64_t cell_key_pack(CellKey cell) {
    return (std::uint64_t(cell.category) << 32) | std::uint64_t(cell.area);
}

inline CellKey cell_key_unpack(std::uint64_t packed) {
    return CellKey{CategoryId(packed >> 32), AreaId(packed & 0xffffffffu)};
}

inline constexpr std::int32_t kNoLocation = -1;

// One (paper -> idea category x research area) link. cohort_year is the
// vintage of the newest retained term linking the paper to the category.
struct Contribution {
    std::uint32_t paper = 0; // index into the run's paper-id table
    CellKey cell;
    std::int32_t pub_year = 0;
    std::int32_t cohort_year = 0;
    std::int32_t location = kNoLocation;
    bool novel = false;
    double score = 0.0;
};

// Emitted when `term` attains the category's max cohort within a paper; feeds
// the top-terms report. Ties all count.
struct NewestTermEvent {
    std::uint32_t paper = 0;
    CategoryId category = 0;
    TermId term = 0;
};

// Expands one paper into |matched categories| x |journal areas| contributions.
// Only floor-retained matched terms participate; a category's cohort is the
// max cohort among its retained terms. A supplied cohort table claiming a
// first-mention year after this paper's own year is inconsistent input.
inline std::vector<Contribution> extract_contributions(
    std::uint32_t paper, std::int32_t pub_year, std::int32_t location,
    std::span<const TermId> matched_terms, const CohortTable& cohorts,
    const Thesaurus& thesaurus, std::span<const AreaId> journal_areas,
    std::vector<NewestTermEvent>* newest_events = nullptr) {
    std::vector<Contribution> out;
    if (journal_areas.empty())
        return out;

    // category -> newest cohort among the paper's retained terms
    std::unordered_map<CategoryId, std::int32_t> category_cohort;
    for (TermId t : matched_terms) {
        if (!cohorts.retained(t))
            continue;
        std::int32_t year = cohorts.year(t);
        for (CategoryId cat : thesaurus.terms[t].category_ids) {
            auto [it, inserted] = category_cohort.emplace(cat, year);
            if (!inserted && year > it->second)
                it->second = year;
        }
    }
    if (category_cohort.empty())
        return out;

    std::vector<std::pair<CategoryId, std::int32_t>> cats(category_cohort.begin(),
                                                          category_cohort.end());
    std::sort(cats.begin(), cats.end());
    out.reserve(cats.size() * journal_areas.size());
    for (const auto& [cat, cohort_year] : cats) {
        if (cohort_year > pub_year)
            throw ValidationError("paper index " + std::to_string(paper) + ": cohort year " +
                                  std::to_string(cohort_year) + " after publication year " +
                                  std::to_string(pub_year) + " (inconsistent cohort table)");
        for (AreaId area : journal_areas)
            out.push_back(Contribution{paper, CellKey{cat, area}, pub_year, cohort_year, location});
    }

    if (newest_events) {
        for (TermId t : matched_terms) {
            if (!cohorts.retained(t))
                continue;
            std::int32_t year = cohorts.year(t);
            for (CategoryId cat : thesaurus.terms[t].category_ids)
                if (category_cohort[cat] == year)
                    newest_events->push_back(NewestTermEvent{paper, cat, t});
        }
    }
    return out;
}

// Convenience overload resolving the journal through the table; a journal
// absent from journals.tsv skips the paper with a diagnostic.
inline std::vector<Contribution> extract_contributions(
    const Publication& pub, std::uint32_t paper, std::int32_t location,
    std::span<const TermId> matched_terms, const CohortTable& cohorts,
    const Thesaurus& thesaurus, const JournalTable& journals,
    std::vector<NewestTermEvent>* newest_events = nullptr, Diagnostics* diag = nullptr) {
    const std::vector<AreaId>* areas = journals.areas_of(pub.journal);
    if (!areas) {
        if (diag)
            diag->warn("score.unknown_journal",
                       "paper " + pub.id + ": journal \"" + pub.journal + "\" not in journals.tsv");
        return {};
    }
    return extract_contributions(paper, pub.year, location, matched_terms, cohorts, thesaurus,
                                 std::span<const AreaId>(*areas), newest_events);
}

namespace detail {

// Pools contributions by (cell, pub_year); values are indices into the span.
inline std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>
group_pools(std::span<const Contribution> contribs) {
    // two-level key: cells get a dense index in the high half, the full
    // 32-bit year in the low half
    std::unordered_map<std::uint64_t, std::uint32_t> cells;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> pools;
    for (std::uint32_t i = 0; i < contribs.size(); ++i) {
        auto [it, inserted] =
            cells.emplace(cell_key_pack(contribs[i].cell), std::uint32_t(cells.size()));
        std::uint64_t key =
            (std::uint64_t(it->second) << 32) | std::uint64_t(std::uint32_t(contribs[i].pub_year));
        pools[key].push_back(i);
    }
    return pools;
}

} // namespace detail

// Within each (cell, publication year) pool, a contribution is novel iff the
// fraction of the pool with a strictly newer cohort is below the cutoff.
// Whole tied groups cross the boundary together, so every pool's newest
// contributions are always novel. Pools span all locations, located or not.
inline void flag_novelty(std::span<Contribution> contribs, double cutoff) {
    if (cutoff <= 0.0 || cutoff >= 1.0)
        throw ValidationError("novelty cutoff must lie strictly between 0 and 1");
    auto pools = detail::group_pools(contribs);
    std::vector<std::uint32_t> order;
    for (auto& [key, pool] : pools) {
        order.assign(pool.begin(), pool.end());
        std::sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
            return contribs[x].cohort_year > contribs[y].cohort_year;
        });
        double n = double(order.size());
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t run_end = i;
            while (run_end < order.size() &&
                   contribs[order[run_end]].cohort_year == contribs[order[i]].cohort_year)
                ++run_end;
            bool novel = double(i) / n < cutoff; // i = count with strictly newer cohort
            if (!novel)
                break;
            for (std::size_t k = i; k < run_end; ++k)
                contribs[order[k]].novel = true;
            i = run_end;
        }
    }
}

// Scales the 0/1 novelty indicator so each cell's mean score is exactly 100
// over the supplied contributions (the caller passes one analysis period).
// Every (cell, year) pool flags at least one novel member, so the mean of the
// indicator is never zero for a non-empty cell.
inline void normalize_scores(std::span<Contribution> contribs) {
    std::unordered_map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> cell_counts;
    for (const Contribution& c : contribs) {
        auto& [n, novel] = cell_counts[cell_key_pack(c.cell)];
        ++n;
        novel += c.novel ? 1 : 0;
    }
    for (Contribution& c : contribs) {
        auto& [n, novel] = cell_counts[cell_key_pack(c.cell)];
        if (novel == 0)
            throw PipelineError("cell with contributions but no novel member; flag_novelty not run?");
        double m = double(novel) / double(n);
        c.score = c.novel ? 100.0 / m : 0.0;
    }
}

} // namespace edgefactor
