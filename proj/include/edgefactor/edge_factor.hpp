#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "edgefactor/common.hpp"
#include "edgefactor/rng.hpp"
#include "edgefactor/scoring.hpp"

namespace edgefactor {

enum class MissingPolicy : std::uint8_t { OwnAverage, Zero, Hundred };
enum class WeightScheme : std::uint8_t { GlobalCount, OwnCount, FixedPeriod };

// Cell weights, ordered by packed cell key so every consumer (including the
// bootstrap's replicate draws) sees one deterministic universe.
struct WeightTable {
    std::vector<std::pair<std::uint64_t, double>> entries;

    double total() const {
        NeumaierSum s;
        for (const auto& [key, w] : entries)
            s.add(w);
        return s.value();
    }

    std::optional<double> lookup(std::uint64_t key) const {
        auto it = std::lower_bound(entries.begin(), entries.end(), key,
                                   [](const auto& e, std::uint64_t k) { return e.first < k; });
        if (it == entries.end() || it->first != key)
            return std::nullopt;
        return it->second;
    }
};

// Default weighting: the total number of contributions linked to each cell,
// from any location, over the weight period.
inline WeightTable global_count_weights(std::span<const Contribution> contribs) {
    std::unordered_map<std::uint64_t, double> counts;
    for (const Contribution& c : contribs)
        counts[cell_key_pack(c.cell)] += 1.0;
    WeightTable w;
    w.entries.assign(counts.begin(), counts.end());
    std::sort(w.entries.begin(), w.entries.end());
    return w;
}

template <typename Pred>
WeightTable filter_weights(const WeightTable& weights, Pred&& keep_cell) {
    WeightTable out;
    for (const auto& [key, w] : weights.entries)
        if (keep_cell(cell_key_unpack(key)))
            out.entries.emplace_back(key, w);
    return out;
}

// Group-by over normalized contributions: per-cell pooled stats plus each
// location's sparse (cell, sum, count) rows. Immutable after construction.
class AggregateTables {
public:
    AggregateTables(std::span<const Contribution> contribs, std::uint32_t location_count)
        : per_location_(location_count), location_totals_(location_count, 0) {
        struct LocAccum {
            std::unordered_map<std::uint32_t, std::pair<double, std::uint64_t>> cells;
        };
        std::vector<LocAccum> accum(location_count);
        for (const Contribution& c : contribs) {
            std::uint64_t key = cell_key_pack(c.cell);
            auto [it, inserted] = cell_index_.emplace(key, std::uint32_t(cell_keys_.size()));
            if (inserted) {
                cell_keys_.push_back(key);
                cell_sum_.push_back(0.0);
                cell_count_.push_back(0);
            }
            std::uint32_t idx = it->second;
            cell_sum_[idx] += c.score;
            ++cell_count_[idx];
            if (c.location != kNoLocation) {
                auto& cell = accum[std::size_t(c.location)].cells[idx];
                cell.first += c.score;
                ++cell.second;
                ++location_totals_[std::size_t(c.location)];
            }
        }
        for (std::uint32_t loc = 0; loc < location_count; ++loc) {
            auto& rows = per_location_[loc];
            rows.reserve(accum[loc].cells.size());
            for (const auto& [idx, sc] : accum[loc].cells)
                rows.push_back(Row{idx, sc.first, sc.second});
            std::sort(rows.begin(), rows.end(),
                      [](const Row& a, const Row& b) { return a.cell < b.cell; });
        }
    }

    std::size_t cell_count() const { return cell_keys_.size(); }
    std::uint32_t location_count() const { return std::uint32_t(per_location_.size()); }
    std::uint64_t location_contributions(std::uint32_t loc) const { return location_totals_[loc]; }

    std::optional<std::uint32_t> find_cell(std::uint64_t key) const {
        auto it = cell_index_.find(key);
        if (it == cell_index_.end())
            return std::nullopt;
        return it->second;
    }

    CellKey cell_at(std::uint32_t idx) const { return cell_key_unpack(cell_keys_[idx]); }
    std::uint64_t cell_contributions(std::uint32_t idx) const { return cell_count_[idx]; }

    // Pooled mean over every location; 100 by construction after normalize.
    double cell_mean(std::uint32_t idx) const { return cell_sum_[idx] / double(cell_count_[idx]); }

    // The location's edge factor for one cell; missing when it has no
    // contributions there.
    std::optional<double> cell_edge_factor(std::uint32_t loc, std::uint32_t cell_idx) const {
        const Row* row = find_row(loc, cell_idx);
        if (!row)
            return std::nullopt;
        return row->sum / double(row->count);
    }

    struct Row {
        std::uint32_t cell;
        double sum;
        std::uint64_t count;
    };

    std::span<const Row> location_rows(std::uint32_t loc) const { return per_location_[loc]; }

private:
    const Row* find_row(std::uint32_t loc, std::uint32_t cell_idx) const {
        const auto& rows = per_location_[loc];
        auto it = std::lower_bound(rows.begin(), rows.end(), cell_idx,
                                   [](const Row& r, std::uint32_t c) { return r.cell < c; });
        if (it == rows.end() || it->cell != cell_idx)
            return nullptr;
        return &*it;
    }

    std::vector<std::uint64_t> cell_keys_;
    std::unordered_map<std::uint64_t, std::uint32_t> cell_index_;
    std::vector<double> cell_sum_;
    std::vector<std::uint64_t> cell_count_;
    std::vector<std::vector<Row>> per_location_;
    std::vector<std::uint64_t> location_totals_;
};

// Weighted sum of the location's cell edge factors over every positive-weight
// cell, with missing cells filled per policy before summation. A location
// with no contributions at all stays absent; one that merely misses every
// cell of this universe still gets the constant fills, while own-average has
// nothing to average and is absent.
inline std::optional<double> overall_edge_factor(const AggregateTables& tables, std::uint32_t loc,
                                                 const WeightTable& weights,
                                                 MissingPolicy policy) {
    if (tables.location_contributions(loc) == 0)
        return std::nullopt;
    NeumaierSum present_weighted, present_weight;
    for (const auto& [key, w] : weights.entries) {
        if (w <= 0.0)
            continue;
        auto cell_idx = tables.find_cell(key);
        if (!cell_idx)
            continue;
        auto ef = tables.cell_edge_factor(loc, *cell_idx);
        if (!ef)
            continue;
        present_weighted.add(w * *ef);
        present_weight.add(w);
    }
    if (present_weight.value() <= 0.0 && policy == MissingPolicy::OwnAverage)
        return std::nullopt;

    double fill = 0.0;
    switch (policy) {
    case MissingPolicy::OwnAverage: fill = present_weighted.value() / present_weight.value(); break;
    case MissingPolicy::Zero: fill = 0.0; break;
    case MissingPolicy::Hundred: fill = 100.0; break;
    }

    NeumaierSum num, den;
    for (const auto& [key, w] : weights.entries) {
        if (w <= 0.0)
            continue;
        std::optional<double> ef;
        if (auto cell_idx = tables.find_cell(key))
            ef = tables.cell_edge_factor(loc, *cell_idx);
        num.add(w * (ef ? *ef : fill));
        den.add(w);
    }
    if (den.value() <= 0.0)
        return std::nullopt;
    return num.value() / den.value();
}

// Own-count weighting collapses to the plain mean of the location's own
// contribution scores; computed as the double sum so tests can check the
// collapse independently. The filter restricts to a cell subset (group
// breakdowns); missing cells carry zero own weight, so no policy applies.
template <typename Pred>
std::optional<double> own_count_edge_factor(const AggregateTables& tables, std::uint32_t loc,
                                            Pred&& keep_cell) {
    NeumaierSum num, den;
    for (const AggregateTables::Row& row : tables.location_rows(loc)) {
        if (!keep_cell(tables.cell_at(row.cell)))
            continue;
        double own_weight = double(row.count);
        num.add(own_weight * (row.sum / double(row.count)));
        den.add(own_weight);
    }
    if (den.value() <= 0.0)
        return std::nullopt;
    return num.value() / den.value();
}

inline std::optional<double> own_count_edge_factor(const AggregateTables& tables,
                                                   std::uint32_t loc) {
    return own_count_edge_factor(tables, loc, [](CellKey) { return true; });
}

// Overall edge factor over the subset of cells whose key the filter accepts
// (an idea-category group or research-area group), weights restricted to it.
template <typename Pred>
std::optional<double> grouped_edge_factor(const AggregateTables& tables, std::uint32_t loc,
                                          const WeightTable& weights, MissingPolicy policy,
                                          Pred&& keep_cell) {
    WeightTable filtered = filter_weights(weights, keep_cell);
    if (filtered.entries.empty())
        return std::nullopt;
    return overall_edge_factor(tables, loc, filtered, policy);
}

struct BootstrapResult {
    std::vector<std::optional<std::pair<double, double>>> ci; // per location
    std::vector<std::uint32_t> collected;                     // replicates with a value
    int samples = 0;
};

// Uniform is the literal reading of resampling "from the pairs"; Weighted
// draws cells proportionally to their weight instead.
enum class BootstrapDraw : std::uint8_t { Uniform, Weighted };

// Resamples cells with replacement until the drawn weight reaches the
// original total, recomputes every location's overall edge factor per
// replicate, then trims 2.5% from each tail of the collected values; the CI
// is the extremes of the remainder. Replicate r draws from its own generator
// seeded by (seed, r), so results are bit-identical for any worker count.
inline BootstrapResult bootstrap_ci(const AggregateTables& tables, const WeightTable& weights,
                                    MissingPolicy policy, int samples, std::uint64_t seed,
                                    int workers = 1,
                                    BootstrapDraw draw = BootstrapDraw::Uniform) {
    struct UniverseCell {
        double weight;
    };
    std::vector<UniverseCell> universe;
    std::unordered_map<std::uint32_t, std::uint32_t> universe_pos; // tables cell idx -> pos
    universe.reserve(weights.entries.size());
    for (const auto& [key, w] : weights.entries) {
        if (w <= 0.0)
            continue;
        if (auto idx = tables.find_cell(key))
            universe_pos.emplace(*idx, std::uint32_t(universe.size()));
        universe.push_back(UniverseCell{w});
    }
    const std::uint32_t n_locations = tables.location_count();
    BootstrapResult result;
    result.samples = samples;
    result.ci.assign(n_locations, std::nullopt);
    result.collected.assign(n_locations, 0);
    if (universe.empty() || samples <= 0)
        return result;

    double total_weight = 0.0;
    std::vector<double> cumulative; // weighted draws: inverse-CDF over weights
    {
        NeumaierSum s;
        for (const auto& cell : universe) {
            s.add(cell.weight);
            if (draw == BootstrapDraw::Weighted)
                cumulative.push_back(s.value());
        }
        total_weight = s.value();
    }

    // Per location: the universe cells it is present in.
    struct PresentCell {
        std::uint32_t pos;
        double weight;
        double ef;
    };
    std::vector<std::vector<PresentCell>> present(n_locations);
    for (std::uint32_t loc = 0; loc < n_locations; ++loc)
        for (const AggregateTables::Row& row : tables.location_rows(loc)) {
            auto it = universe_pos.find(row.cell);
            if (it == universe_pos.end())
                continue;
            present[loc].push_back(PresentCell{it->second, universe[it->second].weight,
                                               row.sum / double(row.count)});
        }

    // values[r * n_locations + loc]; NaN marks a skipped replicate.
    std::vector<double> values(std::size_t(samples) * n_locations,
                               std::numeric_limits<double>::quiet_NaN());

    auto run_range = [&](int begin, int end) {
        std::vector<std::uint32_t> draw_count(universe.size(), 0);
        std::vector<std::uint32_t> drawn;
        for (int r = begin; r < end; ++r) {
            SplitMix64 rng(mix_seed({seed, std::uint64_t(r)}));
            drawn.clear();
            double acc = 0.0;
            while (acc < total_weight) {
                std::uint32_t pos;
                if (draw == BootstrapDraw::Weighted) {
                    double u = rng.next_double() * total_weight;
                    pos = std::uint32_t(
                        std::lower_bound(cumulative.begin(), cumulative.end(), u) -
                        cumulative.begin());
                    if (pos >= universe.size())
                        pos = std::uint32_t(universe.size() - 1);
                } else {
                    pos = std::uint32_t(rng.below(universe.size()));
                }
                if (draw_count[pos]++ == 0)
                    drawn.push_back(pos);
                acc += universe[pos].weight;
            }
            NeumaierSum tot;
            for (std::uint32_t pos : drawn)
                tot.add(double(draw_count[pos]) * universe[pos].weight);
            double drawn_weight = tot.value();
            for (std::uint32_t loc = 0; loc < n_locations; ++loc) {
                NeumaierSum own_sum, own_weight;
                for (const PresentCell& cell : present[loc]) {
                    std::uint32_t k = draw_count[cell.pos];
                    if (k == 0)
                        continue;
                    own_sum.add(double(k) * cell.weight * cell.ef);
                    own_weight.add(double(k) * cell.weight);
                }
                if (own_weight.value() <= 0.0)
                    continue; // skipped; tracked via collected[]
                double value = 0.0;
                switch (policy) {
                case MissingPolicy::OwnAverage:
                    value = own_sum.value() / own_weight.value();
                    break;
                case MissingPolicy::Zero:
                    value = own_sum.value() / drawn_weight;
                    break;
                case MissingPolicy::Hundred:
                    value = (own_sum.value() + (drawn_weight - own_weight.value()) * 100.0) /
                            drawn_weight;
                    break;
                }
                values[std::size_t(r) * n_locations + loc] = value;
            }
            for (std::uint32_t pos : drawn)
                draw_count[pos] = 0;
        }
    };

    workers = std::max(1, workers);
    if (workers == 1 || samples < 2 * workers) {
        run_range(0, samples);
    } else {
        std::vector<std::thread> threads;
        int chunk = (samples + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            int begin = w * chunk, end = std::min(samples, begin + chunk);
            if (begin >= end)
                break;
            threads.emplace_back(run_range, begin, end);
        }
        for (auto& t : threads)
            t.join();
    }

    std::vector<double> sorted;
    for (std::uint32_t loc = 0; loc < n_locations; ++loc) {
        sorted.clear();
        for (int r = 0; r < samples; ++r) {
            double v = values[std::size_t(r) * n_locations + loc];
            if (!std::isnan(v))
                sorted.push_back(v);
        }
        result.collected[loc] = std::uint32_t(sorted.size());
        if (sorted.size() * 2 < std::size_t(samples))
            continue; // absent from most replicates: no CI
        std::sort(sorted.begin(), sorted.end());
        std::size_t k = std::size_t(std::floor(0.025 * double(sorted.size())));
        result.ci[loc] = std::make_pair(sorted[k], sorted[sorted.size() - 1 - k]);
    }
    return result;
}

struct TopTermRow {
    std::uint32_t rank = 0;
    std::uint64_t count = 0;
    double cumulative_share = 0.0;
    std::string term;
    std::int32_t cohort = 0;
    std::optional<std::int32_t> synonym_cohort;
    std::string category;
};

// Ranks (term, category) pairs by how often the term is the newest in its
// category within a paper, restricted to one idea-category group and one
// cohort decade. Multi-category terms count once per category.
inline std::vector<TopTermRow> top_terms_report(std::span<const NewestTermEvent> events,
                                                const CohortTable& cohorts,
                                                const CohortTable* synonym_cohorts,
                                                const Thesaurus& thesaurus, CategoryGroup group,
                                                int decade) {
    std::map<std::pair<TermId, CategoryId>, std::uint64_t> counts;
    for (const NewestTermEvent& ev : events) {
        if (thesaurus.category_group(ev.category) != group)
            continue;
        std::int32_t year = cohorts.year(ev.term);
        if (year < decade || year >= decade + 10)
            continue;
        ++counts[{ev.term, ev.category}];
    }
    std::vector<std::pair<std::pair<TermId, CategoryId>, std::uint64_t>> rows(counts.begin(),
                                                                              counts.end());
    std::sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second)
            return a.second > b.second;
        const std::string& ta = thesaurus.terms[a.first.first].text;
        const std::string& tb = thesaurus.terms[b.first.first].text;
        if (ta != tb)
            return ta < tb;
        return thesaurus.categories[a.first.second].name < thesaurus.categories[b.first.second].name;
    });
    std::uint64_t total = 0;
    for (const auto& row : rows)
        total += row.second;
    std::vector<TopTermRow> out;
    out.reserve(rows.size());
    std::uint64_t running = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        running += rows[i].second;
        TopTermRow r;
        r.rank = std::uint32_t(i + 1);
        r.count = rows[i].second;
        r.cumulative_share = total ? double(running) / double(total) : 0.0;
        r.term = thesaurus.terms[rows[i].first.first].text;
        r.cohort = cohorts.year(rows[i].first.first);
        if (synonym_cohorts && synonym_cohorts->observed(rows[i].first.first))
            r.synonym_cohort = synonym_cohorts->year(rows[i].first.first);
        r.category = thesaurus.categories[rows[i].first.second].name;
        out.push_back(std::move(r));
    }
    return out;
}

struct PeriodRange {
    int lo = 0;
    int hi = 0;
    bool contains(int year) const { return year >= lo && year <= hi; }
    friend bool operator==(const PeriodRange&, const PeriodRange&) = default;
};

// One edge factor per (location, period) under a weight table fixed from the
// weight period; novelty pools and normalization are recomputed within each
// period. Input contributions carry no flags or scores yet.
inline std::vector<std::vector<std::optional<double>>> period_edge_factors(
    std::span<const Contribution> raw, std::span<const PeriodRange> periods,
    PeriodRange weight_period, double cutoff, MissingPolicy policy,
    std::uint32_t location_count) {
    std::vector<Contribution> weight_slice;
    for (const Contribution& c : raw)
        if (weight_period.contains(c.pub_year))
            weight_slice.push_back(c);
    WeightTable weights = global_count_weights(weight_slice);

    std::vector<std::vector<std::optional<double>>> out(
        location_count, std::vector<std::optional<double>>(periods.size()));
    for (std::size_t p = 0; p < periods.size(); ++p) {
        std::vector<Contribution> slice;
        for (const Contribution& c : raw)
            if (periods[p].contains(c.pub_year))
                slice.push_back(c);
        if (slice.empty())
            continue;
        for (Contribution& c : slice) {
            c.novel = false;
            c.score = 0.0;
        }
        flag_novelty(slice, cutoff);
        normalize_scores(slice);
        AggregateTables tables(slice, location_count);
        for (std::uint32_t loc = 0; loc < location_count; ++loc)
            out[loc][p] = overall_edge_factor(tables, loc, weights, policy);
    }
    return out;
}

} // namespace edgefactor
