#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgefactor/common.hpp"
#include "edgefactor/rng.hpp"
#include "edgefactor/toml_lite.hpp"
#include "edgefactor/vocab.hpp"

namespace edgefactor {

// Synthetic thesaurus + corpus with planted idea birth years and per-location
// adoption lags. Paper structure (journal, mentioned categories, filler text,
// article type) is drawn from a stream keyed by (seed, year, index) only, so
// it is identical across locations; which concrete idea satisfies a mention
// is drawn per location. Locations therefore hit every cell with identical
// contribution counts, and only idea recency separates them.
struct SynthLocation {
    std::string name;           // gazetteer pattern, e.g. "Alphaville"
    int lag = 0;                // years behind the idea frontier
    int papers_per_year = 100;

    std::string code() const {
        std::string c = name;
        for (char& ch : c)
            if (ch >= 'a' && ch <= 'z')
                ch = char(ch - 'a' + 'A');
        return c;
    }
};

struct SynthConfig {
    std::uint64_t seed = 1;
    int year_lo = 2000;
    int year_hi = 2016;
    int prehistory = 10;        // idea births begin this many years before year_lo
    int categories = 4;
    int seed_ideas = 3;         // ideas per category born at the very start
    double births_per_year = 2.0; // Poisson rate per category per year
    double mention_rho = 0.35;  // recency bias: idea weight is (1-rho)^age
    int mentions_per_paper = 3;
    double synonym_share = 0.0; // fraction of ideas that get an alias term
    double alias_mention_prob = 0.25;
    double multi_category_share = 0.0;
    int journals = 4;
    int areas = 2;
    double editorial_share = 0.0;
    int min_chars = 220;
    std::vector<SynthLocation> locations;

    void validate() const {
        if (categories <= 0 || journals <= 0 || areas <= 0)
            throw ValidationError("synth: categories, journals and areas must be positive");
        if (year_hi < year_lo)
            throw ValidationError("synth: year_hi before year_lo");
        if (seed_ideas <= 0 && births_per_year <= 0.0)
            throw ValidationError("synth: no idea births configured");
        if (mentions_per_paper <= 0)
            throw ValidationError("synth: mentions_per_paper must be positive");
        if (locations.empty())
            throw ValidationError("synth: at least one location required");
        for (const auto& loc : locations) {
            if (loc.lag < 0)
                throw ValidationError("synth: negative adoption lag for " + loc.name);
            if (loc.lag > prehistory)
                throw ValidationError("synth: adoption lag " + std::to_string(loc.lag) + " for " +
                                      loc.name + " exceeds idea prehistory " +
                                      std::to_string(prehistory) +
                                      "; no eligible ideas at corpus start");
            if (loc.papers_per_year <= 0)
                throw ValidationError("synth: papers_per_year must be positive");
            if (loc.name.empty())
                throw ValidationError("synth: unnamed location");
        }
    }

    static SynthConfig from_toml(const TomlTable& t) {
        SynthConfig c;
        c.seed = std::uint64_t(t.get_int("seed", 1));
        c.year_lo = int(t.get_int("corpus.year_lo", c.year_lo));
        c.year_hi = int(t.get_int("corpus.year_hi", c.year_hi));
        c.prehistory = int(t.get_int("corpus.prehistory", c.prehistory));
        c.min_chars = int(t.get_int("corpus.min_chars", c.min_chars));
        c.editorial_share = t.get_double("corpus.editorial_share", c.editorial_share);
        c.categories = int(t.get_int("ideas.categories", c.categories));
        c.seed_ideas = int(t.get_int("ideas.seed_ideas", c.seed_ideas));
        c.births_per_year = t.get_double("ideas.births_per_year", c.births_per_year);
        c.mention_rho = t.get_double("ideas.mention_rho", c.mention_rho);
        c.mentions_per_paper = int(t.get_int("ideas.mentions_per_paper", c.mentions_per_paper));
        c.synonym_share = t.get_double("ideas.synonym_share", c.synonym_share);
        c.alias_mention_prob = t.get_double("ideas.alias_mention_prob", c.alias_mention_prob);
        c.multi_category_share = t.get_double("ideas.multi_category_share", c.multi_category_share);
        c.journals = int(t.get_int("journals.count", c.journals));
        c.areas = int(t.get_int("journals.areas", c.areas));
        auto names = t.get_string_array("locations.names");
        auto lags = t.get_int_array("locations.lags");
        auto papers = t.get_int_array("locations.papers_per_year");
        if (!names.empty()) {
            if (lags.size() != names.size())
                throw ValidationError("synth: locations.lags must match locations.names");
            for (std::size_t i = 0; i < names.size(); ++i) {
                SynthLocation loc;
                loc.name = names[i];
                loc.lag = int(lags[i]);
                if (papers.size() == names.size())
                    loc.papers_per_year = int(papers[i]);
                else if (papers.size() == 1)
                    loc.papers_per_year = int(papers[0]);
                else if (!papers.empty())
                    throw ValidationError("synth: locations.papers_per_year must be one value or "
                                          "one per location");
                c.locations.push_back(std::move(loc));
            }
        }
        return c;
    }
};

namespace synth_detail {

inline std::string zero_pad(std::uint64_t v, int width) {
    std::string s = std::to_string(v);
    while (int(s.size()) < width)
        s.insert(s.begin(), '0');
    return s;
}

struct Idea {
    int birth;
    std::string token;
    std::string alias; // empty when none
    std::vector<int> categories;
};

inline const char* kFiller[] = {"assay",   "cohort",  "signal",  "tissue", "model",
                                "protocol", "baseline", "analysis", "sample", "control"};

} // namespace synth_detail

struct SynthResult {
    std::size_t ideas = 0;
    std::size_t papers = 0;
};

inline SynthResult synth_generate(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    using synth_detail::Idea;
    using synth_detail::zero_pad;

    cfg.validate();
    fs::create_directories(out_dir);

    auto open = [&](const char* name) {
        std::ofstream out(out_dir / name, std::ios::binary);
        if (!out)
            throw PipelineError(std::string("synth: cannot write ") + name);
        return out;
    };

    // --- ideas -------------------------------------------------------------
    std::vector<Idea> ideas;
    std::vector<std::vector<std::uint32_t>> by_category(std::size_t(cfg.categories));
    int birth_lo = cfg.year_lo - cfg.prehistory;
    for (int cat = 0; cat < cfg.categories; ++cat) {
        for (int year = birth_lo; year <= cfg.year_hi; ++year) {
            SplitMix64 rng(mix_seed({cfg.seed, 0xb197ull, std::uint64_t(cat),
                                     std::uint64_t(std::uint32_t(year))}));
            int n = sample_poisson(rng, cfg.births_per_year);
            if (year == birth_lo)
                n += cfg.seed_ideas;
            for (int k = 0; k < n; ++k) {
                Idea idea;
                idea.birth = year;
                idea.token = "idea" + zero_pad(ideas.size(), 6);
                idea.categories.push_back(cat);
                if (rng.next_double() < cfg.multi_category_share && cfg.categories > 1)
                    idea.categories.push_back((cat + 1) % cfg.categories);
                if (rng.next_double() < cfg.synonym_share)
                    idea.alias = "syn" + zero_pad(ideas.size(), 6);
                by_category[std::size_t(cat)].push_back(std::uint32_t(ideas.size()));
                ideas.push_back(std::move(idea));
            }
        }
    }

    auto category_name = [&](int cat) { return "cat" + zero_pad(std::uint64_t(cat), 2); };
    auto area_name = [&](int area) { return "area" + zero_pad(std::uint64_t(area), 2); };
    auto journal_name = [&](int j) { return "j" + zero_pad(std::uint64_t(j), 2); };

    {
        auto out = open("categories.tsv");
        for (int cat = 0; cat < cfg.categories; ++cat)
            out << category_name(cat) << '\t'
                << category_group_label(static_cast<CategoryGroup>(cat % kCategoryGroupCount))
                << '\n';
    }
    {
        auto out = open("vocab.tsv");
        for (const Idea& idea : ideas)
            for (int cat : idea.categories) {
                out << idea.token << '\t' << 'C' << idea.token.substr(4) << '\t'
                    << category_name(cat) << '\n';
                if (!idea.alias.empty())
                    out << idea.alias << '\t' << 'C' << idea.token.substr(4) << '\t'
                        << category_name(cat) << '\n';
            }
    }
    {
        // journal j covers area j % areas; every third journal also the next
        // area, giving the >1 category multiplicity the pipeline expects.
        auto out = open("journals.tsv");
        for (int j = 0; j < cfg.journals; ++j) {
            out << journal_name(j) << '\t' << area_name(j % cfg.areas) << '\n';
            if (j % 3 == 0 && cfg.areas > 1)
                out << journal_name(j) << '\t' << area_name((j + 1) % cfg.areas) << '\n';
        }
    }
    {
        auto out = open("gazetteer.tsv");
        for (const auto& loc : cfg.locations)
            out << loc.name << '\t' << loc.code() << '\n';
    }
    {
        auto out = open("regions.tsv");
        for (const auto& loc : cfg.locations)
            out << loc.code() << '\t' << loc.code() << '\n';
    }
    {
        auto out = open("status_rules.tsv");
        out << "H\t" << StatusRules::kHumanCode << "\nH\tM01\n";
        out << "A\tB01\t" << StatusRules::kHumanCode << "\n";
        for (const char* root : {"A11", "B02", "B03", "B04", "G02.111.570", "G02.149"})
            out << "C\t" << root << '\n';
    }

    // Lazily built cumulative mention weights per (category, eligibility cap).
    std::map<std::pair<int, int>, std::pair<std::vector<double>, std::uint32_t>> weight_cache;
    auto eligible = [&](int cat, int cap) -> const std::pair<std::vector<double>, std::uint32_t>& {
        auto key = std::make_pair(cat, cap);
        auto it = weight_cache.find(key);
        if (it != weight_cache.end())
            return it->second;
        const auto& pool = by_category[std::size_t(cat)];
        std::vector<double> cum;
        std::uint32_t count = 0;
        double acc = 0.0;
        for (std::uint32_t idx : pool) {
            if (ideas[idx].birth > cap)
                break; // pool is in birth order
            acc += std::pow(1.0 - cfg.mention_rho, double(cap - ideas[idx].birth));
            cum.push_back(acc);
            ++count;
        }
        return weight_cache.emplace(key, std::make_pair(std::move(cum), count)).first->second;
    };

    std::size_t n_papers = 0;
    {
        auto corpus = open("corpus.jsonl");
        std::uint64_t paper_counter = 0;
        for (int year = cfg.year_lo; year <= cfg.year_hi; ++year) {
            int max_papers = 0;
            for (const auto& loc : cfg.locations)
                max_papers = std::max(max_papers, loc.papers_per_year);
            for (int i = 0; i < max_papers; ++i) {
                // Structure shared by all locations publishing this (year, i).
                SplitMix64 structure(mix_seed({cfg.seed, 0x57acull, std::uint64_t(std::uint32_t(year)),
                                               std::uint64_t(std::uint32_t(i))}));
                int journal = int(structure.below(std::uint64_t(cfg.journals)));
                std::vector<int> mention_cats;
                for (int k = 0; k < cfg.mentions_per_paper; ++k)
                    mention_cats.push_back(int(structure.below(std::uint64_t(cfg.categories))));
                bool editorial = structure.next_double() < cfg.editorial_share;
                std::vector<std::string> mesh;
                if (journal % cfg.areas == 0) {
                    if (structure.next_double() < 0.8)
                        mesh.push_back("M01");
                    if (structure.next_double() < 0.2)
                        mesh.push_back("A11.300");
                } else {
                    if (structure.next_double() < 0.8)
                        mesh.push_back("B03.440");
                    if (structure.next_double() < 0.3)
                        mesh.push_back("B01.050");
                    if (structure.next_double() < 0.1)
                        mesh.push_back("M01");
                }
                std::uint64_t filler_salt = structure.next();

                for (std::size_t li = 0; li < cfg.locations.size(); ++li) {
                    const SynthLocation& loc = cfg.locations[li];
                    if (i >= loc.papers_per_year)
                        continue;
                    SplitMix64 chooser(mix_seed({cfg.seed, 0x1dea5ull, std::uint64_t(li),
                                                 std::uint64_t(std::uint32_t(year)),
                                                 std::uint64_t(std::uint32_t(i))}));
                    int cap = year - loc.lag;
                    std::vector<std::string> tokens;
                    for (int cat : mention_cats) {
                        const auto& [cum, count] = eligible(cat, cap);
                        if (count == 0)
                            continue;
                        double u = chooser.next_double() * cum[count - 1];
                        auto pos = std::size_t(
                            std::lower_bound(cum.begin(), cum.begin() + count, u) - cum.begin());
                        if (pos >= count)
                            pos = count - 1;
                        const Idea& idea = ideas[by_category[std::size_t(cat)][pos]];
                        if (!idea.alias.empty() && chooser.next_double() < cfg.alias_mention_prob)
                            tokens.push_back(idea.alias);
                        else
                            tokens.push_back(idea.token);
                    }

                    std::string title = "Study " + zero_pad(paper_counter, 7);
                    std::string abstract = "We examine";
                    for (const auto& tok : tokens) {
                        abstract += ' ';
                        abstract += tok;
                    }
                    SplitMix64 filler(mix_seed({filler_salt, std::uint64_t(li)}));
                    while (int(title.size() + 1 + abstract.size()) < cfg.min_chars) {
                        abstract += ' ';
                        abstract += synth_detail::kFiller[filler.below(10)];
                    }

                    nlohmann::json j;
                    j["id"] = "P" + zero_pad(paper_counter, 7);
                    j["year"] = year;
                    j["title"] = title;
                    j["abstract"] = abstract;
                    j["journal"] = journal_name(journal);
                    j["affiliation"] = "Unit " + std::to_string(i % 7) + ", Institute of Research, " +
                                       loc.name;
                    j["mesh"] = mesh;
                    j["type"] = editorial ? "editorial" : "research";
                    corpus << j.dump() << '\n';
                    ++paper_counter;
                    ++n_papers;
                }
            }
        }
    }

    {
        auto out = open("truth.json");
        nlohmann::json truth;
        truth["seed"] = cfg.seed;
        nlohmann::json locs = nlohmann::json::array();
        std::vector<std::size_t> order(cfg.locations.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return cfg.locations[a].lag < cfg.locations[b].lag;
        });
        for (const auto& loc : cfg.locations) {
            nlohmann::json l;
            l["name"] = loc.name;
            l["code"] = loc.code();
            l["lag"] = loc.lag;
            l["papers_per_year"] = loc.papers_per_year;
            locs.push_back(l);
        }
        truth["locations"] = locs;
        nlohmann::json expected = nlohmann::json::array();
        for (std::size_t idx : order)
            expected.push_back(cfg.locations[idx].code());
        truth["expected_edge_factor_order"] = expected; // most novel first
        truth["ideas"] = ideas.size();
        out << truth.dump(2) << '\n';
    }

    return SynthResult{ideas.size(), n_papers};
}

} // namespace edgefactor
