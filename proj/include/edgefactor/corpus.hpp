#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "edgefactor/common.hpp"

namespace edgefactor {

using AreaId = std::uint32_t;

struct Publication {
    std::string id;
    int year = 0;
    std::string title;
    std::string abstract;
    std::string journal;
    std::string affiliation; // empty = absent
    std::vector<std::string> mesh_codes;
    bool original_research = true;

    // Title and abstract joined with a single space when both are non-empty;
    // this is the string both matching and the character filter see.
    std::string text() const {
        if (title.empty())
            return abstract;
        if (abstract.empty())
            return title;
        std::string out;
        out.reserve(title.size() + 1 + abstract.size());
        out += title;
        out += ' ';
        out += abstract;
        return out;
    }
};

// One JSON object per line: id, year, title, abstract, journal, affiliation,
// mesh, type. Malformed lines are skipped and counted.
inline std::optional<Publication> parse_publication_line(std::string_view line,
                                                         Diagnostics* diag = nullptr,
                                                         std::size_t lineno = 0) {
    auto fail = [&](const char* why) -> std::optional<Publication> {
        if (diag)
            diag->warn("corpus.malformed",
                       "corpus line " + std::to_string(lineno) + ": " + why);
        return std::nullopt;
    };
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        return fail("not a JSON object");
    Publication pub;
    if (auto it = j.find("id"); it != j.end() && it->is_string())
        pub.id = it->get<std::string>();
    else
        return fail("missing string field \"id\"");
    if (auto it = j.find("year"); it != j.end() && it->is_number_integer())
        pub.year = it->get<int>();
    else
        return fail("missing integer field \"year\"");
    if (auto it = j.find("title"); it != j.end() && it->is_string())
        pub.title = it->get<std::string>();
    if (auto it = j.find("abstract"); it != j.end() && it->is_string())
        pub.abstract = it->get<std::string>();
    if (auto it = j.find("journal"); it != j.end() && it->is_string())
        pub.journal = it->get<std::string>();
    if (auto it = j.find("affiliation"); it != j.end() && it->is_string())
        pub.affiliation = it->get<std::string>();
    if (auto it = j.find("mesh"); it != j.end()) {
        if (!it->is_array())
            return fail("field \"mesh\" is not an array");
        for (const auto& m : *it)
            if (m.is_string())
                pub.mesh_codes.push_back(m.get<std::string>());
    }
    if (auto it = j.find("type"); it != j.end() && it->is_string())
        pub.original_research = (it->get<std::string>() == "research");
    return pub;
}

// Yields publications in input order; per-line parse failures are counted,
// an unreadable stream is fatal at the call site.
inline std::vector<Publication> load_publications(std::istream& in, Diagnostics* diag = nullptr) {
    std::vector<Publication> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        if (auto pub = parse_publication_line(line, diag, lineno))
            out.push_back(std::move(*pub));
    }
    return out;
}

struct FilterConfig {
    int year_lo = 1988;
    int year_hi = 2016;
    bool char_limits = true;
    int char_lo = 200;
    int char_hi = 5000;
    bool original_only = true;
};

inline bool passes_sample_filters(const Publication& pub, const FilterConfig& cfg) {
    if (cfg.original_only && !pub.original_research)
        return false;
    if (pub.year < cfg.year_lo || pub.year > cfg.year_hi)
        return false;
    if (cfg.char_limits) {
        std::size_t n = pub.text().size();
        if (n < std::size_t(cfg.char_lo) || n > std::size_t(cfg.char_hi))
            return false;
    }
    return true;
}

// Affiliation-string gazetteer. Case-insensitive substring match; the longest
// pattern wins, ties broken toward the match closest to the end of the string
// (country names conventionally terminate affiliations), then file order.
class Gazetteer {
public:
    struct Entry {
        std::string pattern_lower;
        std::string location;
    };

    std::vector<Entry> entries;
    std::unordered_map<std::string, std::string> region_map; // location -> reporting location

    // gazetteer.tsv: PATTERN<TAB>LOCATION; regions.tsv: LOCATION<TAB>REPORTING_LOCATION.
    static Gazetteer load(std::istream& gaz_tsv, std::istream* regions_tsv,
                          Diagnostics* diag = nullptr) {
        Gazetteer g;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(gaz_tsv, line)) {
            ++lineno;
            std::string_view sv = line;
            if (!sv.empty() && sv.back() == '\r')
                sv.remove_suffix(1);
            if (sv.empty())
                continue;
            auto cols = split_char(sv, '\t');
            if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) {
                if (diag)
                    diag->warn("gazetteer.malformed",
                               "gazetteer.tsv line " + std::to_string(lineno));
                continue;
            }
            g.entries.push_back(Entry{ascii_lower(cols[0]), std::string(trim(cols[1]))});
        }
        if (regions_tsv) {
            lineno = 0;
            while (std::getline(*regions_tsv, line)) {
                ++lineno;
                std::string_view sv = line;
                if (!sv.empty() && sv.back() == '\r')
                    sv.remove_suffix(1);
                if (sv.empty())
                    continue;
                auto cols = split_char(sv, '\t');
                if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) {
                    if (diag)
                        diag->warn("regions.malformed",
                                   "regions.tsv line " + std::to_string(lineno));
                    continue;
                }
                g.region_map[std::string(trim(cols[0]))] = std::string(trim(cols[1]));
            }
        }
        return g;
    }

    std::optional<std::string> resolve(std::string_view affiliation) const {
        if (affiliation.empty())
            return std::nullopt;
        std::string hay = ascii_lower(affiliation);
        std::size_t best_len = 0, best_pos = 0, best_idx = 0;
        bool found = false;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const std::string& pat = entries[i].pattern_lower;
            std::size_t pos = hay.rfind(pat);
            if (pos == std::string::npos)
                continue;
            if (!found || pat.size() > best_len ||
                (pat.size() == best_len && pos > best_pos)) {
                found = true;
                best_len = pat.size();
                best_pos = pos;
                best_idx = i;
            }
        }
        if (!found)
            return std::nullopt;
        const std::string& loc = entries[best_idx].location;
        auto it = region_map.find(loc);
        return it == region_map.end() ? loc : it->second;
    }

private:
    static std::string ascii_lower(std::string_view s) {
        std::string out(s);
        for (char& c : out)
            if (c >= 'A' && c <= 'Z')
                c = char(c - 'A' + 'a');
        return out;
    }
};

struct TranslationalStatus {
    bool h = false;
    bool a = false;
    bool c = false;
};

// A flag fires when any keyword code falls inside one of its root subtrees
// and inside none of that root's exclude subtrees. Subtree membership is
// segment-aligned prefix match on dot-separated codes.
class StatusRules {
public:
    struct Rule {
        std::string root;
        std::vector<std::string> excludes;
    };

    std::vector<Rule> h, a, c;

    static constexpr std::string_view kHumanCode = "B01.050.150.900.649.801.400.112.400.400";

    static StatusRules defaults() {
        StatusRules r;
        r.h.push_back({std::string(kHumanCode), {}});
        r.h.push_back({"M01", {}});
        r.a.push_back({"B01", {std::string(kHumanCode)}});
        for (const char* root : {"A11", "B02", "B03", "B04", "G02.111.570", "G02.149"})
            r.c.push_back({root, {}});
        return r;
    }

    // status_rules.tsv: FLAG<TAB>ROOT_CODE[<TAB>EXCLUDE_CODE]; repeated lines
    // with the same flag and root accumulate excludes.
    static StatusRules load(std::istream& in, Diagnostics* diag = nullptr) {
        StatusRules r;
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
            if (cols.size() < 2 || cols.size() > 3) {
                if (diag)
                    diag->warn("status_rules.malformed",
                               "status_rules.tsv line " + std::to_string(lineno));
                continue;
            }
            std::string flag(trim(cols[0]));
            std::vector<Rule>* target = nullptr;
            if (flag == "H" || flag == "h")
                target = &r.h;
            else if (flag == "A" || flag == "a")
                target = &r.a;
            else if (flag == "C" || flag == "c")
                target = &r.c;
            else {
                if (diag)
                    diag->warn("status_rules.malformed", "status_rules.tsv line " +
                                                             std::to_string(lineno) +
                                                             ": unknown flag \"" + flag + "\"");
                continue;
            }
            std::string root(trim(cols[1]));
            auto it = std::find_if(target->begin(), target->end(),
                                   [&](const Rule& rule) { return rule.root == root; });
            if (it == target->end()) {
                target->push_back({root, {}});
                it = target->end() - 1;
            }
            if (cols.size() == 3 && !trim(cols[2]).empty())
                it->excludes.emplace_back(trim(cols[2]));
        }
        return r;
    }
};

inline bool valid_tree_code(std::string_view code) {
    if (code.empty() || code.front() == '.' || code.back() == '.')
        return false;
    return code.find("..") == std::string_view::npos;
}

inline bool code_in_subtree(std::string_view code, std::string_view root) {
    if (code.size() < root.size() || code.substr(0, root.size()) != root)
        return false;
    return code.size() == root.size() || code[root.size()] == '.';
}

inline TranslationalStatus translational_status(std::span<const std::string> codes,
                                                const StatusRules& rules,
                                                Diagnostics* diag = nullptr) {
    auto matches = [](std::string_view code, const std::vector<StatusRules::Rule>& ruleset) {
        for (const auto& rule : ruleset) {
            if (!code_in_subtree(code, rule.root))
                continue;
            bool excluded = false;
            for (const auto& ex : rule.excludes)
                if (code_in_subtree(code, ex)) {
                    excluded = true;
                    break;
                }
            if (!excluded)
                return true;
        }
        return false;
    };
    TranslationalStatus status;
    for (const std::string& code : codes) {
        if (!valid_tree_code(code)) {
            if (diag)
                diag->warn("status.bad_code", "ignoring malformed tree code \"" + code + "\"");
            continue;
        }
        status.h = status.h || matches(code, rules.h);
        status.a = status.a || matches(code, rules.a);
        status.c = status.c || matches(code, rules.c);
    }
    return status;
}

// journals.tsv: JOURNAL_ID<TAB>RESEARCH_AREA, repeated lines per journal.
// Research areas are interned in first-appearance order.
class JournalTable {
public:
    std::vector<std::string> area_names;
    std::unordered_map<std::string, std::vector<AreaId>> journal_areas;

    static JournalTable load(std::istream& in, Diagnostics* diag = nullptr) {
        JournalTable t;
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
            if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) {
                if (diag)
                    diag->warn("journals.malformed", "journals.tsv line " + std::to_string(lineno));
                continue;
            }
            AreaId area = t.intern_area(std::string(trim(cols[1])));
            auto& areas = t.journal_areas[std::string(trim(cols[0]))];
            if (std::find(areas.begin(), areas.end(), area) == areas.end())
                areas.push_back(area);
        }
        return t;
    }

    AreaId intern_area(const std::string& name) {
        auto [it, inserted] = area_ids_.emplace(name, AreaId(area_names.size()));
        if (inserted)
            area_names.push_back(name);
        return it->second;
    }

    const std::vector<AreaId>* areas_of(const std::string& journal) const {
        auto it = journal_areas.find(journal);
        return it == journal_areas.end() ? nullptr : &it->second;
    }

    std::size_t area_count() const { return area_names.size(); }

private:
    std::unordered_map<std::string, AreaId> area_ids_;
};

enum class AreaGroup : std::uint8_t { Applied, BasicScience, Other };

inline constexpr int kAreaGroupCount = 3;

inline std::string_view area_group_label(AreaGroup g) {
    switch (g) {
    case AreaGroup::Applied: return "Applied";
    case AreaGroup::BasicScience: return "Basic Science";
    case AreaGroup::Other: return "Other";
    }
    return "Other";
}

// Per-area running sums of the three status indicators. Partial accumulators
// merge associatively, so corpus passes can be partitioned freely.
class AreaStatusAccumulator {
public:
    explicit AreaStatusAccumulator(std::size_t area_count)
        : n_(area_count, 0), h_(area_count, 0), a_(area_count, 0), c_(area_count, 0) {}

    void add(std::span<const AreaId> areas, const TranslationalStatus& status) {
        for (AreaId area : areas) {
            ++n_[area];
            h_[area] += status.h ? 1 : 0;
            a_[area] += status.a ? 1 : 0;
            c_[area] += status.c ? 1 : 0;
        }
    }

    void merge(const AreaStatusAccumulator& other) {
        for (std::size_t i = 0; i < n_.size(); ++i) {
            n_[i] += other.n_[i];
            h_[i] += other.h_[i];
            a_[i] += other.a_[i];
            c_[i] += other.c_[i];
        }
    }

    std::size_t linked_papers(AreaId area) const { return n_[area]; }

    // Applied: avgH > avgC and avgH > 0.2.
    // Basic science: avgH < avgC, avgA < 0.8 (veterinary carve-out), avgC > 0.5.
    // Everything else, including areas with no linked papers, is Other.
    std::vector<AreaGroup> classify() const {
        std::vector<AreaGroup> groups(n_.size(), AreaGroup::Other);
        for (std::size_t i = 0; i < n_.size(); ++i) {
            if (n_[i] == 0)
                continue;
            double inv = 1.0 / double(n_[i]);
            double avg_h = double(h_[i]) * inv;
            double avg_a = double(a_[i]) * inv;
            double avg_c = double(c_[i]) * inv;
            if (avg_h > avg_c && avg_h > 0.2)
                groups[i] = AreaGroup::Applied;
            else if (avg_h < avg_c && avg_a < 0.8 && avg_c > 0.5)
                groups[i] = AreaGroup::BasicScience;
        }
        return groups;
    }

private:
    std::vector<std::uint64_t> n_, h_, a_, c_;
};

} // namespace edgefactor
