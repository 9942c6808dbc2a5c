#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "edgefactor/common.hpp"
#include "edgefactor/text.hpp"

namespace edgefactor {

using TermId = std::uint32_t;
using CategoryId = std::uint32_t;
using ConceptId = std::uint32_t;

// The four idea-category groups used for the report breakdowns.
enum class CategoryGroup : std::uint8_t {
    ClinicalAndAnatomy,
    DrugsAndChemicals,
    BasicScienceAndResearchTools,
    Miscellaneous,
};

inline constexpr int kCategoryGroupCount = 4;

inline std::string_view category_group_label(CategoryGroup g) {
    switch (g) {
    case CategoryGroup::ClinicalAndAnatomy: return "Clinical and Anatomy";
    case CategoryGroup::DrugsAndChemicals: return "Drugs and Chemicals";
    case CategoryGroup::BasicScienceAndResearchTools: return "Basic Science and Research Tools";
    case CategoryGroup::Miscellaneous: return "Miscellaneous";
    }
    return "Miscellaneous";
}

inline bool parse_category_group(std::string_view label, CategoryGroup& out) {
    for (int i = 0; i < kCategoryGroupCount; ++i) {
        auto g = static_cast<CategoryGroup>(i);
        if (label == category_group_label(g)) {
            out = g;
            return true;
        }
    }
    return false;
}

struct IdeaCategory {
    std::string name;
    CategoryGroup group;
};

// One thesaurus entry. `text` is the canonical normalized form (tokens joined
// by single spaces). Terms sharing a concept_id are synonyms. A term listed
// under several categories is stored once with all its category ids; the
// multiplicity is realized downstream when contributions are expanded.
struct Term {
    std::string text;
    ConceptId concept_id = 0;
    std::vector<CategoryId> category_ids; // sorted, unique, non-empty

    TokenSeq tokens() const { return split_tokens(text); }
};

struct ThesaurusStats {
    std::size_t lines = 0;
    std::size_t dropped_empty = 0;     // normalization produced zero tokens
    std::size_t malformed = 0;         // wrong column count / blank fields
    std::size_t unknown_category = 0;  // category label absent from the table
};

class Thesaurus {
public:
    std::vector<Term> terms;
    std::vector<IdeaCategory> categories;
    std::vector<std::string> concept_names;
    std::vector<std::vector<TermId>> concept_terms; // inverse of Term::concept_id
    ThesaurusStats stats;

    std::size_t term_count() const { return terms.size(); }

    CategoryGroup category_group(CategoryId id) const {
        if (id >= categories.size())
            throw ValidationError("unknown idea category id " + std::to_string(id));
        return categories[id].group;
    }

    const std::vector<TermId>& synonyms(const Term& t) const { return concept_terms[t.concept_id]; }

    CategoryId category_id(std::string_view name) const {
        auto it = category_by_name_.find(std::string(name));
        if (it == category_by_name_.end())
            throw ValidationError("unknown idea category \"" + std::string(name) + "\"");
        return it->second;
    }

    bool has_category(std::string_view name) const {
        return category_by_name_.count(std::string(name)) != 0;
    }

    friend Thesaurus load_thesaurus(std::istream&, std::istream&, Diagnostics*);

private:
    std::unordered_map<std::string, CategoryId> category_by_name_;
};

// categories.tsv: CATEGORY_LABEL<TAB>GROUP_LABEL. Unknown group label is
// fatal; so is a conflicting duplicate category row.
// vocab.tsv: TERM<TAB>CONCEPT_ID<TAB>CATEGORY_LABEL, one line per
// (term, category) pair. Raw term text is normalized on load; records that
// normalize to nothing are dropped and counted. A fully repeated line (same
// term, concept, and category) is fatal.
inline Thesaurus load_thesaurus(std::istream& vocab_tsv, std::istream& categories_tsv,
                                Diagnostics* diag = nullptr) {
    Thesaurus th;
    Diagnostics local;
    Diagnostics& d = diag ? *diag : local;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(categories_tsv, line)) {
        ++lineno;
        std::string_view sv = line;
        if (!sv.empty() && sv.back() == '\r')
            sv.remove_suffix(1);
        if (sv.empty())
            continue;
        auto cols = split_char(sv, '\t');
        if (cols.size() != 2 || cols[0].empty())
            throw ValidationError("categories.tsv line " + std::to_string(lineno) +
                                  ": expected CATEGORY<TAB>GROUP");
        CategoryGroup group;
        if (!parse_category_group(trim(cols[1]), group))
            throw ValidationError("categories.tsv line " + std::to_string(lineno) +
                                  ": unknown group label \"" + std::string(cols[1]) + "\"");
        std::string name(trim(cols[0]));
        auto [it, inserted] =
            th.category_by_name_.emplace(name, CategoryId(th.categories.size()));
        if (!inserted) {
            if (th.categories[it->second].group != group)
                throw ValidationError("categories.tsv line " + std::to_string(lineno) +
                                      ": category \"" + name + "\" remapped to a different group");
            continue;
        }
        th.categories.push_back(IdeaCategory{std::move(name), group});
    }

    std::unordered_map<std::string, ConceptId> concept_by_name;
    // (normalized text, concept) -> term id; the key string is "concept\ttext".
    std::unordered_map<std::string, TermId> term_by_key;

    lineno = 0;
    while (std::getline(vocab_tsv, line)) {
        ++lineno;
        std::string_view sv = line;
        if (!sv.empty() && sv.back() == '\r')
            sv.remove_suffix(1);
        if (sv.empty())
            continue;
        ++th.stats.lines;
        auto cols = split_char(sv, '\t');
        if (cols.size() != 3 || trim(cols[1]).empty()) {
            ++th.stats.malformed;
            d.warn("vocab.malformed", "vocab.tsv line " + std::to_string(lineno) +
                                          ": expected TERM<TAB>CONCEPT<TAB>CATEGORY");
            continue;
        }
        std::string category_label(trim(cols[2]));
        auto cat_it = th.category_by_name_.find(category_label);
        if (cat_it == th.category_by_name_.end()) {
            ++th.stats.unknown_category;
            d.warn("vocab.unknown_category", "vocab.tsv line " + std::to_string(lineno) +
                                                 ": category \"" + category_label +
                                                 "\" not in categories.tsv");
            continue;
        }
        TokenSeq tokens = normalize_text(cols[0]);
        if (tokens.empty()) {
            ++th.stats.dropped_empty;
            d.count("vocab.dropped_empty");
            continue;
        }
        std::string concept_name(trim(cols[1]));
        auto [cit, cinserted] =
            concept_by_name.emplace(concept_name, ConceptId(th.concept_names.size()));
        if (cinserted) {
            th.concept_names.push_back(concept_name);
            th.concept_terms.emplace_back();
        }
        ConceptId cid = cit->second;

        std::string text = join_tokens(tokens);
        std::string key = concept_name + '\t' + text;
        auto [tit, tinserted] = term_by_key.emplace(key, TermId(th.terms.size()));
        if (tinserted) {
            th.terms.push_back(Term{std::move(text), cid, {cat_it->second}});
            th.concept_terms[cid].push_back(tit->second);
        } else {
            auto& cats = th.terms[tit->second].category_ids;
            auto pos = std::lower_bound(cats.begin(), cats.end(), cat_it->second);
            if (pos != cats.end() && *pos == cat_it->second)
                throw ValidationError("vocab.tsv line " + std::to_string(lineno) +
                                      ": duplicate term record for \"" + th.terms[tit->second].text +
                                      "\" / " + concept_name + " / " + category_label);
            cats.insert(pos, cat_it->second);
        }
    }
    return th;
}

// Emits the loaded tables in the exact on-disk formats; reloading the result
// reproduces the term/concept/category tables bit for bit.
inline void save_thesaurus(const Thesaurus& th, std::ostream& vocab_tsv,
                           std::ostream& categories_tsv) {
    for (const auto& cat : th.categories)
        categories_tsv << cat.name << '\t' << category_group_label(cat.group) << '\n';
    for (const auto& term : th.terms)
        for (CategoryId cid : term.category_ids)
            vocab_tsv << term.text << '\t' << th.concept_names[term.concept_id] << '\t'
                      << th.categories[cid].name << '\n';
}

} // namespace edgefactor
