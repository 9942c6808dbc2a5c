#include <doctest.h>

#include <map>
#include <sstream>

#include "edgefactor/vocab.hpp"

using namespace edgefactor;

namespace {

const char* kCategories =
    "Disease or Syndrome\tClinical and Anatomy\n"
    "Finding\tClinical and Anatomy\n"
    "Pharmacologic Substance\tDrugs and Chemicals\n"
    "Gene or Genome\tBasic Science and Research Tools\n"
    "Intellectual Product\tMiscellaneous\n";

Thesaurus load(const std::string& vocab_text, const std::string& categories_text = kCategories,
               Diagnostics* diag = nullptr) {
    std::istringstream vocab(vocab_text);
    std::istringstream categories(categories_text);
    return load_thesaurus(vocab, categories, diag);
}

} // namespace

TEST_CASE("load_thesaurus normalizes terms and cross-links categories") {
    Thesaurus th = load("granulomatosis with polyangiitis\tC1\tDisease or Syndrome\n"
                        "fMRI\tC2\tIntellectual Product\n");
    REQUIRE(th.term_count() == 2);
    CHECK(th.terms[0].text == "granulomatosis with polyangiitis");
    CHECK(th.terms[0].tokens().size() == 3);
    CHECK(th.category_group(th.terms[0].category_ids[0]) == CategoryGroup::ClinicalAndAnatomy);
    CHECK(th.terms[1].text == "fmri");
}

TEST_CASE("category_group matches the configured table") {
    Thesaurus th = load("x\tC1\tFinding\n");
    CHECK(th.category_group(th.category_id("Pharmacologic Substance")) ==
          CategoryGroup::DrugsAndChemicals);
    CHECK(th.category_group(th.category_id("Gene or Genome")) ==
          CategoryGroup::BasicScienceAndResearchTools);
    CHECK(th.category_group(th.category_id("Finding")) == CategoryGroup::ClinicalAndAnatomy);
    CHECK_THROWS_AS(th.category_group(999), ValidationError);
    CHECK_THROWS_AS(th.category_id("No Such Category"), ValidationError);
}

TEST_CASE("whitespace-only terms are dropped and counted") {
    Diagnostics diag;
    Thesaurus th = load("  \tC1\tFinding\nreal term\tC2\tFinding\n", kCategories, &diag);
    CHECK(th.term_count() == 1);
    CHECK(th.stats.dropped_empty == 1);
}

TEST_CASE("records sharing a concept become synonyms") {
    Thesaurus th = load("fmri\tC9\tIntellectual Product\n"
                        "functional mri\tC9\tIntellectual Product\n"
                        "aspirin\tC3\tPharmacologic Substance\n");
    REQUIRE(th.term_count() == 3);
    CHECK(th.terms[0].concept_id == th.terms[1].concept_id);
    CHECK(th.concept_terms[th.terms[0].concept_id].size() == 2);
    // synonym closure: every member of the concept group shares the concept id
    for (ConceptId c = 0; c < th.concept_terms.size(); ++c)
        for (TermId t : th.concept_terms[c])
            CHECK(th.terms[t].concept_id == c);
}

TEST_CASE("multi-category terms are stored once with all categories") {
    Thesaurus th = load("aspirin\tC3\tPharmacologic Substance\n"
                        "aspirin\tC3\tFinding\n");
    REQUIRE(th.term_count() == 1);
    CHECK(th.terms[0].category_ids.size() == 2);
}

TEST_CASE("exactly duplicated records are fatal") {
    CHECK_THROWS_AS(load("aspirin\tC3\tFinding\naspirin\tC3\tFinding\n"), ValidationError);
}

TEST_CASE("unknown group label in the category table is fatal") {
    CHECK_THROWS_AS(load("x\tC1\tFinding\n", "Finding\tNot A Group\n"), ValidationError);
}

TEST_CASE("vocab lines with unknown categories are skipped with a diagnostic") {
    Diagnostics diag;
    Thesaurus th = load("x\tC1\tUnlisted Category\ny\tC2\tFinding\n", kCategories, &diag);
    CHECK(th.term_count() == 1);
    CHECK(th.stats.unknown_category == 1);
}

TEST_CASE("malformed vocab lines are skipped with line numbers") {
    Diagnostics diag;
    Thesaurus th = load("only two\tcolumns\nx\tC1\tFinding\n", kCategories, &diag);
    CHECK(th.term_count() == 1);
    CHECK(th.stats.malformed == 1);
    REQUIRE(!diag.messages.empty());
    CHECK(diag.messages[0].find("line 1") != std::string::npos);
}

TEST_CASE("save/load round trip reproduces all tables") {
    Thesaurus th = load("C-reactive protein (hs)\tC1\tFinding\n"
                        "e-cigarette user\tC2\tIntellectual Product\n"
                        "aspirin\tC3\tPharmacologic Substance\n"
                        "aspirin\tC3\tFinding\n"
                        "acetylsalicylic acid\tC3\tPharmacologic Substance\n");
    std::ostringstream vocab_out, categories_out;
    save_thesaurus(th, vocab_out, categories_out);
    std::istringstream vocab_in(vocab_out.str()), categories_in(categories_out.str());
    Thesaurus again = load_thesaurus(vocab_in, categories_in);

    REQUIRE(again.term_count() == th.term_count());
    for (TermId t = 0; t < th.term_count(); ++t) {
        CHECK(again.terms[t].text == th.terms[t].text);
        CHECK(again.terms[t].concept_id == th.terms[t].concept_id);
        CHECK(again.terms[t].category_ids == th.terms[t].category_ids);
    }
    REQUIRE(again.categories.size() == th.categories.size());
    for (std::size_t c = 0; c < th.categories.size(); ++c) {
        CHECK(again.categories[c].name == th.categories[c].name);
        CHECK(again.categories[c].group == th.categories[c].group);
    }
    CHECK(again.concept_names == th.concept_names);
    CHECK(again.concept_terms == th.concept_terms);
}

TEST_CASE("groups partition the category set") {
    Thesaurus th = load("x\tC1\tFinding\n");
    std::map<CategoryGroup, std::size_t> sizes;
    for (const IdeaCategory& cat : th.categories)
        ++sizes[cat.group];
    std::size_t total = 0;
    for (const auto& [group, n] : sizes)
        total += n;
    CHECK(total == th.categories.size());
}
