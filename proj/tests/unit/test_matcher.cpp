#include <doctest.h>

#include <random>
#include <sstream>

#include "edgefactor/matcher.hpp"
#include "edgefactor/text.hpp"
#include "edgefactor/vocab.hpp"

#include "../support/oracles.hpp"

using namespace edgefactor;

namespace {

using Patterns = std::vector<std::pair<TermId, TokenSeq>>;

DictionaryMatcher build(const Patterns& patterns) {
    TermId bound = 0;
    for (const auto& [id, _] : patterns)
        bound = std::max(bound, id + 1);
    return DictionaryMatcher::build(std::span<const std::pair<TermId, TokenSeq>>(patterns), bound);
}

} // namespace

TEST_CASE("a matcher over one term finds exactly that term") {
    Patterns p{{0, {"optical", "coherence", "tomography"}}};
    DictionaryMatcher m = build(p);
    CHECK(m.find_terms({"optical", "coherence", "tomography", "imaging"}) ==
          std::vector<TermId>{0});
    CHECK(m.find_terms({"coherence", "tomography"}).empty());
    CHECK(m.find_terms({}).empty());
}

TEST_CASE("overlapping patterns both match") {
    Patterns p{{0, {"a", "b"}}, {1, {"b", "c"}}};
    DictionaryMatcher m = build(p);
    CHECK(m.find_terms({"a", "b", "c"}) == std::vector<TermId>{0, 1});
}

TEST_CASE("nested patterns both match") {
    Patterns p{{0, {"a"}}, {1, {"a", "b"}}};
    DictionaryMatcher m = build(p);
    CHECK(m.find_terms({"a", "b"}) == std::vector<TermId>{0, 1});
}

TEST_CASE("matching is on token boundaries, not substrings") {
    Patterns p{{0, {"art"}}};
    DictionaryMatcher m = build(p);
    CHECK(m.find_terms({"heart", "chart"}).empty());
    CHECK(m.find_terms({"modern", "art"}) == std::vector<TermId>{0});
}

TEST_CASE("unknown tokens break contiguity") {
    Patterns p{{0, {"a", "b"}}};
    DictionaryMatcher m = build(p);
    CHECK(m.find_terms({"a", "zzz", "b"}).empty());
    CHECK(m.find_terms({"zzz", "a", "b", "zzz"}) == std::vector<TermId>{0});
}

TEST_CASE("duplicating a passage never changes the result set") {
    Patterns p{{0, {"x", "y"}}, {1, {"y"}}, {2, {"q", "r", "s"}}};
    DictionaryMatcher m = build(p);
    TokenSeq doc{"x", "y", "q", "r", "s"};
    TokenSeq doubled = doc;
    doubled.insert(doubled.end(), doc.begin(), doc.end());
    CHECK(m.find_terms(doc) == m.find_terms(doubled));
}

TEST_CASE("scratch reuse across documents stays correct") {
    Patterns p{{0, {"a"}}, {1, {"b", "b"}}};
    DictionaryMatcher m = build(p);
    DictionaryMatcher::Scratch scratch;
    std::vector<TermId> out;
    m.find_terms({"a"}, scratch, out);
    CHECK(out == std::vector<TermId>{0});
    m.find_terms({"b", "b"}, scratch, out);
    CHECK(out == std::vector<TermId>{1});
    m.find_terms({"c"}, scratch, out);
    CHECK(out.empty());
}

TEST_CASE("two terms may share one token sequence") {
    Patterns p{{0, {"gold"}}, {1, {"gold"}}};
    DictionaryMatcher m = build(p);
    CHECK(m.find_terms({"gold"}) == std::vector<TermId>{0, 1});
}

TEST_CASE("matcher built from a thesaurus uses normalized forms") {
    std::istringstream vocab("C-reactive protein (hs)\tC1\tFinding\n");
    std::istringstream categories("Finding\tClinical and Anatomy\n");
    Thesaurus th = load_thesaurus(vocab, categories);
    DictionaryMatcher m = DictionaryMatcher::build(th);
    CHECK(m.find_terms(normalize_text("elevated C-reactive protein (hs) levels")) ==
          std::vector<TermId>{0});
}

TEST_CASE("repeated-token and suffix-chain patterns") {
    Patterns p{{0, {"a", "a", "a"}}, {1, {"a", "a"}}, {2, {"b"}}, {3, {"a", "b"}},
               {4, {"c", "a", "b"}}};
    DictionaryMatcher m = build(p);
    CHECK(m.find_terms({"a", "a", "a", "a"}) == std::vector<TermId>{0, 1});
    CHECK(m.find_terms({"a", "a"}) == std::vector<TermId>{1});
    CHECK(m.find_terms({"c", "a", "b"}) == std::vector<TermId>{2, 3, 4});
    CHECK(m.find_terms({"a", "b"}) == std::vector<TermId>{2, 3});
    // failure transitions across overlapping occurrences
    CHECK(m.find_terms({"a", "c", "a", "b", "a", "a"}) == std::vector<TermId>{1, 2, 3, 4});
}

TEST_CASE("randomized equivalence with the naive contiguous-subsequence oracle") {
    std::mt19937 rng(20230117);
    std::vector<std::string> alphabet;
    for (int i = 0; i < 18; ++i)
        alphabet.push_back("w" + std::to_string(i));

    for (int iter = 0; iter < 60; ++iter) {
        Patterns patterns;
        int n_patterns = 1 + int(rng() % 300);
        for (int i = 0; i < n_patterns; ++i) {
            TokenSeq pat;
            int len = 1 + int(rng() % 4);
            for (int k = 0; k < len; ++k)
                pat.push_back(alphabet[rng() % alphabet.size()]);
            patterns.emplace_back(TermId(i), std::move(pat));
        }
        DictionaryMatcher m = build(patterns);

        TokenSeq doc;
        int doc_len = int(rng() % 120);
        for (int k = 0; k < doc_len; ++k) {
            if (rng() % 5 == 0 && !patterns.empty()) {
                const TokenSeq& inject = patterns[rng() % patterns.size()].second;
                doc.insert(doc.end(), inject.begin(), inject.end());
            } else if (rng() % 7 == 0) {
                doc.push_back("oov" + std::to_string(rng() % 3));
            } else {
                doc.push_back(alphabet[rng() % alphabet.size()]);
            }
        }
        CHECK(m.find_terms(doc) == testsupport::naive_find_terms(patterns, doc));
    }
}
