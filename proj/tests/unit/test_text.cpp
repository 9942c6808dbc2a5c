#include <doctest.h>

#include <random>
#include <string>

#include "edgefactor/text.hpp"

using namespace edgefactor;

TEST_CASE("normalize_text fuses hyphens and strips punctuation") {
    CHECK(normalize_text("C-reactive protein (hs)") == TokenSeq{"creactive", "protein", "hs"});
    CHECK(normalize_text("e-cigarette user") == TokenSeq{"ecigarette", "user"});
    CHECK(normalize_text("3'-UTR") == TokenSeq{"3utr"});
    CHECK(normalize_text("optical coherence tomography") ==
          TokenSeq{"optical", "coherence", "tomography"});
}

TEST_CASE("normalize_text edge cases") {
    CHECK(normalize_text("").empty());
    CHECK(normalize_text("   ").empty());
    CHECK(normalize_text("--''").empty());
    CHECK(normalize_text("...,;:!?").empty());
    CHECK(normalize_text("H7N9") == TokenSeq{"h7n9"});
    CHECK(normalize_text("foo\tbar\nbaz") == TokenSeq{"foo", "bar", "baz"});
    CHECK(normalize_text("a- -b") == TokenSeq{"a", "b"});
}

TEST_CASE("normalize_text keeps valid UTF-8 inside tokens") {
    // "café" with U+00E9
    TokenSeq t = normalize_text("caf\xc3\xa9 au lait");
    REQUIRE(t.size() == 3);
    CHECK(t[0] == "caf\xc3\xa9");
}

TEST_CASE("normalize_text drops invalid UTF-8 bytes and counts them") {
    NormalizeStats stats;
    TokenSeq t = normalize_text("ab\xffge", stats);
    CHECK(t == TokenSeq{"abge"});
    CHECK(stats.invalid_bytes == 1);

    stats = {};
    // truncated 3-byte sequence followed by a letter
    t = normalize_text("x\xe2\x82y", stats);
    CHECK(stats.invalid_bytes > 0);
}

TEST_CASE("normalize_text is idempotent over its own output") {
    std::mt19937 rng(7);
    const std::string alphabet = "abcXYZ 019-'()[]{};:\xc3\xa9\xe2\x82\xac.,";
    for (int iter = 0; iter < 200; ++iter) {
        std::string raw;
        int len = int(rng() % 60);
        for (int i = 0; i < len; ++i)
            raw.push_back(alphabet[rng() % alphabet.size()]);
        TokenSeq once = normalize_text(raw);
        TokenSeq twice = normalize_text(join_tokens(once));
        CHECK(once == twice);
    }
}

TEST_CASE("split_tokens inverts join_tokens") {
    TokenSeq tokens{"alpha", "beta", "gamma"};
    CHECK(split_tokens(join_tokens(tokens)) == tokens);
    CHECK(split_tokens("").empty());
}
