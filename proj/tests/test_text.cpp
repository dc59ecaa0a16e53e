#include <doctest.h>

#include "procx/text.hpp"

using namespace procx;

TEST_CASE("case folding and whitespace") {
    CHECK(text::to_lower("A Claims OFFICER") == "a claims officer");
    CHECK(text::trim("  x y \t\n") == "x y");
    CHECK(text::collapse_whitespace("  a \t b\n\nc ") == "a b c");
}

TEST_CASE("surface normalization strips outer punctuation only") {
    CHECK(text::normalize_surface("  \"The  Claim,\" ") == "the claim");
    CHECK(text::normalize_surface("e-mail") == "e-mail");
    CHECK(text::is_punctuation_only(".,;"));
    CHECK_FALSE(text::is_punctuation_only("a."));
}

TEST_CASE("type keys treat space and underscore alike") {
    CHECK(text::type_key("Actor Performer") == text::type_key("actor_performer"));
    CHECK(text::type_key("XOR Gateway") == "xor gateway");
}

TEST_CASE("split keeps empty fields") {
    auto parts = text::split("a||b|", '|');
    REQUIRE(parts.size() == 4);
    CHECK(parts[1].empty());
    CHECK(parts[3].empty());
}

TEST_CASE("first sentence") {
    CHECK(text::first_sentence("One thing. Two things.") == "One thing.");
    CHECK(text::first_sentence("No stop") == "No stop");
    CHECK(text::first_sentence("e.g. this. That.") == "e.g.");
}

TEST_CASE("digests match published test vectors") {
    CHECK(text::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(text::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(text::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(text::hex64(0xff) == "00000000000000ff");
}

TEST_CASE("word count") {
    CHECK(text::count_words("") == 0);
    CHECK(text::count_words("  two  words ") == 2);
}
