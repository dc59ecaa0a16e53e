#include <doctest.h>

#include <random>

#include "procx/parser.hpp"
#include "procx/prompt.hpp"
#include "support.hpp"

using namespace procx;
using namespace procx::testing;

namespace {

std::size_t accounted(const ParseReport& r) { return r.items.size() + r.error_lines.size() + r.ignored_line_count; }

} // namespace

TEST_CASE("relation line") {
    auto r = parse("flow|register the claim|examine the claim", Task::RE, schema("pet"));
    REQUIRE(r.items.size() == 1);
    auto rel = std::get<ParsedRelation>(r.items[0]);
    CHECK(rel.type == "Flow");
    CHECK(rel.source_surface == "register the claim");
    CHECK(rel.target_surface == "examine the claim");
    CHECK(r.error_count == 0);
}

TEST_CASE("wrong field count") {
    auto r = parse("flow|register the claim", Task::RE, schema("pet"));
    CHECK(r.items.empty());
    CHECK(r.error_count == 1);
    REQUIRE(r.error_lines.size() == 1);
    CHECK(r.error_lines[0].reason == ParseFailure::bad_field_count);
    CHECK(to_string(r.error_lines[0].reason) == "bad field count");
}

TEST_CASE("fact list, three records and one unknown type") {
    // Hand count: 4 prose lines (header, two facts, blank) are ignored, three records parse,
    // the unknown type is the single error.
    const std::string raw =
        "Facts:\n"
        "- the clerk checks the form\n"
        "- the form is archived\n"
        "\n"
        "actor|the clerk\n"
        "activity|checks\n"
        "activity data|the form\n"
        "gateway_xyz|if\n";
    auto r = parse(raw, Task::MD, schema("pet"));
    CHECK(r.items.size() == 3);
    CHECK(r.error_count == 1);
    CHECK(r.error_lines[0].reason == ParseFailure::unknown_type);
    CHECK(r.error_lines[0].line_number == 8);
    CHECK(r.ignored_line_count >= 1);
    CHECK(r.total_line_count == 8);
    CHECK(accounted(r) == r.total_line_count);
}

TEST_CASE("type names are case and separator insensitive") {
    auto r = parse("Actor_Performer|checks|the clerk\nACTOR PERFORMER|files|he", Task::RE, schema("pet"));
    REQUIRE(r.items.size() == 2);
    CHECK(std::get<ParsedRelation>(r.items[0]).type == "Actor Performer");
}

TEST_CASE("empty fields") {
    auto r = parse("actor|  \nactivity|checks", Task::MD, schema("pet"));
    CHECK(r.items.size() == 1);
    REQUIRE(r.error_lines.size() == 1);
    CHECK(r.error_lines[0].reason == ParseFailure::empty_field);
}

TEST_CASE("entity lines") {
    auto r = parse("entity|the clerk|he\nentity|the form\nentity|", Task::ER, schema("pet"));
    REQUIRE(r.items.size() == 2);
    CHECK(std::get<ParsedCluster>(r.items[0]).surfaces == std::vector<std::string>{"the clerk", "he"});
    CHECK(r.error_count == 1);
}

TEST_CASE("constraint lines, unary and binary, negation") {
    auto decon = schema("decon");
    auto r = parse("succession||register claim|examine claim\n"
                   "init|not|receive claim\n"
                   "init||a|b\n"
                   "response|maybe|a|b\n",
                   Task::CE, decon);
    REQUIRE(r.items.size() == 2);
    auto c0 = std::get<ParsedConstraint>(r.items[0]);
    CHECK(c0.type == "Succession");
    CHECK_FALSE(c0.negated);
    CHECK(c0.actions == std::vector<std::string>{"register claim", "examine claim"});
    CHECK(std::get<ParsedConstraint>(r.items[1]).negated);
    REQUIRE(r.error_lines.size() == 2);
    CHECK(r.error_lines[0].reason == ParseFailure::bad_field_count);
    CHECK(r.error_lines[1].reason == ParseFailure::bad_negation_flag);
}

TEST_CASE("reflection and output headers, code fences") {
    const std::string raw =
        "Here is my analysis.\n"
        "Facts:\n"
        "- one\n"
        "Reflection:\n"
        "- all good | really\n"
        "Output:\n"
        "```\n"
        "activity|checks\n"
        "```\n";
    auto r = parse(raw, Task::MD, schema("pet"));
    CHECK(r.items.size() == 1);
    CHECK(r.error_count == 0);
    CHECK(accounted(r) == r.total_line_count);
}

TEST_CASE("response without any pipe counts every non-prose line as an error") {
    auto raw = read_file(fixture("parse/no_pipes.txt"));
    auto r = parse(raw, Task::MD, schema("pet"));
    std::size_t non_blank = 0;
    for (const auto& line : text::split_lines(raw)) non_blank += text::trim(line).empty() ? 0 : 1;
    CHECK(r.items.empty());
    CHECK(r.error_count == non_blank);
}

TEST_CASE("empty response") {
    auto r = parse("", Task::MD, schema("pet"));
    CHECK(r.items.empty());
    CHECK(r.error_count == 0);
    CHECK(accounted(r) == r.total_line_count);
}

TEST_CASE("fuzz: arbitrary bytes never throw and lines are accounted") {
    std::mt19937_64 rng(1234);
    auto pet = schema("pet");
    auto decon = schema("decon");
    const std::string alphabet = "ab |\n\r\t-:*#`entityflowactornot\xc3\xa9\x00";
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        auto len = rng() % 120;
        for (std::size_t k = 0; k < len; ++k) {
            s.push_back(rng() % 3 == 0 ? static_cast<char>(rng() % 256) : alphabet[rng() % alphabet.size()]);
        }
        for (auto task : {Task::MD, Task::ER, Task::RE, Task::CE}) {
            const auto& sch = task == Task::CE ? decon : pet;
            ParseReport r;
            CHECK_NOTHROW(r = parse(s, task, sch));
            CHECK(accounted(r) == r.total_line_count);
            CHECK(r.error_count == r.error_lines.size());
        }
    }
}

TEST_CASE("grounding") {
    auto d = words_document("g", "A claims officer checks the claim . Then the claim is filed");
    SpanSet used;
    auto a = ground({"Actor", "a claims officer"}, d, used);
    REQUIRE(a);
    CHECK(a->token_indices == std::vector<int>{0, 1, 2});

    auto first = ground({"Activity Data", "the claim"}, d, used);
    auto second = ground({"Activity Data", "The Claim"}, d, used);
    REQUIRE(first);
    REQUIRE(second);
    CHECK(first->token_indices == std::vector<int>{4, 5});
    CHECK(second->token_indices == std::vector<int>{8, 9});
    CHECK_FALSE(ground({"Activity Data", "the claim"}, d, used));
    CHECK_FALSE(ground({"Activity", "approves the claim"}, d, used));

    SpanSet fresh;
    auto punct = ground({"Activity Data", "\"the claim.\""}, d, fresh);
    REQUIRE(punct);
    CHECK(punct->token_indices == std::vector<int>{4, 5});
}

TEST_CASE("grounding never overlaps a used span") {
    auto d = words_document("o", "x y x y x");
    SpanSet used;
    // Tokens: 0 x, 1 y, 2 x, 3 y, 4 x.
    used.add({0, 1});
    auto g = ground({"t", "x y"}, d, used);
    REQUIRE(g);
    CHECK(g->token_indices == std::vector<int>{2, 3});
    CHECK_FALSE(ground({"t", "y x"}, d, used));
}

TEST_CASE("ground_report partitions") {
    auto d = words_document("p", "the clerk checks");
    CHECK(ground_report(ParseReport{}, d) == GroundingResult{});
    auto r = parse("actor|the clerk\nactivity|approves", Task::MD, schema("pet"));
    auto g = ground_report(r, d);
    CHECK(g.mentions.size() == 1);
    CHECK(g.ungrounded.size() == 1);
}

TEST_CASE("relation endpoints ground with a fresh used set") {
    auto d = words_document("r", "the clerk checks and signs");
    auto r = parse("actor performer|checks|the clerk\nactor performer|signs|the clerk\nflow|checks|approves",
                   Task::RE, schema("pet"));
    auto rels = ground_relations(r, d);
    REQUIRE(rels.size() == 3);
    CHECK(rels[0].fully_grounded());
    CHECK(rels[1].target_span == rels[0].target_span);
    CHECK_FALSE(rels[2].fully_grounded());
}

TEST_CASE("gold round trip on shipped documents") {
    for (const auto& name : {"pet", "decon", "atdp"}) {
        auto ds = shipped(name);
        for (const auto& d : ds.documents) {
            auto lines = render_gold(d, Task::MD, ds.schema);
            auto r = parse(text::join(lines, "\n"), Task::MD, ds.schema);
            CHECK(r.error_count == 0);
            auto g = ground_report(r, d);
            CHECK(g.ungrounded.empty());
            REQUIRE(g.mentions.size() == d.mentions.size());
            for (std::size_t i = 0; i < d.mentions.size(); ++i) {
                bool found = false;
                for (const auto& m : d.mentions) {
                    found = found || (m.token_indices == g.mentions[i].token_indices &&
                                      text::type_key(m.mention_type) == text::type_key(g.mentions[i].mention_type));
                }
                CHECK(found);
            }
        }
    }
}
