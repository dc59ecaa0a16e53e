#include <doctest.h>

#include <algorithm>

#include "procx/error.hpp"
#include "procx/prompt.hpp"
#include "support.hpp"

using namespace procx;
using namespace procx::testing;

namespace {

PromptTemplate default_template() { return PromptTemplate::load(data_dir() / "templates" / "default.prompt"); }

std::string span_text(const RenderedPrompt& p, PromptComponentKind k) {
    const auto& s = p.component_spans.at(k);
    return p.text.substr(s.offset, s.length);
}

} // namespace

TEST_CASE("all components, zero shots: ten spans, no FewShot") {
    auto pet = shipped("pet");
    auto config = PromptConfig::with_all_components(Task::MD, pet.schema);
    auto p = assemble(config, default_template(), pet.documents[0], pet.documents);
    CHECK(p.component_spans.size() == 10);
    CHECK(p.component_spans.count(PromptComponentKind::FewShot) == 0);
    CHECK(p.shot_ids.empty());
}

TEST_CASE("format spec only") {
    auto pet = shipped("pet");
    auto config = PromptConfig::with_all_components(Task::RE, pet.schema);
    config.enabled = {PromptComponentKind::FormatSpec};
    const auto& doc = pet.documents[1];
    auto p = assemble(config, default_template(), doc, pet.documents);
    REQUIRE(p.component_spans.size() == 1);
    const auto spec = span_text(p, PromptComponentKind::FormatSpec);
    CHECK(p.text == spec + "Task: RE\nInput: " + doc.raw_text + "\n");
    CHECK(spec.find("<relation type>|<source mention text>|<target mention text>") != std::string::npos);
}

TEST_CASE("spans tile the component block in render order") {
    auto pet = shipped("pet");
    auto config = PromptConfig::with_all_components(Task::MD, pet.schema);
    config.shot_count = 2;
    auto p = assemble(config, default_template(), pet.documents[2], pet.documents);
    std::size_t offset = 0;
    for (auto kind : kComponentOrder) {
        REQUIRE(p.component_spans.count(kind) == 1);
        CHECK(p.component_spans.at(kind).offset == offset);
        offset += p.component_spans.at(kind).length;
    }
    CHECK(p.text.substr(offset).rfind("Task: MD\nInput: ", 0) == 0);
}

TEST_CASE("rendering is deterministic") {
    auto pet = shipped("pet");
    auto config = PromptConfig::with_all_components(Task::ER, pet.schema);
    config.shot_count = 3;
    config.shot_seed = 11;
    auto a = assemble(config, default_template(), pet.documents[4], pet.documents);
    auto b = assemble(config, default_template(), pet.documents[4], pet.documents);
    CHECK(a.text == b.text);
    CHECK(a.config_fingerprint == b.config_fingerprint);
    config.shot_seed = 12;
    auto c = assemble(config, default_template(), pet.documents[4], pet.documents);
    CHECK(c.config_fingerprint != a.config_fingerprint);
}

TEST_CASE("placeholders are filled from the schema") {
    auto pet = shipped("pet");
    auto config = PromptConfig::with_all_components(Task::MD, pet.schema);
    auto p = assemble(config, default_template(), pet.documents[0], pet.documents);
    auto meta = span_text(p, PromptComponentKind::MetaLanguage);
    CHECK(meta.find("activity, actor, activity data, xor gateway") != std::string::npos);
    CHECK(meta.find("- actor: A person") != std::string::npos);
    CHECK(p.text.find('{') == std::string::npos);
    CHECK(span_text(p, PromptComponentKind::ContextManager).find("PET") != std::string::npos);
}

TEST_CASE("very short brevity keeps only first sentences of definitions") {
    auto pet = shipped("pet");
    auto config = PromptConfig::with_all_components(Task::MD, pet.schema);
    auto full = assemble(config, default_template(), pet.documents[0], pet.documents);
    config.brevity = Brevity::very_short;
    auto brief = assemble(config, default_template(), pet.documents[0], pet.documents);
    CHECK(brief.text.size() < full.text.size());
    CHECK(span_text(full, PromptComponentKind::Persona) == span_text(brief, PromptComponentKind::Persona));
}

TEST_CASE("invalid configs") {
    auto pet = shipped("pet");
    auto config = PromptConfig::with_all_components(Task::MD, pet.schema);
    config.enabled.erase(PromptComponentKind::FormatSpec);
    CHECK_FALSE(config.validate().empty());
    CHECK_THROWS_AS(assemble(config, default_template(), pet.documents[0], pet.documents), std::invalid_argument);

    config = PromptConfig::with_all_components(Task::MD, pet.schema);
    config.enabled.erase(PromptComponentKind::FewShot);
    config.shot_count = 1;
    CHECK_THROWS_AS(assemble(config, default_template(), pet.documents[0], pet.documents), std::invalid_argument);

    config = PromptConfig::with_all_components(Task::MD, pet.schema);
    config.shot_count = 3;
    std::vector<Document> tiny(pet.documents.begin(), pet.documents.begin() + 3);
    CHECK_THROWS_AS(assemble(config, default_template(), tiny[0], tiny), UsageError);
}

TEST_CASE("template sections") {
    auto t = PromptTemplate::parse("; comment\n[Persona]\nYou are generic.\n\n[Persona:RE]\nYou are for RE.\n[FormatSpec]\n{output_format}\n");
    CHECK(t.section(PromptComponentKind::Persona, Task::MD) == "You are generic.");
    CHECK(t.section(PromptComponentKind::Persona, Task::RE) == "You are for RE.");
    CHECK_FALSE(t.has_section(PromptComponentKind::Reflection, Task::MD));
    CHECK_THROWS_AS(t.section(PromptComponentKind::Reflection, Task::MD), UsageError);
    CHECK_THROWS_AS(PromptTemplate::load("/nonexistent/x.prompt"), LoadError);
}

TEST_CASE("component names") {
    for (auto k : kComponentOrder) CHECK(component_from_string(to_string(k)) == k);
    CHECK(component_from_string("persona") == PromptComponentKind::Persona);
    CHECK_THROWS_AS(component_from_string("Nope"), UsageError);
}

TEST_CASE("shot selection") {
    auto pet = shipped("pet");
    CHECK(select_shots(pet.documents, 0, "doc-3.3", 7, Task::MD, pet.schema).empty());

    auto first = select_shots(pet.documents, 3, "doc-3.3", 7, Task::MD, pet.schema);
    auto again = select_shots(pet.documents, 3, "doc-3.3", 7, Task::MD, pet.schema);
    REQUIRE(first.size() == 3);
    CHECK(first == again);
    for (const auto& s : first) CHECK(s.source_document_id != "doc-3.3");

    auto all = select_shots(pet.documents, 45, "not-in-pool", 3, Task::MD, pet.schema);
    std::vector<std::string> ids, expected;
    for (const auto& s : all) ids.push_back(s.source_document_id);
    for (const auto& d : pet.documents) expected.push_back(d.id);
    std::sort(ids.begin(), ids.end());
    std::sort(expected.begin(), expected.end());
    CHECK(ids == expected);

    CHECK_THROWS_AS(select_shots(pet.documents, 45, "doc-3.3", 3, Task::MD, pet.schema), UsageError);
    CHECK(first[0].expected_output_lines == render_gold(*pet.find(first[0].source_document_id), Task::MD, pet.schema));
}

TEST_CASE("fixed shot ids skip the target and keep order") {
    auto pet = shipped("pet");
    auto config = PromptConfig::with_all_components(Task::MD, pet.schema);
    config.shot_count = 2;
    PromptExtras extras;
    extras.fixed_shot_ids = {"doc-1.1", "doc-1.2", "doc-1.3"};
    auto p = assemble(config, default_template(), *pet.find("doc-1.1"), pet.documents, extras);
    CHECK(p.shot_ids == std::vector<std::string>{"doc-1.2", "doc-1.3"});
    auto q = assemble(config, default_template(), *pet.find("doc-2.1"), pet.documents, extras);
    CHECK(q.shot_ids == std::vector<std::string>{"doc-1.1", "doc-1.2"});
}

TEST_CASE("prior output lines follow the input") {
    auto pet = shipped("pet");
    auto config = PromptConfig::with_all_components(Task::MD, pet.schema);
    PromptExtras extras;
    extras.prior_output_lines = {"activity|checks"};
    auto p = assemble(config, default_template(), pet.documents[0], pet.documents, extras);
    auto tail = "Input: " + pet.documents[0].raw_text + "\n\nPreviously extracted:\nactivity|checks\n";
    CHECK(p.text.size() > tail.size());
    CHECK(p.text.substr(p.text.size() - tail.size()) == tail);
}

TEST_CASE("gold rendering") {
    auto d = words_document("g", "register the claim and examine the claim");
    auto a = add_mention(d, "Activity", {0, 1, 2});
    auto b = add_mention(d, "Activity", {4, 5, 6});
    d.relations.push_back({"r0", "Flow", a, b});
    auto pet = schema("pet");
    CHECK(render_gold(d, Task::RE, pet) == std::vector<std::string>{"flow|register the claim|examine the claim"});
    CHECK(render_gold(d, Task::MD, pet) ==
          std::vector<std::string>{"activity|register the claim", "activity|examine the claim"});
    CHECK(render_gold(words_document("e", "nothing here"), Task::MD, pet).empty());

    Document c;
    c.id = "c";
    c.constraints = {{"c0", "Succession", false, "register claim", std::string("examine claim")},
                     {"c1", "Init", true, "receive claim", std::nullopt}};
    CHECK(render_gold(c, Task::CE, schema("decon")) ==
          std::vector<std::string>{"succession||register claim|examine claim", "init|not|receive claim"});
}

TEST_CASE("entity clusters include singletons of resolution types") {
    auto d = words_document("er", "the clerk files the form and he signs it");
    auto clerk = add_mention(d, "Actor", {0, 1});
    add_mention(d, "Activity", {2});
    auto form = add_mention(d, "Activity Data", {3, 4});
    auto he = add_mention(d, "Actor", {6});
    add_mention(d, "Activity", {7});
    auto it = add_mention(d, "Activity Data", {8});
    d.entities.push_back({"e0", {clerk, he}});
    auto lines = render_gold(d, Task::ER, schema("pet"));
    CHECK(lines == std::vector<std::string>{"entity|the clerk|he", "entity|the form", "entity|it"});
    (void)form;
    (void)it;
}

TEST_CASE("ablation variants") {
    auto pet = schema("pet");
    auto base = PromptConfig::with_all_components(Task::MD, pet);
    auto variants = ablation_variants(base);
    // Row names of the ablation table, in its order.
    const std::vector<std::string> rows = {"Baseline",         "No Format Examples", "No Context Manager",
                                           "No Persona",       "No Meta Language",   "No Chain of Thought",
                                           "No Disambiguation", "No Reflection",     "No Fact Check List",
                                           "Very Short Prompt"};
    REQUIRE(variants.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(variants[i].label == rows[i]);
        CHECK((variants[i].config.brevity == Brevity::very_short) == (rows[i] == "Very Short Prompt"));
        if (variants[i].removed) {
            auto expected = base;
            expected.enabled.erase(*variants[i].removed);
            CHECK(variants[i].config == expected);
        }
    }
    CHECK(variants[3].removed == PromptComponentKind::Persona);

    auto partial = base;
    partial.enabled.erase(PromptComponentKind::Persona);
    CHECK_THROWS_AS(ablation_variants(partial), std::invalid_argument);
}

TEST_CASE("ablated prompts differ only inside the removed span") {
    auto pet = shipped("pet");
    auto tmpl = default_template();
    for (auto task : {Task::MD, Task::RE}) {
        auto base = PromptConfig::with_all_components(task, pet.schema);
        const auto& doc = pet.documents[5];
        auto b = assemble(base, tmpl, doc, pet.documents);
        for (const auto& v : ablation_variants(base)) {
            auto p = assemble(v.config, tmpl, doc, pet.documents);
            if (!v.removed) {
                for (auto kind : kComponentOrder) {
                    if (!b.component_spans.count(kind)) continue;
                    bool sensitive = std::find(kBrevitySensitive.begin(), kBrevitySensitive.end(), kind) !=
                                     kBrevitySensitive.end();
                    if (v.config.brevity == Brevity::full || !sensitive) {
                        CHECK(span_text(b, kind) == span_text(p, kind));
                    }
                }
                continue;
            }
            const auto& cut = b.component_spans.at(*v.removed);
            auto expected = b.text;
            expected.erase(cut.offset, cut.length);
            CHECK(p.text == expected);
        }
    }
}

TEST_CASE("document seeds differ per document") {
    CHECK(document_seed(1, "a") == document_seed(1, "a"));
    CHECK(document_seed(1, "a") != document_seed(1, "b"));
    CHECK(document_seed(1, "a") != document_seed(2, "a"));
}
