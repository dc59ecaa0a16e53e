#include <doctest.h>

#include "procx/error.hpp"
#include "procx/pipeline.hpp"
#include "support.hpp"

using namespace procx;
using namespace procx::testing;
namespace fs = std::filesystem;

namespace {

PromptTemplate default_template() { return PromptTemplate::load(data_dir() / "templates" / "default.prompt"); }

std::unique_ptr<LlmClient> stub_client(std::vector<StubRule> rules) {
    return std::make_unique<LlmClient>(std::shared_ptr<Provider>(stub_provider(std::move(rules))), std::nullopt,
                                       CacheMode::record);
}

class FailingProvider : public Provider {
public:
    ChatResponse complete(const ChatRequest&) override {
        throw LlmError(LlmError::Kind::provider, "provider request failed: 503");
    }
    std::string name() const override { return "failing"; }
};

RunSettings quiet_settings() {
    RunSettings s;
    s.concurrency = 4;
    return s;
}

} // namespace

TEST_CASE("gold echo gives gold predictions") {
    auto pet = shipped("pet");
    auto client = stub_client(gold_echo_rules(pet, {Task::MD, Task::ER, Task::RE}));
    const auto& doc = *pet.find("doc-3.3");
    for (auto task : {Task::MD, Task::ER, Task::RE}) {
        auto config = PromptConfig::with_all_components(task, pet.schema);
        auto x = extract_document(doc, config, default_template(), pet.documents, *client, LlmSettings{});
        CHECK(x.report.error_count == 0);
        auto c = count_predictions(x.predictions, doc, pet.schema);
        CHECK(c.correct == c.gold);
        CHECK(c.predicted == c.gold);
        CHECK(scores_from_counts(c).f1 == 1.0);
    }
}

TEST_CASE("empty response gives empty predictions and no errors") {
    auto pet = shipped("pet");
    auto client = stub_client({});
    auto config = PromptConfig::with_all_components(Task::RE, pet.schema);
    auto x = extract_document(pet.documents[0], config, default_template(), pet.documents, *client, LlmSettings{});
    CHECK(x.predictions.relations.empty());
    CHECK(x.report.error_count == 0);
    CHECK(x.report.total_line_count == x.report.ignored_line_count);
}

TEST_CASE("predictions JSON round trip") {
    auto pet = shipped("pet");
    auto client = stub_client(gold_echo_rules(pet, {Task::MD, Task::ER, Task::RE}));
    for (auto task : {Task::MD, Task::ER, Task::RE}) {
        auto config = PromptConfig::with_all_components(task, pet.schema);
        auto x = extract_document(pet.documents[7], config, default_template(), pet.documents, *client, LlmSettings{});
        CHECK(predictions_from_json(predictions_to_json(x.predictions)) == x.predictions);
    }
}

TEST_CASE("grid over every dataset with the gold echo scores 1") {
    for (const auto& name : {"pet", "decon", "atdp"}) {
        auto ds = shipped(name);
        auto client = stub_client(gold_echo_rules(ds, ds.schema.tasks));
        auto grid = run_grid(ds, ds.schema.tasks, {0, 1, 3}, default_template(), *client, quiet_settings());
        REQUIRE(grid.cells.size() == ds.schema.tasks.size() * 3);
        for (const auto& cell : grid.cells) {
            REQUIRE(cell.scores);
            CHECK(cell.scores->f1 == 1.0);
            CHECK(cell.parse_errors == 0);
        }
    }
}

TEST_CASE("grid with fixed shots uses one shot set for all documents") {
    auto pet = shipped("pet");
    auto client = stub_client(gold_echo_rules(pet, {Task::MD}));
    auto settings = quiet_settings();
    settings.fixed_shots = true;
    settings.seed = 3;
    auto grid = run_grid(pet, {Task::MD}, {2}, default_template(), *client, settings);
    std::set<std::string> shot_ids;
    for (const auto& r : grid.records) {
        CHECK(r.extraction.prompt.shot_ids.size() == 2);
        for (const auto& id : r.extraction.prompt.shot_ids) {
            CHECK(id != r.document_id);
            shot_ids.insert(id);
        }
    }
    CHECK(shot_ids.size() <= 3);
}

TEST_CASE("empty dataset gives an empty table") {
    Dataset empty;
    empty.schema = schema("pet");
    auto client = stub_client({});
    auto grid = run_grid(empty, {Task::MD}, {0, 1}, default_template(), *client, quiet_settings());
    CHECK(grid.records.empty());
    for (const auto& c : grid.cells) CHECK_FALSE(c.scores);
    CHECK(format_grid_table(grid, nlohmann::json::object()).find("--") != std::string::npos);
}

TEST_CASE("unsupported task is a usage error") {
    auto decon = shipped("decon");
    auto client = stub_client({});
    CHECK_THROWS_AS(run_grid(decon, {Task::RE}, {0}, default_template(), *client, quiet_settings()), UsageError);
}

TEST_CASE("provider failures mark the cell") {
    auto pet = shipped("pet");
    LlmClient client(std::make_shared<FailingProvider>(), std::nullopt, CacheMode::record);
    auto grid = run_grid(pet, {Task::MD}, {0}, default_template(), client, quiet_settings());
    REQUIRE(grid.cells.size() == 1);
    CHECK_FALSE(grid.cells[0].scores);
    CHECK(grid.cells[0].provider_failure);
    CHECK(grid.cells[0].error.find("503") != std::string::npos);
}

TEST_CASE("run directory contents and stable manifest id") {
    TempDir tmp("runs");
    auto pet = shipped("pet");
    Dataset small{pet.schema, {pet.documents.begin(), pet.documents.begin() + 4}};
    auto client = stub_client(gold_echo_rules(small, {Task::MD}));
    auto settings = quiet_settings();
    settings.runs_dir = tmp.path();
    auto a = run_grid(small, {Task::MD}, {0, 1}, default_template(), *client, settings);
    REQUIRE(a.run_dir);
    for (const auto& f : {"predictions.jsonl", "scores.json", "table.txt", "manifest.json"}) {
        CHECK_MESSAGE(fs::exists(*a.run_dir / f), f);
    }
    CHECK(fs::is_directory(*a.run_dir / "prompts"));
    CHECK(fs::is_directory(*a.run_dir / "responses"));
    auto manifest = nlohmann::json::parse(read_file(*a.run_dir / "manifest.json"));
    CHECK(manifest["kind"] == "grid");
    CHECK(manifest["toolkit_version"] == toolkit_version());
    CHECK(manifest.contains("prompt_fingerprints"));
    auto b = run_grid(small, {Task::MD}, {0, 1}, default_template(), *client, settings);
    CHECK(a.manifest_id == b.manifest_id);
    CHECK(read_file(*a.run_dir / "table.txt") == format_grid_table(a, settings.reference_scores));
}

TEST_CASE("ablation with the gold echo") {
    auto pet = shipped("pet");
    auto client = stub_client(gold_echo_rules(pet, {Task::MD, Task::RE}));
    auto report = run_ablation(pet, {Task::MD, Task::RE}, default_template(), *client, quiet_settings());
    REQUIRE(report.tasks.size() == 2);
    for (const auto& [task, rows] : report.tasks) {
        REQUIRE(rows.size() == 10);
        CHECK(rows.front().label == "Baseline");
        CHECK(rows.back().label == "Very Short Prompt");
        for (const auto& r : rows) {
            REQUIRE(r.absolute_f1);
            CHECK(*r.absolute_f1 == 1.0);
            CHECK(r.relative_f1 == std::optional<double>(0.0));
            CHECK(r.parsing_errors == 0);
        }
    }
}

TEST_CASE("garbage only without format examples shows up in that row alone") {
    auto pet = shipped("pet");
    Dataset small{pet.schema, {pet.documents.begin(), pet.documents.begin() + 5}};
    // Prompts lacking the MD format example get an unparseable answer.
    std::vector<StubRule> rules = {{"^(?![\\s\\S]*For example, the sentence)", "this is not a record\nnor this", true}};
    for (auto& r : gold_echo_rules(small, {Task::MD})) rules.push_back(r);
    auto client = stub_client(rules);
    auto report = run_ablation(small, {Task::MD}, default_template(), *client, quiet_settings());
    const auto& rows = report.tasks[0].second;
    for (const auto& r : rows) {
        if (r.label == "No Format Examples") {
            CHECK(r.parsing_errors == 10);
            CHECK(*r.relative_f1 == -1.0);
        } else {
            CHECK(r.parsing_errors == 0);
        }
    }
    auto table = format_ablation_table(report, nlohmann::json::parse(read_file(data_dir() / "reference_scores.json")));
    CHECK(table.find("reference:") != std::string::npos);
    CHECK(table.find("No Format Examples") != std::string::npos);
    CHECK(table.find("-1.00") != std::string::npos);
}

TEST_CASE("relative F1 is the difference to the baseline") {
    // Against the published table: 0.37 absolute with a 0.59 baseline reads -0.22.
    auto refs = nlohmann::json::parse(read_file(data_dir() / "reference_scores.json"));
    for (const auto& task : {"MD", "RE"}) {
        const auto& rows = refs["PET"]["ablation"][task];
        const double base = rows[0]["absolute_f1"].get<double>();
        for (std::size_t i = 1; i < rows.size(); ++i) {
            CHECK(std::abs(rows[i]["absolute_f1"].get<double>() - base - rows[i]["relative_f1"].get<double>()) <= 0.011);
        }
    }
}

TEST_CASE("agents hand their output to the next agent") {
    auto d = words_document("a", "the clerk checks the form");
    d.raw_text = "the clerk checks the form";
    auto pet = schema("pet");
    auto config = PromptConfig::with_all_components(Task::MD, pet);
    std::vector<StubRule> rules = {{"relevant: activity.", "activity|checks", false},
                                   {"relevant: actor.", "actor|the clerk", false}};
    auto client = stub_client(rules);
    auto r = run_agents(d, {"Activity", "Actor"}, config, default_template(), {}, *client, LlmSettings{});
    REQUIRE(r.steps.size() == 2);
    CHECK(r.steps[0].prompt.text.find("Previously extracted:") == std::string::npos);
    CHECK(r.steps[1].prompt.text.find("Previously extracted:\nactivity|checks\n") != std::string::npos);
    CHECK(r.predictions.mentions.size() == 2);

    auto silent = stub_client({{"relevant: actor.", "actor|the clerk", false}});
    auto s = run_agents(d, {"Activity", "Actor"}, config, default_template(), {}, *silent, LlmSettings{});
    REQUIRE(s.predictions.mentions.size() == 1);
    CHECK(s.predictions.mentions[0].mention_type == "Actor");
    CHECK(s.steps[1].prompt.text.find("Previously extracted:") == std::string::npos);

    auto single = run_agents(d, {"Actor"}, config, default_template(), {}, *silent, LlmSettings{});
    auto restricted = config;
    restricted.schema = pet.restricted_to({"Actor"});
    auto direct = extract_document(d, restricted, default_template(), {}, *silent, LlmSettings{});
    CHECK(single.predictions == direct.predictions);
    CHECK(single.steps[0].prompt.text == direct.prompt.text);
}

TEST_CASE("predicted annotations replace gold for model generation") {
    auto pet = shipped("pet");
    auto client = stub_client(gold_echo_rules(pet, {Task::MD, Task::RE}));
    const auto& doc = *pet.find("doc-3.3");
    auto md = extract_document(doc, PromptConfig::with_all_components(Task::MD, pet.schema), default_template(),
                               pet.documents, *client, LlmSettings{});
    auto re = extract_document(doc, PromptConfig::with_all_components(Task::RE, pet.schema), default_template(),
                               pet.documents, *client, LlmSettings{});
    auto predicted = document_from_predictions(doc, &md.predictions, &re.predictions);
    CHECK(predicted.mentions.size() == doc.mentions.size());
    CHECK(predicted.relations.size() == doc.relations.size());
    CHECK(predicted.entities.empty());
    CHECK(validate(predicted, pet.schema).empty());
}

TEST_CASE("grid table shows reference rows") {
    auto pet = shipped("pet");
    Dataset small{pet.schema, {pet.documents.begin(), pet.documents.begin() + 3}};
    auto client = stub_client(gold_echo_rules(small, {Task::RE}));
    auto grid = run_grid(small, {Task::RE}, {0, 1}, default_template(), *client, quiet_settings());
    auto refs = nlohmann::json::parse(read_file(data_dir() / "reference_scores.json"));
    auto table = format_grid_table(grid, refs);
    CHECK(table.find("Dataset: PET  Model: gpt-4o") != std::string::npos);
    CHECK(table.find("3-shot (reference)") != std::string::npos);
    CHECK(table.find("0.89") != std::string::npos);
    CHECK(table.find("Zero-shot") != std::string::npos);
    CHECK(table.find("1-shot") != std::string::npos);
    CHECK(table.find("1.00") != std::string::npos);
}
