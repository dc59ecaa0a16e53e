#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "procx/corpus.hpp"
#include "procx/eval.hpp"
#include "procx/llm.hpp"
#include "procx/parser.hpp"
#include "procx/prompt.hpp"

namespace procx {

// Grounded output of one extraction; only the members for `task` are populated.
struct Predictions {
    Task task = Task::MD;
    std::vector<GroundedMention> mentions;
    std::vector<ParsedMention> ungrounded_mentions;
    std::vector<PredictedCluster> clusters;
    std::vector<GroundedRelation> relations;
    std::vector<ParsedConstraint> constraints;

    bool operator==(const Predictions&) const = default;
};

Predictions predictions_from_report(const ParseReport& report, Task task, const Document& doc);
nlohmann::json predictions_to_json(const Predictions& p);
Predictions predictions_from_json(const nlohmann::json& j);
nlohmann::json report_to_json(const ParseReport& r);

ConfusionCounts count_predictions(const Predictions& p, const Document& gold, const SchemaDescriptor& schema);

// Document carrying predicted annotations in place of gold: predicted mentions, plus
// relations whose endpoints coincide with predicted mention spans.
Document document_from_predictions(const Document& base, const Predictions* mentions, const Predictions* relations);

struct LlmSettings {
    std::string model_id = "gpt-4o";
    double temperature = 0.0;
    std::optional<int> max_output_tokens;
};

struct Extraction {
    RenderedPrompt prompt;
    ChatResponse response;
    ParseReport report;
    Predictions predictions;
};

// Assemble, complete, parse, ground. Shots come from `pool` minus `doc`.
Extraction extract_document(const Document& doc, const PromptConfig& config, const PromptTemplate& tmpl,
                            std::span<const Document> pool, LlmClient& client, const LlmSettings& llm,
                            const PromptExtras& extras = {});

struct RunSettings {
    LlmSettings llm;
    std::uint64_t seed = 0;
    bool fixed_shots = false;
    int concurrency = 4;
    // Components of the base prompt; all of them when empty.
    std::set<PromptComponentKind> components;
    // Where runs/<manifest-id>/ is created; nothing is written when unset.
    std::optional<std::filesystem::path> runs_dir;
    // Reference rows printed alongside results, never used in computation:
    //   {"<dataset>": {"<task>": [{"label", "p", "r", "f1"}...],
    //                  "ablation": {"<task>": [{"label", "relative_f1", "absolute_f1", "parsing_errors"}...]}}}
    nlohmann::json reference_scores = nlohmann::json::object();
};

struct DocumentRecord {
    std::string document_id;
    Task task = Task::MD;
    int shot_count = 0;
    std::string variant; // ablation label, empty for grid runs
    Extraction extraction;
    ConfusionCounts counts;
};

struct GridCell {
    Task task = Task::MD;
    int shot_count = 0;
    std::optional<TaskScores> scores; // unset when the cell failed
    std::size_t parse_errors = 0;
    std::string error;
    bool provider_failure = false;
};

struct GridResult {
    std::string dataset_name;
    std::string model_id;
    std::vector<GridCell> cells;
    std::vector<DocumentRecord> records;
    std::string manifest_id;
    std::optional<std::filesystem::path> run_dir;
};

GridResult run_grid(const Dataset& dataset, const std::vector<Task>& tasks, const std::vector<int>& shot_counts,
                    const PromptTemplate& tmpl, LlmClient& client, const RunSettings& settings);

struct AblationRow {
    std::string label;
    std::optional<double> absolute_f1;
    std::optional<double> relative_f1; // absolute difference to the baseline row
    std::size_t parsing_errors = 0;
    std::string error;
    bool provider_failure = false;
};

struct AblationReport {
    std::string dataset_name;
    std::string model_id;
    std::vector<std::pair<Task, std::vector<AblationRow>>> tasks;
    std::vector<DocumentRecord> records;
    std::string manifest_id;
    std::optional<std::filesystem::path> run_dir;
};

// Zero-shot runs of every ablation variant for each task.
AblationReport run_ablation(const Dataset& dataset, const std::vector<Task>& tasks, const PromptTemplate& tmpl,
                            LlmClient& client, const RunSettings& settings);

struct AgentResult {
    Predictions predictions; // union over agents
    std::vector<Extraction> steps;
};

// One single-type MD prompt per entry of `types`, in order; each prompt lists the grounded
// output of the agents before it.
AgentResult run_agents(const Document& doc, const std::vector<std::string>& types, const PromptConfig& config,
                       const PromptTemplate& tmpl, std::span<const Document> pool, LlmClient& client,
                       const LlmSettings& llm);

std::string format_grid_table(const GridResult& grid, const nlohmann::json& reference_scores);
std::string format_ablation_table(const AblationReport& report, const nlohmann::json& reference_scores);
nlohmann::json grid_scores_json(const GridResult& grid);
nlohmann::json ablation_scores_json(const AblationReport& report);

// Lines rendering grounded predictions in the output grammar (used for agent hand-off).
std::vector<std::string> render_predictions(const Predictions& p);

// Stub rules answering every (task, document) prompt with the document's gold output.
std::vector<StubRule> gold_echo_rules(const Dataset& dataset, const std::vector<Task>& tasks);

std::string toolkit_version();

} // namespace procx
