#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "procx/corpus.hpp"

namespace procx {

// Prompt building blocks, listed in render order:
//   block A (context):      Persona, ContextManager
//   block B (task):         MetaLanguage, ChainOfThought, FactList, Reflection
//   block C (restrictions): AdditionalConsiderations, Disambiguation, FormatSpec, FormatExample, FewShot
enum class PromptComponentKind {
    Persona,
    ContextManager,
    MetaLanguage,
    ChainOfThought,
    FactList,
    Reflection,
    AdditionalConsiderations,
    Disambiguation,
    FormatSpec,
    FormatExample,
    FewShot,
};

inline constexpr std::array<PromptComponentKind, 11> kComponentOrder = {
    PromptComponentKind::Persona,        PromptComponentKind::ContextManager,
    PromptComponentKind::MetaLanguage,   PromptComponentKind::ChainOfThought,
    PromptComponentKind::FactList,       PromptComponentKind::Reflection,
    PromptComponentKind::AdditionalConsiderations, PromptComponentKind::Disambiguation,
    PromptComponentKind::FormatSpec,     PromptComponentKind::FormatExample,
    PromptComponentKind::FewShot,
};

std::string_view to_string(PromptComponentKind kind);
PromptComponentKind component_from_string(std::string_view name);

enum class Brevity { full, very_short };

struct PromptConfig {
    Task task = Task::MD;
    SchemaDescriptor schema;
    std::set<PromptComponentKind> enabled;
    int shot_count = 0;
    std::uint64_t shot_seed = 0;
    Brevity brevity = Brevity::full;

    bool operator==(const PromptConfig&) const = default;

    static PromptConfig with_all_components(Task task, SchemaDescriptor schema);
    bool has(PromptComponentKind kind) const { return enabled.count(kind) != 0; }
    // Empty iff FormatSpec is enabled, shot_count >= 0, and shots imply FewShot.
    std::vector<std::string> validate() const;
};

struct FewShotExample {
    std::string source_document_id;
    std::string input_text;
    std::vector<std::string> expected_output_lines;

    bool operator==(const FewShotExample&) const = default;
};

struct TextSpan {
    std::size_t offset = 0;
    std::size_t length = 0;

    bool operator==(const TextSpan&) const = default;
};

struct RenderedPrompt {
    std::string text;
    std::map<PromptComponentKind, TextSpan> component_spans;
    std::string config_fingerprint;
    std::vector<std::string> shot_ids;

    bool operator==(const RenderedPrompt&) const = default;
};

// Named sections, one per component kind, optionally specialised per task:
//
//   [Persona]
//   You are ...
//   [FormatSpec:RE]
//   ...
//
// A task-specific section wins over the generic one. Lines starting with ';' are comments.
// Placeholders: {dataset} {task_name} {type_list} {type_definitions}
// {disambiguation_hints} {output_format} {examples}
class PromptTemplate {
public:
    static PromptTemplate parse(std::string_view text);
    static PromptTemplate load(const std::filesystem::path& path);

    // Throws UsageError when neither the task-specific nor the generic section exists.
    const std::string& section(PromptComponentKind kind, Task task) const;
    bool has_section(PromptComponentKind kind, Task task) const;
    const std::string& source() const { return source_; }

private:
    std::map<std::string, std::string> sections_;
    std::string source_;
};

struct PromptExtras {
    // Appended after the target input (used by chained agent prompts).
    std::vector<std::string> prior_output_lines;
    // When non-empty, shots are the first shot_count of these documents other than the
    // target, in this order, instead of a seeded draw.
    std::vector<std::string> fixed_shot_ids;
};

// Renders enabled components in fixed order, then "Task: <task>" and "Input: <raw text>".
// Shots are drawn from `shot_pool` excluding `target`; throws UsageError when the pool is
// too small and std::invalid_argument when the config does not validate.
RenderedPrompt assemble(const PromptConfig& config, const PromptTemplate& tmpl, const Document& target,
                        std::span<const Document> shot_pool, const PromptExtras& extras = {});

// Seeded draw of n documents without replacement, skipping `exclude`.
std::vector<FewShotExample> select_shots(std::span<const Document> pool, int n, std::string_view exclude,
                                         std::uint64_t seed, Task task, const SchemaDescriptor& schema);

// Gold annotations of `task` as output-grammar lines, restricted to types in `schema`.
std::vector<std::string> render_gold(const Document& doc, Task task, const SchemaDescriptor& schema);

// Gold clusters used for entity resolution: explicit entities plus singleton mentions of
// entity-resolution types, ordered by first token. Each cluster lists mentions in text order.
std::vector<std::vector<const Mention*>> gold_clusters(const Document& doc, const SchemaDescriptor& schema);

struct AblationVariant {
    std::string label;
    PromptConfig config;
    // Component the variant drops; unset for the baseline and the brevity variant.
    std::optional<PromptComponentKind> removed;
};

// Baseline followed by nine single-change variants, in fixed report order.
std::vector<AblationVariant> ablation_variants(const PromptConfig& base);

// Components whose text depends on Brevity.
inline constexpr std::array<PromptComponentKind, 2> kBrevitySensitive = {
    PromptComponentKind::MetaLanguage, PromptComponentKind::Disambiguation};

// Mixes a run seed with a document id for per-document shot sampling.
std::uint64_t document_seed(std::uint64_t seed, std::string_view document_id);

} // namespace procx
