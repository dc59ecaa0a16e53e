#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace procx {

enum class Task { MD, ER, RE, CE };

std::string_view to_string(Task task);
// Accepts "MD", "md", ...; throws UsageError on anything else.
Task task_from_string(std::string_view name);
// Human-readable task name used in prompts ("mention detection", ...).
std::string_view task_long_name(Task task);

struct Token {
    std::string text;
    int index = 0;
    int sentence_index = 0;

    bool operator==(const Token&) const = default;
};

struct Mention {
    std::string id;
    std::string mention_type;
    std::vector<int> token_indices;

    bool operator==(const Mention&) const = default;
};

// A cluster of mentions denoting one process entity.
struct Entity {
    std::string id;
    std::vector<std::string> mention_ids;

    bool operator==(const Entity&) const = default;
};

// Directed: (type, source, target) and (type, target, source) are different relations.
struct Relation {
    std::string id;
    std::string relation_type;
    std::string source_mention_id;
    std::string target_mention_id;

    bool operator==(const Relation&) const = default;
};

// Declarative constraint over one or two normalized action phrases.
struct Constraint {
    std::string id;
    std::string constraint_type;
    bool negated = false;
    std::string first_action;
    std::optional<std::string> second_action;

    bool operator==(const Constraint&) const = default;
};

struct Document {
    std::string id;
    std::string raw_text;
    std::vector<Token> tokens;
    std::vector<Mention> mentions;
    std::vector<Entity> entities;
    std::vector<Relation> relations;
    std::vector<Constraint> constraints;

    bool operator==(const Document&) const = default;

    const Mention* find_mention(std::string_view mention_id) const;
    // Tokens of the mention joined by single spaces.
    std::string surface(const Mention& m) const;
    std::string span_text(const std::vector<int>& token_indices) const;
};

enum class SpanMode { exact_span, text_match };
enum class ConstraintNormalization { verbatim, lemma_like };

// How predictions are compared with gold annotations.
struct MatchPolicy {
    SpanMode span_mode = SpanMode::exact_span;
    bool type_sensitive = true;
    ConstraintNormalization constraint_normalization = ConstraintNormalization::lemma_like;

    bool operator==(const MatchPolicy&) const = default;
};

// Which dataset types play which part in model synthesis. Empty string = not present.
struct BpmnRoles {
    std::string activity;
    std::string actor;
    std::string data;
    std::string xor_gateway;
    std::string and_gateway;
    std::string condition;
    std::string flow;
    std::string uses;
    std::string performer;
    std::string same_gateway;

    bool operator==(const BpmnRoles&) const = default;
};

struct SchemaDescriptor {
    std::string dataset_name;
    std::vector<std::string> mention_types;
    std::vector<std::string> relation_types;
    std::vector<std::string> constraint_types;
    std::vector<std::string> unary_constraint_types;
    // Mention types that take part in entity resolution; empty means all.
    std::vector<std::string> entity_mention_types;
    std::vector<Task> tasks;
    std::map<std::string, std::string> definitions;
    std::map<std::string, std::vector<std::string>> hints;
    MatchPolicy policy;
    BpmnRoles roles;

    bool operator==(const SchemaDescriptor&) const = default;

    // Canonical spelling of `name` from the given inventory, matched by text::type_key.
    static std::optional<std::string> lookup(const std::vector<std::string>& inventory,
                                             std::string_view name);
    std::optional<std::string> mention_type(std::string_view name) const;
    std::optional<std::string> relation_type(std::string_view name) const;
    std::optional<std::string> constraint_type(std::string_view name) const;
    bool is_unary(std::string_view constraint_type) const;
    bool in_entity_resolution(std::string_view mention_type) const;
    bool supports(Task task) const;

    // Copy keeping only the listed mention types (used by single-type agent prompts).
    SchemaDescriptor restricted_to(const std::vector<std::string>& mention_types) const;

    // Empty iff inventories are unique and every type has a non-empty definition.
    std::vector<std::string> validate() const;
};

struct Dataset {
    SchemaDescriptor schema;
    std::vector<Document> documents;

    bool operator==(const Dataset&) const = default;

    const Document* find(std::string_view document_id) const;
};

SchemaDescriptor schema_from_json(const nlohmann::json& j);
nlohmann::json schema_to_json(const SchemaDescriptor& schema);
SchemaDescriptor load_schema(const std::filesystem::path& path);

nlohmann::json document_to_json(const Document& doc);
// Throws LoadError on missing/mistyped keys.
Document document_from_json(const nlohmann::json& j);

// BIO helpers. Tags look like "B-Actor", "I-Actor", "O".
struct BioSpan {
    std::string type;
    std::vector<int> token_indices;

    bool operator==(const BioSpan&) const = default;
};
// Throws std::invalid_argument on an I- tag that does not continue a span of the same type.
std::vector<BioSpan> decode_bio(const std::vector<std::string>& tags);
std::vector<std::string> encode_bio(std::size_t token_count, const std::vector<BioSpan>& spans);

// Reads the PET export layout: one JSON object per line with "document name", "tokens",
// "tokens-IDs", "ner_tags", "sentence-IDs", columnar "relations" keyed by head tokens and
// optional "entities" (lists of {"sentence-ID","word-ID"} mention heads).
Dataset load_pet(const std::filesystem::path& path, const SchemaDescriptor& schema);

// Reads canonical lines; constraint types are checked against `schema`.
Dataset load_constraint_dataset(const std::filesystem::path& path, const SchemaDescriptor& schema);

// Structural checks only (references, spans, token indices, constraint phrase form).
std::vector<std::string> validate(const Document& doc);
// Structural checks plus type inventories and constraint arity.
std::vector<std::string> validate(const Document& doc, const SchemaDescriptor& schema);

// Canonical interchange: an optional header line {"format_version":1,"schema":{...}}
// followed by one document object per line.
void save_canonical(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_canonical(const std::filesystem::path& path);

// Lower-case, whitespace-normalized action phrase as stored in constraints.
std::string normalize_action(std::string_view phrase);

} // namespace procx
