#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "procx/corpus.hpp"

namespace procx {

// Output grammar, one record per line, fields separated by '|':
//   MD  type|surface
//   ER  entity|surface|surface...
//   RE  type|source surface|target surface
//   CE  type|not-or-empty|action            (unary types)
//       type|not-or-empty|action|action     (binary types)
inline constexpr char kFieldSeparator = '|';
inline constexpr std::string_view kEntityTag = "entity";

struct ParsedMention {
    std::string type;
    std::string surface;

    bool operator==(const ParsedMention&) const = default;
};

struct ParsedCluster {
    std::vector<std::string> surfaces;

    bool operator==(const ParsedCluster&) const = default;
};

struct ParsedRelation {
    std::string type;
    std::string source_surface;
    std::string target_surface;

    bool operator==(const ParsedRelation&) const = default;
};

struct ParsedConstraint {
    std::string type;
    bool negated = false;
    std::vector<std::string> actions;

    bool operator==(const ParsedConstraint&) const = default;
};

using ParsedItem = std::variant<ParsedMention, ParsedCluster, ParsedRelation, ParsedConstraint>;

enum class ParseFailure { bad_field_count, unknown_type, empty_field, bad_negation_flag };
std::string_view to_string(ParseFailure reason);

struct ErrorLine {
    std::size_t line_number = 0; // 1-based
    std::string raw;
    ParseFailure reason = ParseFailure::bad_field_count;

    bool operator==(const ErrorLine&) const = default;
};

struct ParseReport {
    std::vector<ParsedItem> items;
    std::size_t error_count = 0;
    std::vector<ErrorLine> error_lines;
    std::size_t ignored_line_count = 0;
    std::size_t total_line_count = 0;

    bool operator==(const ParseReport&) const = default;
};

// Never throws. Blank lines, code fences and prose (the model's fact list and reflection,
// plus any preamble before the first record when at least one record conforms) are
// counted as ignored; every other non-conforming line is an error.
ParseReport parse(std::string_view raw, Task task, const SchemaDescriptor& schema);

// Checks a single line against the grammar; returns the item or the failure reason.
std::variant<ParsedItem, ParseFailure> parse_line(std::string_view line, Task task, const SchemaDescriptor& schema);

// Token ranges already claimed by earlier groundings. Spans are sets of token indices.
class SpanSet {
public:
    bool overlaps(const std::vector<int>& span) const;
    void add(const std::vector<int>& span);
    bool empty() const { return spans_.empty(); }
    const std::vector<std::vector<int>>& spans() const { return spans_; }

private:
    std::vector<std::vector<int>> spans_;
};

struct GroundedMention {
    std::string mention_type;
    std::vector<int> token_indices;
    std::string matched_surface;

    bool operator==(const GroundedMention&) const = default;
};

// First window (by start token, then length) whose normalized text equals the normalized
// surface and which does not overlap `used`. Windows that start or end on a
// punctuation-only token are never candidates. On success the span is added to `used`.
std::optional<GroundedMention> ground(const ParsedMention& parsed, const Document& doc, SpanSet& used);

struct GroundingResult {
    std::vector<GroundedMention> mentions;
    std::vector<ParsedMention> ungrounded;

    bool operator==(const GroundingResult&) const = default;
};

// Grounds the report's mentions in order with one shared `used` set.
GroundingResult ground_report(const ParseReport& report, const Document& doc);

struct GroundedRelation {
    std::string type;
    std::string source_surface;
    std::string target_surface;
    std::optional<std::vector<int>> source_span;
    std::optional<std::vector<int>> target_span;

    bool operator==(const GroundedRelation&) const = default;
    bool fully_grounded() const { return source_span && target_span; }
};

// Each relation's endpoints are grounded independently with a fresh `used` set.
std::vector<GroundedRelation> ground_relations(const ParseReport& report, const Document& doc);

struct PredictedCluster {
    std::vector<GroundedMention> grounded;
    std::vector<std::string> ungrounded;

    bool operator==(const PredictedCluster&) const = default;
};

// Clusters are grounded in order sharing one `used` set, so clusters stay disjoint.
std::vector<PredictedCluster> ground_clusters(const ParseReport& report, const Document& doc);

std::vector<ParsedConstraint> constraints_of(const ParseReport& report);

} // namespace procx
