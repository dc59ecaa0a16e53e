#include "procx/parser.hpp"

#include <algorithm>

#include "procx/text.hpp"

namespace procx {

namespace {

enum class LineKind { blank, fence, section_header, output_header, other };

std::string strip_markup(std::string_view line) {
    auto v = text::trim(line);
    while (!v.empty() && (v.front() == '#' || v.front() == '*' || v.front() == '_' || v.front() == ' ')) {
        v.remove_prefix(1);
    }
    while (!v.empty() && (v.back() == '*' || v.back() == '_' || v.back() == ' ')) v.remove_suffix(1);
    return text::to_lower(v);
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

LineKind classify(std::string_view line) {
    auto t = text::trim(line);
    if (t.empty()) return LineKind::blank;
    if (starts_with(t, "```")) return LineKind::fence;
    auto bare = strip_markup(t);
    for (std::string_view h : {"facts:", "fact list:", "fact check list:", "reflection:", "reflections:"}) {
        if (starts_with(bare, h)) return LineKind::section_header;
    }
    for (std::string_view h : {"output:", "result:", "results:"}) {
        if (bare == h) return LineKind::output_header;
    }
    return LineKind::other;
}

std::vector<std::string> fields_of(std::string_view line) {
    std::vector<std::string> out;
    for (auto f : text::split(line, kFieldSeparator)) out.emplace_back(text::trim(f));
    return out;
}

bool any_empty(const std::vector<std::string>& fields, std::size_t from, std::size_t skip = SIZE_MAX) {
    for (std::size_t i = from; i < fields.size(); ++i) {
        if (i != skip && fields[i].empty()) return true;
    }
    return false;
}

} // namespace

std::string_view to_string(ParseFailure reason) {
    switch (reason) {
        case ParseFailure::bad_field_count: return "bad field count";
        case ParseFailure::unknown_type: return "unknown type";
        case ParseFailure::empty_field: return "empty field";
        case ParseFailure::bad_negation_flag: return "bad negation flag";
    }
    return "?";
}

std::variant<ParsedItem, ParseFailure> parse_line(std::string_view line, Task task, const SchemaDescriptor& schema) {
    auto f = fields_of(line);
    const std::size_t n = f.size();
    switch (task) {
        case Task::MD: {
            if (n < 2) return ParseFailure::bad_field_count;
            if (f[0].empty()) return ParseFailure::empty_field;
            auto type = schema.mention_type(f[0]);
            if (!type) return ParseFailure::unknown_type;
            if (n != 2) return ParseFailure::bad_field_count;
            if (f[1].empty()) return ParseFailure::empty_field;
            return ParsedItem{ParsedMention{*type, f[1]}};
        }
        case Task::ER: {
            if (n < 2) return ParseFailure::bad_field_count;
            if (f[0].empty()) return ParseFailure::empty_field;
            if (text::type_key(f[0]) != kEntityTag) return ParseFailure::unknown_type;
            if (any_empty(f, 1)) return ParseFailure::empty_field;
            return ParsedItem{ParsedCluster{{f.begin() + 1, f.end()}}};
        }
        case Task::RE: {
            if (n < 3) return ParseFailure::bad_field_count;
            if (f[0].empty()) return ParseFailure::empty_field;
            auto type = schema.relation_type(f[0]);
            if (!type) return ParseFailure::unknown_type;
            if (n != 3) return ParseFailure::bad_field_count;
            if (any_empty(f, 1)) return ParseFailure::empty_field;
            return ParsedItem{ParsedRelation{*type, f[1], f[2]}};
        }
        case Task::CE: {
            if (n < 3) return ParseFailure::bad_field_count;
            if (f[0].empty()) return ParseFailure::empty_field;
            auto type = schema.constraint_type(f[0]);
            if (!type) return ParseFailure::unknown_type;
            const std::size_t expected = schema.is_unary(*type) ? 3 : 4;
            if (n != expected) return ParseFailure::bad_field_count;
            if (any_empty(f, 2)) return ParseFailure::empty_field;
            auto flag = text::to_lower(f[1]);
            if (!flag.empty() && flag != "not") return ParseFailure::bad_negation_flag;
            return ParsedItem{ParsedConstraint{*type, flag == "not", {f.begin() + 2, f.end()}}};
        }
    }
    return ParseFailure::bad_field_count;
}

ParseReport parse(std::string_view raw, Task task, const SchemaDescriptor& schema) {
    ParseReport report;
    const auto lines = text::split_lines(raw);
    report.total_line_count = lines.size();

    std::vector<LineKind> kinds;
    std::vector<std::optional<ParsedItem>> parsed(lines.size());
    std::vector<ParseFailure> failures(lines.size(), ParseFailure::bad_field_count);
    bool any_conforming = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        kinds.push_back(classify(lines[i]));
        if (kinds.back() != LineKind::other) continue;
        auto r = parse_line(lines[i], task, schema);
        if (auto* item = std::get_if<ParsedItem>(&r)) {
            parsed[i] = std::move(*item);
            any_conforming = true;
        } else {
            failures[i] = std::get<ParseFailure>(r);
        }
    }

    bool in_prose_section = false;
    bool seen_conforming = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        switch (kinds[i]) {
            case LineKind::blank:
            case LineKind::fence:
                ++report.ignored_line_count;
                continue;
            case LineKind::section_header:
                in_prose_section = true;
                ++report.ignored_line_count;
                continue;
            case LineKind::output_header:
                in_prose_section = false;
                ++report.ignored_line_count;
                continue;
            case LineKind::other:
                break;
        }
        if (parsed[i]) {
            report.items.push_back(std::move(*parsed[i]));
            in_prose_section = false;
            seen_conforming = true;
        } else if (in_prose_section ||
                   (any_conforming && !seen_conforming && lines[i].find(kFieldSeparator) == std::string::npos)) {
            // Reasoning sections and a pipe-free preamble before the output are not errors.
            ++report.ignored_line_count;
        } else {
            report.error_lines.push_back({i + 1, lines[i], failures[i]});
        }
    }
    report.error_count = report.error_lines.size();
    return report;
}

bool SpanSet::overlaps(const std::vector<int>& span) const {
    for (const auto& s : spans_) {
        for (int idx : span) {
            if (std::find(s.begin(), s.end(), idx) != s.end()) return true;
        }
    }
    return false;
}

void SpanSet::add(const std::vector<int>& span) { spans_.push_back(span); }

namespace {

std::optional<std::vector<int>> find_window(std::string_view surface, const Document& doc, const SpanSet& used) {
    const auto target = text::normalize_surface(surface);
    if (target.empty()) return std::nullopt;
    const auto n = doc.tokens.size();
    std::vector<bool> punct(n);
    for (std::size_t i = 0; i < n; ++i) punct[i] = text::is_punctuation_only(doc.tokens[i].text);

    for (std::size_t start = 0; start < n; ++start) {
        if (punct[start]) continue;
        std::string joined;
        std::vector<int> span;
        for (std::size_t end = start; end < n; ++end) {
            if (end > start) joined.push_back(' ');
            joined += doc.tokens[end].text;
            span.push_back(static_cast<int>(end));
            auto norm = text::normalize_surface(joined);
            if (norm.size() > target.size()) break;
            if (punct[end] || norm != target) continue;
            if (used.overlaps(span)) continue;
            return span;
        }
    }
    return std::nullopt;
}

} // namespace

std::optional<GroundedMention> ground(const ParsedMention& parsed, const Document& doc, SpanSet& used) {
    auto span = find_window(parsed.surface, doc, used);
    if (!span) return std::nullopt;
    used.add(*span);
    return GroundedMention{parsed.type, *span, doc.span_text(*span)};
}

GroundingResult ground_report(const ParseReport& report, const Document& doc) {
    GroundingResult result;
    SpanSet used;
    for (const auto& item : report.items) {
        const auto* m = std::get_if<ParsedMention>(&item);
        if (!m) continue;
        if (auto g = ground(*m, doc, used)) {
            result.mentions.push_back(std::move(*g));
        } else {
            result.ungrounded.push_back(*m);
        }
    }
    return result;
}

std::vector<GroundedRelation> ground_relations(const ParseReport& report, const Document& doc) {
    std::vector<GroundedRelation> out;
    for (const auto& item : report.items) {
        const auto* r = std::get_if<ParsedRelation>(&item);
        if (!r) continue;
        GroundedRelation g{r->type, r->source_surface, r->target_surface, std::nullopt, std::nullopt};
        SpanSet fresh_source, fresh_target;
        g.source_span = find_window(r->source_surface, doc, fresh_source);
        g.target_span = find_window(r->target_surface, doc, fresh_target);
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<PredictedCluster> ground_clusters(const ParseReport& report, const Document& doc) {
    std::vector<PredictedCluster> out;
    SpanSet used;
    for (const auto& item : report.items) {
        const auto* c = std::get_if<ParsedCluster>(&item);
        if (!c) continue;
        PredictedCluster cluster;
        for (const auto& surface : c->surfaces) {
            if (auto g = ground(ParsedMention{"", surface}, doc, used)) {
                cluster.grounded.push_back(std::move(*g));
            } else {
                cluster.ungrounded.push_back(surface);
            }
        }
        out.push_back(std::move(cluster));
    }
    return out;
}

std::vector<ParsedConstraint> constraints_of(const ParseReport& report) {
    std::vector<ParsedConstraint> out;
    for (const auto& item : report.items) {
        if (const auto* c = std::get_if<ParsedConstraint>(&item)) out.push_back(*c);
    }
    return out;
}

} // namespace procx
