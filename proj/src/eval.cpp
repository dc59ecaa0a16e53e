#include "procx/eval.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>

#include "procx/prompt.hpp"
#include "procx/text.hpp"

namespace procx {

namespace {

double ratio(long num, long den, bool vacuous) {
    if (den == 0) return vacuous ? 1.0 : 0.0;
    return static_cast<double>(num) / static_cast<double>(den);
}

const std::set<std::string>& stop_words() {
    static const std::set<std::string> words = {
        "a",    "an",   "the",   "this",   "that",  "these", "those", "is",   "are",   "was",  "were",
        "be",   "been", "being", "has",    "have",  "had",   "do",    "does", "did",   "will", "shall",
        "should", "must", "can", "could", "may",   "might", "would", "to",
    };
    return words;
}

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string stem(std::string w) {
    if (w.size() > 5 && ends_with(w, "ing")) {
        w.resize(w.size() - 3);
    } else if (w.size() > 4 && ends_with(w, "ed")) {
        w.resize(w.size() - 2);
    } else if (w.size() > 4 && ends_with(w, "es")) {
        w.resize(w.size() - 2);
    } else if (w.size() > 3 && ends_with(w, "s") && !ends_with(w, "ss")) {
        w.resize(w.size() - 1);
    }
    if (w.size() > 3 && ends_with(w, "e")) w.resize(w.size() - 1);
    return w;
}

std::vector<std::string> words_of(std::string_view phrase) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text::to_lower(phrase)) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

bool same_type(std::string_view a, std::string_view b) { return text::type_key(a) == text::type_key(b); }

} // namespace

TaskScores scores_from_counts(const ConfusionCounts& c) {
    TaskScores s;
    s.counts = c;
    const bool vacuous = c.predicted == 0 && c.gold == 0;
    s.precision = ratio(c.correct, c.predicted, vacuous);
    s.recall = ratio(c.correct, c.gold, vacuous);
    const double sum = s.precision + s.recall;
    s.f1 = sum == 0 ? 0.0 : 2 * s.precision * s.recall / sum;
    return s;
}

TaskScores aggregate(const std::vector<ConfusionCounts>& per_doc) {
    if (per_doc.empty()) return {};
    ConfusionCounts total;
    for (const auto& c : per_doc) total += c;
    return scores_from_counts(total);
}

long max_matching(std::size_t left, std::size_t right, const std::function<bool(std::size_t, std::size_t)>& compatible) {
    // Kuhn's augmenting-path algorithm; sizes here are per-document and small.
    std::vector<std::vector<std::size_t>> adj(left);
    for (std::size_t i = 0; i < left; ++i) {
        for (std::size_t j = 0; j < right; ++j) {
            if (compatible(i, j)) adj[i].push_back(j);
        }
    }
    std::vector<long> match_right(right, -1);
    std::vector<char> seen;
    std::function<bool(std::size_t)> augment = [&](std::size_t i) {
        for (auto j : adj[i]) {
            if (seen[j]) continue;
            seen[j] = 1;
            if (match_right[j] < 0 || augment(static_cast<std::size_t>(match_right[j]))) {
                match_right[j] = static_cast<long>(i);
                return true;
            }
        }
        return false;
    };
    long matched = 0;
    for (std::size_t i = 0; i < left; ++i) {
        seen.assign(right, 0);
        if (augment(i)) ++matched;
    }
    return matched;
}

std::string normalize_for_match(std::string_view phrase, ConstraintNormalization mode) {
    if (mode == ConstraintNormalization::verbatim) return text::collapse_whitespace(text::to_lower(phrase));
    std::vector<std::string> kept;
    for (auto& w : words_of(phrase)) {
        if (!stop_words().count(w)) kept.push_back(stem(std::move(w)));
    }
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    return text::join(kept, " ");
}

ConfusionCounts count_md(const std::vector<GroundedMention>& grounded, const std::vector<ParsedMention>& ungrounded,
                         const Document& gold, const MatchPolicy& policy) {
    struct Item {
        std::string type;
        std::optional<std::vector<int>> span;
        std::string surface;
    };
    std::vector<Item> pred;
    for (const auto& g : grounded) pred.push_back({g.mention_type, g.token_indices, text::normalize_surface(g.matched_surface)});
    for (const auto& u : ungrounded) pred.push_back({u.type, std::nullopt, text::normalize_surface(u.surface)});

    const auto& gm = gold.mentions;
    auto compatible = [&](std::size_t i, std::size_t j) {
        const auto& p = pred[i];
        const auto& g = gm[j];
        if (policy.type_sensitive && !same_type(p.type, g.mention_type)) return false;
        if (policy.span_mode == SpanMode::exact_span) return p.span && *p.span == g.token_indices;
        return p.surface == text::normalize_surface(gold.surface(g));
    };
    return {max_matching(pred.size(), gm.size(), compatible), static_cast<long>(pred.size()),
            static_cast<long>(gm.size())};
}

ConfusionCounts count_er(const std::vector<PredictedCluster>& predicted, const Document& gold,
                         const SchemaDescriptor& schema) {
    using SpanSetKey = std::set<std::vector<int>>;
    std::vector<SpanSetKey> gold_sets;
    for (const auto& cluster : gold_clusters(gold, schema)) {
        SpanSetKey k;
        for (const auto* m : cluster) k.insert(m->token_indices);
        gold_sets.push_back(std::move(k));
    }
    std::vector<SpanSetKey> pred_sets;
    for (const auto& c : predicted) {
        SpanSetKey k;
        for (const auto& g : c.grounded) k.insert(g.token_indices);
        pred_sets.push_back(std::move(k));
    }
    auto compatible = [&](std::size_t i, std::size_t j) { return !pred_sets[i].empty() && pred_sets[i] == gold_sets[j]; };
    return {max_matching(pred_sets.size(), gold_sets.size(), compatible), static_cast<long>(pred_sets.size()),
            static_cast<long>(gold_sets.size())};
}

ConfusionCounts count_re(const std::vector<GroundedRelation>& predicted, const Document& gold,
                         const MatchPolicy& policy) {
    struct GoldRel {
        std::string type;
        const Mention* source;
        const Mention* target;
    };
    std::vector<GoldRel> gr;
    for (const auto& r : gold.relations) {
        gr.push_back({r.relation_type, gold.find_mention(r.source_mention_id), gold.find_mention(r.target_mention_id)});
    }
    auto endpoint = [&](const std::optional<std::vector<int>>& span, const std::string& surface, const Mention* m) {
        if (!m) return false;
        if (policy.span_mode == SpanMode::exact_span) return span && *span == m->token_indices;
        return text::normalize_surface(surface) == text::normalize_surface(gold.surface(*m));
    };
    auto compatible = [&](std::size_t i, std::size_t j) {
        const auto& p = predicted[i];
        const auto& g = gr[j];
        if (!same_type(p.type, g.type)) return false;
        return endpoint(p.source_span, p.source_surface, g.source) && endpoint(p.target_span, p.target_surface, g.target);
    };
    return {max_matching(predicted.size(), gr.size(), compatible), static_cast<long>(predicted.size()),
            static_cast<long>(gr.size())};
}

ConfusionCounts count_constraints(const std::vector<ParsedConstraint>& predicted, const Document& gold,
                                  const SchemaDescriptor& schema) {
    const auto mode = schema.policy.constraint_normalization;
    auto gold_actions = [&](const Constraint& c) {
        std::vector<std::string> out{normalize_for_match(c.first_action, mode)};
        if (c.second_action) out.push_back(normalize_for_match(*c.second_action, mode));
        return out;
    };
    std::vector<std::vector<std::string>> pa;
    for (const auto& p : predicted) {
        std::vector<std::string> acts;
        for (const auto& a : p.actions) acts.push_back(normalize_for_match(a, mode));
        pa.push_back(std::move(acts));
    }
    std::vector<std::vector<std::string>> ga;
    for (const auto& c : gold.constraints) ga.push_back(gold_actions(c));
    auto compatible = [&](std::size_t i, std::size_t j) {
        const auto& p = predicted[i];
        const auto& g = gold.constraints[j];
        return same_type(p.type, g.constraint_type) && p.negated == g.negated && pa[i] == ga[j];
    };
    return {max_matching(predicted.size(), gold.constraints.size(), compatible), static_cast<long>(predicted.size()),
            static_cast<long>(gold.constraints.size())};
}

TaskScores score_md(const std::vector<GroundedMention>& grounded, const std::vector<ParsedMention>& ungrounded,
                    const Document& gold, const MatchPolicy& policy) {
    return scores_from_counts(count_md(grounded, ungrounded, gold, policy));
}

TaskScores score_er(const std::vector<PredictedCluster>& predicted, const Document& gold,
                    const SchemaDescriptor& schema) {
    return scores_from_counts(count_er(predicted, gold, schema));
}

TaskScores score_re(const std::vector<GroundedRelation>& predicted, const Document& gold, const MatchPolicy& policy) {
    return scores_from_counts(count_re(predicted, gold, policy));
}

TaskScores score_constraints(const std::vector<ParsedConstraint>& predicted, const Document& gold,
                             const SchemaDescriptor& schema) {
    return scores_from_counts(count_constraints(predicted, gold, schema));
}

nlohmann::json scores_to_json(const TaskScores& s) {
    return {{"precision", s.precision},
            {"recall", s.recall},
            {"f1", s.f1},
            {"correct", s.counts.correct},
            {"predicted", s.counts.predicted},
            {"gold", s.counts.gold}};
}

} // namespace procx
