#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "procx/corpus.hpp"
#include "procx/parser.hpp"

namespace procx {

struct ConfusionCounts {
    long correct = 0;
    long predicted = 0;
    long gold = 0;

    bool operator==(const ConfusionCounts&) const = default;
    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        correct += o.correct;
        predicted += o.predicted;
        gold += o.gold;
        return *this;
    }
};

struct TaskScores {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    ConfusionCounts counts;

    bool operator==(const TaskScores&) const = default;
};

// P = correct/predicted, R = correct/gold, F1 = 2PR/(P+R).
// A zero denominator gives 0, except when the numerator is also 0 and nothing was expected
// or predicted on either side (predicted = gold = 0), which scores 1.
TaskScores scores_from_counts(const ConfusionCounts& c);

// Sums counts, then applies the formulas. An empty list scores all zeros.
TaskScores aggregate(const std::vector<ConfusionCounts>& per_doc);

// Size of a maximum one-to-one matching between `left` and `right` items, where
// `compatible(i, j)` says whether left i may pair with right j.
long max_matching(std::size_t left, std::size_t right, const std::function<bool(std::size_t, std::size_t)>& compatible);

ConfusionCounts count_md(const std::vector<GroundedMention>& grounded, const std::vector<ParsedMention>& ungrounded,
                         const Document& gold, const MatchPolicy& policy);
ConfusionCounts count_er(const std::vector<PredictedCluster>& predicted, const Document& gold,
                         const SchemaDescriptor& schema);
ConfusionCounts count_re(const std::vector<GroundedRelation>& predicted, const Document& gold,
                         const MatchPolicy& policy);
ConfusionCounts count_constraints(const std::vector<ParsedConstraint>& predicted, const Document& gold,
                                  const SchemaDescriptor& schema);

TaskScores score_md(const std::vector<GroundedMention>& grounded, const std::vector<ParsedMention>& ungrounded,
                    const Document& gold, const MatchPolicy& policy);
TaskScores score_er(const std::vector<PredictedCluster>& predicted, const Document& gold,
                    const SchemaDescriptor& schema);
TaskScores score_re(const std::vector<GroundedRelation>& predicted, const Document& gold, const MatchPolicy& policy);
TaskScores score_constraints(const std::vector<ParsedConstraint>& predicted, const Document& gold,
                             const SchemaDescriptor& schema);

// Action phrase as compared under `mode`: verbatim lower-cases and collapses whitespace;
// lemma_like also drops determiners and auxiliaries, strips simple suffixes and sorts words.
std::string normalize_for_match(std::string_view phrase, ConstraintNormalization mode);

nlohmann::json scores_to_json(const TaskScores& s);

} // namespace procx
