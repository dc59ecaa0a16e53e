#include "procx/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "procx/error.hpp"
#include "procx/text.hpp"

using nlohmann::json;

namespace procx {

namespace {

constexpr int kFormatVersion = 1;

const char* span_mode_name(SpanMode m) { return m == SpanMode::exact_span ? "exact_span" : "text_match"; }

const char* normalization_name(ConstraintNormalization n) {
    return n == ConstraintNormalization::verbatim ? "verbatim" : "lemma_like";
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    return it->get<T>();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

std::string_view to_string(Task task) {
    switch (task) {
        case Task::MD: return "MD";
        case Task::ER: return "ER";
        case Task::RE: return "RE";
        case Task::CE: return "CE";
    }
    return "?";
}

Task task_from_string(std::string_view name) {
    auto key = text::to_lower(text::trim(name));
    if (key == "md") return Task::MD;
    if (key == "er") return Task::ER;
    if (key == "re") return Task::RE;
    if (key == "ce") return Task::CE;
    throw UsageError("unknown task '" + std::string(name) + "' (expected MD, ER, RE or CE)");
}

std::string_view task_long_name(Task task) {
    switch (task) {
        case Task::MD: return "mention detection";
        case Task::ER: return "entity resolution";
        case Task::RE: return "relation extraction";
        case Task::CE: return "constraint extraction";
    }
    return "?";
}

const Mention* Document::find_mention(std::string_view mention_id) const {
    for (const auto& m : mentions) {
        if (m.id == mention_id) return &m;
    }
    return nullptr;
}

std::string Document::span_text(const std::vector<int>& token_indices) const {
    std::string out;
    for (int idx : token_indices) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= tokens.size()) continue;
        if (!out.empty()) out.push_back(' ');
        out += tokens[static_cast<std::size_t>(idx)].text;
    }
    return out;
}

std::string Document::surface(const Mention& m) const { return span_text(m.token_indices); }

std::optional<std::string> SchemaDescriptor::lookup(const std::vector<std::string>& inventory,
                                                    std::string_view name) {
    auto key = text::type_key(name);
    for (const auto& t : inventory) {
        if (text::type_key(t) == key) return t;
    }
    return std::nullopt;
}

std::optional<std::string> SchemaDescriptor::mention_type(std::string_view name) const {
    return lookup(mention_types, name);
}

std::optional<std::string> SchemaDescriptor::relation_type(std::string_view name) const {
    return lookup(relation_types, name);
}

std::optional<std::string> SchemaDescriptor::constraint_type(std::string_view name) const {
    return lookup(constraint_types, name);
}

bool SchemaDescriptor::is_unary(std::string_view type) const {
    return lookup(unary_constraint_types, type).has_value();
}

bool SchemaDescriptor::in_entity_resolution(std::string_view type) const {
    if (entity_mention_types.empty()) return true;
    return lookup(entity_mention_types, type).has_value();
}

bool SchemaDescriptor::supports(Task task) const {
    return std::find(tasks.begin(), tasks.end(), task) != tasks.end();
}

SchemaDescriptor SchemaDescriptor::restricted_to(const std::vector<std::string>& keep) const {
    SchemaDescriptor out = *this;
    out.mention_types.clear();
    for (const auto& t : mention_types) {
        if (lookup(keep, t)) out.mention_types.push_back(t);
    }
    return out;
}

std::vector<std::string> SchemaDescriptor::validate() const {
    std::vector<std::string> problems;
    auto check_inventory = [&](const std::vector<std::string>& inv, const char* what) {
        std::set<std::string> seen;
        for (const auto& t : inv) {
            if (!seen.insert(text::type_key(t)).second) {
                problems.push_back(std::string("duplicate ") + what + " type '" + t + "'");
            }
            auto it = definitions.find(t);
            if (it == definitions.end() || text::trim(it->second).empty()) {
                problems.push_back(std::string(what) + " type '" + t + "' has no definition");
            }
        }
    };
    check_inventory(mention_types, "mention");
    check_inventory(relation_types, "relation");
    check_inventory(constraint_types, "constraint");
    for (const auto& u : unary_constraint_types) {
        if (!constraint_type(u)) problems.push_back("unary type '" + u + "' is not a constraint type");
    }
    return problems;
}

const Document* Dataset::find(std::string_view document_id) const {
    for (const auto& d : documents) {
        if (d.id == document_id) return &d;
    }
    return nullptr;
}

SchemaDescriptor schema_from_json(const json& j) {
    SchemaDescriptor s;
    try {
        s.dataset_name = j.at("dataset_name").get<std::string>();
        s.mention_types = get_or(j, "mention_types", std::vector<std::string>{});
        s.relation_types = get_or(j, "relation_types", std::vector<std::string>{});
        s.constraint_types = get_or(j, "constraint_types", std::vector<std::string>{});
        s.unary_constraint_types = get_or(j, "unary_constraint_types", std::vector<std::string>{});
        s.entity_mention_types = get_or(j, "entity_mention_types", std::vector<std::string>{});
        for (const auto& t : get_or(j, "tasks", std::vector<std::string>{})) {
            s.tasks.push_back(task_from_string(t));
        }
        s.definitions = get_or(j, "definitions", std::map<std::string, std::string>{});
        s.hints = get_or(j, "hints", std::map<std::string, std::vector<std::string>>{});
        if (auto it = j.find("match_policy"); it != j.end()) {
            const auto& p = *it;
            auto mode = get_or<std::string>(p, "span_mode", "exact_span");
            if (mode == "exact_span") s.policy.span_mode = SpanMode::exact_span;
            else if (mode == "text_match") s.policy.span_mode = SpanMode::text_match;
            else throw LoadError("unknown span_mode '" + mode + "'");
            s.policy.type_sensitive = get_or(p, "type_sensitive", true);
            auto norm = get_or<std::string>(p, "constraint_normalization", "lemma_like");
            if (norm == "verbatim") s.policy.constraint_normalization = ConstraintNormalization::verbatim;
            else if (norm == "lemma_like") s.policy.constraint_normalization = ConstraintNormalization::lemma_like;
            else throw LoadError("unknown constraint_normalization '" + norm + "'");
        }
        if (auto it = j.find("bpmn_roles"); it != j.end()) {
            const auto& r = *it;
            s.roles.activity = get_or<std::string>(r, "activity", "");
            s.roles.actor = get_or<std::string>(r, "actor", "");
            s.roles.data = get_or<std::string>(r, "data", "");
            s.roles.xor_gateway = get_or<std::string>(r, "xor_gateway", "");
            s.roles.and_gateway = get_or<std::string>(r, "and_gateway", "");
            s.roles.condition = get_or<std::string>(r, "condition", "");
            s.roles.flow = get_or<std::string>(r, "flow", "");
            s.roles.uses = get_or<std::string>(r, "uses", "");
            s.roles.performer = get_or<std::string>(r, "performer", "");
            s.roles.same_gateway = get_or<std::string>(r, "same_gateway", "");
        }
    } catch (const json::exception& e) {
        throw LoadError(std::string("malformed schema: ") + e.what());
    }
    return s;
}

json schema_to_json(const SchemaDescriptor& s) {
    json j;
    j["dataset_name"] = s.dataset_name;
    j["mention_types"] = s.mention_types;
    j["relation_types"] = s.relation_types;
    j["constraint_types"] = s.constraint_types;
    j["unary_constraint_types"] = s.unary_constraint_types;
    j["entity_mention_types"] = s.entity_mention_types;
    json tasks = json::array();
    for (auto t : s.tasks) tasks.push_back(std::string(to_string(t)));
    j["tasks"] = tasks;
    j["definitions"] = s.definitions;
    j["hints"] = s.hints;
    j["match_policy"] = {{"span_mode", span_mode_name(s.policy.span_mode)},
                         {"type_sensitive", s.policy.type_sensitive},
                         {"constraint_normalization", normalization_name(s.policy.constraint_normalization)}};
    j["bpmn_roles"] = {{"activity", s.roles.activity},       {"actor", s.roles.actor},
                       {"data", s.roles.data},               {"xor_gateway", s.roles.xor_gateway},
                       {"and_gateway", s.roles.and_gateway}, {"condition", s.roles.condition},
                       {"flow", s.roles.flow},               {"uses", s.roles.uses},
                       {"performer", s.roles.performer},     {"same_gateway", s.roles.same_gateway}};
    return j;
}

SchemaDescriptor load_schema(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw LoadError(path.string(), 1, e.what());
    }
    auto s = schema_from_json(j);
    if (auto problems = s.validate(); !problems.empty()) {
        throw LoadError(path.string() + ": invalid schema: " + problems.front());
    }
    return s;
}

json document_to_json(const Document& d) {
    json j;
    j["format_version"] = kFormatVersion;
    j["id"] = d.id;
    j["text"] = d.raw_text;
    auto& tokens = j["tokens"] = json::array();
    for (const auto& t : d.tokens) {
        tokens.push_back({{"text", t.text}, {"index", t.index}, {"sentence_index", t.sentence_index}});
    }
    auto& mentions = j["mentions"] = json::array();
    for (const auto& m : d.mentions) {
        mentions.push_back({{"id", m.id}, {"mention_type", m.mention_type}, {"token_indices", m.token_indices}});
    }
    auto& entities = j["entities"] = json::array();
    for (const auto& e : d.entities) {
        entities.push_back({{"id", e.id}, {"mention_ids", e.mention_ids}});
    }
    auto& relations = j["relations"] = json::array();
    for (const auto& r : d.relations) {
        relations.push_back({{"id", r.id},
                             {"relation_type", r.relation_type},
                             {"source_mention_id", r.source_mention_id},
                             {"target_mention_id", r.target_mention_id}});
    }
    auto& constraints = j["constraints"] = json::array();
    for (const auto& c : d.constraints) {
        json cj{{"id", c.id}, {"constraint_type", c.constraint_type}, {"negated", c.negated},
                {"first_action", c.first_action}};
        if (c.second_action) cj["second_action"] = *c.second_action;
        constraints.push_back(std::move(cj));
    }
    return j;
}

Document document_from_json(const json& j) {
    Document d;
    try {
        if (auto v = get_or(j, "format_version", kFormatVersion); v != kFormatVersion) {
            throw LoadError("unsupported format_version " + std::to_string(v));
        }
        d.id = j.at("id").get<std::string>();
        d.raw_text = get_or<std::string>(j, "text", "");
        for (const auto& t : get_or(j, "tokens", json::array())) {
            d.tokens.push_back({t.at("text").get<std::string>(), t.at("index").get<int>(),
                                t.at("sentence_index").get<int>()});
        }
        for (const auto& m : get_or(j, "mentions", json::array())) {
            d.mentions.push_back({m.at("id").get<std::string>(), m.at("mention_type").get<std::string>(),
                                  m.at("token_indices").get<std::vector<int>>()});
        }
        for (const auto& e : get_or(j, "entities", json::array())) {
            d.entities.push_back({e.at("id").get<std::string>(), e.at("mention_ids").get<std::vector<std::string>>()});
        }
        for (const auto& r : get_or(j, "relations", json::array())) {
            d.relations.push_back({r.at("id").get<std::string>(), r.at("relation_type").get<std::string>(),
                                   r.at("source_mention_id").get<std::string>(),
                                   r.at("target_mention_id").get<std::string>()});
        }
        for (const auto& c : get_or(j, "constraints", json::array())) {
            Constraint con;
            con.id = c.at("id").get<std::string>();
            con.constraint_type = c.at("constraint_type").get<std::string>();
            con.negated = get_or(c, "negated", false);
            con.first_action = c.at("first_action").get<std::string>();
            if (auto it = c.find("second_action"); it != c.end() && !it->is_null()) {
                con.second_action = it->get<std::string>();
            }
            d.constraints.push_back(std::move(con));
        }
    } catch (const json::exception& e) {
        throw LoadError(std::string("malformed document: ") + e.what());
    }
    return d;
}

std::vector<BioSpan> decode_bio(const std::vector<std::string>& tags) {
    std::vector<BioSpan> spans;
    std::optional<std::size_t> open;
    for (std::size_t i = 0; i < tags.size(); ++i) {
        const auto& tag = tags[i];
        if (tag == "O" || tag.empty()) {
            open.reset();
            continue;
        }
        if (tag.size() < 3 || tag[1] != '-' || (tag[0] != 'B' && tag[0] != 'I')) {
            throw std::invalid_argument("bad BIO tag '" + tag + "' at token " + std::to_string(i));
        }
        auto type = tag.substr(2);
        if (tag[0] == 'B') {
            spans.push_back({type, {static_cast<int>(i)}});
            open = spans.size() - 1;
        } else {
            if (!open || spans[*open].type != type) {
                throw std::invalid_argument("tag '" + tag + "' at token " + std::to_string(i) +
                                            " does not continue a span");
            }
            spans[*open].token_indices.push_back(static_cast<int>(i));
        }
    }
    return spans;
}

std::vector<std::string> encode_bio(std::size_t token_count, const std::vector<BioSpan>& spans) {
    std::vector<std::string> tags(token_count, "O");
    for (const auto& s : spans) {
        for (std::size_t k = 0; k < s.token_indices.size(); ++k) {
            auto idx = static_cast<std::size_t>(s.token_indices[k]);
            if (idx < token_count) tags[idx] = (k == 0 ? "B-" : "I-") + s.type;
        }
    }
    return tags;
}

namespace {

Document pet_document_from_json(const json& j, const SchemaDescriptor& schema) {
    Document d;
    d.id = j.at("document name").get<std::string>();
    auto tokens = j.at("tokens").get<std::vector<std::string>>();
    auto sentence_ids = j.at("sentence-IDs").get<std::vector<int>>();
    auto tags = j.at("ner_tags").get<std::vector<std::string>>();
    if (sentence_ids.size() != tokens.size() || tags.size() != tokens.size()) {
        throw std::invalid_argument("tokens, sentence-IDs and ner_tags differ in length");
    }
    std::vector<int> word_ids;
    if (auto it = j.find("tokens-IDs"); it != j.end()) {
        word_ids = it->get<std::vector<int>>();
        if (word_ids.size() != tokens.size()) throw std::invalid_argument("tokens-IDs length mismatch");
    } else {
        int prev_sentence = -1, w = 0;
        for (int s : sentence_ids) {
            w = (s == prev_sentence) ? w + 1 : 0;
            prev_sentence = s;
            word_ids.push_back(w);
        }
    }

    std::vector<std::string> words;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        d.tokens.push_back({tokens[i], static_cast<int>(i), sentence_ids[i]});
        words.push_back(tokens[i]);
    }
    d.raw_text = text::join(words, " ");

    std::map<std::pair<int, int>, std::string> mention_by_head;
    for (const auto& span : decode_bio(tags)) {
        auto type = schema.mention_type(span.type);
        if (!type) throw ValidationError(d.id, "mention type '" + span.type + "' not in schema");
        Mention m{"m" + std::to_string(d.mentions.size()), *type, span.token_indices};
        auto head = static_cast<std::size_t>(span.token_indices.front());
        mention_by_head[{sentence_ids[head], word_ids[head]}] = m.id;
        d.mentions.push_back(std::move(m));
    }

    auto resolve = [&](int sentence, int word) {
        auto it = mention_by_head.find({sentence, word});
        if (it == mention_by_head.end()) {
            throw ValidationError(d.id, "no mention starts at sentence " + std::to_string(sentence) + " word " +
                                            std::to_string(word));
        }
        return it->second;
    };

    if (auto it = j.find("relations"); it != j.end() && !it->empty()) {
        const auto& r = *it;
        auto ss = r.at("source-head-sentence-ID").get<std::vector<int>>();
        auto sw = r.at("source-head-word-ID").get<std::vector<int>>();
        auto types = r.at("relation-type").get<std::vector<std::string>>();
        auto ts = r.at("target-head-sentence-ID").get<std::vector<int>>();
        auto tw = r.at("target-head-word-ID").get<std::vector<int>>();
        if (sw.size() != ss.size() || types.size() != ss.size() || ts.size() != ss.size() || tw.size() != ss.size()) {
            throw std::invalid_argument("relation columns differ in length");
        }
        for (std::size_t k = 0; k < ss.size(); ++k) {
            auto type = schema.relation_type(types[k]);
            if (!type) throw ValidationError(d.id, "relation type '" + types[k] + "' not in schema");
            d.relations.push_back({"r" + std::to_string(k), *type, resolve(ss[k], sw[k]), resolve(ts[k], tw[k])});
        }
    }

    if (auto it = j.find("entities"); it != j.end()) {
        for (const auto& cluster : *it) {
            Entity e{"e" + std::to_string(d.entities.size()), {}};
            for (const auto& ref : cluster) {
                e.mention_ids.push_back(resolve(ref.at("sentence-ID").get<int>(), ref.at("word-ID").get<int>()));
            }
            d.entities.push_back(std::move(e));
        }
    }
    return d;
}

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path.string());
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (text::trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw LoadError(path.string(), number, e.what());
        }
        fn(j, number);
    }
}

void check_unique_ids(const Dataset& ds) {
    std::set<std::string> ids;
    for (const auto& d : ds.documents) {
        if (!ids.insert(d.id).second) throw ValidationError(d.id, "duplicate document id");
    }
}

void throw_if_invalid(const Document& d, const std::vector<std::string>& problems) {
    if (!problems.empty()) throw ValidationError(d.id, problems.front());
}

} // namespace

Dataset load_pet(const std::filesystem::path& path, const SchemaDescriptor& schema) {
    Dataset ds;
    ds.schema = schema;
    for_each_line(path, [&](const json& j, std::size_t number) {
        Document d;
        try {
            d = pet_document_from_json(j, schema);
        } catch (const json::exception& e) {
            throw LoadError(path.string(), number, e.what());
        } catch (const std::invalid_argument& e) {
            throw LoadError(path.string(), number, e.what());
        }
        throw_if_invalid(d, validate(d, schema));
        ds.documents.push_back(std::move(d));
    });
    check_unique_ids(ds);
    return ds;
}

Dataset load_constraint_dataset(const std::filesystem::path& path, const SchemaDescriptor& schema) {
    Dataset ds;
    ds.schema = schema;
    for_each_line(path, [&](const json& j, std::size_t number) {
        if (j.contains("schema") && !j.contains("id")) return;
        Document d;
        try {
            d = document_from_json(j);
        } catch (const LoadError& e) {
            throw LoadError(path.string(), number, e.what());
        }
        throw_if_invalid(d, validate(d, schema));
        ds.documents.push_back(std::move(d));
    });
    check_unique_ids(ds);
    return ds;
}

std::string normalize_action(std::string_view phrase) { return text::to_lower(text::collapse_whitespace(phrase)); }

std::vector<std::string> validate(const Document& d) {
    std::vector<std::string> problems;
    const auto n_tokens = static_cast<int>(d.tokens.size());
    for (int k = 0; k < n_tokens; ++k) {
        const auto& t = d.tokens[static_cast<std::size_t>(k)];
        if (t.text.empty()) problems.push_back("token " + std::to_string(k) + " has empty text");
        if (t.index != k) problems.push_back("token " + std::to_string(k) + " has index " + std::to_string(t.index));
    }

    std::set<std::string> mention_ids;
    std::set<std::pair<std::string, std::vector<int>>> spans;
    for (const auto& m : d.mentions) {
        if (m.id.empty()) problems.push_back("mention with empty id");
        if (!mention_ids.insert(m.id).second) problems.push_back("mention " + m.id + ": duplicate id");
        if (m.token_indices.empty()) problems.push_back("mention " + m.id + ": empty span");
        for (std::size_t i = 0; i < m.token_indices.size(); ++i) {
            int idx = m.token_indices[i];
            if (idx < 0 || idx >= n_tokens) problems.push_back("mention " + m.id + ": token index out of bounds");
            if (i > 0 && idx <= m.token_indices[i - 1]) {
                problems.push_back("mention " + m.id + ": token indices not strictly increasing");
            }
        }
        if (!spans.insert({text::type_key(m.mention_type), m.token_indices}).second) {
            problems.push_back("mention " + m.id + ": duplicate (type, span)");
        }
    }

    std::set<std::string> clustered, entity_ids;
    for (const auto& e : d.entities) {
        if (!entity_ids.insert(e.id).second) problems.push_back("entity " + e.id + ": duplicate id");
        if (e.mention_ids.empty()) problems.push_back("entity " + e.id + ": no mentions");
        for (const auto& mid : e.mention_ids) {
            if (!mention_ids.count(mid)) problems.push_back("entity " + e.id + ": unknown mention " + mid);
            if (!clustered.insert(mid).second) {
                problems.push_back("entity " + e.id + ": mention " + mid + " already in another entity");
            }
        }
    }

    for (const auto& r : d.relations) {
        if (!mention_ids.count(r.source_mention_id)) {
            problems.push_back("relation " + r.id + ": unknown mention " + r.source_mention_id);
        }
        if (!mention_ids.count(r.target_mention_id)) {
            problems.push_back("relation " + r.id + ": unknown mention " + r.target_mention_id);
        }
    }

    for (const auto& c : d.constraints) {
        if (c.first_action.empty() || normalize_action(c.first_action) != c.first_action) {
            problems.push_back("constraint " + c.id + ": first action not normalized");
        }
        if (c.second_action && (c.second_action->empty() || normalize_action(*c.second_action) != *c.second_action)) {
            problems.push_back("constraint " + c.id + ": second action not normalized");
        }
    }
    return problems;
}

std::vector<std::string> validate(const Document& d, const SchemaDescriptor& schema) {
    auto problems = validate(d);
    for (const auto& m : d.mentions) {
        if (!schema.mention_type(m.mention_type)) {
            problems.push_back("mention " + m.id + ": type '" + m.mention_type + "' not in schema");
        }
    }
    for (const auto& r : d.relations) {
        if (!schema.relation_type(r.relation_type)) {
            problems.push_back("relation " + r.id + ": type '" + r.relation_type + "' not in schema");
        }
    }
    for (const auto& c : d.constraints) {
        if (!schema.constraint_type(c.constraint_type)) {
            problems.push_back("constraint " + c.id + ": type '" + c.constraint_type + "' not in schema");
            continue;
        }
        bool unary = schema.is_unary(c.constraint_type);
        if (unary && c.second_action) problems.push_back("constraint " + c.id + ": unary type with two actions");
        if (!unary && !c.second_action) problems.push_back("constraint " + c.id + ": binary type with one action");
    }
    return problems;
}

void save_canonical(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw LoadError("cannot write " + path.string());
    out << json{{"format_version", kFormatVersion}, {"schema", schema_to_json(ds.schema)}}.dump() << '\n';
    for (const auto& d : ds.documents) out << document_to_json(d).dump() << '\n';
    if (!out) throw LoadError("write failed for " + path.string());
}

Dataset load_canonical(const std::filesystem::path& path) {
    Dataset ds;
    bool have_schema = false;
    for_each_line(path, [&](const json& j, std::size_t number) {
        try {
            if (j.contains("schema") && !j.contains("id")) {
                ds.schema = schema_from_json(j.at("schema"));
                have_schema = true;
                return;
            }
            ds.documents.push_back(document_from_json(j));
        } catch (const LoadError& e) {
            throw LoadError(path.string(), number, e.what());
        }
    });
    for (const auto& d : ds.documents) throw_if_invalid(d, have_schema ? validate(d, ds.schema) : validate(d));
    check_unique_ids(ds);
    return ds;
}

} // namespace procx
