#include "procx/prompt.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "procx/error.hpp"
#include "procx/parser.hpp"
#include "procx/text.hpp"

namespace procx {

namespace {

constexpr std::array<std::pair<PromptComponentKind, std::string_view>, 11> kComponentNames = {{
    {PromptComponentKind::Persona, "Persona"},
    {PromptComponentKind::ContextManager, "ContextManager"},
    {PromptComponentKind::MetaLanguage, "MetaLanguage"},
    {PromptComponentKind::ChainOfThought, "ChainOfThought"},
    {PromptComponentKind::FactList, "FactList"},
    {PromptComponentKind::Reflection, "Reflection"},
    {PromptComponentKind::AdditionalConsiderations, "AdditionalConsiderations"},
    {PromptComponentKind::Disambiguation, "Disambiguation"},
    {PromptComponentKind::FormatSpec, "FormatSpec"},
    {PromptComponentKind::FormatExample, "FormatExample"},
    {PromptComponentKind::FewShot, "FewShot"},
}};

std::string section_key(PromptComponentKind kind, std::optional<Task> task) {
    std::string key(to_string(kind));
    if (task) {
        key += ':';
        key += to_string(*task);
    }
    return key;
}

std::string lower_type(std::string_view type) { return text::to_lower(type); }

// Types the prompt defines for a task, in schema order.
std::vector<std::string> defined_types(const PromptConfig& config) {
    const auto& s = config.schema;
    std::vector<std::string> out;
    switch (config.task) {
        case Task::MD:
            out = s.mention_types;
            break;
        case Task::ER:
            for (const auto& t : s.mention_types) {
                if (s.in_entity_resolution(t)) out.push_back(t);
            }
            break;
        case Task::RE:
            out = s.mention_types;
            out.insert(out.end(), s.relation_types.begin(), s.relation_types.end());
            break;
        case Task::CE:
            out = s.constraint_types;
            break;
    }
    return out;
}

std::vector<std::string> output_types(const PromptConfig& config) {
    switch (config.task) {
        case Task::RE: return config.schema.relation_types;
        case Task::CE: return config.schema.constraint_types;
        default: return defined_types(config);
    }
}

std::string shorten(std::string_view s, Brevity brevity) {
    return brevity == Brevity::very_short ? text::first_sentence(s) : std::string(text::trim(s));
}

std::string type_definitions(const PromptConfig& config) {
    std::string out;
    for (const auto& t : defined_types(config)) {
        auto it = config.schema.definitions.find(t);
        std::string def = it == config.schema.definitions.end() ? "" : shorten(it->second, config.brevity);
        out += "- " + lower_type(t) + ": " + def + "\n";
    }
    return out;
}

std::string disambiguation_hints(const PromptConfig& config) {
    std::string out;
    for (const auto& t : defined_types(config)) {
        auto it = config.schema.hints.find(t);
        if (it == config.schema.hints.end()) continue;
        for (const auto& hint : it->second) out += "- " + lower_type(t) + ": " + shorten(hint, config.brevity) + "\n";
    }
    if (out.empty()) out = "- no additional hints\n";
    return out;
}

std::string output_format(Task task) {
    switch (task) {
        case Task::MD: return "<mention type>|<mention text>";
        case Task::ER: return "entity|<mention text 1>|<mention text 2>|...";
        case Task::RE: return "<relation type>|<source mention text>|<target mention text>";
        case Task::CE: return "<constraint type>|<not, or empty>|<action>|<second action, binary types only>";
    }
    return "";
}

std::string type_list(const PromptConfig& config) {
    std::vector<std::string> names;
    for (const auto& t : output_types(config)) names.push_back(lower_type(t));
    return text::join(names, ", ");
}

std::string render_examples(const std::vector<FewShotExample>& shots) {
    std::string out;
    for (std::size_t i = 0; i < shots.size(); ++i) {
        if (i) out += "\n";
        out += "Example text: " + shots[i].input_text + "\nExample output:\n";
        for (const auto& line : shots[i].expected_output_lines) out += line + "\n";
    }
    return out;
}

std::string substitute(std::string_view body, const std::map<std::string, std::string>& values) {
    std::string out;
    std::size_t i = 0;
    while (i < body.size()) {
        if (body[i] == '{') {
            auto close = body.find('}', i + 1);
            if (close != std::string_view::npos) {
                auto it = values.find(std::string(body.substr(i + 1, close - i - 1)));
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(body[i++]);
    }
    return out;
}

std::string rtrim(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
    return s;
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t range) {
    const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % range;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % range;
}

std::vector<const Mention*> mentions_in_text_order(const Document& doc) {
    std::vector<const Mention*> out;
    for (const auto& m : doc.mentions) out.push_back(&m);
    std::stable_sort(out.begin(), out.end(), [](const Mention* a, const Mention* b) {
        return a->token_indices.front() < b->token_indices.front();
    });
    return out;
}

} // namespace

std::string_view to_string(PromptComponentKind kind) {
    for (const auto& [k, name] : kComponentNames) {
        if (k == kind) return name;
    }
    return "?";
}

PromptComponentKind component_from_string(std::string_view name) {
    for (const auto& [k, n] : kComponentNames) {
        if (text::to_lower(n) == text::to_lower(name)) return k;
    }
    throw UsageError("unknown prompt component '" + std::string(name) + "'");
}

PromptConfig PromptConfig::with_all_components(Task task, SchemaDescriptor schema) {
    PromptConfig c;
    c.task = task;
    c.schema = std::move(schema);
    c.enabled.insert(kComponentOrder.begin(), kComponentOrder.end());
    return c;
}

std::vector<std::string> PromptConfig::validate() const {
    std::vector<std::string> problems;
    if (!has(PromptComponentKind::FormatSpec)) problems.push_back("FormatSpec must be enabled");
    if (shot_count < 0) problems.push_back("shot_count must be >= 0");
    if (shot_count > 0 && !has(PromptComponentKind::FewShot)) problems.push_back("shot_count > 0 requires FewShot");
    return problems;
}

PromptTemplate PromptTemplate::parse(std::string_view source) {
    PromptTemplate t;
    t.source_ = std::string(source);
    std::string current;
    std::string body;
    auto flush = [&] {
        if (!current.empty()) t.sections_[current] = rtrim(body);
        body.clear();
    };
    for (const auto& line : text::split_lines(source)) {
        auto trimmed = text::trim(line);
        if (!trimmed.empty() && trimmed.front() == ';') continue;
        if (trimmed.size() > 2 && trimmed.front() == '[' && trimmed.back() == ']') {
            flush();
            auto name = trimmed.substr(1, trimmed.size() - 2);
            auto colon = name.find(':');
            auto kind = component_from_string(name.substr(0, colon));
            std::optional<Task> task;
            if (colon != std::string_view::npos) task = task_from_string(name.substr(colon + 1));
            current = section_key(kind, task);
            continue;
        }
        if (current.empty()) continue;
        body += line;
        body += '\n';
    }
    flush();
    return t;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open prompt template " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

bool PromptTemplate::has_section(PromptComponentKind kind, Task task) const {
    return sections_.count(section_key(kind, task)) || sections_.count(section_key(kind, std::nullopt));
}

const std::string& PromptTemplate::section(PromptComponentKind kind, Task task) const {
    if (auto it = sections_.find(section_key(kind, task)); it != sections_.end()) return it->second;
    if (auto it = sections_.find(section_key(kind, std::nullopt)); it != sections_.end()) return it->second;
    throw UsageError("prompt template has no section for " + std::string(to_string(kind)));
}

std::uint64_t document_seed(std::uint64_t seed, std::string_view document_id) {
    return text::fnv1a64(std::to_string(seed) + "/" + std::string(document_id));
}

std::vector<FewShotExample> select_shots(std::span<const Document> pool, int n, std::string_view exclude,
                                         std::uint64_t seed, Task task, const SchemaDescriptor& schema) {
    std::vector<const Document*> candidates;
    for (const auto& d : pool) {
        if (d.id != exclude) candidates.push_back(&d);
    }
    if (n < 0 || static_cast<std::size_t>(n) > candidates.size()) {
        throw UsageError("requested " + std::to_string(n) + " shots but only " + std::to_string(candidates.size()) +
                         " documents are available");
    }
    // Partial Fisher-Yates; std::shuffle is not portable across standard libraries.
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
        auto j = i + bounded(rng, candidates.size() - i);
        std::swap(candidates[i], candidates[j]);
    }
    std::vector<FewShotExample> shots;
    for (int i = 0; i < n; ++i) {
        const auto& d = *candidates[static_cast<std::size_t>(i)];
        shots.push_back({d.id, d.raw_text, render_gold(d, task, schema)});
    }
    return shots;
}

std::vector<std::vector<const Mention*>> gold_clusters(const Document& doc, const SchemaDescriptor& schema) {
    std::vector<std::vector<const Mention*>> clusters;
    std::set<std::string> clustered;
    for (const auto& e : doc.entities) {
        std::vector<const Mention*> members;
        for (const auto& id : e.mention_ids) {
            if (const auto* m = doc.find_mention(id)) {
                members.push_back(m);
                clustered.insert(id);
            }
        }
        if (members.empty()) continue;
        std::stable_sort(members.begin(), members.end(), [](const Mention* a, const Mention* b) {
            return a->token_indices.front() < b->token_indices.front();
        });
        clusters.push_back(std::move(members));
    }
    for (const auto* m : mentions_in_text_order(doc)) {
        if (!clustered.count(m->id) && schema.in_entity_resolution(m->mention_type) && schema.mention_type(m->mention_type)) {
            clusters.push_back({m});
        }
    }
    std::stable_sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) {
        return a.front()->token_indices.front() < b.front()->token_indices.front();
    });
    return clusters;
}

std::vector<std::string> render_gold(const Document& doc, Task task, const SchemaDescriptor& schema) {
    std::vector<std::string> lines;
    const auto sep = std::string(1, kFieldSeparator);
    switch (task) {
        case Task::MD:
            for (const auto* m : mentions_in_text_order(doc)) {
                if (!schema.mention_type(m->mention_type)) continue;
                lines.push_back(lower_type(m->mention_type) + sep + doc.surface(*m));
            }
            break;
        case Task::ER:
            for (const auto& cluster : gold_clusters(doc, schema)) {
                std::string line(kEntityTag);
                for (const auto* m : cluster) line += sep + doc.surface(*m);
                lines.push_back(std::move(line));
            }
            break;
        case Task::RE:
            for (const auto& r : doc.relations) {
                const auto* src = doc.find_mention(r.source_mention_id);
                const auto* tgt = doc.find_mention(r.target_mention_id);
                if (!src || !tgt || !schema.relation_type(r.relation_type)) continue;
                lines.push_back(lower_type(r.relation_type) + sep + doc.surface(*src) + sep + doc.surface(*tgt));
            }
            break;
        case Task::CE:
            for (const auto& c : doc.constraints) {
                if (!schema.constraint_type(c.constraint_type)) continue;
                std::string line = lower_type(c.constraint_type) + sep + (c.negated ? "not" : "") + sep + c.first_action;
                if (c.second_action) line += sep + *c.second_action;
                lines.push_back(std::move(line));
            }
            break;
    }
    return lines;
}

RenderedPrompt assemble(const PromptConfig& config, const PromptTemplate& tmpl, const Document& target,
                        std::span<const Document> shot_pool, const PromptExtras& extras) {
    if (auto problems = config.validate(); !problems.empty()) throw std::invalid_argument(problems.front());

    std::vector<FewShotExample> shots;
    if (config.shot_count > 0 && !extras.fixed_shot_ids.empty()) {
        for (const auto& id : extras.fixed_shot_ids) {
            if (id == target.id || shots.size() == static_cast<std::size_t>(config.shot_count)) continue;
            auto it = std::find_if(shot_pool.begin(), shot_pool.end(), [&](const Document& d) { return d.id == id; });
            if (it == shot_pool.end()) throw UsageError("fixed shot document '" + id + "' is not in the pool");
            shots.push_back({it->id, it->raw_text, render_gold(*it, config.task, config.schema)});
        }
        if (shots.size() != static_cast<std::size_t>(config.shot_count)) {
            throw UsageError("requested " + std::to_string(config.shot_count) + " shots but only " +
                             std::to_string(shots.size()) + " fixed documents are available");
        }
    } else if (config.shot_count > 0) {
        shots = select_shots(shot_pool, config.shot_count, target.id, config.shot_seed, config.task, config.schema);
    }

    const std::map<std::string, std::string> values = {
        {"dataset", config.schema.dataset_name},
        {"task_name", std::string(task_long_name(config.task))},
        {"type_list", type_list(config)},
        {"type_definitions", rtrim(type_definitions(config))},
        {"disambiguation_hints", rtrim(disambiguation_hints(config))},
        {"output_format", output_format(config.task)},
        {"examples", rtrim(render_examples(shots))},
    };

    RenderedPrompt out;
    for (auto kind : kComponentOrder) {
        if (!config.has(kind)) continue;
        if (kind == PromptComponentKind::FewShot && shots.empty()) continue;
        auto body = rtrim(substitute(tmpl.section(kind, config.task), values)) + "\n\n";
        out.component_spans[kind] = {out.text.size(), body.size()};
        out.text += body;
    }
    out.text += "Task: " + std::string(to_string(config.task)) + "\n";
    out.text += "Input: " + target.raw_text + "\n";
    if (!extras.prior_output_lines.empty()) {
        out.text += "\nPreviously extracted:\n";
        for (const auto& line : extras.prior_output_lines) out.text += line + "\n";
    }

    for (const auto& s : shots) out.shot_ids.push_back(s.source_document_id);

    nlohmann::json fp;
    fp["task"] = std::string(to_string(config.task));
    fp["schema"] = schema_to_json(config.schema);
    std::vector<std::string> enabled;
    for (auto kind : kComponentOrder) {
        if (config.has(kind)) enabled.emplace_back(to_string(kind));
    }
    fp["enabled"] = enabled;
    fp["shot_count"] = config.shot_count;
    fp["shot_seed"] = config.shot_seed;
    fp["brevity"] = config.brevity == Brevity::full ? "full" : "very_short";
    fp["template"] = text::sha256_hex(tmpl.source());
    fp["target"] = target.id;
    fp["shots"] = out.shot_ids;
    fp["prior"] = extras.prior_output_lines;
    out.config_fingerprint = text::sha256_hex(fp.dump());
    return out;
}

std::vector<AblationVariant> ablation_variants(const PromptConfig& base) {
    for (auto kind : kComponentOrder) {
        if (!base.has(kind)) {
            throw std::invalid_argument("ablation base must enable every component; missing " +
                                        std::string(to_string(kind)));
        }
    }
    if (base.brevity != Brevity::full) throw std::invalid_argument("ablation base must use full brevity");

    std::vector<AblationVariant> out;
    out.push_back({"Baseline", base, std::nullopt});
    auto without = [&](std::string label, PromptComponentKind kind) {
        auto c = base;
        c.enabled.erase(kind);
        out.push_back({std::move(label), std::move(c), kind});
    };
    without("No Format Examples", PromptComponentKind::FormatExample);
    without("No Context Manager", PromptComponentKind::ContextManager);
    without("No Persona", PromptComponentKind::Persona);
    without("No Meta Language", PromptComponentKind::MetaLanguage);
    without("No Chain of Thought", PromptComponentKind::ChainOfThought);
    without("No Disambiguation", PromptComponentKind::Disambiguation);
    without("No Reflection", PromptComponentKind::Reflection);
    without("No Fact Check List", PromptComponentKind::FactList);
    auto brief = base;
    brief.brevity = Brevity::very_short;
    out.push_back({"Very Short Prompt", std::move(brief), std::nullopt});
    return out;
}

} // namespace procx
