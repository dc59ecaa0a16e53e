#include "procx/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <functional>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "procx/error.hpp"
#include "procx/text.hpp"

namespace procx {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class F>
void parallel_for(std::size_t n, int concurrency, F&& body) {
    const auto workers = static_cast<std::size_t>(std::max(1, concurrency));
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) {
        threads.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) body(i);
        });
    }
    for (auto& t : threads) t.join();
}

struct DocOutcome {
    std::optional<Extraction> extraction;
    ConfusionCounts counts;
    std::string error;
    bool provider_failure = false;
};

DocOutcome guarded(const std::function<Extraction()>& run, const Document& gold, const SchemaDescriptor& schema) {
    DocOutcome out;
    try {
        out.extraction = run();
        out.counts = count_predictions(out.extraction->predictions, gold, schema);
    } catch (const LlmError& e) {
        out.error = gold.id + ": " + e.what();
        out.provider_failure = true;
    } catch (const std::exception& e) {
        out.error = gold.id + ": " + e.what();
    }
    return out;
}

std::string setting_name(int shots) {
    if (shots == 0) return "Zero-shot";
    return std::to_string(shots) + "-shot";
}

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string signed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+.2f", v);
    std::string s = buf;
    if (s == "-0.00") s = "+0.00";
    return s;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string lpad(std::string s, std::size_t width) {
    if (s.size() < width) s.insert(0, width - s.size(), ' ');
    return s;
}

std::string slug(std::string_view s) {
    std::string out;
    for (char c : text::to_lower(s)) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '-');
    return out;
}

std::string record_stem(const DocumentRecord& r) {
    std::string stem = std::string(to_string(r.task)) + "_" + std::to_string(r.shot_count);
    if (!r.variant.empty()) stem += "_" + slug(r.variant);
    return stem + "_" + slug(r.document_id);
}

void write_file(const fs::path& p, std::string_view content) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw LoadError("cannot write " + p.string());
    out << content;
}

std::vector<std::string> fixed_ids(const Dataset& dataset, int n, std::uint64_t seed, Task task) {
    if (n <= 0) return {};
    const int take = std::min<int>(n + 1, static_cast<int>(dataset.documents.size()));
    std::vector<std::string> ids;
    for (const auto& s : select_shots(dataset.documents, take, "", seed, task, dataset.schema)) {
        ids.push_back(s.source_document_id);
    }
    return ids;
}

PromptConfig base_config(Task task, const SchemaDescriptor& schema, const RunSettings& settings) {
    auto c = PromptConfig::with_all_components(task, schema);
    if (!settings.components.empty()) c.enabled = settings.components;
    return c;
}

json record_json(const DocumentRecord& r) {
    const auto& x = r.extraction;
    return {{"document_id", r.document_id},
            {"task", std::string(to_string(r.task))},
            {"shots", r.shot_count},
            {"variant", r.variant},
            {"fingerprint", x.prompt.config_fingerprint},
            {"shot_ids", x.prompt.shot_ids},
            {"raw_response", x.response.text},
            {"parse", report_to_json(x.report)},
            {"predictions", predictions_to_json(x.predictions)},
            {"counts", {{"correct", r.counts.correct}, {"predicted", r.counts.predicted}, {"gold", r.counts.gold}}}};
}

struct RunPaths {
    std::string manifest_id;
    std::optional<fs::path> dir;
};

RunPaths persist(const std::string& kind, const Dataset& dataset, const json& config, const std::vector<DocumentRecord>& records,
                 const json& scores, const std::string& table, const LlmClient& client, const RunSettings& settings) {
    RunPaths out;
    json id_source = config;
    id_source["kind"] = kind;
    out.manifest_id = kind + "-" + text::sha256_hex(id_source.dump()).substr(0, 16);
    if (!settings.runs_dir) return out;

    const auto dir = *settings.runs_dir / out.manifest_id;
    out.dir = dir;
    json fingerprints = json::object();
    std::string predictions;
    for (const auto& r : records) {
        const auto stem = record_stem(r);
        fingerprints[stem] = r.extraction.prompt.config_fingerprint;
        write_file(dir / "prompts" / (stem + ".txt"), r.extraction.prompt.text);
        write_file(dir / "responses" / (stem + ".txt"), r.extraction.response.text);
        predictions += record_json(r).dump() + "\n";
    }
    write_file(dir / "predictions.jsonl", predictions);
    write_file(dir / "scores.json", scores.dump(2) + "\n");
    write_file(dir / "table.txt", table);

    json manifest = config;
    manifest["kind"] = kind;
    manifest["manifest_id"] = out.manifest_id;
    manifest["dataset_name"] = dataset.schema.dataset_name;
    manifest["cache_mode"] = client.mode() == CacheMode::replay ? "replay" : "record";
    manifest["timestamp"] = client.mode() == CacheMode::replay ? client.latest_entry_time() : unix_now();
    manifest["toolkit_version"] = toolkit_version();
    manifest["prompt_fingerprints"] = fingerprints;
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    return out;
}

json run_config(const Dataset& dataset, const std::vector<Task>& tasks, const std::vector<int>& shots,
                const PromptTemplate& tmpl, const RunSettings& settings) {
    std::vector<std::string> task_names, doc_ids, components;
    for (auto t : tasks) task_names.emplace_back(to_string(t));
    for (const auto& d : dataset.documents) doc_ids.push_back(d.id);
    for (auto k : settings.components) components.emplace_back(to_string(k));
    return {{"dataset", dataset.schema.dataset_name},
            {"documents", doc_ids},
            {"tasks", task_names},
            {"shot_counts", shots},
            {"shot_seed", settings.seed},
            {"fixed_shots", settings.fixed_shots},
            {"model_id", settings.llm.model_id},
            {"temperature", settings.llm.temperature},
            {"max_output_tokens", settings.llm.max_output_tokens ? json(*settings.llm.max_output_tokens) : json(nullptr)},
            {"components", components},
            {"template_sha256", text::sha256_hex(tmpl.source())}};
}

const json* reference_rows(const json& refs, const std::string& dataset, const std::string& key, Task task) {
    const std::string t(to_string(task));
    if (!refs.contains(dataset)) return nullptr;
    const auto& d = refs[dataset];
    if (!key.empty()) {
        if (!d.contains(key) || !d[key].contains(t)) return nullptr;
        return &d[key][t];
    }
    if (!d.contains(t)) return nullptr;
    return &d[t];
}

} // namespace

std::string toolkit_version() { return PROCX_VERSION; }

Predictions predictions_from_report(const ParseReport& report, Task task, const Document& doc) {
    Predictions p;
    p.task = task;
    switch (task) {
        case Task::MD: {
            auto g = ground_report(report, doc);
            p.mentions = std::move(g.mentions);
            p.ungrounded_mentions = std::move(g.ungrounded);
            break;
        }
        case Task::ER: p.clusters = ground_clusters(report, doc); break;
        case Task::RE: p.relations = ground_relations(report, doc); break;
        case Task::CE: p.constraints = constraints_of(report); break;
    }
    return p;
}

json predictions_to_json(const Predictions& p) {
    json j{{"task", std::string(to_string(p.task))}};
    switch (p.task) {
        case Task::MD: {
            json ms = json::array(), us = json::array();
            for (const auto& m : p.mentions) ms.push_back({{"type", m.mention_type}, {"tokens", m.token_indices}, {"surface", m.matched_surface}});
            for (const auto& u : p.ungrounded_mentions) us.push_back({{"type", u.type}, {"surface", u.surface}});
            j["mentions"] = ms;
            j["ungrounded"] = us;
            break;
        }
        case Task::ER: {
            json cs = json::array();
            for (const auto& c : p.clusters) {
                json g = json::array();
                for (const auto& m : c.grounded) g.push_back({{"tokens", m.token_indices}, {"surface", m.matched_surface}});
                cs.push_back({{"grounded", g}, {"ungrounded", c.ungrounded}});
            }
            j["clusters"] = cs;
            break;
        }
        case Task::RE: {
            json rs = json::array();
            for (const auto& r : p.relations) {
                rs.push_back({{"type", r.type},
                              {"source", r.source_surface},
                              {"target", r.target_surface},
                              {"source_tokens", r.source_span ? json(*r.source_span) : json(nullptr)},
                              {"target_tokens", r.target_span ? json(*r.target_span) : json(nullptr)}});
            }
            j["relations"] = rs;
            break;
        }
        case Task::CE: {
            json cs = json::array();
            for (const auto& c : p.constraints) cs.push_back({{"type", c.type}, {"negated", c.negated}, {"actions", c.actions}});
            j["constraints"] = cs;
            break;
        }
    }
    return j;
}

Predictions predictions_from_json(const json& j) {
    Predictions p;
    try {
        p.task = task_from_string(j.at("task").get<std::string>());
        auto span = [](const json& v) -> std::optional<std::vector<int>> {
            if (v.is_null()) return std::nullopt;
            return v.get<std::vector<int>>();
        };
        switch (p.task) {
            case Task::MD:
                for (const auto& m : j.at("mentions")) {
                    p.mentions.push_back({m.at("type").get<std::string>(), m.at("tokens").get<std::vector<int>>(),
                                          m.at("surface").get<std::string>()});
                }
                for (const auto& u : j.at("ungrounded")) {
                    p.ungrounded_mentions.push_back({u.at("type").get<std::string>(), u.at("surface").get<std::string>()});
                }
                break;
            case Task::ER:
                for (const auto& c : j.at("clusters")) {
                    PredictedCluster pc;
                    for (const auto& m : c.at("grounded")) {
                        pc.grounded.push_back({"", m.at("tokens").get<std::vector<int>>(), m.at("surface").get<std::string>()});
                    }
                    pc.ungrounded = c.at("ungrounded").get<std::vector<std::string>>();
                    p.clusters.push_back(std::move(pc));
                }
                break;
            case Task::RE:
                for (const auto& r : j.at("relations")) {
                    p.relations.push_back({r.at("type").get<std::string>(), r.at("source").get<std::string>(),
                                           r.at("target").get<std::string>(), span(r.at("source_tokens")),
                                           span(r.at("target_tokens"))});
                }
                break;
            case Task::CE:
                for (const auto& c : j.at("constraints")) {
                    p.constraints.push_back({c.at("type").get<std::string>(), c.at("negated").get<bool>(),
                                             c.at("actions").get<std::vector<std::string>>()});
                }
                break;
        }
    } catch (const json::exception& e) {
        throw LoadError(std::string("malformed predictions record: ") + e.what());
    }
    return p;
}

json report_to_json(const ParseReport& r) {
    json errors = json::array();
    for (const auto& e : r.error_lines) {
        errors.push_back({{"line", e.line_number}, {"raw", e.raw}, {"reason", std::string(to_string(e.reason))}});
    }
    return {{"items", r.items.size()},
            {"error_count", r.error_count},
            {"ignored_line_count", r.ignored_line_count},
            {"total_line_count", r.total_line_count},
            {"error_lines", errors}};
}

ConfusionCounts count_predictions(const Predictions& p, const Document& gold, const SchemaDescriptor& schema) {
    switch (p.task) {
        case Task::MD: return count_md(p.mentions, p.ungrounded_mentions, gold, schema.policy);
        case Task::ER: return count_er(p.clusters, gold, schema);
        case Task::RE: return count_re(p.relations, gold, schema.policy);
        case Task::CE: return count_constraints(p.constraints, gold, schema);
    }
    return {};
}

Document document_from_predictions(const Document& base, const Predictions* mentions, const Predictions* relations) {
    Document out = base;
    if (mentions) {
        out.mentions.clear();
        out.entities.clear();
        for (std::size_t i = 0; i < mentions->mentions.size(); ++i) {
            const auto& m = mentions->mentions[i];
            out.mentions.push_back({"p" + std::to_string(i), m.mention_type, m.token_indices});
        }
    }
    if (relations) {
        out.relations.clear();
        auto find = [&](const std::optional<std::vector<int>>& span) -> const Mention* {
            if (!span) return nullptr;
            for (const auto& m : out.mentions) {
                if (m.token_indices == *span) return &m;
            }
            return nullptr;
        };
        for (std::size_t i = 0; i < relations->relations.size(); ++i) {
            const auto& r = relations->relations[i];
            const auto* s = find(r.source_span);
            const auto* t = find(r.target_span);
            if (s && t) out.relations.push_back({"pr" + std::to_string(i), r.type, s->id, t->id});
        }
    }
    return out;
}

std::vector<std::string> render_predictions(const Predictions& p) {
    std::vector<std::string> lines;
    const std::string sep(1, kFieldSeparator);
    switch (p.task) {
        case Task::MD:
            for (const auto& m : p.mentions) lines.push_back(text::to_lower(m.mention_type) + sep + m.matched_surface);
            break;
        case Task::ER:
            for (const auto& c : p.clusters) {
                std::string line(kEntityTag);
                for (const auto& m : c.grounded) line += sep + m.matched_surface;
                lines.push_back(line);
            }
            break;
        case Task::RE:
            for (const auto& r : p.relations) {
                if (r.fully_grounded()) lines.push_back(text::to_lower(r.type) + sep + r.source_surface + sep + r.target_surface);
            }
            break;
        case Task::CE:
            for (const auto& c : p.constraints) {
                std::string line = text::to_lower(c.type) + sep + (c.negated ? "not" : "");
                for (const auto& a : c.actions) line += sep + a;
                lines.push_back(line);
            }
            break;
    }
    return lines;
}

Extraction extract_document(const Document& doc, const PromptConfig& config, const PromptTemplate& tmpl,
                            std::span<const Document> pool, LlmClient& client, const LlmSettings& llm,
                            const PromptExtras& extras) {
    Extraction x;
    x.prompt = assemble(config, tmpl, doc, pool, extras);
    x.response = client.complete({llm.model_id, llm.temperature, x.prompt.text, llm.max_output_tokens});
    x.report = parse(x.response.text, config.task, config.schema);
    x.predictions = predictions_from_report(x.report, config.task, doc);
    return x;
}

GridResult run_grid(const Dataset& dataset, const std::vector<Task>& tasks, const std::vector<int>& shot_counts,
                    const PromptTemplate& tmpl, LlmClient& client, const RunSettings& settings) {
    GridResult grid;
    grid.dataset_name = dataset.schema.dataset_name;
    grid.model_id = settings.llm.model_id;
    const auto& docs = dataset.documents;

    for (auto task : tasks) {
        if (!dataset.schema.supports(task)) {
            throw UsageError("dataset " + dataset.schema.dataset_name + " has no " + std::string(to_string(task)) + " annotations");
        }
        for (int shots : shot_counts) {
            GridCell cell{task, shots, std::nullopt, 0, "", false};
            if (docs.empty()) {
                grid.cells.push_back(cell);
                continue;
            }
            PromptExtras extras;
            if (settings.fixed_shots) extras.fixed_shot_ids = fixed_ids(dataset, shots, settings.seed, task);
            std::vector<DocOutcome> outcomes(docs.size());
            parallel_for(docs.size(), settings.concurrency, [&](std::size_t i) {
                auto config = base_config(task, dataset.schema, settings);
                config.shot_count = shots;
                config.shot_seed = settings.fixed_shots ? settings.seed : document_seed(settings.seed, docs[i].id);
                outcomes[i] = guarded(
                    [&] { return extract_document(docs[i], config, tmpl, docs, client, settings.llm, extras); }, docs[i],
                    dataset.schema);
            });
            std::vector<ConfusionCounts> counts;
            for (std::size_t i = 0; i < docs.size(); ++i) {
                auto& o = outcomes[i];
                if (!o.extraction) {
                    if (cell.error.empty()) {
                        cell.error = o.error;
                        cell.provider_failure = o.provider_failure;
                    }
                    continue;
                }
                cell.parse_errors += o.extraction->report.error_count;
                counts.push_back(o.counts);
                grid.records.push_back({docs[i].id, task, shots, "", std::move(*o.extraction), o.counts});
            }
            if (cell.error.empty()) cell.scores = aggregate(counts);
            grid.cells.push_back(std::move(cell));
        }
    }

    const auto config = run_config(dataset, tasks, shot_counts, tmpl, settings);
    auto paths = persist("grid", dataset, config, grid.records, grid_scores_json(grid),
                         format_grid_table(grid, settings.reference_scores), client, settings);
    grid.manifest_id = paths.manifest_id;
    grid.run_dir = paths.dir;
    return grid;
}

AblationReport run_ablation(const Dataset& dataset, const std::vector<Task>& tasks, const PromptTemplate& tmpl,
                            LlmClient& client, const RunSettings& settings) {
    AblationReport report;
    report.dataset_name = dataset.schema.dataset_name;
    report.model_id = settings.llm.model_id;
    const auto& docs = dataset.documents;

    for (auto task : tasks) {
        if (!dataset.schema.supports(task)) {
            throw UsageError("dataset " + dataset.schema.dataset_name + " has no " + std::string(to_string(task)) + " annotations");
        }
        auto base = PromptConfig::with_all_components(task, dataset.schema);
        std::vector<AblationRow> rows;
        std::optional<double> baseline_f1;
        for (const auto& variant : ablation_variants(base)) {
            AblationRow row{variant.label, std::nullopt, std::nullopt, 0, "", false};
            std::vector<DocOutcome> outcomes(docs.size());
            parallel_for(docs.size(), settings.concurrency, [&](std::size_t i) {
                outcomes[i] = guarded([&] { return extract_document(docs[i], variant.config, tmpl, docs, client, settings.llm); },
                                      docs[i], dataset.schema);
            });
            std::vector<ConfusionCounts> counts;
            for (std::size_t i = 0; i < docs.size(); ++i) {
                auto& o = outcomes[i];
                if (!o.extraction) {
                    if (row.error.empty()) {
                        row.error = o.error;
                        row.provider_failure = o.provider_failure;
                    }
                    continue;
                }
                row.parsing_errors += o.extraction->report.error_count;
                counts.push_back(o.counts);
                report.records.push_back({docs[i].id, task, 0, variant.label, std::move(*o.extraction), o.counts});
            }
            if (row.error.empty()) {
                row.absolute_f1 = aggregate(counts).f1;
                if (rows.empty()) baseline_f1 = row.absolute_f1;
                if (baseline_f1) row.relative_f1 = *row.absolute_f1 - *baseline_f1;
            }
            rows.push_back(std::move(row));
        }
        report.tasks.emplace_back(task, std::move(rows));
    }

    const auto config = run_config(dataset, tasks, {0}, tmpl, settings);
    auto paths = persist("ablation", dataset, config, report.records, ablation_scores_json(report),
                         format_ablation_table(report, settings.reference_scores), client, settings);
    report.manifest_id = paths.manifest_id;
    report.run_dir = paths.dir;
    return report;
}

AgentResult run_agents(const Document& doc, const std::vector<std::string>& types, const PromptConfig& config,
                       const PromptTemplate& tmpl, std::span<const Document> pool, LlmClient& client,
                       const LlmSettings& llm) {
    if (types.empty()) throw UsageError("agent pipeline needs at least one mention type");
    std::vector<std::string> canonical;
    for (const auto& t : types) {
        auto c = config.schema.mention_type(t);
        if (!c) throw UsageError("unknown mention type '" + t + "' for " + config.schema.dataset_name);
        canonical.push_back(*c);
    }
    AgentResult result;
    result.predictions.task = Task::MD;
    for (const auto& type : canonical) {
        auto step_config = config;
        step_config.task = Task::MD;
        step_config.schema = config.schema.restricted_to({type});
        PromptExtras extras;
        extras.prior_output_lines = render_predictions(result.predictions);
        auto step = extract_document(doc, step_config, tmpl, pool, client, llm, extras);
        for (const auto& m : step.predictions.mentions) {
            bool seen = std::any_of(result.predictions.mentions.begin(), result.predictions.mentions.end(),
                                    [&](const GroundedMention& e) { return e.token_indices == m.token_indices; });
            if (!seen) result.predictions.mentions.push_back(m);
        }
        result.predictions.ungrounded_mentions.insert(result.predictions.ungrounded_mentions.end(),
                                                      step.predictions.ungrounded_mentions.begin(),
                                                      step.predictions.ungrounded_mentions.end());
        result.steps.push_back(std::move(step));
    }
    return result;
}

json grid_scores_json(const GridResult& grid) {
    json cells = json::array();
    for (const auto& c : grid.cells) {
        json j{{"task", std::string(to_string(c.task))}, {"shots", c.shot_count}, {"parse_errors", c.parse_errors}};
        if (c.scores) {
            j["scores"] = scores_to_json(*c.scores);
        } else {
            j["scores"] = nullptr;
            j["error"] = c.error;
        }
        cells.push_back(std::move(j));
    }
    return {{"dataset", grid.dataset_name}, {"model_id", grid.model_id}, {"cells", cells}};
}

json ablation_scores_json(const AblationReport& report) {
    json tasks = json::array();
    for (const auto& [task, rows] : report.tasks) {
        json rs = json::array();
        for (const auto& r : rows) {
            json j{{"label", r.label}, {"parsing_errors", r.parsing_errors}};
            j["absolute_f1"] = r.absolute_f1 ? json(*r.absolute_f1) : json(nullptr);
            j["relative_f1"] = r.relative_f1 ? json(*r.relative_f1) : json(nullptr);
            if (!r.error.empty()) j["error"] = r.error;
            rs.push_back(std::move(j));
        }
        tasks.push_back({{"task", std::string(to_string(task))}, {"rows", rs}});
    }
    return {{"dataset", report.dataset_name}, {"model_id", report.model_id}, {"tasks", tasks}};
}

std::string format_grid_table(const GridResult& grid, const json& refs) {
    std::ostringstream o;
    o << "Dataset: " << grid.dataset_name << "  Model: " << grid.model_id << "\n";
    o << pad("Task", 6) << pad("Setting", 26) << lpad("P", 6) << lpad("R", 6) << lpad("F1", 6) << lpad("Errors", 8) << "\n";
    o << std::string(58, '-') << "\n";
    std::optional<Task> current;
    for (const auto& c : grid.cells) {
        if (current != c.task) {
            current = c.task;
            if (const auto* rows = reference_rows(refs, grid.dataset_name, "", c.task)) {
                for (const auto& r : *rows) {
                    o << pad(std::string(to_string(c.task)), 6) << pad(r.at("label").get<std::string>() + " (reference)", 26)
                      << lpad(fixed2(r.at("p").get<double>()), 6) << lpad(fixed2(r.at("r").get<double>()), 6)
                      << lpad(fixed2(r.at("f1").get<double>()), 6) << lpad("", 8) << "\n";
                }
            }
        }
        o << pad(std::string(to_string(c.task)), 6) << pad(setting_name(c.shot_count), 26);
        if (c.scores) {
            o << lpad(fixed2(c.scores->precision), 6) << lpad(fixed2(c.scores->recall), 6) << lpad(fixed2(c.scores->f1), 6)
              << lpad(std::to_string(c.parse_errors), 8);
        } else {
            o << lpad("--", 6) << lpad("--", 6) << lpad("--", 6) << lpad("--", 8);
        }
        o << "\n";
    }
    return o.str();
}

std::string format_ablation_table(const AblationReport& report, const json& refs) {
    std::ostringstream o;
    o << "Dataset: " << report.dataset_name << "  Model: " << report.model_id << "  (zero-shot)\n";
    for (const auto& [task, rows] : report.tasks) {
        o << "\n" << task_long_name(task) << " (" << to_string(task) << ")\n";
        o << pad("Experiment", 24) << lpad("Relative F1", 13) << lpad("Absolute F1", 13) << lpad("Parsing Errors", 16) << "\n";
        o << std::string(66, '-') << "\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            o << pad(r.label, 24);
            if (!r.absolute_f1) {
                o << lpad("--", 13) << lpad("--", 13) << lpad("--", 16) << "  failed\n";
                continue;
            }
            std::string rel = i == 0 ? "--" : (r.relative_f1 ? signed2(*r.relative_f1) : "--");
            o << lpad(rel, 13) << lpad(fixed2(*r.absolute_f1), 13) << lpad(std::to_string(r.parsing_errors), 16) << "\n";
        }
        if (const auto* ref = reference_rows(refs, report.dataset_name, "ablation", task)) {
            o << "reference:\n";
            for (const auto& r : *ref) {
                std::string rel = r.at("relative_f1").is_null() ? "--" : signed2(r.at("relative_f1").get<double>());
                o << pad(r.at("label").get<std::string>(), 24) << lpad(rel, 13)
                  << lpad(fixed2(r.at("absolute_f1").get<double>()), 13)
                  << lpad(std::to_string(r.at("parsing_errors").get<long>()), 16) << "\n";
            }
        }
    }
    return o.str();
}

std::vector<StubRule> gold_echo_rules(const Dataset& dataset, const std::vector<Task>& tasks) {
    std::vector<StubRule> rules;
    for (auto task : tasks) {
        for (const auto& d : dataset.documents) {
            auto lines = render_gold(d, task, dataset.schema);
            rules.push_back({"Task: " + std::string(to_string(task)) + "\nInput: " + d.raw_text + "\n",
                             text::join(lines, "\n"), false});
        }
    }
    return rules;
}

} // namespace procx
