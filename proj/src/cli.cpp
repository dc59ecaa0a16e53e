#include "procx/cli.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "procx/bpmn.hpp"
#include "procx/error.hpp"
#include "procx/pipeline.hpp"
#include "procx/text.hpp"

namespace procx {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Raw option values; empty means "not given on the command line".
struct Options {
    std::string config_file;
    std::string data_dir;
    std::string dataset;
    std::string format;
    std::string schema;
    std::string task;
    std::string tasks;
    std::string shots;
    std::string shot_counts;
    std::string seed;
    std::string model;
    std::string temperature;
    std::string max_output_tokens;
    std::string mode;
    std::string cache_dir;
    std::string stub_rules;
    std::string endpoint;
    std::string template_path;
    std::string out;
    std::string doc;
    std::string concurrency;
    std::string predictions;
    std::string in;
    std::string annotations;
    std::string older_than;
    std::string agents;
    std::string reference;
    bool fixed_shots = false;
};

class Resolver {
public:
    explicit Resolver(json file) : file_(std::move(file)) {}

    // Flag, then environment, then config file, then default.
    std::string get(const std::string& flag, const char* env, const char* key, const std::string& fallback) const {
        if (!flag.empty()) return flag;
        if (env) {
            if (const char* v = std::getenv(env); v && *v) return v;
        }
        if (key && file_.contains(key)) {
            const auto& v = file_[key];
            return v.is_string() ? v.get<std::string>() : v.dump();
        }
        return fallback;
    }

private:
    json file_;
};

json read_json_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw LoadError("cannot open " + p.string());
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw LoadError(p.string(), 1, e.what());
    }
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw LoadError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

long parse_long(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        long v = std::stol(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("invalid " + what + " '" + s + "'");
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("invalid " + what + " '" + s + "'");
}

std::vector<Task> parse_tasks(const std::string& s) {
    std::vector<Task> out;
    for (auto part : text::split(s, ',')) {
        auto t = text::trim(part);
        if (!t.empty()) out.push_back(task_from_string(t));
    }
    return out;
}

std::vector<int> parse_ints(const std::string& s, const std::string& what) {
    std::vector<int> out;
    for (auto part : text::split(s, ',')) {
        auto t = std::string(text::trim(part));
        if (t.empty()) continue;
        auto v = parse_long(t, what);
        if (v < 0) throw UsageError(what + " must be >= 0");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

// Unix seconds, or a UTC date YYYY-MM-DD.
std::int64_t parse_timestamp(const std::string& s) {
    if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
        std::tm tm{};
        std::istringstream in(s);
        in >> std::get_time(&tm, "%Y-%m-%d");
        if (in.fail()) throw UsageError("invalid date '" + s + "'");
        return static_cast<std::int64_t>(timegm(&tm));
    }
    return parse_long(s, "timestamp");
}

struct Context {
    Options opt;
    Resolver resolve;
    std::ostream& out;
    std::ostream& err;

    fs::path data_dir() const { return resolve.get(opt.data_dir, "PROCX_DATA_DIR", "data_dir", PROCX_DEFAULT_DATA_DIR); }

    SchemaDescriptor schema_named(const std::string& name) const {
        return load_schema(data_dir() / "schemas" / (text::to_lower(name) + ".json"));
    }

    Dataset dataset() const {
        auto spec = resolve.get(opt.dataset, nullptr, "dataset", "");
        if (spec.empty()) throw UsageError("--dataset is required");
        const auto lowered = text::to_lower(spec);
        // Shipped datasets: PET in its export layout, the constraint sets in canonical form.
        if (lowered == "pet") return load_pet(data_dir() / "datasets" / "pet.jsonl", schema_named("pet"));
        if (lowered == "decon" || lowered == "atdp") {
            return load_constraint_dataset(data_dir() / "datasets" / (lowered + ".jsonl"), schema_named(lowered));
        }
        auto format = resolve.get(opt.format, nullptr, "format", "canonical");
        if (format == "pet") {
            auto schema = opt.schema.empty() ? schema_named("pet") : load_schema(opt.schema);
            return load_pet(spec, schema);
        }
        if (format == "constraint") {
            if (opt.schema.empty()) throw UsageError("--schema is required with --format constraint");
            return load_constraint_dataset(spec, load_schema(opt.schema));
        }
        if (format != "canonical") throw UsageError("unknown --format '" + format + "'");
        auto ds = load_canonical(spec);
        if (!opt.schema.empty()) ds.schema = load_schema(opt.schema);
        if (ds.schema.dataset_name.empty()) throw UsageError("dataset has no schema header; pass --schema");
        return ds;
    }

    PromptTemplate prompt_template() const {
        auto p = resolve.get(opt.template_path, nullptr, "template", "");
        return PromptTemplate::load(p.empty() ? data_dir() / "templates" / "default.prompt" : fs::path(p));
    }

    LlmSettings llm() const {
        LlmSettings s;
        s.model_id = resolve.get(opt.model, "PROCX_MODEL", "model", s.model_id);
        s.temperature = parse_double(resolve.get(opt.temperature, nullptr, "temperature", "0"), "temperature");
        if (s.temperature < 0) throw UsageError("temperature must be >= 0");
        auto max = resolve.get(opt.max_output_tokens, nullptr, "max_output_tokens", "");
        if (!max.empty()) s.max_output_tokens = static_cast<int>(parse_long(max, "max output tokens"));
        return s;
    }

    int concurrency() const {
        auto v = parse_long(resolve.get(opt.concurrency, nullptr, "concurrency", "4"), "concurrency");
        if (v < 1) throw UsageError("concurrency must be >= 1");
        return static_cast<int>(v);
    }

    std::uint64_t seed() const {
        return static_cast<std::uint64_t>(parse_long(resolve.get(opt.seed, nullptr, "seed", "0"), "seed"));
    }

    std::optional<fs::path> cache_dir() const {
        auto d = resolve.get(opt.cache_dir, "PROCX_CACHE_DIR", "cache_dir", "");
        if (d.empty()) return std::nullopt;
        return fs::path(d);
    }

    std::unique_ptr<LlmClient> client() const {
        const auto mode = cache_mode_from_string(resolve.get(opt.mode, "PROCX_MODE", "mode", "record"));
        std::shared_ptr<Provider> provider;
        auto stub = resolve.get(opt.stub_rules, nullptr, "stub_rules", "");
        if (!stub.empty()) {
            provider = stub_provider(load_stub_rules(stub));
        } else if (mode == CacheMode::record) {
            HttpProviderConfig cfg;
            cfg.endpoint = resolve.get(opt.endpoint, "PROCX_ENDPOINT", "endpoint", cfg.endpoint);
            cfg.apply_environment();
            if (!opt.endpoint.empty()) cfg.endpoint = opt.endpoint;
            cfg.max_concurrency = concurrency();
            provider = std::make_shared<HttpProvider>(cfg, make_http_transport());
        }
        return std::make_unique<LlmClient>(provider, cache_dir(), mode);
    }

    json reference_scores() const {
        auto p = resolve.get(opt.reference, nullptr, "reference", "");
        fs::path path = p.empty() ? data_dir() / "reference_scores.json" : fs::path(p);
        if (p.empty() && !fs::exists(path)) return json::object();
        return read_json_file(path);
    }

    RunSettings run_settings() const {
        RunSettings s;
        s.llm = llm();
        s.seed = seed();
        s.fixed_shots = opt.fixed_shots;
        s.concurrency = concurrency();
        s.runs_dir = fs::path(opt.out.empty() ? "runs" : opt.out);
        s.reference_scores = reference_scores();
        return s;
    }
};

void print_scores(std::ostream& out, const std::string& label, const TaskScores& s) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-12s P=%.2f R=%.2f F1=%.2f (correct %ld, predicted %ld, gold %ld)\n", label.c_str(),
                  s.precision, s.recall, s.f1, s.counts.correct, s.counts.predicted, s.counts.gold);
    out << buf;
}

int cmd_extract(Context& c) {
    auto ds = c.dataset();
    auto task = task_from_string(c.resolve.get(c.opt.task, nullptr, "task", "MD"));
    if (!ds.schema.supports(task)) throw UsageError("dataset has no " + std::string(to_string(task)) + " annotations");
    const int shots = static_cast<int>(parse_long(c.resolve.get(c.opt.shots, nullptr, "shots", "0"), "shots"));
    auto tmpl = c.prompt_template();
    auto client = c.client();
    auto llm = c.llm();
    const auto seed = c.seed();

    std::vector<const Document*> targets;
    if (!c.opt.doc.empty()) {
        const auto* d = ds.find(c.opt.doc);
        if (!d) throw UsageError("no document '" + c.opt.doc + "' in dataset");
        targets.push_back(d);
    } else {
        for (const auto& d : ds.documents) targets.push_back(&d);
    }

    std::vector<std::string> agent_types;
    for (auto part : text::split(c.opt.agents, ',')) {
        if (!text::trim(part).empty()) agent_types.emplace_back(text::trim(part));
    }
    if (!agent_types.empty() && task != Task::MD) throw UsageError("--agents applies to MD only");

    std::ostringstream lines;
    std::vector<ConfusionCounts> counts;
    for (const auto* d : targets) {
        auto config = PromptConfig::with_all_components(task, ds.schema);
        config.shot_count = shots;
        config.shot_seed = document_seed(seed, d->id);
        json record;
        Predictions predictions;
        if (agent_types.empty()) {
            auto x = extract_document(*d, config, tmpl, ds.documents, *client, llm);
            predictions = x.predictions;
            record = {{"document_id", d->id},
                      {"task", std::string(to_string(task))},
                      {"shots", shots},
                      {"fingerprint", x.prompt.config_fingerprint},
                      {"shot_ids", x.prompt.shot_ids},
                      {"raw_response", x.response.text},
                      {"parse", report_to_json(x.report)}};
        } else {
            auto r = run_agents(*d, agent_types, config, tmpl, ds.documents, *client, llm);
            predictions = r.predictions;
            json steps = json::array();
            for (const auto& s : r.steps) steps.push_back({{"raw_response", s.response.text}, {"parse", report_to_json(s.report)}});
            record = {{"document_id", d->id}, {"task", "MD"}, {"shots", shots}, {"agents", agent_types}, {"steps", steps}};
        }
        record["predictions"] = predictions_to_json(predictions);
        auto cc = count_predictions(predictions, *d, ds.schema);
        record["counts"] = {{"correct", cc.correct}, {"predicted", cc.predicted}, {"gold", cc.gold}};
        counts.push_back(cc);
        lines << record.dump() << "\n";
    }

    if (c.opt.out.empty()) {
        c.out << lines.str();
    } else {
        fs::path p(c.opt.out);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream f(p, std::ios::binary | std::ios::trunc);
        if (!f) throw LoadError("cannot write " + p.string());
        f << lines.str();
        print_scores(c.out, std::string(to_string(task)), aggregate(counts));
    }
    return kExitOk;
}

int cmd_evaluate(Context& c) {
    auto ds = c.dataset();
    if (c.opt.predictions.empty()) throw UsageError("--predictions is required");
    std::optional<Task> only;
    if (!c.opt.task.empty()) only = task_from_string(c.opt.task);

    std::map<std::pair<std::string, int>, std::vector<ConfusionCounts>> groups;
    std::ifstream in(c.opt.predictions);
    if (!in) throw LoadError("cannot open " + c.opt.predictions);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (text::trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw LoadError(c.opt.predictions, number, e.what());
        }
        const auto doc_id = j.value("document_id", "");
        const auto* gold = ds.find(doc_id);
        if (!gold) throw ValidationError(doc_id, "not in the gold dataset");
        auto p = predictions_from_json(j.at("predictions"));
        if (only && p.task != *only) continue;
        if (!j.value("variant", "").empty()) continue;
        groups[{std::string(to_string(p.task)), j.value("shots", 0)}].push_back(count_predictions(p, *gold, ds.schema));
    }
    for (const auto& [key, counts] : groups) {
        print_scores(c.out, key.first + " " + std::to_string(key.second) + "-shot", aggregate(counts));
    }
    return kExitOk;
}

int cmd_grid(Context& c) {
    auto ds = c.dataset();
    auto task_spec = c.resolve.get(c.opt.tasks.empty() ? c.opt.task : c.opt.tasks, nullptr, "tasks", "");
    auto tasks = task_spec.empty() ? ds.schema.tasks : parse_tasks(task_spec);
    auto shots = parse_ints(c.resolve.get(c.opt.shot_counts, nullptr, "shot_counts", "0,1,3"), "shot count");
    auto tmpl = c.prompt_template();
    auto client = c.client();
    auto grid = run_grid(ds, tasks, shots, tmpl, *client, c.run_settings());
    c.out << format_grid_table(grid, c.run_settings().reference_scores);
    if (grid.run_dir) c.out << "run: " << grid.run_dir->string() << "\n";
    bool provider = false, failed = false;
    for (const auto& cell : grid.cells) {
        if (!cell.error.empty()) {
            failed = true;
            provider = provider || cell.provider_failure;
            c.err << "warning: " << to_string(cell.task) << " " << cell.shot_count << "-shot: " << cell.error << "\n";
        }
    }
    if (failed) return provider ? kExitProvider : kExitData;
    return kExitOk;
}

int cmd_ablate(Context& c) {
    auto ds = c.dataset();
    auto task_spec = c.resolve.get(c.opt.tasks.empty() ? c.opt.task : c.opt.tasks, nullptr, "tasks", "MD,RE");
    auto tmpl = c.prompt_template();
    auto client = c.client();
    auto settings = c.run_settings();
    auto report = run_ablation(ds, parse_tasks(task_spec), tmpl, *client, settings);
    c.out << format_ablation_table(report, settings.reference_scores);
    if (report.run_dir) c.out << "run: " << report.run_dir->string() << "\n";
    bool provider = false, failed = false;
    for (const auto& [task, rows] : report.tasks) {
        for (const auto& r : rows) {
            if (r.error.empty()) continue;
            failed = true;
            provider = provider || r.provider_failure;
            c.err << "warning: " << to_string(task) << " " << r.label << ": " << r.error << "\n";
        }
    }
    if (failed) return provider ? kExitProvider : kExitData;
    return kExitOk;
}

int cmd_generate_bpmn(Context& c) {
    if (c.opt.in.empty()) throw UsageError("--in is required");
    if (c.opt.out.empty()) throw UsageError("--out is required");

    // Either a single document object or a canonical dataset file.
    Document doc;
    std::optional<SchemaDescriptor> schema;
    const auto content = read_text(c.opt.in);
    json whole = json::parse(content, nullptr, false);
    if (!whole.is_discarded() && whole.is_object() && whole.contains("tokens")) {
        doc = document_from_json(whole);
    } else {
        auto ds = load_canonical(c.opt.in);
        if (!ds.schema.dataset_name.empty()) schema = ds.schema;
        if (!c.opt.doc.empty()) {
            const auto* d = ds.find(c.opt.doc);
            if (!d) throw UsageError("no document '" + c.opt.doc + "' in " + c.opt.in);
            doc = *d;
        } else if (ds.documents.size() == 1) {
            doc = ds.documents.front();
        } else {
            throw UsageError("input holds " + std::to_string(ds.documents.size()) + " documents; pick one with --doc");
        }
    }
    if (!c.opt.schema.empty()) {
        schema = load_schema(c.opt.schema);
    } else if (!schema) {
        schema = c.schema_named("pet");
    }
    if (auto problems = validate(doc); !problems.empty()) throw ValidationError(doc.id, problems.front());

    const auto annotations = c.opt.annotations.empty() ? std::string("gold") : c.opt.annotations;
    if (annotations == "predicted") {
        if (c.opt.predictions.empty()) throw UsageError("--annotations predicted needs --predictions");
        std::optional<Predictions> md, re;
        std::ifstream in(c.opt.predictions);
        if (!in) throw LoadError("cannot open " + c.opt.predictions);
        std::string line;
        while (std::getline(in, line)) {
            if (text::trim(line).empty()) continue;
            auto j = json::parse(line);
            if (j.value("document_id", "") != doc.id) continue;
            auto p = predictions_from_json(j.at("predictions"));
            if (p.task == Task::MD) md = p;
            if (p.task == Task::RE) re = p;
        }
        if (!md && !re) throw ValidationError(doc.id, "no MD or RE predictions in " + c.opt.predictions);
        doc = document_from_predictions(doc, md ? &*md : nullptr, re ? &*re : nullptr);
    } else if (annotations != "gold") {
        throw UsageError("--annotations must be gold or predicted");
    }

    auto generated = bpmn::generate(doc, *schema);
    fs::path p(c.opt.out);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw LoadError("cannot write " + p.string());
    f << generated.xml;
    for (const auto& w : generated.warnings) c.err << "warning: " << w << "\n";
    const auto& g = generated.model.graph;
    c.out << "wrote " << p.string() << " (" << g.lanes.size() << " lanes, " << g.nodes.size() << " nodes, "
          << g.sequence_flows.size() << " sequence flows, " << g.message_flows.size() << " message flows)\n";
    return kExitOk;
}

int cmd_cache(Context& c, const std::string& action) {
    auto dir = c.cache_dir();
    if (!dir) throw UsageError("--cache-dir is required");
    ResponseCache cache(*dir);
    if (action == "list") {
        for (const auto& e : cache.list()) {
            c.out << e.digest << "  " << e.created_at << "  " << e.request.model_id << "  "
                  << e.response.output_token_count << " tokens\n";
        }
        return kExitOk;
    }
    std::optional<std::int64_t> older;
    if (!c.opt.older_than.empty()) older = parse_timestamp(c.opt.older_than);
    c.out << "removed " << cache.purge(older) << " entries\n";
    return kExitOk;
}

void add_common(CLI::App* app, Options& o) {
    app->add_option("--config", o.config_file, "JSON file with default option values");
    app->add_option("--data-dir", o.data_dir, "Directory holding schemas/, templates/ and datasets/");
}

void add_dataset(CLI::App* app, Options& o) {
    app->add_option("--dataset", o.dataset, "Dataset file, or one of pet, decon, atdp");
    app->add_option("--format", o.format, "Dataset file format: canonical, pet or constraint");
    app->add_option("--schema", o.schema, "Schema descriptor JSON");
}

void add_llm(CLI::App* app, Options& o) {
    app->add_option("--model", o.model, "Model id sent to the provider");
    app->add_option("--temperature", o.temperature, "Sampling temperature (default 0)");
    app->add_option("--max-output-tokens", o.max_output_tokens, "Upper bound on response length");
    app->add_option("--mode", o.mode, "Cache mode: record or replay");
    app->add_option("--cache-dir", o.cache_dir, "Response cache directory");
    app->add_option("--stub-rules", o.stub_rules, "Answer prompts from a stub rule file instead of HTTP");
    app->add_option("--endpoint", o.endpoint, "Chat-completions base URL");
    app->add_option("--template", o.template_path, "Prompt template file");
    app->add_option("--concurrency", o.concurrency, "Concurrent requests (default 4)");
    app->add_option("--seed", o.seed, "Shot sampling seed");
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Process information extraction with prompted language models", "procx"};
    app.set_version_flag("--version", std::string(PROCX_VERSION));
    app.require_subcommand(1);

    auto* extract = app.add_subcommand("extract", "Extract one document or a whole dataset");
    add_common(extract, o);
    add_dataset(extract, o);
    add_llm(extract, o);
    extract->add_option("--task", o.task, "MD, ER, RE or CE");
    extract->add_option("--shots", o.shots, "Number of few-shot examples");
    extract->add_option("--doc", o.doc, "Document id (default: all documents)");
    extract->add_option("--agents", o.agents, "Comma-separated mention types run as chained single-type prompts");
    extract->add_option("--out", o.out, "Write JSONL records here instead of stdout");

    auto* evaluate = app.add_subcommand("evaluate", "Score a predictions file against gold");
    add_common(evaluate, o);
    add_dataset(evaluate, o);
    evaluate->add_option("--predictions", o.predictions, "predictions.jsonl from extract or a run directory");
    evaluate->add_option("--task", o.task, "Only score this task");

    auto* grid = app.add_subcommand("grid", "Score every task and shot count over a dataset");
    add_common(grid, o);
    add_dataset(grid, o);
    add_llm(grid, o);
    grid->add_option("--tasks", o.tasks, "Comma-separated tasks (default: all the dataset supports)");
    grid->add_option("--task", o.task, "Single task");
    grid->add_option("--shot-counts", o.shot_counts, "Comma-separated shot counts (default 0,1,3)");
    grid->add_flag("--fixed-shots", o.fixed_shots, "Use one shot set for every document");
    grid->add_option("--out", o.out, "Runs directory (default runs)");
    grid->add_option("--reference", o.reference, "Reference score JSON for the table");

    auto* ablate = app.add_subcommand("ablate", "Zero-shot prompt ablation");
    add_common(ablate, o);
    add_dataset(ablate, o);
    add_llm(ablate, o);
    ablate->add_option("--tasks", o.tasks, "Comma-separated tasks (default MD,RE)");
    ablate->add_option("--task", o.task, "Single task");
    ablate->add_option("--out", o.out, "Runs directory (default runs)");
    ablate->add_option("--reference", o.reference, "Reference score JSON for the table");

    auto* gen = app.add_subcommand("generate-bpmn", "Compile an annotated document to BPMN 2.0 XML");
    add_common(gen, o);
    gen->add_option("--in", o.in, "Canonical document (single object or dataset file)");
    gen->add_option("--doc", o.doc, "Document id when --in holds several");
    gen->add_option("--schema", o.schema, "Schema descriptor JSON (default: file header, else PET)");
    gen->add_option("--annotations", o.annotations, "gold or predicted")->check(CLI::IsMember({"gold", "predicted"}));
    gen->add_option("--predictions", o.predictions, "predictions.jsonl holding MD/RE records for the document");
    gen->add_option("--out", o.out, "Output .bpmn file");

    auto* cache = app.add_subcommand("cache", "Inspect or purge the response cache");
    cache->require_subcommand(1);
    auto* cache_list = cache->add_subcommand("list", "List cache entries");
    auto* cache_purge = cache->add_subcommand("purge", "Remove cache entries");
    for (auto* sub : {cache_list, cache_purge}) {
        add_common(sub, o);
        sub->add_option("--cache-dir", o.cache_dir, "Response cache directory");
    }
    cache_purge->add_option("--older-than", o.older_than, "Unix seconds or YYYY-MM-DD; default removes all");

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error[usage]: " << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    try {
        json file = json::object();
        if (!o.config_file.empty()) file = read_json_file(o.config_file);
        Context c{o, Resolver(std::move(file)), out, err};
        if (*extract) return cmd_extract(c);
        if (*evaluate) return cmd_evaluate(c);
        if (*grid) return cmd_grid(c);
        if (*ablate) return cmd_ablate(c);
        if (*gen) return cmd_generate_bpmn(c);
        if (*cache_list) return cmd_cache(c, "list");
        if (*cache_purge) return cmd_cache(c, "purge");
        err << "error[usage]: no subcommand\n" << app.help();
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "error[usage]: " << e.what() << "\n";
        return kExitUsage;
    } catch (const LlmError& e) {
        if (e.kind() == LlmError::Kind::cache_io) {
            err << "error[data]: " << e.what() << "\n";
            return kExitData;
        }
        err << "error[provider]: " << e.what() << "\n";
        return kExitProvider;
    } catch (const LoadError& e) {
        err << "error[data]: " << e.what() << "\n";
        return kExitData;
    } catch (const ValidationError& e) {
        err << "error[data]: " << e.what() << "\n";
        return kExitData;
    } catch (const json::exception& e) {
        err << "error[data]: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        err << "error[data]: " << e.what() << "\n";
        return kExitData;
    }
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

} // namespace procx
