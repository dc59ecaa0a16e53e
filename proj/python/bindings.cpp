// Python bindings. Structured values cross the boundary as JSON text; the pure-Python
// wrapper in procx/__init__.py turns them into dicts and lists.

#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "procx/bpmn.hpp"
#include "procx/cli.hpp"
#include "procx/error.hpp"
#include "procx/pipeline.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

procx::SchemaDescriptor schema_of(const std::string& schema_json) {
    return procx::schema_from_json(json::parse(schema_json));
}

procx::Document document_of(const std::string& doc_json) { return procx::document_from_json(json::parse(doc_json)); }

std::string dataset_json(const procx::Dataset& ds) {
    json docs = json::array();
    for (const auto& d : ds.documents) docs.push_back(procx::document_to_json(d));
    return json{{"schema", procx::schema_to_json(ds.schema)}, {"documents", docs}}.dump();
}

std::string scores_json(const procx::ConfusionCounts& c) {
    auto j = procx::scores_to_json(procx::scores_from_counts(c));
    return j.dump();
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Process information extraction core";

    py::register_exception<procx::LoadError>(m, "LoadError");
    py::register_exception<procx::ValidationError>(m, "ValidationError");
    py::register_exception<procx::LlmError>(m, "LlmError");
    py::register_exception<procx::UsageError>(m, "UsageError", PyExc_ValueError);

    m.attr("__version__") = procx::toolkit_version();

    m.def("load_schema", [](const std::string& path) { return procx::schema_to_json(procx::load_schema(path)).dump(); });
    m.def("load_pet", [](const std::string& path, const std::string& schema) {
        return dataset_json(procx::load_pet(path, schema_of(schema)));
    });
    m.def("load_constraint_dataset", [](const std::string& path, const std::string& schema) {
        return dataset_json(procx::load_constraint_dataset(path, schema_of(schema)));
    });
    m.def("load_canonical", [](const std::string& path) { return dataset_json(procx::load_canonical(path)); });
    m.def("validate_document", [](const std::string& doc, const std::string& schema) {
        return procx::validate(document_of(doc), schema_of(schema));
    });

    m.def("render_gold", [](const std::string& doc, const std::string& task, const std::string& schema) {
        return procx::render_gold(document_of(doc), procx::task_from_string(task), schema_of(schema));
    });

    m.def("assemble_prompt",
          [](const std::string& doc, const std::string& task, const std::string& schema, const std::string& template_text,
             const std::string& pool_json, int shots, std::uint64_t seed, std::vector<std::string> components) {
              auto config = procx::PromptConfig::with_all_components(procx::task_from_string(task), schema_of(schema));
              if (!components.empty()) {
                  config.enabled.clear();
                  for (const auto& c : components) config.enabled.insert(procx::component_from_string(c));
              }
              config.shot_count = shots;
              config.shot_seed = seed;
              std::vector<procx::Document> pool;
              for (const auto& d : json::parse(pool_json)) pool.push_back(procx::document_from_json(d));
              auto tmpl = procx::PromptTemplate::parse(template_text);
              auto p = procx::assemble(config, tmpl, document_of(doc), pool);
              json spans = json::object();
              for (const auto& [kind, span] : p.component_spans) {
                  spans[std::string(procx::to_string(kind))] = {span.offset, span.length};
              }
              return json{{"text", p.text},
                          {"fingerprint", p.config_fingerprint},
                          {"shot_ids", p.shot_ids},
                          {"component_spans", spans}}
                  .dump();
          });

    m.def("ablation_labels", [](const std::string& task, const std::string& schema) {
        std::vector<std::string> labels;
        auto base = procx::PromptConfig::with_all_components(procx::task_from_string(task), schema_of(schema));
        for (const auto& v : procx::ablation_variants(base)) labels.push_back(v.label);
        return labels;
    });

    m.def("parse", [](const std::string& raw, const std::string& task, const std::string& schema) {
        return procx::report_to_json(procx::parse(raw, procx::task_from_string(task), schema_of(schema))).dump();
    });

    m.def("extract_predictions", [](const std::string& raw, const std::string& task, const std::string& doc,
                                     const std::string& schema) {
        auto t = procx::task_from_string(task);
        auto d = document_of(doc);
        auto report = procx::parse(raw, t, schema_of(schema));
        return procx::predictions_to_json(procx::predictions_from_report(report, t, d)).dump();
    });

    m.def("score", [](const std::string& predictions, const std::string& doc, const std::string& schema) {
        auto p = procx::predictions_from_json(json::parse(predictions));
        return scores_json(procx::count_predictions(p, document_of(doc), schema_of(schema)));
    });

    m.def("scores_from_counts", [](long correct, long predicted, long gold) {
        return scores_json(procx::ConfusionCounts{correct, predicted, gold});
    });

    m.def("generate_bpmn", [](const std::string& doc, const std::string& schema) {
        return procx::bpmn::generate(document_of(doc), schema_of(schema)).xml;
    });

    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
            py::gil_scoped_release release;
            code = procx::run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
    });
}
