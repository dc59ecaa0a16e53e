"""Python interface to the procx extraction toolkit.

Documents, schemas and predictions are plain dicts in the canonical JSON layout.
"""

import json as _json

from . import _core
from ._core import LlmError, LoadError, UsageError, ValidationError

__version__ = _core.__version__

__all__ = [
    "LlmError", "LoadError", "UsageError", "ValidationError",
    "load_schema", "load_pet", "load_constraint_dataset", "load_canonical", "validate_document",
    "render_gold", "assemble_prompt", "ablation_labels", "parse", "extract_predictions", "score",
    "scores_from_counts", "generate_bpmn", "run_cli",
]


def _dump(value):
    return _json.dumps(value)


def load_schema(path):
    return _json.loads(_core.load_schema(str(path)))


def _schema(schema):
    # Accepts a schema dict or the path of a schema file.
    return schema if isinstance(schema, dict) else load_schema(schema)


def load_pet(path, schema):
    return _json.loads(_core.load_pet(str(path), _dump(_schema(schema))))


def load_constraint_dataset(path, schema):
    return _json.loads(_core.load_constraint_dataset(str(path), _dump(_schema(schema))))


def load_canonical(path):
    return _json.loads(_core.load_canonical(str(path)))


def validate_document(doc, schema):
    """Problems found in `doc`; empty when it is valid."""
    return _core.validate_document(_dump(doc), _dump(schema))


def render_gold(doc, task, schema):
    """Gold annotations of `task` as output-grammar lines."""
    return _core.render_gold(_dump(doc), task, _dump(schema))


def assemble_prompt(doc, task, schema, template_text, pool=(), shots=0, seed=0, components=()):
    """Prompt text, fingerprint, shot ids and component spans for one document."""
    out = _core.assemble_prompt(_dump(doc), task, _dump(schema), template_text, _dump(list(pool)), shots, seed,
                                list(components))
    return _json.loads(out)


def ablation_labels(task, schema):
    return _core.ablation_labels(task, _dump(schema))


def parse(raw, task, schema):
    return _json.loads(_core.parse(raw, task, _dump(schema)))


def extract_predictions(raw, task, doc, schema):
    """Parses a model response and grounds it in `doc`."""
    return _json.loads(_core.extract_predictions(raw, task, _dump(doc), _dump(schema)))


def score(predictions, doc, schema):
    return _json.loads(_core.score(_dump(predictions), _dump(doc), _dump(schema)))


def scores_from_counts(correct, predicted, gold):
    return _json.loads(_core.scores_from_counts(correct, predicted, gold))


def generate_bpmn(doc, schema):
    """BPMN 2.0 XML for an annotated document."""
    return _core.generate_bpmn(_dump(doc), _dump(schema))


def run_cli(args):
    """Runs the command-line tool in-process; returns (exit_code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])
