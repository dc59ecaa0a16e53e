import json
import os
from pathlib import Path

import procx

SOURCE = Path(os.environ.get("PROCX_SOURCE_DIR", Path(__file__).resolve().parents[2]))
DATA = SOURCE / "data"


def pet():
    return procx.load_pet(str(DATA / "datasets" / "pet.jsonl"), str(DATA / "schemas" / "pet.json"))


def test_load_and_validate():
    ds = pet()
    assert ds["schema"]["dataset_name"] == "PET"
    assert len(ds["documents"]) == 45
    assert procx.validate_document(ds["documents"][0], ds["schema"]) == []


def test_gold_rendering_parses_back():
    ds = pet()
    doc = ds["documents"][0]
    lines = procx.render_gold(doc, "MD", ds["schema"])
    report = procx.parse("\n".join(lines), "MD", ds["schema"])
    assert report["error_count"] == 0
    assert report["items"] == len(doc["mentions"])
    preds = procx.extract_predictions("\n".join(lines), "MD", doc, ds["schema"])
    scores = procx.score(preds, doc, ds["schema"])
    assert scores["f1"] == 1.0


def test_scores_from_counts():
    s = procx.scores_from_counts(2, 4, 5)
    assert abs(s["precision"] - 0.5) < 1e-12
    assert abs(s["recall"] - 0.4) < 1e-12
    assert abs(s["f1"] - 4 / 9) < 1e-9


def test_prompt_assembly():
    ds = pet()
    template = (DATA / "templates" / "default.prompt").read_text()
    prompt = procx.assemble_prompt(ds["documents"][3], "RE", ds["schema"], template, pool=ds["documents"],
                                   shots=1, seed=3)
    assert len(prompt["shot_ids"]) == 1
    assert ds["documents"][3]["id"] not in prompt["shot_ids"]
    assert ds["documents"][3]["text"] in prompt["text"]
    assert procx.ablation_labels("RE", ds["schema"])[0] == "Baseline"


def test_bpmn_generation():
    doc = json.loads((SOURCE / "tests" / "fixtures" / "bpmn" / "doc-3.3.json").read_text())
    xml = procx.generate_bpmn(doc, procx.load_schema(str(DATA / "schemas" / "pet.json")))
    assert xml.startswith("<?xml")
    assert xml.count("<bpmn:lane ") == 2


def test_cli_bridge():
    code, out, err = procx.run_cli(["--version"])
    assert code == 0
    code, out, err = procx.run_cli(["frobnicate"])
    assert code == 1
    assert "error[usage]" in err
