#!/usr/bin/env python3
"""Record the replay-regression fixture under tests/fixtures/replay/.

Ten PET documents are run through `procx grid` (tasks MD and RE, 0 and 1 shots) against
a stub that returns gold output with deterministic noise: dropped lines, a wrong type,
an invented line, a malformed line and some prose. The cache directory and the resulting scores.json and
table.txt are kept; replaying the cache must reproduce both files byte for byte.

Needs the built CLI and the python module (build/python on PYTHONPATH).
"""

import argparse
import json
import os
import random
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"
OUT = ROOT / "tests" / "fixtures" / "replay"
TASKS = ["MD", "RE"]
SHOTS = [0, 1]
SEED = 7
MODEL = "gpt-4o"
EPOCH = "1700000000"


def noisy(lines, rng, task, schema):
    kept = [l for l in lines if rng.random() > 0.25]
    if kept and rng.random() < 0.5:
        i = rng.randrange(len(kept))
        fields = kept[i].split("|")
        types = schema["mention_types"] if task == "MD" else schema["relation_types"]
        fields[0] = rng.choice(types)
        kept[i] = "|".join(fields)
    if rng.random() < 0.5:
        kept.append("Activity|invented step" if task == "MD" else "Flow|invented step|other step")
    if rng.random() < 0.3:
        kept.insert(rng.randrange(len(kept) + 1), "%s|" % rng.choice(schema["mention_types"]))
    body = "\n".join(kept)
    return "Facts:\n- the text describes a process\n\nOutput:\n" + body + "\n"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cli", default=str(ROOT / "build" / "tools" / "procx"))
    ap.add_argument("--docs", type=int, default=10)
    args = ap.parse_args()

    sys.path.insert(0, str(ROOT / "build" / "python"))
    import procx

    schema = procx.load_schema(DATA / "schemas" / "pet.json")
    ds = procx.load_pet(DATA / "datasets" / "pet.jsonl", schema)
    docs = ds["documents"][: args.docs]
    template = (DATA / "templates" / "default.prompt").read_text()

    if OUT.exists():
        shutil.rmtree(OUT)
    (OUT / "expected").mkdir(parents=True)
    src_lines = (DATA / "datasets" / "pet.jsonl").read_text().splitlines()
    ids = {d["id"] for d in docs}
    subset = [l for l in src_lines if json.loads(l)["document name"] in ids]
    (OUT / "pet10.jsonl").write_text("\n".join(subset) + "\n")

    rng = random.Random(SEED)
    rules = []
    for task in TASKS:
        for doc in docs:
            gold = procx.render_gold(doc, task, schema)
            # Zero-shot prompts are matched on their full text, so 1-shot prompts fall
            # through to the second rule and get a different draw of noise.
            zero = procx.assemble_prompt(doc, task, schema, template, pool=docs, shots=0)
            rules.append({"contains": zero["text"], "response": noisy(gold, rng, task, schema)})
            rules.append({"contains": "Task: %s\nInput: %s\n" % (task, doc["text"]),
                          "response": noisy(gold, rng, task, schema)})

    with tempfile.TemporaryDirectory() as tmp:
        rules_path = Path(tmp) / "rules.json"
        rules_path.write_text(json.dumps(rules, indent=2))
        env = dict(os.environ, SOURCE_DATE_EPOCH=EPOCH)
        cmd = [args.cli, "grid", "--dataset", str(OUT / "pet10.jsonl"), "--format", "pet", "--schema",
               str(DATA / "schemas" / "pet.json"), "--data-dir", str(DATA), "--tasks", ",".join(TASKS),
               "--shot-counts", ",".join(map(str, SHOTS)), "--seed", str(SEED), "--model", MODEL,
               "--stub-rules", str(rules_path), "--cache-dir", str(OUT / "cache"), "--out", str(Path(tmp) / "runs")]
        subprocess.run(cmd, check=True, env=env)
        run = next((Path(tmp) / "runs").iterdir())
        for name in ("scores.json", "table.txt"):
            shutil.copy(run / name, OUT / "expected" / name)

    (OUT / "config.json").write_text(json.dumps(
        {"dataset": "pet10.jsonl", "tasks": TASKS, "shot_counts": SHOTS, "seed": SEED, "model": MODEL},
        indent=2) + "\n")
    print("recorded", len(docs), "documents into", OUT)


if __name__ == "__main__":
    main()
