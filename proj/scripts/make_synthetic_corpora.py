#!/usr/bin/env python3
"""Generate the synthetic stand-in corpora shipped under data/datasets/.

PET-style documents are written in the PET export layout, DECON- and ATDP-style
documents in the canonical interchange format. Output is deterministic for a seed.

Every mention surface is unique within its document (case-insensitive) and its first
occurrence in the token stream is the annotated one, so gold output rendered as text
grounds back to exactly the annotated spans.
"""

import argparse
import json
import random
from pathlib import Path

ACTOR_NOUNS = ["clerk", "manager", "secretary", "accountant", "supervisor", "inspector", "courier",
               "technician", "assistant", "customer", "supplier", "auditor", "cashier", "nurse",
               "engineer", "buyer", "planner", "dispatcher", "analyst", "consultant", "librarian",
               "officer", "registrar", "controller"]
PRONOUNS = ["he", "she", "they"]
ACTIVITIES = ["checks", "registers", "approves", "archives", "reviews", "signs", "prints", "forwards",
              "validates", "rejects", "calculates", "updates", "prepares", "submits", "files",
              "records", "verifies", "completes", "collects", "delivers", "inspects", "stores",
              "scans", "packs", "ships", "confirms", "drafts", "evaluates", "fills out", "hands over",
              "uploads", "copies", "stamps", "translates", "measures"]
DATA_NOUNS = ["invoice", "report", "form", "contract", "payment", "receipt", "request", "application",
              "certificate", "delivery note", "budget", "offer", "schedule", "checklist", "ticket",
              "quote", "statement", "protocol", "parcel", "sample", "letter", "voucher", "manual",
              "license", "drawing"]
CONDITIONS = [["everything", "is", "correct"], ["the", "check", "fails"], ["approval", "is", "granted"],
              ["the", "deadline", "has", "passed"], ["the", "customer", "agrees"],
              ["information", "is", "missing"], ["the", "amount", "is", "too", "high"]]
FURTHER = [["carefully"], ["immediately"], ["by", "email"], ["in", "the", "system"], ["twice"]]

# (lemma, past participle) pairs and objects for constraint sentences.
VERBS = [("register", "registered"), ("examine", "examined"), ("approve", "approved"),
         ("archive", "archived"), ("check", "checked"), ("sign", "signed"), ("send", "sent"),
         ("pay", "paid"), ("review", "reviewed"), ("file", "filed"), ("print", "printed"),
         ("validate", "validated"), ("reject", "rejected"), ("calculate", "calculated"),
         ("update", "updated"), ("prepare", "prepared"), ("submit", "submitted"),
         ("record", "recorded"), ("verify", "verified"), ("complete", "completed"),
         ("deliver", "delivered"), ("inspect", "inspected"), ("store", "stored"), ("scan", "scanned"),
         ("pack", "packed"), ("ship", "shipped"), ("confirm", "confirmed"), ("draft", "drafted"),
         ("evaluate", "evaluated"), ("receive", "received"), ("cancel", "cancelled"),
         ("publish", "published")]
OBJECTS = ["claim", "invoice", "report", "form", "contract", "receipt", "request", "application",
           "certificate", "budget", "offer", "schedule", "ticket", "quote", "statement", "parcel",
           "sample", "letter", "voucher", "license", "drawing", "order", "account", "refund"]
ATDP_CONDITIONS = ["necessary", "required", "urgent", "possible", "applicable", "needed"]
ATDP_EVENTS = [["the", "deadline", "expires"], ["the", "week", "ends"], ["the", "alarm", "sounds"],
               ["the", "stock", "runs", "out"], ["the", "timer", "elapses"]]
FILLER = [["The", "company", "employs", "many", "people", "."],
          ["This", "procedure", "is", "used", "in", "several", "branches", "."],
          ["Most", "cases", "are", "handled", "within", "one", "day", "."]]


class Builder:
    """Accumulates tokens and annotations for one document."""

    def __init__(self, doc_id):
        self.doc_id = doc_id
        self.tokens = []  # (text, sentence)
        self.sentence = 0
        self.mentions = []  # dict(id, type, indices)
        self.relations = []
        self.entities = []
        self.constraints = []

    def add(self, words, sentence=None):
        start = len(self.tokens)
        for w in words:
            self.tokens.append((w, self.sentence))
        return list(range(start, len(self.tokens)))

    def mention(self, type_name, words):
        indices = self.add(words)
        mid = "m%d" % len(self.mentions)
        self.mentions.append({"id": mid, "type": type_name, "indices": indices})
        return mid

    def end_sentence(self):
        self.sentence += 1

    def relate(self, type_name, source, target):
        self.relations.append((type_name, source, target))

    def sorted_mentions(self):
        return sorted(self.mentions, key=lambda m: m["indices"][0])

    def surfaces_ok(self):
        """Unique surfaces whose first occurrence is the annotated span."""
        lowered = [t.lower() for t, _ in self.tokens]
        seen = set()
        for m in self.mentions:
            words = [lowered[i] for i in m["indices"]]
            key = " ".join(words)
            if key in seen:
                return False
            seen.add(key)
            n = len(words)
            first = next(i for i in range(len(lowered) - n + 1) if lowered[i:i + n] == words)
            if first != m["indices"][0]:
                return False
        return True

    def canonical(self):
        # Mention ids follow token order, matching the PET loader.
        order = self.sorted_mentions()
        rename = {m["id"]: "m%d" % k for k, m in enumerate(order)}
        return {
            "format_version": 1,
            "id": self.doc_id,
            "text": " ".join(t for t, _ in self.tokens),
            "tokens": [{"text": t, "index": i, "sentence_index": s} for i, (t, s) in enumerate(self.tokens)],
            "mentions": [{"id": rename[m["id"]], "mention_type": m["type"], "token_indices": m["indices"]}
                         for m in order],
            "entities": [{"id": "e%d" % k, "mention_ids": [rename[x] for x in e]}
                         for k, e in enumerate(self.entities)],
            "relations": [{"id": "r%d" % k, "relation_type": t, "source_mention_id": rename[s],
                           "target_mention_id": rename[d]} for k, (t, s, d) in enumerate(self.relations)],
            "constraints": [dict(c, id="c%d" % k) for k, c in enumerate(self.constraints)],
        }

    def pet_export(self):
        sentence_ids = [s for _, s in self.tokens]
        word_ids = []
        for i, s in enumerate(sentence_ids):
            word_ids.append(0 if i == 0 or sentence_ids[i - 1] != s else word_ids[-1] + 1)
        tags = ["O"] * len(self.tokens)
        for m in self.mentions:
            for k, i in enumerate(m["indices"]):
                tags[i] = ("B-" if k == 0 else "I-") + m["type"]
        by_id = {m["id"]: m for m in self.mentions}

        def head(mid):
            i = by_id[mid]["indices"][0]
            return sentence_ids[i], word_ids[i]

        rel = {"source-head-sentence-ID": [], "source-head-word-ID": [], "relation-type": [],
               "target-head-sentence-ID": [], "target-head-word-ID": []}
        for t, s, d in self.relations:
            (ss, sw), (ts, tw) = head(s), head(d)
            rel["source-head-sentence-ID"].append(ss)
            rel["source-head-word-ID"].append(sw)
            rel["relation-type"].append(t)
            rel["target-head-sentence-ID"].append(ts)
            rel["target-head-word-ID"].append(tw)
        entities = [[{"sentence-ID": head(x)[0], "word-ID": head(x)[1]} for x in e] for e in self.entities]
        return {"document name": self.doc_id, "tokens": [t for t, _ in self.tokens], "tokens-IDs": word_ids,
                "ner_tags": tags, "sentence-IDs": sentence_ids, "relations": rel, "entities": entities}


def capitalize(words):
    return [words[0][:1].upper() + words[0][1:]] + words[1:]


def claims_document():
    """Hand-written two-lane claims process used as the BPMN fixture."""
    b = Builder("doc-3.3")
    officer = b.mention("Actor", ["A", "claims", "officer"])
    receives = b.mention("Activity", ["receives"])
    form = b.mention("Activity Data", ["the", "claim", "form"])
    b.add(["."])
    b.end_sentence()
    he = b.mention("Actor", ["He"])
    checks = b.mention("Activity", ["checks"])
    docs = b.mention("Activity Data", ["the", "attached", "documents"])
    b.add(["."])
    b.end_sentence()
    gate_if = b.mention("XOR Gateway", ["If"])
    cond = b.mention("Condition Specification", ["anything", "is", "missing"])
    b.add([","])
    claim = b.mention("Activity Data", ["a", "claim"])
    b.add(["is"])
    sent_back = b.mention("Activity", ["sent", "back"])
    b.add(["to"])
    claimant = b.mention("Actor", ["the", "claimant"])
    b.add(["."])
    b.end_sentence()
    gate_else = b.mention("XOR Gateway", ["Otherwise"])
    b.add([","])
    the_officer = b.mention("Actor", ["the", "officer"])
    approves = b.mention("Activity", ["approves"])
    payment = b.mention("Activity Data", ["the", "payment"])
    b.add(["."])
    b.end_sentence()
    b.add(["Finally", ","])
    client = b.mention("Actor", ["the", "client"])
    collects = b.mention("Activity", ["collects"])
    money = b.mention("Activity Data", ["the", "money"])
    b.add(["."])
    b.end_sentence()

    b.relate("Actor Performer", receives, officer)
    b.relate("Uses", receives, form)
    b.relate("Flow", receives, checks)
    b.relate("Actor Performer", checks, he)
    b.relate("Uses", checks, docs)
    b.relate("Flow", checks, gate_if)
    b.relate("Flow", gate_if, cond)
    b.relate("Flow", cond, sent_back)
    b.relate("Uses", sent_back, claim)
    b.relate("Actor Recipient", sent_back, claimant)
    b.relate("Same Gateway", gate_if, gate_else)
    b.relate("Flow", gate_else, approves)
    b.relate("Actor Performer", approves, the_officer)
    b.relate("Uses", approves, payment)
    b.relate("Flow", approves, collects)
    b.relate("Actor Performer", collects, client)
    b.relate("Uses", collects, money)
    b.entities = [[officer, he, the_officer], [claimant, client]]
    assert b.surfaces_ok()
    return b


def pet_document(doc_id, rng):
    while True:
        b = Builder(doc_id)
        actors = rng.sample(ACTOR_NOUNS, 3)
        acts = rng.sample(ACTIVITIES, len(ACTIVITIES))
        data = rng.sample(DATA_NOUNS, len(DATA_NOUNS))
        pronouns = rng.sample(PRONOUNS, len(PRONOUNS))
        actor_mentions = {}  # noun -> list of mention ids
        used_forms = set()

        def actor_ref(noun, sentence_start):
            forms = []
            if noun not in actor_mentions:
                forms = [rng.choice(["the", "a"]), noun]
            else:
                candidates = [["this", noun]] + [[p] for p in pronouns[:1]]
                forms = rng.choice([c for c in candidates if " ".join(c) not in used_forms] or [["that", noun]])
                if len(forms) == 1 and forms[0] in pronouns:
                    pronouns.remove(forms[0])
            used_forms.add(" ".join(forms))
            words = capitalize(forms) if sentence_start else forms
            mid = b.mention("Actor", words)
            actor_mentions.setdefault(noun, []).append(mid)
            return mid

        def data_ref():
            noun = data.pop()
            return b.mention("Activity Data", [rng.choice(["the", "a"])] + noun.split())

        def clause(noun, sentence_start, performer=True):
            actor = actor_ref(noun, sentence_start) if performer else None
            act = b.mention("Activity", acts.pop().split())
            obj = data_ref()
            if actor:
                b.relate("Actor Performer", act, actor)
            b.relate("Uses", act, obj)
            return act

        frontier = []

        def connect(target):
            for src in frontier:
                b.relate("Flow", src, target)

        first = clause(actors[0], True)
        b.add(["."])
        b.end_sentence()
        frontier = [first]
        used_xor = used_and = False
        for _ in range(rng.randint(3, 6)):
            kind = rng.choice(["seq", "seq", "xor", "and", "spec", "recipient", "implicit"])
            if kind == "xor" and not used_xor:
                used_xor = True
                g1 = b.mention("XOR Gateway", ["If"])
                cond = b.mention("Condition Specification", rng.choice(CONDITIONS))
                b.add([","])
                a1 = clause(rng.choice(actors[:2]), False)
                b.add(["."])
                b.end_sentence()
                g2 = b.mention("XOR Gateway", ["Otherwise"])
                b.add([","])
                a2 = clause(rng.choice(actors[:2]), False)
                b.add(["."])
                b.end_sentence()
                connect(g1)
                b.relate("Flow", g1, cond)
                b.relate("Flow", cond, a1)
                b.relate("Same Gateway", g1, g2)
                b.relate("Flow", g2, a2)
                frontier = [a1, a2]
            elif kind == "and" and not used_and:
                used_and = True
                g = b.mention("AND Gateway", ["Meanwhile"])
                b.add([","])
                a = clause(rng.choice(actors), False)
                b.add(["."])
                b.end_sentence()
                connect(g)
                b.relate("Flow", g, a)
                frontier = [a]
            elif kind == "spec":
                a = clause(rng.choice(actors), True)
                spec = b.mention("Further Specification", rng.choice(FURTHER))
                b.relate("Further Specification", a, spec)
                b.add(["."])
                b.end_sentence()
                connect(a)
                frontier = [a]
            elif kind == "recipient":
                sender, receiver = rng.sample(actors, 2)
                a = clause(sender, True)
                b.add(["to"])
                r = actor_ref(receiver, False)
                b.relate("Actor Recipient", a, r)
                b.add(["."])
                b.end_sentence()
                connect(a)
                frontier = [a]
            elif kind == "implicit":
                b.add(["Afterwards", ","])
                a = clause(actors[0], False, performer=False)
                b.add(["."])
                b.end_sentence()
                connect(a)
                frontier = [a]
            else:
                b.add(["Then"])
                a = clause(rng.choice(actors), False)
                b.add(["."])
                b.end_sentence()
                connect(a)
                frontier = [a]
        b.entities = [ids for ids in actor_mentions.values() if len(ids) > 1]
        if b.surfaces_ok():
            return b


def constraint_sentence(b, kind, rng, verbs, objects, entity_mentions):
    """Appends one constraint sentence; returns nothing."""

    def obj(capital=False):
        o = objects.pop()
        words = ["The" if capital else "the", o]
        if entity_mentions:
            b.mention("Entity", words)
        else:
            b.add(words)
        return o

    def action():
        lemma, participle = verbs.pop()
        b.mention("Action", [participle])
        return lemma

    c = {"negated": False}
    if kind in ("init", "end"):
        b.add(["The", "process", "starts" if kind == "init" else "ends", "when" if kind == "init" else "once"])
        o = obj()
        b.add(["is"])
        v = action()
        c.update(constraint_type=kind.capitalize(), first_action="%s %s" % (v, o))
    elif kind == "existence":
        o = obj(True)
        b.add(["must", "be"])
        v = action()
        b.add(["at", "least", "once"])
        c.update(constraint_type="Existence", first_action="%s %s" % (v, o))
    elif kind == "precedence":
        o2 = obj(True)
        b.add(["may", "only", "be"])
        v2 = action()
        b.add(["after"])
        o1 = obj()
        b.add(["has", "been"])
        v1 = action()
        c.update(constraint_type="Precedence", first_action="%s %s" % (v1, o1), second_action="%s %s" % (v2, o2))
    elif kind in ("response", "negated response"):
        b.add(["After"])
        o1 = obj()
        b.add(["is"])
        v1 = action()
        b.add([","])
        o2 = obj()
        b.add(["must", "not", "be"] if kind == "negated response" else ["must", "be"])
        v2 = action()
        c.update(constraint_type="Response", negated=kind == "negated response",
                 first_action="%s %s" % (v1, o1), second_action="%s %s" % (v2, o2))
    elif kind == "succession":
        o1 = obj(True)
        b.add(["is"])
        v1 = action()
        b.add(["and", "afterwards"])
        o2 = obj()
        b.add(["is", "always"])
        v2 = action()
        c.update(constraint_type="Succession", first_action="%s %s" % (v1, o1), second_action="%s %s" % (v2, o2))
    elif kind == "coexistence":
        o1 = obj(True)
        b.add(["is"])
        v1 = action()
        b.add(["whenever"])
        o2 = obj()
        b.add(["is"])
        v2 = action()
        b.add([",", "and", "vice", "versa"])
        c.update(constraint_type="Coexistence", first_action="%s %s" % (v1, o1), second_action="%s %s" % (v2, o2))
    elif kind == "chain succession":
        b.add(["Immediately", "after"])
        o1 = obj()
        b.add(["is"])
        v1 = action()
        b.add([","])
        o2 = obj()
        b.add(["is", "directly"])
        v2 = action()
        c.update(constraint_type="Chain Succession", first_action="%s %s" % (v1, o1),
                 second_action="%s %s" % (v2, o2))
    else:
        raise ValueError(kind)
    b.add(["."])
    b.end_sentence()
    b.constraints.append(c)


def decon_document(doc_id, rng):
    kinds = ["init", "end", "precedence", "response", "negated response", "succession"]
    while True:
        b = Builder(doc_id)
        verbs = rng.sample(VERBS, len(VERBS))
        objects = rng.sample(OBJECTS, len(OBJECTS))
        chosen = ["init"] + rng.sample(kinds[2:], rng.randint(2, 4)) + (["end"] if rng.random() < 0.6 else [])
        for kind in chosen:
            constraint_sentence(b, kind, rng, verbs, objects, entity_mentions=False)
        if b.surfaces_ok():
            return b


def atdp_document(doc_id, rng):
    kinds = ["existence", "precedence", "response", "negated response", "succession", "coexistence",
             "chain succession"]
    while True:
        b = Builder(doc_id)
        verbs = rng.sample(VERBS, len(VERBS))
        objects = rng.sample(OBJECTS, len(OBJECTS))
        plan = ["init"] + rng.sample(kinds, rng.randint(2, 4)) + ["condition", "event", "filler"]
        rng.shuffle(plan)
        if rng.random() < 0.5:
            plan.append("end")
        for kind in plan:
            if kind == "condition":
                b.add(["If"])
                b.mention("Condition", [rng.choice(ATDP_CONDITIONS)])
                b.add([","])
                b.mention("Entity", ["the", objects.pop()])
                b.add(["is"])
                b.mention("Action", [verbs.pop()[1]])
                b.add(["."])
                b.end_sentence()
            elif kind == "event":
                b.add(["When"])
                b.mention("Event", rng.choice(ATDP_EVENTS))
                b.add([","])
                b.mention("Entity", ["the", objects.pop()])
                b.add(["is"])
                b.mention("Action", [verbs.pop()[1]])
                b.add(["."])
                b.end_sentence()
            elif kind == "filler":
                b.add(rng.choice(FILLER))
                b.end_sentence()
            else:
                constraint_sentence(b, kind, rng, verbs, objects, entity_mentions=True)
        if b.surfaces_ok():
            return b


def pet_ids():
    return ["doc-%d.%d" % (g, k) for g in range(1, 10) for k in range(1, 6)]


def write_jsonl(path, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--root", type=Path, default=Path(__file__).resolve().parent.parent)
    ap.add_argument("--seed", type=int, default=20240501)
    args = ap.parse_args()
    rng = random.Random(args.seed)

    fixture = claims_document()
    pet = [fixture if doc_id == "doc-3.3" else pet_document(doc_id, rng) for doc_id in pet_ids()]
    decon = [decon_document("decon-%02d" % k, rng) for k in range(1, 18)]
    atdp = [atdp_document("atdp-%02d" % k, rng) for k in range(1, 19)]

    write_jsonl(args.root / "data/datasets/pet.jsonl", [b.pet_export() for b in pet])
    write_jsonl(args.root / "data/datasets/decon.jsonl", [b.canonical() for b in decon])
    write_jsonl(args.root / "data/datasets/atdp.jsonl", [b.canonical() for b in atdp])
    fixture_path = args.root / "tests/fixtures/bpmn/doc-3.3.json"
    fixture_path.parent.mkdir(parents=True, exist_ok=True)
    fixture_path.write_text(json.dumps(fixture.canonical(), indent=1, sort_keys=True) + "\n", encoding="utf-8")
    print("pet %d, decon %d, atdp %d documents" % (len(pet), len(decon), len(atdp)))


if __name__ == "__main__":
    main()
