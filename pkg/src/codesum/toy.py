"""Synthetic toy corpus: a tiny expression language with template
summaries, used by the bundled pipeline demo and the test suite.

Each generated sample carries code text, a summary derived from the
same template, and a hand-built AST whose leaves line up with the
code's lexemes, so the leaf/token matcher has real work to do without
any external parser.
"""

from __future__ import annotations

import json

import numpy as np

VERBS = ["get", "compute", "find", "count"]
NOUNS = ["total", "size", "value", "index", "length", "offset", "weight", "score"]
OBJECTS = ["item", "file", "node", "user", "page", "task", "key", "line"]
ARGS = ["a", "b", "x", "y", "n", "k"]
BIN_OPS = [("+", "sum"), ("-", "difference"), ("*", "product"), ("/", "quotient")]
CMP_OPS = [(">", "above"), ("<", "below"), ("==", "exactly")]
CONSTS = [0, 1, 2, 5, 10]


def _tree(*spec):
    """Build the node list from (label, children) pairs in id order.

    Leaves are written as plain value strings and get the 'ter_' prefix.
    """
    nodes = []
    for idx, entry in enumerate(spec):
        if isinstance(entry, str):
            nodes.append({"id": idx, "label": "ter_" + entry, "children": []})
        else:
            label, children = entry
            nodes.append({"id": idx, "label": label, "children": list(children)})
    return {"nodes": nodes}


def _function_name(rng, verb, noun, obj):
    if rng.random() < 0.5:
        return "%s_%s_%s" % (verb, noun, obj)
    return verb + noun.capitalize() + obj.capitalize()


def _binary_sample(rng, idx):
    verb = rng.choice(VERBS)
    noun = rng.choice(NOUNS)
    obj = rng.choice(OBJECTS)
    fname = _function_name(rng, verb, noun, obj)
    x, y = rng.choice(ARGS, size=2, replace=False)
    op, op_word = BIN_OPS[rng.integers(len(BIN_OPS))]
    code = "def %s(%s, %s):\n    return %s %s %s" % (fname, x, y, x, op, y)
    summary = "%s %s of %s and %s" % (verb, op_word, x, y)
    ast = _tree(
        ("func_def", [1, 2, 3, 6]),
        "def",
        fname,
        ("params", [4, 5]),
        x,
        y,
        ("return_stmt", [7, 8]),
        "return",
        ("bin_op", [9, 10, 11]),
        x,
        op,
        y,
    )
    return {"id": "toy-%04d" % idx, "code": code, "summary": summary, "ast": ast}


def _compare_sample(rng, idx):
    verb = rng.choice(VERBS)
    noun = rng.choice(NOUNS)
    obj = rng.choice(OBJECTS)
    fname = _function_name(rng, verb, noun, obj)
    x = rng.choice(ARGS)
    op, op_word = CMP_OPS[rng.integers(len(CMP_OPS))]
    const = CONSTS[rng.integers(len(CONSTS))]
    code = "def %s(%s):\n    return %s %s %d" % (fname, x, x, op, const)
    summary = "check %s %s %d" % (x, op_word, const)
    ast = _tree(
        ("func_def", [1, 2, 3, 5]),
        "def",
        fname,
        ("params", [4]),
        x,
        ("return_stmt", [6, 7]),
        "return",
        ("compare", [8, 9, 10]),
        x,
        op,
        str(const),
    )
    return {"id": "toy-%04d" % idx, "code": code, "summary": summary, "ast": ast}


def _call_sample(rng, idx):
    verb = rng.choice(VERBS)
    noun = rng.choice(NOUNS)
    obj = rng.choice(OBJECTS)
    fname = _function_name(rng, verb, noun, obj)
    callee = "%s_%s" % (rng.choice(VERBS), rng.choice(NOUNS))
    x = rng.choice(ARGS)
    code = "def %s(%s):\n    return %s(%s)" % (fname, x, callee, x)
    summary = "apply %s to %s" % (callee.replace("_", " "), x)
    ast = _tree(
        ("func_def", [1, 2, 3, 5]),
        "def",
        fname,
        ("params", [4]),
        x,
        ("return_stmt", [6, 7]),
        "return",
        ("call", [8, 9]),
        callee,
        x,
    )
    return {"id": "toy-%04d" % idx, "code": code, "summary": summary, "ast": ast}


_BUILDERS = [_binary_sample, _compare_sample, _call_sample]


def generate_records(count, seed=7):
    """Deterministically generate `count` toy dataset records."""
    rng = np.random.default_rng(seed)
    return [_BUILDERS[i % len(_BUILDERS)](rng, i) for i in range(count)]


MATCH_DEMO = {
    "id": "demo-0",
    "code": "sum = items.total",
    "summary": "get the total of the items",
    "ast": {
        "nodes": [
            {"id": 0, "label": "assign", "children": [1, 2]},
            {"id": 1, "label": "ter_sum", "children": []},
            {"id": 2, "label": "attribute", "children": [3]},
            {"id": 3, "label": "ter_total", "children": []},
        ]
    },
}


def write_jsonl(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


if __name__ == "__main__":
    import sys

    out = sys.argv[1] if len(sys.argv) > 1 else "toy_corpus.jsonl"
    n = int(sys.argv[2]) if len(sys.argv) > 2 else 200
    write_jsonl(generate_records(n), out)
    print("wrote %d records to %s" % (n, out))
